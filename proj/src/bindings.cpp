#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wavetuner/checkpoint.hpp"
#include "wavetuner/model.hpp"
#include "wavetuner/report_io.hpp"
#include "wavetuner/revin.hpp"
#include "wavetuner/wavelet.hpp"

namespace py = pybind11;
using namespace wavetuner;

namespace {

Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() == 1) {
        Matrix m(1, static_cast<std::size_t>(arr.shape(0)));
        std::copy(arr.data(), arr.data() + arr.size(), m.data());
        return m;
    }
    if (arr.ndim() != 2) throw ShapeError("expected a 1-D or 2-D array");
    Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + arr.size(), m.data());
    return m;
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::copy(m.data(), m.data() + m.size(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_wavetuner, mod) {
    mod.doc() = "Wavelet-packet subband forecasting core";

    mod.def("supported_families", &wavelet::supported_families);
    mod.def("coeff_length", &wavelet::coeff_length, py::arg("length"), py::arg("level"));
    mod.def("shannon_entropy",
            [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
                return wavelet::shannon_entropy(to_matrix(x));
            });
    mod.def("cheb_polys", &nn::cheb_polys, py::arg("u"), py::arg("order"));

    mod.def(
        "wpd",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           const std::string& family, int level) {
            auto s = wavelet::wpd(to_matrix(x), wavelet::make_filter_bank(family), level);
            py::list bands;
            for (const auto& b : s.bands) bands.append(to_array(b));
            return py::make_tuple(bands, s.labels);
        },
        py::arg("x"), py::arg("family"), py::arg("level"),
        "Full wavelet packet decomposition; returns (bands, labels).");

    mod.def(
        "iwpt",
        [](const py::list& bands, const std::string& family) {
            wavelet::SubbandSet s;
            for (const auto& b : bands)
                s.bands.push_back(to_matrix(
                    b.cast<py::array_t<double, py::array::c_style | py::array::forcecast>>()));
            s.level = 0;
            while ((std::size_t{1} << s.level) < s.bands.size()) ++s.level;
            s.original_length = s.bands.empty() ? 0 : s.bands[0].cols() << s.level;
            for (std::size_t i = 0; i < s.bands.size(); ++i) s.labels.push_back("");
            return to_array(wavelet::iwpt(s, wavelet::make_filter_bank(family)));
        },
        py::arg("bands"), py::arg("family"));

    mod.def(
        "analyze",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           const std::string& family, int depth) {
            auto tree =
                wavelet::best_basis_tree(to_matrix(x), wavelet::make_filter_bank(family), depth);
            return report_io::entropy_tree_to_json(tree).dump();
        },
        py::arg("x"), py::arg("family"), py::arg("depth"),
        "Entropy-guided subband tree as a JSON string.");

    mod.def("smooth_l1",
            [](const py::array_t<double, py::array::c_style | py::array::forcecast>& pred,
               const py::array_t<double, py::array::c_style | py::array::forcecast>& target) {
                return model::smooth_l1(to_matrix(pred), to_matrix(target));
            });

    py::class_<model::ModelConfig>(mod, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("channels", &model::ModelConfig::channels)
        .def_readwrite("lookback", &model::ModelConfig::lookback)
        .def_readwrite("horizon", &model::ModelConfig::horizon)
        .def_readwrite("levels", &model::ModelConfig::levels)
        .def_readwrite("wavelet_family", &model::ModelConfig::wavelet_family)
        .def_readwrite("embed_dim", &model::ModelConfig::embed_dim)
        .def_readwrite("router_hidden", &model::ModelConfig::router_hidden)
        .def_readwrite("base_order", &model::ModelConfig::base_order)
        .def_readwrite("seed", &model::ModelConfig::seed)
        .def_property(
            "variant",
            [](const model::ModelConfig& c) { return model::variant_to_string(c.variant); },
            [](model::ModelConfig& c, const std::string& v) {
                c.variant = model::variant_from_string(v);
            });

    py::class_<model::WaveTuner>(mod, "Model")
        .def(py::init<model::ModelConfig>())
        .def_property_readonly("config", &model::WaveTuner::config)
        .def("forward",
             [](const model::WaveTuner& m,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
                 return to_array(m.forward(to_matrix(x)).forecast);
             })
        .def("router_weights",
             [](const model::WaveTuner& m,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
                 return m.router_weights(to_matrix(x));
             })
        .def("num_parameters",
             [](const model::WaveTuner& m) { return m.params().total_parameters(); });

    mod.def("load_checkpoint", [](const std::string& path) {
        return checkpoint::load(path).model;
    });
}
