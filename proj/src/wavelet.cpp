#include "wavetuner/wavelet.hpp"

#include <cmath>
#include <map>

namespace wavetuner::wavelet {

namespace {

// Orthonormal scaling coefficients (sum h = sqrt(2), sum h^2 = 1).
const std::vector<double> kHaarLow = {0.7071067811865476, 0.7071067811865476};

const std::vector<double> kDb2Low = {
    0.48296291314469025, 0.8365163037378079, 0.22414386804185735, -0.12940952255092145};

const std::vector<double> kDb4Low = {
    0.23037781330885523, 0.7148465705525415,   0.6308807679295904,   -0.02798376941698385,
    -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278};

std::vector<double> quadrature_mirror(const std::vector<double>& lo) {
    std::vector<double> hi(lo.size());
    for (std::size_t t = 0; t < lo.size(); ++t) {
        double sign = (t % 2 == 0) ? 1.0 : -1.0;
        hi[t] = sign * lo[lo.size() - 1 - t];
    }
    return hi;
}

}  // namespace

std::vector<std::string> supported_families() { return {"haar", "db2", "db4"}; }

FilterBank make_filter_bank(const std::string& family) {
    const std::vector<double>* lo = nullptr;
    if (family == "haar")
        lo = &kHaarLow;
    else if (family == "db2")
        lo = &kDb2Low;
    else if (family == "db4")
        lo = &kDb4Low;
    else
        throw ConfigError("unknown wavelet family '" + family +
                          "'; supported: haar, db2, db4");
    FilterBank fb;
    fb.family = family;
    fb.analysis_low = *lo;
    fb.analysis_high = quadrature_mirror(*lo);
    fb.synthesis_low = fb.analysis_low;
    fb.synthesis_high = fb.analysis_high;
    return fb;
}

std::size_t coeff_length(std::size_t length, int level) {
    if (level < 0) throw ConfigError("decomposition level must be >= 0");
    std::size_t div = std::size_t{1} << level;
    if (length % div != 0)
        throw ShapeError("length " + std::to_string(length) + " is not divisible by 2^" +
                         std::to_string(level) + " = " + std::to_string(div) +
                         "; nearest valid truncation is " +
                         std::to_string((length / div) * div));
    return length / div;
}

void analysis_step(const Matrix& x, const FilterBank& fb, Matrix& approx, Matrix& detail) {
    const std::size_t C = x.rows();
    const std::size_t L = x.cols();
    if (L % 2 != 0) throw ShapeError("analysis step needs even length, got " + std::to_string(L));
    const std::size_t half = L / 2;
    const auto& lo = fb.analysis_low;
    const auto& hi = fb.analysis_high;
    approx = Matrix(C, half);
    detail = Matrix(C, half);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t k = 0; k < half; ++k) {
            double a = 0.0, d = 0.0;
            for (std::size_t t = 0; t < lo.size(); ++t) {
                double v = x(c, (2 * k + t) % L);
                a += lo[t] * v;
                d += hi[t] * v;
            }
            approx(c, k) = a;
            detail(c, k) = d;
        }
    }
}

Matrix synthesis_step(const Matrix& approx, const Matrix& detail, const FilterBank& fb) {
    Matrix::require_same_shape(approx, detail, "synthesis_step");
    const std::size_t C = approx.rows();
    const std::size_t half = approx.cols();
    const std::size_t L = 2 * half;
    const auto& lo = fb.synthesis_low;
    const auto& hi = fb.synthesis_high;
    Matrix x(C, L);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t k = 0; k < half; ++k) {
            for (std::size_t t = 0; t < lo.size(); ++t) {
                std::size_t pos = (2 * k + t) % L;
                x(c, pos) += lo[t] * approx(c, k) + hi[t] * detail(c, k);
            }
        }
    }
    return x;
}

SubbandSet wpd(const Matrix& x, const FilterBank& fb, int level) {
    if (level < 1) throw ConfigError("wpd level must be >= 1, got " + std::to_string(level));
    if (!x.all_finite()) throw DataError("wpd input contains non-finite values");
    coeff_length(x.cols(), level);  // validates divisibility

    std::vector<Matrix> nodes = {x};
    std::vector<std::string> labels = {""};
    for (int l = 0; l < level; ++l) {
        std::vector<Matrix> next;
        std::vector<std::string> next_labels;
        next.reserve(nodes.size() * 2);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            Matrix a, d;
            analysis_step(nodes[i], fb, a, d);
            next.push_back(std::move(a));
            next_labels.push_back(labels[i] + "a");
            next.push_back(std::move(d));
            next_labels.push_back(labels[i] + "d");
        }
        nodes = std::move(next);
        labels = std::move(next_labels);
    }
    SubbandSet s;
    s.bands = std::move(nodes);
    s.labels = std::move(labels);
    s.level = level;
    s.original_length = x.cols();
    return s;
}

Matrix iwpt(const SubbandSet& s, const FilterBank& fb) {
    const std::size_t expected = std::size_t{1} << s.level;
    if (s.bands.size() != expected)
        throw ShapeError("incomplete subband set: expected " + std::to_string(expected) +
                         " bands, got " + std::to_string(s.bands.size()));
    std::size_t leaf_len = coeff_length(s.original_length, s.level);
    for (const auto& b : s.bands)
        if (b.cols() != leaf_len || b.rows() != s.bands[0].rows())
            throw ShapeError("inconsistent band shape " + b.shape_str() + "; expected " +
                             std::to_string(s.bands[0].rows()) + "x" + std::to_string(leaf_len));

    std::vector<Matrix> nodes = s.bands;
    for (int l = 0; l < s.level; ++l) {
        std::vector<Matrix> merged;
        merged.reserve(nodes.size() / 2);
        for (std::size_t i = 0; i + 1 < nodes.size(); i += 2)
            merged.push_back(synthesis_step(nodes[i], nodes[i + 1], fb));
        nodes = std::move(merged);
    }
    return nodes[0];
}

std::vector<std::size_t> frequency_order(int level) {
    // Gray-code permutation: natural leaf index -> frequency rank.
    const std::size_t n = std::size_t{1} << level;
    std::vector<std::size_t> order(n);
    for (std::size_t rank = 0; rank < n; ++rank) {
        // binary-reflected Gray code of the rank gives the natural index
        std::size_t natural = rank ^ (rank >> 1);
        order[rank] = natural;
    }
    return order;
}

double shannon_entropy(const Matrix& coeffs) {
    double total = sum_squares(coeffs);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double v : coeffs.raw()) {
        double p = v * v / total;
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

const EntropyNode* EntropyTree::find(const std::string& label) const {
    for (const auto& n : nodes)
        if (n.label == label) return &n;
    return nullptr;
}

EntropyTree best_basis_tree(const Matrix& x, const FilterBank& fb, int max_depth) {
    if (max_depth < 0) throw ConfigError("best_basis_tree depth must be >= 0");
    if (max_depth > 0) coeff_length(x.cols(), max_depth);

    // Per-channel entropy summed; energy relative to the root.
    auto node_entropy = [](const Matrix& m) {
        double h = 0.0;
        for (std::size_t c = 0; c < m.rows(); ++c) {
            Matrix row(1, m.cols());
            for (std::size_t t = 0; t < m.cols(); ++t) row(0, t) = m(c, t);
            h += shannon_entropy(row);
        }
        return h;
    };

    double root_energy = sum_squares(x);
    EntropyTree tree;
    tree.depth = max_depth;

    std::vector<Matrix> current = {x};
    std::vector<std::string> labels = {""};
    std::vector<std::size_t> node_index;  // index into tree.nodes per current level

    for (int depth = 0; depth <= max_depth; ++depth) {
        node_index.clear();
        for (std::size_t i = 0; i < current.size(); ++i) {
            EntropyNode n;
            n.label = labels[i];
            n.entropy_bits = node_entropy(current[i]);
            n.energy_fraction = root_energy > 0 ? sum_squares(current[i]) / root_energy : 0.0;
            node_index.push_back(tree.nodes.size());
            tree.nodes.push_back(n);
        }
        if (depth == max_depth) break;

        std::vector<Matrix> next;
        std::vector<std::string> next_labels;
        for (std::size_t i = 0; i < current.size(); ++i) {
            Matrix a, d;
            analysis_step(current[i], fb, a, d);
            double child_sum = node_entropy(a) + node_entropy(d);
            tree.nodes[node_index[i]].split = child_sum < tree.nodes[node_index[i]].entropy_bits;
            next.push_back(std::move(a));
            next_labels.push_back(labels[i] + "a");
            next.push_back(std::move(d));
            next_labels.push_back(labels[i] + "d");
        }
        current = std::move(next);
        labels = std::move(next_labels);
    }
    return tree;
}

}  // namespace wavetuner::wavelet
