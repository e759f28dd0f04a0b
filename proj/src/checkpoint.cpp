#include "wavetuner/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace wavetuner::checkpoint {

using nlohmann::json;

void save(const std::string& path, const model::WaveTuner& m, const Standardization& st) {
    const auto& cfg = m.config();
    json j;
    j["format_version"] = kFormatVersion;
    j["config"] = {{"channels", cfg.channels},
                   {"lookback", cfg.lookback},
                   {"horizon", cfg.horizon},
                   {"levels", cfg.levels},
                   {"wavelet", cfg.wavelet_family},
                   {"embed_dim", cfg.embed_dim},
                   {"router_hidden", cfg.router_hidden},
                   {"base_order", cfg.base_order},
                   {"variant", model::variant_to_string(cfg.variant)},
                   {"seed", cfg.seed},
                   {"revin_eps", cfg.revin_eps},
                   {"norm_eps", cfg.norm_eps}};
    j["standardization"] = {{"channel_names", st.channel_names},
                            {"mean", st.mean},
                            {"std", st.std},
                            {"ratios", st.ratios}};
    json params = json::array();
    for (const auto& e : m.params().entries())
        params.push_back({{"name", e.name}, {"shape", e.shape}, {"values", e.value}});
    j["params"] = std::move(params);

    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");
    out << j.dump(2) << "\n";
}

Loaded load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("checkpoint '" + path + "' is not valid JSON: " + e.what());
    }
    int version = j.value("format_version", -1);
    if (version != kFormatVersion)
        throw DataError("checkpoint format version " + std::to_string(version) +
                        " is not supported (expected " + std::to_string(kFormatVersion) + ")");

    const auto& jc = j.at("config");
    model::ModelConfig cfg;
    cfg.channels = jc.at("channels").get<std::size_t>();
    cfg.lookback = jc.at("lookback").get<std::size_t>();
    cfg.horizon = jc.at("horizon").get<std::size_t>();
    cfg.levels = jc.at("levels").get<int>();
    cfg.wavelet_family = jc.at("wavelet").get<std::string>();
    cfg.embed_dim = jc.at("embed_dim").get<std::size_t>();
    cfg.router_hidden = jc.at("router_hidden").get<std::size_t>();
    cfg.base_order = jc.at("base_order").get<int>();
    cfg.variant = model::variant_from_string(jc.at("variant").get<std::string>());
    cfg.seed = jc.at("seed").get<std::uint64_t>();
    cfg.revin_eps = jc.at("revin_eps").get<double>();
    cfg.norm_eps = jc.at("norm_eps").get<double>();

    Loaded loaded{model::WaveTuner(cfg), {}};
    const auto& js = j.at("standardization");
    loaded.standardization.channel_names = js.at("channel_names").get<std::vector<std::string>>();
    loaded.standardization.mean = js.at("mean").get<std::vector<double>>();
    loaded.standardization.std = js.at("std").get<std::vector<double>>();
    loaded.standardization.ratios = js.at("ratios").get<std::vector<double>>();

    for (const auto& jp : j.at("params")) {
        auto name = jp.at("name").get<std::string>();
        if (!loaded.model.params().contains(name))
            throw DataError("checkpoint parameter '" + name + "' does not exist in this model");
        auto& e = loaded.model.params().at(name);
        auto shape = jp.at("shape").get<std::vector<std::size_t>>();
        if (shape != e.shape)
            throw DataError("checkpoint parameter '" + name + "' has mismatched shape");
        auto values = jp.at("values").get<std::vector<double>>();
        if (values.size() != e.size())
            throw DataError("checkpoint parameter '" + name + "' has wrong element count");
        e.value = std::move(values);
    }
    return loaded;
}

}  // namespace wavetuner::checkpoint
