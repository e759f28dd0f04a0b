#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "wavetuner/checkpoint.hpp"
#include "wavetuner/rng.hpp"

#include <nlohmann/json.hpp>

using namespace wavetuner;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path(name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

Matrix random_input(const model::ModelConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(cfg.channels, cfg.lookback);
    for (double& v : x.raw()) v = rng.normal();
    return x;
}

checkpoint::Standardization sample_standardization(std::size_t channels) {
    checkpoint::Standardization st;
    for (std::size_t c = 0; c < channels; ++c) {
        st.channel_names.push_back("ch" + std::to_string(c));
        st.mean.push_back(0.5 * static_cast<double>(c));
        st.std.push_back(1.0 + static_cast<double>(c));
    }
    st.ratios = {0.7, 0.1, 0.2};
    return st;
}

}  // namespace

TEST_CASE("save/load reproduces forward outputs bitwise") {
    for (const auto& name : model::all_variant_names()) {
        model::ModelConfig cfg;
        cfg.channels = 3;
        cfg.lookback = 16;
        cfg.horizon = 8;
        cfg.levels = 2;
        cfg.embed_dim = 4;
        cfg.router_hidden = 3;
        cfg.variant = model::variant_from_string(name);
        cfg.seed = 42;
        model::WaveTuner m(cfg);

        // move every parameter off its init so the roundtrip is non-trivial
        Rng rng(99);
        for (auto& e : m.params().entries())
            for (double& v : e.value) v += 0.1 * rng.normal();

        TempFile f("test_ckpt_" + name + ".json");
        checkpoint::save(f.path, m, sample_standardization(cfg.channels));
        auto loaded = checkpoint::load(f.path);

        CHECK(loaded.model.config().channels == cfg.channels);
        CHECK(model::variant_to_string(loaded.model.config().variant) == name);
        CHECK(loaded.standardization.ratios == std::vector<double>{0.7, 0.1, 0.2});
        CHECK(loaded.standardization.mean[1] == 0.5);

        for (std::uint64_t trial = 0; trial < 10; ++trial) {
            Matrix x = random_input(cfg, 1000 + trial);
            auto a = m.forward(x);
            auto b = loaded.model.forward(x);
            CHECK(max_abs_diff(a.forecast, b.forecast) == 0.0);
            CHECK(max_abs_diff(a.recon_normalized, b.recon_normalized) == 0.0);
        }
    }
}

TEST_CASE("saving twice gives identical bytes") {
    model::ModelConfig cfg;
    cfg.channels = 2;
    cfg.lookback = 8;
    cfg.horizon = 8;
    cfg.levels = 1;
    cfg.embed_dim = 4;
    cfg.seed = 7;
    model::WaveTuner m(cfg);
    auto st = sample_standardization(2);

    TempFile a("test_ckpt_a.json"), b("test_ckpt_b.json");
    checkpoint::save(a.path, m, st);
    checkpoint::save(b.path, m, st);
    std::ifstream fa(a.path), fb(b.path);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK_FALSE(sa.str().empty());
}

TEST_CASE("version mismatch is rejected") {
    model::ModelConfig cfg;
    cfg.channels = 1;
    cfg.lookback = 8;
    cfg.horizon = 8;
    cfg.levels = 1;
    cfg.embed_dim = 4;
    model::WaveTuner m(cfg);

    TempFile f("test_ckpt_version.json");
    checkpoint::save(f.path, m, sample_standardization(1));

    nlohmann::json j;
    {
        std::ifstream in(f.path);
        in >> j;
    }
    j["format_version"] = checkpoint::kFormatVersion + 1;
    {
        std::ofstream out(f.path);
        out << j.dump(2);
    }
    CHECK_THROWS_AS(checkpoint::load(f.path), DataError);
}

TEST_CASE("missing or corrupt files are rejected") {
    CHECK_THROWS_AS(checkpoint::load("no_such_checkpoint.json"), DataError);

    TempFile f("test_ckpt_garbage.json");
    {
        std::ofstream out(f.path);
        out << "not json at all {";
    }
    CHECK_THROWS_AS(checkpoint::load(f.path), DataError);
}
