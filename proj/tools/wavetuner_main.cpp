#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavetuner/checkpoint.hpp"
#include "wavetuner/data.hpp"
#include "wavetuner/model.hpp"
#include "wavetuner/report_io.hpp"
#include "wavetuner/train.hpp"
#include "wavetuner/wavelet.hpp"

namespace fs = std::filesystem;
using namespace wavetuner;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct TrainFlags {
    std::string data;
    std::string out = ".";
    std::size_t lookback = 96;
    std::size_t horizon = 96;
    int levels = 2;
    std::string wavelet = "haar";
    std::size_t embed_dim = 32;
    std::size_t router_hidden = 16;
    int base_order = 2;
    std::string variant = "full";
    std::size_t epochs = 30;
    double lr = 1e-3;
    std::size_t batch = 32;
    std::size_t patience = 3;
    std::uint64_t seed = 0;
    std::vector<double> ratios = {0.7, 0.1, 0.2};
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--data", f.data, "input CSV")->required();
    cmd->add_option("--lookback", f.lookback, "lookback window length L");
    cmd->add_option("--horizon", f.horizon, "prediction length T");
    cmd->add_option("--levels", f.levels, "wavelet packet decomposition levels m");
    cmd->add_option("--wavelet", f.wavelet, "wavelet family (haar, db2, db4)");
    cmd->add_option("--embed-dim", f.embed_dim, "wave embedding width d");
    cmd->add_option("--router-hidden", f.router_hidden, "router hidden width");
    cmd->add_option("--base-order", f.base_order, "base Chebyshev order b");
    cmd->add_option("--variant", f.variant, "full, dwt, no-ada, no-we, mlp, flok, fhok");
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--lr", f.lr, "Adam learning rate");
    cmd->add_option("--batch", f.batch, "mini-batch size");
    cmd->add_option("--patience", f.patience, "early-stopping patience");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--ratios", f.ratios, "train/val/test split ratios")->expected(3);
    cmd->add_option("--out", f.out, "output directory");
}

model::ModelConfig make_config(const TrainFlags& f, std::size_t channels) {
    model::ModelConfig cfg;
    cfg.channels = channels;
    cfg.lookback = f.lookback;
    cfg.horizon = f.horizon;
    cfg.levels = f.levels;
    cfg.wavelet_family = f.wavelet;
    cfg.embed_dim = f.embed_dim;
    cfg.router_hidden = f.router_hidden;
    cfg.base_order = f.base_order;
    cfg.variant = model::variant_from_string(f.variant);
    cfg.seed = f.seed;
    return cfg;
}

train::TrainConfig make_train_config(const TrainFlags& f) {
    train::TrainConfig tc;
    tc.learning_rate = f.lr;
    tc.epochs = f.epochs;
    tc.batch_size = f.batch;
    tc.patience = f.patience;
    tc.seed = f.seed;
    return tc;
}

data::Dataset load_and_prepare(const TrainFlags& f) {
    auto ds = data::load_csv(f.data);
    data::split(ds, f.ratios, f.lookback, f.horizon);
    data::standardize(ds);
    return ds;
}

void apply_standardization(data::Dataset& ds, const checkpoint::Standardization& st) {
    if (ds.channels() != st.mean.size())
        throw DataError("checkpoint was trained on " + std::to_string(st.mean.size()) +
                        " channels but data has " + std::to_string(ds.channels()));
    for (std::size_t c = 0; c < ds.channels(); ++c)
        for (std::size_t t = 0; t < ds.length(); ++t)
            ds.series(c, t) = (ds.series(c, t) - st.mean[c]) / st.std[c];
    ds.norm_mean = st.mean;
    ds.norm_std = st.std;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
}

int cmd_train(const TrainFlags& f) {
    auto ds = load_and_prepare(f);
    model::WaveTuner m(make_config(f, ds.channels()));
    train::WaveTunerTrainable trainable(m);
    auto report = train::train(trainable, ds, f.lookback, f.horizon, make_train_config(f));

    fs::create_directories(f.out);
    checkpoint::Standardization st{ds.channel_names, ds.norm_mean, ds.norm_std, f.ratios};
    checkpoint::save((fs::path(f.out) / "model.json").string(), m, st);
    write_file(fs::path(f.out) / "report.json",
               report_io::train_report_to_json(report).dump(2) + "\n");
    write_file(fs::path(f.out) / "losses.csv", report_io::losses_csv(report));

    std::cout << "best epoch " << report.best_epoch << ", val loss " << report.best_val_loss
              << ", test mse " << report.test_mse << ", test mae " << report.test_mae << " ("
              << report.wall_clock_seconds << " s)\n";
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& split_name) {
    auto loaded = checkpoint::load(model_path);
    auto ds = data::load_csv(data_path);
    const auto& cfg = loaded.model.config();
    data::split(ds, loaded.standardization.ratios, cfg.lookback, cfg.horizon);
    apply_standardization(ds, loaded.standardization);
    train::WaveTunerTrainable trainable(loaded.model);
    auto metrics = train::evaluate(trainable, ds, split_name, cfg.lookback, cfg.horizon);
    std::cout << json({{"mse", metrics.mse}, {"mae", metrics.mae}}).dump() << "\n";
    return 0;
}

int cmd_forecast(const std::string& model_path, const std::string& data_path,
                 const std::string& output_path, const std::string& weights_path) {
    auto loaded = checkpoint::load(model_path);
    const auto& cfg = loaded.model.config();
    const auto& st = loaded.standardization;
    auto ds = data::load_csv(data_path);
    if (ds.length() < cfg.lookback)
        throw DataError("need at least " + std::to_string(cfg.lookback) +
                        " trailing rows of history, got " + std::to_string(ds.length()));
    apply_standardization(ds, st);

    Matrix x(ds.channels(), cfg.lookback);
    std::size_t offset = ds.length() - cfg.lookback;
    for (std::size_t c = 0; c < ds.channels(); ++c)
        for (std::size_t t = 0; t < cfg.lookback; ++t) x(c, t) = ds.series(c, offset + t);

    auto out = loaded.model.forward(x);
    if (!out.forecast.all_finite()) throw NumericError("forecast contains non-finite values");

    // forecast is produced on the standardized scale; undo it for the CSV
    std::ostringstream csv;
    csv.precision(17);
    for (std::size_t c = 0; c < st.channel_names.size(); ++c)
        csv << (c ? "," : "") << st.channel_names[c];
    csv << "\n";
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
        for (std::size_t c = 0; c < ds.channels(); ++c)
            csv << (c ? "," : "") << out.forecast(c, t) * st.std[c] + st.mean[c];
        csv << "\n";
    }
    write_file(output_path, csv.str());

    if (!weights_path.empty()) {
        auto weights = loaded.model.router_weights(x);
        std::ostringstream wcsv;
        wcsv.precision(17);
        wcsv << "band,channel,weight\n";
        const auto& bands = loaded.model.bands();
        for (std::size_t i = 0; i < weights.size(); ++i)
            for (std::size_t c = 0; c < weights[i].size(); ++c)
                wcsv << bands[i].label << "," << c << "," << weights[i][c] << "\n";
        write_file(weights_path, wcsv.str());
    }
    return 0;
}

int cmd_analyze(const std::string& data_path, int levels, const std::string& family,
                bool truncate) {
    auto ds = data::load_csv(data_path);
    auto fb = wavelet::make_filter_bank(family);
    std::size_t n = ds.length();
    std::size_t div = std::size_t{1} << levels;
    if (n % div != 0) {
        if (!truncate)
            throw ConfigError("series length " + std::to_string(n) + " is not divisible by 2^" +
                              std::to_string(levels) + "; pass --truncate to use the first " +
                              std::to_string((n / div) * div) + " rows");
        n = (n / div) * div;
    }
    Matrix series(ds.channels(), n);
    for (std::size_t c = 0; c < ds.channels(); ++c)
        for (std::size_t t = 0; t < n; ++t) series(c, t) = ds.series(c, t);

    json channels = json::object();
    for (std::size_t c = 0; c < ds.channels(); ++c) {
        Matrix row(1, n);
        for (std::size_t t = 0; t < n; ++t) row(0, t) = series(c, t);
        channels[ds.channel_names[c]] =
            report_io::entropy_tree_to_json(wavelet::best_basis_tree(row, fb, levels));
    }
    json j = {{"aggregate",
               report_io::entropy_tree_to_json(wavelet::best_basis_tree(series, fb, levels))},
              {"channels", channels}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_ablate(const TrainFlags& f) {
    struct Row {
        std::string variant;
        bool ok = false;
        double mse = 0, mae = 0;
        std::string error;
    };
    std::vector<Row> rows;
    for (const auto& name : model::all_variant_names()) {
        Row row;
        row.variant = name;
        try {
            TrainFlags vf = f;
            vf.variant = name;
            auto ds = load_and_prepare(vf);
            model::WaveTuner m(make_config(vf, ds.channels()));
            train::WaveTunerTrainable trainable(m);
            auto report = train::train(trainable, ds, vf.lookback, vf.horizon,
                                       make_train_config(vf));
            row.ok = true;
            row.mse = report.test_mse;
            row.mae = report.test_mae;
        } catch (const std::exception& e) {
            row.error = e.what();
            std::cerr << "variant " << name << " failed: " << e.what() << "\n";
        }
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.ok != b.ok) return a.ok;  // failed rows last
        return a.mse < b.mse;
    });
    std::ostringstream csv;
    csv.precision(17);
    csv << "variant,mse,mae\n";
    for (const auto& r : rows) {
        if (r.ok)
            csv << r.variant << "," << r.mse << "," << r.mae << "\n";
        else
            csv << r.variant << ",failed,failed\n";
    }
    fs::create_directories(f.out);
    write_file(fs::path(f.out) / "ablation.csv", csv.str());
    std::cout << csv.str();
    return 0;
}

int cmd_gradcheck(const std::string& variant, double fd_step) {
    model::ModelConfig cfg;
    cfg.channels = 2;
    cfg.lookback = 8;
    cfg.horizon = 8;
    cfg.levels = 1;
    cfg.embed_dim = 4;
    cfg.router_hidden = 4;
    cfg.base_order = 2;
    cfg.variant = model::variant_from_string(variant);
    cfg.seed = 7;
    model::WaveTuner m(cfg);
    train::WaveTunerTrainable trainable(m);

    Rng rng(42);
    Matrix x(cfg.channels, cfg.lookback), target(cfg.channels, cfg.horizon);
    for (double& v : x.raw()) v = rng.normal();
    for (double& v : target.raw()) v = rng.normal();

    auto report = train::grad_check(trainable, x, target, fd_step);
    std::cout << "max relative error " << report.max_rel_error << " at " << report.worst_param
              << " (" << m.params().total_parameters() << " parameters)\n";
    return report.max_rel_error < 1e-4 ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"WaveTuner: wavelet-packet subband forecasting"};
    app.require_subcommand(1);

    TrainFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
    add_train_flags(train_cmd, train_flags);

    std::string model_path, data_path, split_name = "test", output_path, weights_path;
    auto* eval_cmd = app.add_subcommand("evaluate", "MSE/MAE of a checkpoint on a split");
    eval_cmd->add_option("--model", model_path, "checkpoint JSON")->required();
    eval_cmd->add_option("--data", data_path, "input CSV")->required();
    eval_cmd->add_option("--split", split_name, "train, val or test");

    auto* fc_cmd = app.add_subcommand("forecast", "forecast beyond the end of a CSV");
    fc_cmd->add_option("--model", model_path, "checkpoint JSON")->required();
    fc_cmd->add_option("--data", data_path, "input CSV")->required();
    fc_cmd->add_option("--output", output_path, "forecast CSV path")->required();
    fc_cmd->add_option("--dump-weights", weights_path, "also write per-band router weights CSV");

    int levels = 2;
    std::string family = "haar";
    bool truncate = false;
    auto* an_cmd = app.add_subcommand("analyze", "entropy-guided subband tree as JSON");
    an_cmd->add_option("--data", data_path, "input CSV")->required();
    an_cmd->add_option("--levels", levels, "tree depth");
    an_cmd->add_option("--wavelet", family, "wavelet family");
    an_cmd->add_flag("--truncate", truncate, "drop trailing rows to satisfy divisibility");

    TrainFlags ablate_flags;
    auto* ab_cmd = app.add_subcommand("ablate", "train and compare all variants");
    add_train_flags(ab_cmd, ablate_flags);

    std::string gc_variant = "full";
    double fd_step = 1e-5;
    auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
    gc_cmd->add_option("--variant", gc_variant, "model variant");
    gc_cmd->add_option("--fd-step", fd_step, "central difference step");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(train_flags);
        if (eval_cmd->parsed()) return cmd_evaluate(model_path, data_path, split_name);
        if (fc_cmd->parsed()) return cmd_forecast(model_path, data_path, output_path, weights_path);
        if (an_cmd->parsed()) return cmd_analyze(data_path, levels, family, truncate);
        if (ab_cmd->parsed()) return cmd_ablate(ablate_flags);
        if (gc_cmd->parsed()) return cmd_gradcheck(gc_variant, fd_step);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
