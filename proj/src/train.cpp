#include "wavetuner/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "wavetuner/rng.hpp"

namespace wavetuner::train {

void TrainConfig::validate() const {
    if (learning_rate <= 0) throw ConfigError("learning rate must be > 0");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
        throw ConfigError("Adam betas must lie in [0, 1)");
    if (adam_eps <= 0) throw ConfigError("Adam eps must be > 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
}

double WaveTunerTrainable::accumulate_gradients(const Matrix& x, const Matrix& target,
                                                double weight) {
    model::Activations acts;
    auto out = model_.forward(x, acts);
    double loss = model::smooth_l1(out.forecast, target);
    Matrix g = weight * model::smooth_l1_grad(out.forecast, target);
    model_.backward(acts, g);
    return loss;
}

LinearBaseline::LinearBaseline(std::size_t lookback, std::size_t horizon, std::uint64_t seed)
    : lookback_(lookback), horizon_(horizon) {
    Rng rng(seed);
    nn::init_xavier_uniform(params_.add("linear.W", {lookback, horizon}), lookback, horizon, rng);
    nn::init_constant(params_.add("linear.b", {horizon}), 0.0);
}

Matrix LinearBaseline::predict(const Matrix& x) const {
    const auto& w = params_.at("linear.W");
    Matrix wm(lookback_, horizon_);
    wm.raw() = w.value;
    return nn::affine_forward(x, wm, params_.at("linear.b").value);
}

double LinearBaseline::accumulate_gradients(const Matrix& x, const Matrix& target,
                                            double weight) {
    Matrix pred = predict(x);
    double loss = model::smooth_l1(pred, target);
    Matrix g = weight * model::smooth_l1_grad(pred, target);
    auto& w = params_.at("linear.W");
    Matrix wm(lookback_, horizon_);
    wm.raw() = w.value;
    nn::affine_backward(x, wm, g, w.grad, params_.at("linear.b").grad);
    return loss;
}

void AdamState::step(nn::ParamStore& params, const TrainConfig& cfg) {
    auto& entries = params.entries();
    if (m_.empty()) {
        m_.resize(entries.size());
        v_.resize(entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            m_[i].assign(entries[i].size(), 0.0);
            v_[i].assign(entries[i].size(), 0.0);
        }
    }
    ++t_;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& e = entries[i];
        for (std::size_t k = 0; k < e.size(); ++k) {
            double g = e.grad[k];
            if (!std::isfinite(g))
                throw NumericError("non-finite gradient in parameter '" + e.name + "'");
            m_[i][k] = cfg.beta1 * m_[i][k] + (1.0 - cfg.beta1) * g;
            v_[i][k] = cfg.beta2 * v_[i][k] + (1.0 - cfg.beta2) * g * g;
            double mhat = m_[i][k] / bc1;
            double vhat = v_[i][k] / bc2;
            e.value[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
    }
}

namespace {

std::size_t eval_threads() {
    if (const char* env = std::getenv("WAVETUNER_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    return 1;
}

double split_loss(const Trainable& m, const data::Dataset& ds, const std::string& split_name,
                  std::size_t lookback, std::size_t horizon) {
    auto idx = data::window_indices(ds, split_name, lookback, horizon);
    double total = 0;
    for (const auto& i : idx) {
        auto w = data::extract_window(ds, i, lookback, horizon);
        total += model::smooth_l1(m.predict(w.input), w.target);
    }
    return total / static_cast<double>(idx.size());
}

}  // namespace

Metrics evaluate(const Trainable& m, const data::Dataset& ds, const std::string& split_name,
                 std::size_t lookback, std::size_t horizon) {
    auto idx = data::window_indices(ds, split_name, lookback, horizon);
    const std::size_t n = idx.size();
    std::vector<double> sq(n), ab(n);
    auto worker = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            auto w = data::extract_window(ds, idx[i], lookback, horizon);
            Matrix pred = m.predict(w.input);
            double s = 0, a = 0;
            for (std::size_t k = 0; k < pred.raw().size(); ++k) {
                double e = pred.raw()[k] - w.target.raw()[k];
                s += e * e;
                a += std::fabs(e);
            }
            double inv = 1.0 / static_cast<double>(pred.raw().size());
            sq[i] = s * inv;
            ab[i] = a * inv;
        }
    };
    std::size_t nthreads = std::min(eval_threads(), n);
    if (nthreads <= 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (n + nthreads - 1) / nthreads;
        for (std::size_t t = 0; t < nthreads; ++t)
            pool.emplace_back(worker, t * chunk, std::min(n, (t + 1) * chunk));
        for (auto& th : pool) th.join();
    }
    Metrics out;
    for (std::size_t i = 0; i < n; ++i) {  // index order, deterministic
        out.mse += sq[i];
        out.mae += ab[i];
    }
    out.mse /= static_cast<double>(n);
    out.mae /= static_cast<double>(n);
    return out;
}

TrainReport train(Trainable& m, const data::Dataset& ds, std::size_t lookback,
                  std::size_t horizon, const TrainConfig& cfg) {
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();

    auto train_idx = data::window_indices(ds, "train", lookback, horizon);
    TrainReport report;

    // epoch 0: the untrained model
    report.epochs.push_back({0, split_loss(m, ds, "train", lookback, horizon),
                             split_loss(m, ds, "val", lookback, horizon)});
    report.best_epoch = 0;
    report.best_val_loss = report.epochs[0].val_loss;
    if (!std::isfinite(report.best_val_loss))
        throw NumericError("non-finite validation loss at initialization");

    std::vector<std::vector<double>> best_values;
    auto snapshot = [&] {
        best_values.clear();
        for (const auto& e : m.params().entries()) best_values.push_back(e.value);
    };
    snapshot();

    AdamState adam;
    std::vector<std::size_t> order(train_idx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::size_t since_best = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng = Rng::derived(cfg.seed, epoch);
        rng.shuffle(order);

        double epoch_loss = 0;
        std::size_t seen = 0;
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
            std::size_t bend = std::min(order.size(), b + cfg.batch_size);
            double weight = 1.0 / static_cast<double>(bend - b);
            m.params().zero_grads();
            for (std::size_t i = b; i < bend; ++i) {
                auto w = data::extract_window(ds, train_idx[order[i]], lookback, horizon);
                double loss = m.accumulate_gradients(w.input, w.target, weight);
                if (!std::isfinite(loss))
                    throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                                       ", batch " + std::to_string(b / cfg.batch_size));
                epoch_loss += loss;
                ++seen;
            }
            adam.step(m.params(), cfg);
        }
        epoch_loss /= static_cast<double>(seen);

        double val_loss = split_loss(m, ds, "val", lookback, horizon);
        report.epochs.push_back({epoch, epoch_loss, val_loss});
        if (val_loss < report.best_val_loss) {
            report.best_val_loss = val_loss;
            report.best_epoch = epoch;
            snapshot();
            since_best = 0;
        } else if (++since_best > cfg.patience) {
            break;
        }
    }

    // restore the best-validation parameters
    auto& entries = m.params().entries();
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].value = best_values[i];

    auto test = evaluate(m, ds, "test", lookback, horizon);
    report.test_mse = test.mse;
    report.test_mae = test.mae;
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

GradCheckReport grad_check(Trainable& m, const Matrix& x, const Matrix& target, double fd_step) {
    if (fd_step <= 0) throw ConfigError("finite-difference step must be > 0");
    m.params().zero_grads();
    m.accumulate_gradients(x, target, 1.0);

    GradCheckReport report;
    for (auto& e : m.params().entries()) {
        for (std::size_t k = 0; k < e.size(); ++k) {
            double orig = e.value[k];
            e.value[k] = orig + fd_step;
            double lp = model::smooth_l1(m.predict(x), target);
            e.value[k] = orig - fd_step;
            double lm = model::smooth_l1(m.predict(x), target);
            e.value[k] = orig;
            double fd = (lp - lm) / (2.0 * fd_step);
            double an = e.grad[k];
            double rel = std::fabs(an - fd) / std::max({std::fabs(an), std::fabs(fd), 1e-6});
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = e.name + "[" + std::to_string(k) + "]";
            }
        }
    }
    return report;
}

}  // namespace wavetuner::train
