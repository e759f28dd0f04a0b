#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wavetuner/data.hpp"
#include "wavetuner/model.hpp"
#include "wavetuner/nn.hpp"

namespace wavetuner::train {

struct TrainConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    std::size_t patience = 3;
    std::uint64_t seed = 0;

    void validate() const;
};

// Anything the optimization loop can drive: a parameter store, a prediction
// path and a gradient-accumulating training step.
class Trainable {
public:
    virtual ~Trainable() = default;
    virtual nn::ParamStore& params() = 0;
    virtual Matrix predict(const Matrix& x) const = 0;
    // Forward + backward of weight * smooth_l1(pred, target); accumulates into
    // the gradient buffers and returns the unweighted loss.
    virtual double accumulate_gradients(const Matrix& x, const Matrix& target, double weight) = 0;
};

class WaveTunerTrainable final : public Trainable {
public:
    explicit WaveTunerTrainable(model::WaveTuner& m) : model_(m) {}
    nn::ParamStore& params() override { return model_.params(); }
    Matrix predict(const Matrix& x) const override { return model_.forward(x).forecast; }
    double accumulate_gradients(const Matrix& x, const Matrix& target, double weight) override;

private:
    model::WaveTuner& model_;
};

// Direct affine map from lookback to horizon, shared across channels. The
// in-repo reference any full model has to beat on a learnable task.
class LinearBaseline final : public Trainable {
public:
    LinearBaseline(std::size_t lookback, std::size_t horizon, std::uint64_t seed);
    nn::ParamStore& params() override { return params_; }
    Matrix predict(const Matrix& x) const override;
    double accumulate_gradients(const Matrix& x, const Matrix& target, double weight) override;

private:
    std::size_t lookback_, horizon_;
    nn::ParamStore params_;
};

// Bias-corrected Adam over every entry of a ParamStore.
class AdamState {
public:
    void step(nn::ParamStore& params, const TrainConfig& cfg);
    std::size_t steps_taken() const { return t_; }

private:
    std::vector<std::vector<double>> m_, v_;
    std::size_t t_ = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 0 is the untrained model
    double train_loss = 0;
    double val_loss = 0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    double best_val_loss = 0;
    double test_mse = 0;
    double test_mae = 0;
    double wall_clock_seconds = 0;
};

struct Metrics {
    double mse = 0;
    double mae = 0;
};

// MSE/MAE over every window of a split at stride 1, on the dataset scale.
// Fans out over WAVETUNER_THREADS workers; reduction is by window index, so
// results do not depend on scheduling.
Metrics evaluate(const Trainable& m, const data::Dataset& ds, const std::string& split_name,
                 std::size_t lookback, std::size_t horizon);

TrainReport train(Trainable& m, const data::Dataset& ds, std::size_t lookback,
                  std::size_t horizon, const TrainConfig& cfg);

struct GradCheckReport {
    double max_rel_error = 0;
    std::string worst_param;
};

// Central finite differences of smooth_l1(predict(x), target) against the
// analytic gradients, over every parameter element.
GradCheckReport grad_check(Trainable& m, const Matrix& x, const Matrix& target, double fd_step);

}  // namespace wavetuner::train
