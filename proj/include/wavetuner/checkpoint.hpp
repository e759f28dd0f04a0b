#pragma once

#include <string>
#include <vector>

#include "wavetuner/model.hpp"

namespace wavetuner::checkpoint {

inline constexpr int kFormatVersion = 1;

// Train-split standardization carried alongside the weights so later
// evaluate/forecast calls see data on the scale the model was trained on.
struct Standardization {
    std::vector<std::string> channel_names;
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<double> ratios;  // train/val/test split ratios used at training time
};

void save(const std::string& path, const model::WaveTuner& m, const Standardization& st);

struct Loaded {
    model::WaveTuner model;
    Standardization standardization;
};

Loaded load(const std::string& path);

}  // namespace wavetuner::checkpoint
