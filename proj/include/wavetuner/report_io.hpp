#pragma once

#include <string>

#include <json.hpp>

#include "wavetuner/train.hpp"
#include "wavetuner/wavelet.hpp"

namespace wavetuner::report_io {

// Nodes keyed by label ("root" for the empty path), fields entropy_bits,
// energy_fraction, split.
nlohmann::json entropy_tree_to_json(const wavelet::EntropyTree& tree);

// Wall-clock excluded: reports must be byte-identical across identical runs.
nlohmann::json train_report_to_json(const train::TrainReport& report);

std::string losses_csv(const train::TrainReport& report);

}  // namespace wavetuner::report_io
