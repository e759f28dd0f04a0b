#pragma once

#include <string>
#include <vector>

#include "wavetuner/matrix.hpp"

namespace wavetuner::data {

struct SplitRange {
    std::size_t begin = 0;  // inclusive
    std::size_t end = 0;    // exclusive
    std::size_t length() const { return end - begin; }
};

struct Dataset {
    Matrix series;  // C x N
    std::vector<std::string> channel_names;
    SplitRange train, val, test;
    bool has_splits = false;
    // Train-range statistics once standardized; empty before.
    std::vector<double> norm_mean, norm_std;

    std::size_t channels() const { return series.rows(); }
    std::size_t length() const { return series.cols(); }
};

// CSV with a header row; an optional leading `date` column is skipped.
Dataset load_csv(const std::string& path);

// Chronological split; val/test windows borrow lookback context from the
// preceding split, so each split only needs to cover its targets.
void split(Dataset& ds, const std::vector<double>& ratios, std::size_t lookback,
           std::size_t horizon);

// Z-score every channel by train-range mean/std.
void standardize(Dataset& ds);

struct Window {
    Matrix input;   // C x L
    Matrix target;  // C x T
};

struct WindowIndex {
    std::size_t start = 0;  // input covers [start, start+L), target [start+L, start+L+T)
};

std::vector<WindowIndex> window_indices(const Dataset& ds, const std::string& split_name,
                                        std::size_t lookback, std::size_t horizon,
                                        std::size_t stride = 1);

Window extract_window(const Dataset& ds, const WindowIndex& idx, std::size_t lookback,
                      std::size_t horizon);

std::vector<Window> make_windows(const Dataset& ds, const std::string& split_name,
                                 std::size_t lookback, std::size_t horizon,
                                 std::size_t stride = 1);

}  // namespace wavetuner::data
