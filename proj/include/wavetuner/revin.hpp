#pragma once

#include <vector>

#include "wavetuner/matrix.hpp"

namespace wavetuner::revin {

// Per-instance statistics captured at normalize time. Broadcast over any time
// length at denormalize time, so the horizon may differ from the lookback.
struct RevinStats {
    std::vector<double> mean;  // per channel
    std::vector<double> std;   // sqrt(var + eps), strictly positive
    Matrix xtilde;             // (x - mean) / std, cached for the backward pass
};

struct RevinOutput {
    Matrix normalized;
    RevinStats stats;
};

RevinOutput normalize(const Matrix& x, const std::vector<double>& gamma,
                      const std::vector<double>& beta, double eps);

Matrix denormalize(const Matrix& y, const RevinStats& stats, const std::vector<double>& gamma,
                   const std::vector<double>& beta);

}  // namespace wavetuner::revin
