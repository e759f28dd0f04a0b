#include "wavetuner/revin.hpp"

#include <cmath>

namespace wavetuner::revin {

RevinOutput normalize(const Matrix& x, const std::vector<double>& gamma,
                      const std::vector<double>& beta, double eps) {
    const std::size_t C = x.rows();
    const std::size_t L = x.cols();
    if (gamma.size() != C || beta.size() != C)
        throw ShapeError("revin: affine parameter length does not match " +
                         std::to_string(C) + " channels");
    if (eps <= 0) throw ConfigError("revin eps must be > 0");

    RevinOutput out;
    out.stats.mean.resize(C);
    out.stats.std.resize(C);
    out.stats.xtilde = Matrix(C, L);
    out.normalized = Matrix(C, L);
    for (std::size_t c = 0; c < C; ++c) {
        double mean = 0;
        for (std::size_t t = 0; t < L; ++t) mean += x(c, t);
        mean /= static_cast<double>(L);
        double var = 0;
        for (std::size_t t = 0; t < L; ++t) {
            double d = x(c, t) - mean;
            var += d * d;
        }
        var /= static_cast<double>(L);
        double sd = std::sqrt(var + eps);
        out.stats.mean[c] = mean;
        out.stats.std[c] = sd;
        for (std::size_t t = 0; t < L; ++t) {
            double xt = (x(c, t) - mean) / sd;
            out.stats.xtilde(c, t) = xt;
            out.normalized(c, t) = gamma[c] * xt + beta[c];
        }
    }
    return out;
}

Matrix denormalize(const Matrix& y, const RevinStats& stats, const std::vector<double>& gamma,
                   const std::vector<double>& beta) {
    const std::size_t C = y.rows();
    if (stats.mean.size() != C)
        throw ShapeError("revin denormalize: stats cover " + std::to_string(stats.mean.size()) +
                         " channels, input has " + std::to_string(C));
    for (std::size_t c = 0; c < C; ++c)
        if (std::fabs(gamma[c]) < 1e-12)
            throw NumericError("revin denormalize: gamma[" + std::to_string(c) +
                               "] is too close to zero to invert");
    Matrix out(C, y.cols());
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t t = 0; t < y.cols(); ++t)
            out(c, t) = (y(c, t) - beta[c]) / gamma[c] * stats.std[c] + stats.mean[c];
    return out;
}

}  // namespace wavetuner::revin
