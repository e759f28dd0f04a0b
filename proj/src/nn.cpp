#include "wavetuner/nn.hpp"

#include <cmath>
#include <numeric>

namespace wavetuner::nn {

ParamStore::Entry& ParamStore::add(const std::string& name, std::vector<std::size_t> shape) {
    if (index_.count(name))
        throw ConfigError("parameter '" + name + "' registered twice");
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    Entry e;
    e.name = name;
    e.shape = std::move(shape);
    e.value.assign(n, 0.0);
    e.grad.assign(n, 0.0);
    index_[name] = entries_.size();
    entries_.push_back(std::move(e));
    return entries_.back();
}

ParamStore::Entry& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return entries_[it->second];
}

const ParamStore::Entry& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return entries_[it->second];
}

void ParamStore::zero_grads() {
    for (auto& e : entries_) std::fill(e.grad.begin(), e.grad.end(), 0.0);
}

std::size_t ParamStore::total_parameters() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.size();
    return n;
}

// ---- affine ----------------------------------------------------------------

Matrix affine_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    if (x.cols() != w.rows())
        throw ShapeError("affine: input " + x.shape_str() + " incompatible with weights " +
                         w.shape_str());
    if (b.size() != w.cols())
        throw ShapeError("affine: bias length " + std::to_string(b.size()) +
                         " != output width " + std::to_string(w.cols()));
    Matrix y(x.rows(), w.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t k = 0; k < x.cols(); ++k) {
            double xv = x(r, k);
            for (std::size_t c = 0; c < w.cols(); ++c) y(r, c) += xv * w(k, c);
        }
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < w.cols(); ++c) y(r, c) += b[c];
    return y;
}

Matrix affine_backward(const Matrix& x, const Matrix& w, const Matrix& g_out,
                       std::vector<double>& g_w, std::vector<double>& g_b) {
    if (g_out.rows() != x.rows() || g_out.cols() != w.cols())
        throw ShapeError("affine backward: upstream " + g_out.shape_str() + " does not match");
    // dW = x^T g, db = column sums, dx = g W^T
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t k = 0; k < x.cols(); ++k) {
            double xv = x(r, k);
            for (std::size_t c = 0; c < w.cols(); ++c)
                g_w[k * w.cols() + c] += xv * g_out(r, c);
        }
    for (std::size_t r = 0; r < g_out.rows(); ++r)
        for (std::size_t c = 0; c < g_out.cols(); ++c) g_b[c] += g_out(r, c);
    Matrix g_x(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < w.cols(); ++c) {
            double gv = g_out(r, c);
            for (std::size_t k = 0; k < x.cols(); ++k) g_x(r, k) += gv * w(k, c);
        }
    return g_x;
}

// ---- layer norm ------------------------------------------------------------

Matrix layer_norm_forward(const Matrix& x, const std::vector<double>& gamma,
                          const std::vector<double>& beta, double eps, LayerNormCache* cache) {
    const std::size_t n = x.cols();
    if (gamma.size() != n || beta.size() != n)
        throw ShapeError("layer_norm: gamma/beta length " + std::to_string(gamma.size()) + "/" +
                         std::to_string(beta.size()) + " != axis length " + std::to_string(n));
    if (eps <= 0) throw ConfigError("layer_norm eps must be > 0");
    Matrix y(x.rows(), n);
    Matrix xhat(x.rows(), n);
    std::vector<double> inv_std(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double mean = 0;
        for (std::size_t c = 0; c < n; ++c) mean += x(r, c);
        mean /= static_cast<double>(n);
        double var = 0;
        for (std::size_t c = 0; c < n; ++c) {
            double d = x(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[r] = is;
        for (std::size_t c = 0; c < n; ++c) {
            xhat(r, c) = (x(r, c) - mean) * is;
            y(r, c) = gamma[c] * xhat(r, c) + beta[c];
        }
    }
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
        cache->ready = true;
    }
    return y;
}

Matrix layer_norm_backward(const LayerNormCache& cache, const std::vector<double>& gamma,
                           const Matrix& g_out, std::vector<double>& g_gamma,
                           std::vector<double>& g_beta) {
    if (!cache.ready) throw StateError("layer_norm backward called before forward");
    const Matrix& xhat = cache.xhat;
    Matrix::require_same_shape(xhat, g_out, "layer_norm backward");
    const std::size_t n = xhat.cols();
    Matrix g_x(xhat.rows(), n);
    for (std::size_t r = 0; r < xhat.rows(); ++r) {
        double sum_g = 0, sum_gx = 0;
        std::vector<double> gh(n);
        for (std::size_t c = 0; c < n; ++c) {
            g_gamma[c] += g_out(r, c) * xhat(r, c);
            g_beta[c] += g_out(r, c);
            gh[c] = g_out(r, c) * gamma[c];
            sum_g += gh[c];
            sum_gx += gh[c] * xhat(r, c);
        }
        double invn = 1.0 / static_cast<double>(n);
        for (std::size_t c = 0; c < n; ++c)
            g_x(r, c) = cache.inv_std[r] * (gh[c] - invn * sum_g - xhat(r, c) * invn * sum_gx);
    }
    return g_x;
}

// ---- Chebyshev -------------------------------------------------------------

std::vector<double> cheb_polys(double u, int order) {
    if (order < 0) throw ConfigError("Chebyshev order must be >= 0");
    if (std::fabs(u) > 1.0)
        throw NumericError("Chebyshev argument " + std::to_string(u) +
                           " outside [-1, 1]; inputs must be squashed upstream");
    std::vector<double> t(static_cast<std::size_t>(order) + 1);
    t[0] = 1.0;
    if (order >= 1) t[1] = u;
    for (int k = 2; k <= order; ++k) t[k] = 2.0 * u * t[k - 1] - t[k - 2];
    return t;
}

Matrix cheb_kan_forward(const Matrix& x, const ChebKanParams& p, ChebKanCache* cache) {
    const std::size_t D = p.width;
    if (x.cols() != D)
        throw ShapeError("cheb_kan: input width " + std::to_string(x.cols()) +
                         " != parameter width " + std::to_string(D));
    const std::size_t np1 = static_cast<std::size_t>(p.order) + 1;
    Matrix u(x.rows(), D);
    Matrix y(x.rows(), D);
    std::vector<double> basis((p.order + 1));
    for (std::size_t r = 0; r < x.rows(); ++r) {
        // accumulate over inputs j; for each j evaluate the basis once
        for (std::size_t j = 0; j < D; ++j) {
            double uj = std::tanh(x(r, j));
            u(r, j) = uj;
            basis[0] = 1.0;
            if (p.order >= 1) basis[1] = uj;
            for (int k = 2; k <= p.order; ++k) basis[k] = 2.0 * uj * basis[k - 1] - basis[k - 2];
            for (std::size_t o = 0; o < D; ++o) {
                const double* th = p.theta + (o * D + j) * np1;
                double acc = 0;
                for (std::size_t i = 0; i < np1; ++i) acc += th[i] * basis[i];
                y(r, o) += acc;
            }
        }
    }
    if (cache) {
        cache->u = std::move(u);
        cache->ready = true;
    }
    return y;
}

Matrix cheb_kan_backward(const ChebKanCache& cache, const ChebKanParams& p, const Matrix& g_out,
                         std::vector<double>& g_theta) {
    if (!cache.ready) throw StateError("cheb_kan backward called before forward");
    const Matrix& u = cache.u;
    const std::size_t D = p.width;
    if (g_out.rows() != u.rows() || g_out.cols() != D)
        throw ShapeError("cheb_kan backward: upstream " + g_out.shape_str() + " does not match");
    const std::size_t np1 = static_cast<std::size_t>(p.order) + 1;
    Matrix g_x(u.rows(), D);
    std::vector<double> basis(np1), dbasis(np1);
    for (std::size_t r = 0; r < u.rows(); ++r) {
        for (std::size_t j = 0; j < D; ++j) {
            double uj = u(r, j);
            // T_i and T_i' = i * U_{i-1} via the second-kind recurrence
            basis[0] = 1.0;
            dbasis[0] = 0.0;
            if (p.order >= 1) {
                basis[1] = uj;
                dbasis[1] = 1.0;
            }
            double ukm2 = 1.0, ukm1 = 2.0 * uj;  // U_0, U_1
            for (int k = 2; k <= p.order; ++k) {
                basis[k] = 2.0 * uj * basis[k - 1] - basis[k - 2];
                dbasis[k] = static_cast<double>(k) * ukm1;
                double uk = 2.0 * uj * ukm1 - ukm2;
                ukm2 = ukm1;
                ukm1 = uk;
            }
            double dtanh = 1.0 - uj * uj;
            double gx = 0;
            for (std::size_t o = 0; o < D; ++o) {
                double gv = g_out(r, o);
                double* gth = g_theta.data() + (o * D + j) * np1;
                const double* th = p.theta + (o * D + j) * np1;
                double dphi = 0;
                for (std::size_t i = 0; i < np1; ++i) {
                    gth[i] += gv * basis[i];
                    dphi += th[i] * dbasis[i];
                }
                gx += gv * dphi;
            }
            g_x(r, j) = gx * dtanh;
        }
    }
    return g_x;
}

// ---- pooling ---------------------------------------------------------------

std::vector<double> avg_pool_time(const Matrix& x) {
    if (x.cols() == 0) throw ShapeError("avg_pool_time: empty time axis");
    std::vector<double> out(x.rows());
    for (std::size_t c = 0; c < x.rows(); ++c) {
        double s = 0;
        for (std::size_t t = 0; t < x.cols(); ++t) s += x(c, t);
        out[c] = s / static_cast<double>(x.cols());
    }
    return out;
}

// ---- initialization --------------------------------------------------------

void init_xavier_uniform(ParamStore::Entry& e, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : e.value) v = rng.uniform(-bound, bound);
}

void init_normal(ParamStore::Entry& e, double stddev, Rng& rng) {
    for (double& v : e.value) v = rng.normal(0.0, stddev);
}

void init_constant(ParamStore::Entry& e, double value) {
    std::fill(e.value.begin(), e.value.end(), value);
}

}  // namespace wavetuner::nn
