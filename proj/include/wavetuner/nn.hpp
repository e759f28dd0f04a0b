#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wavetuner/matrix.hpp"
#include "wavetuner/rng.hpp"

namespace wavetuner::nn {

// Named parameter arrays with paired gradient buffers. Insertion order is
// stable and defines both the initialization draw order and the
// serialization order, so identical seeds give identical checkpoints.
class ParamStore {
public:
    struct Entry {
        std::string name;
        std::vector<std::size_t> shape;
        std::vector<double> value;
        std::vector<double> grad;

        std::size_t size() const { return value.size(); }
    };

    Entry& add(const std::string& name, std::vector<std::size_t> shape);
    Entry& at(const std::string& name);
    const Entry& at(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    std::vector<Entry>& entries() { return entries_; }
    const std::vector<Entry>& entries() const { return entries_; }

    void zero_grads();
    std::size_t total_parameters() const;

private:
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t> index_;
};

// ---- affine: y = x W + b ----------------------------------------------------

Matrix affine_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b);

// Accumulates into g_w/g_b; returns gradient w.r.t. x.
Matrix affine_backward(const Matrix& x, const Matrix& w, const Matrix& g_out,
                       std::vector<double>& g_w, std::vector<double>& g_b);

// ---- layer normalization ----------------------------------------------------

struct LayerNormCache {
    Matrix xhat;                  // normalized rows before scale/shift
    std::vector<double> inv_std;  // per row, 1/sqrt(var + eps)
    bool ready = false;
};

Matrix layer_norm_forward(const Matrix& x, const std::vector<double>& gamma,
                          const std::vector<double>& beta, double eps,
                          LayerNormCache* cache = nullptr);

Matrix layer_norm_backward(const LayerNormCache& cache, const std::vector<double>& gamma,
                           const Matrix& g_out, std::vector<double>& g_gamma,
                           std::vector<double>& g_beta);

// ---- Chebyshev polynomials and KAN -----------------------------------------

// [T_0(u), ..., T_n(u)] by the three-term recurrence; requires |u| <= 1.
std::vector<double> cheb_polys(double u, int order);

struct ChebKanParams {
    const double* theta;  // D x D x (order+1), row-major [o][j][i]
    std::size_t width;    // D
    int order;            // n
};

struct ChebKanCache {
    Matrix u;  // tanh of the input, rows x D
    bool ready = false;
};

// out[r][o] = sum_j sum_i theta[o][j][i] * T_i(tanh(x[r][j]))
Matrix cheb_kan_forward(const Matrix& x, const ChebKanParams& p, ChebKanCache* cache = nullptr);

Matrix cheb_kan_backward(const ChebKanCache& cache, const ChebKanParams& p, const Matrix& g_out,
                         std::vector<double>& g_theta);

// ---- pooling ---------------------------------------------------------------

// Per-channel mean over the time axis; x is C x L.
std::vector<double> avg_pool_time(const Matrix& x);

// ---- initialization --------------------------------------------------------

void init_xavier_uniform(ParamStore::Entry& e, std::size_t fan_in, std::size_t fan_out, Rng& rng);
void init_normal(ParamStore::Entry& e, double stddev, Rng& rng);
void init_constant(ParamStore::Entry& e, double value);

}  // namespace wavetuner::nn
