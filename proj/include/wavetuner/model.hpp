#pragma once

#include <string>
#include <vector>

#include "wavetuner/nn.hpp"
#include "wavetuner/revin.hpp"
#include "wavetuner/wavelet.hpp"

namespace wavetuner::model {

enum class Variant { full, dwt, no_ada, no_we, mlp, flok, fhok };

Variant variant_from_string(const std::string& s);
std::string variant_to_string(Variant v);
std::vector<std::string> all_variant_names();

struct ModelConfig {
    std::size_t channels = 7;
    std::size_t lookback = 96;
    std::size_t horizon = 96;
    int levels = 2;
    std::string wavelet_family = "haar";
    std::size_t embed_dim = 32;
    std::size_t router_hidden = 16;
    int base_order = 2;
    Variant variant = Variant::full;
    std::uint64_t seed = 0;
    double revin_eps = 1e-5;
    double norm_eps = 1e-5;

    std::size_t num_bands() const;
    void validate() const;
};

// Geometry of one subband branch: coefficient lengths on the lookback and
// horizon sides, the KAN order for this branch, and the width of the
// parameter-count-matched MLP used by the mlp ablation.
struct BandSpec {
    std::string label;
    std::size_t in_len = 0;
    std::size_t out_len = 0;
    int order = 0;
    std::size_t mlp_hidden = 0;
};

struct ForecastOutput {
    std::vector<Matrix> coeffs;  // predicted per-band coefficients, normalized domain
    Matrix recon_normalized;     // IWPT of coeffs, before denormalization
    Matrix forecast;             // C x T, original (denormalized) scale
};

struct BandActs {
    Matrix coeffs;
    std::vector<double> pooled;
    Matrix router_hidden;  // C x H tanh activations
    std::vector<double> lambda;
    Matrix weighted;
    Matrix e1;
    Matrix res1;
    nn::LayerNormCache norm1;
    Matrix e2;
    Matrix res2;
    nn::LayerNormCache norm2;
    Matrix f;
    nn::ChebKanCache kan;
    Matrix mlp_hidden_act;
    Matrix fhat;
    Matrix coeff_pred;
};

struct Activations {
    revin::RevinStats stats;
    Matrix xnorm;
    std::vector<BandActs> bands;
    Matrix recon;
    bool ready = false;
};

double smooth_l1(const Matrix& pred, const Matrix& target);
Matrix smooth_l1_grad(const Matrix& pred, const Matrix& target);

class WaveTuner {
public:
    explicit WaveTuner(ModelConfig cfg);

    const ModelConfig& config() const { return cfg_; }
    const std::vector<BandSpec>& bands() const { return bands_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    const wavelet::FilterBank& filter_bank() const { return fb_; }

    ForecastOutput forward(const Matrix& x) const;
    ForecastOutput forward(const Matrix& x, Activations& acts) const;

    // Accumulates parameter gradients for d(loss)/d(forecast) = g_output.
    void backward(const Activations& acts, const Matrix& g_output);

    // Router weights per (band, channel) for a given input; the weight-dump
    // surface. Returns all ones for the no-ada variant.
    std::vector<std::vector<double>> router_weights(const Matrix& x) const;

private:
    void register_parameters();
    std::vector<Matrix> decompose(const Matrix& x, std::size_t expect_len) const;
    Matrix reconstruct(const std::vector<Matrix>& bands, std::size_t out_len) const;
    Matrix embed_forward(std::size_t band, const Matrix& weighted, BandActs& a) const;
    Matrix embed_backward(std::size_t band, const BandActs& a, const Matrix& g_f);
    Matrix branch_forward(std::size_t band, const Matrix& f, BandActs& a) const;
    Matrix branch_backward(std::size_t band, const BandActs& a, const Matrix& g_fhat);

    ModelConfig cfg_;
    wavelet::FilterBank fb_;
    std::vector<BandSpec> bands_;
    nn::ParamStore params_;
};

}  // namespace wavetuner::model
