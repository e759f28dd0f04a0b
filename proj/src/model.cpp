#include "wavetuner/model.hpp"

#include <cmath>

namespace wavetuner::model {

namespace {

Matrix entry_matrix(const nn::ParamStore::Entry& e) {
    if (e.shape.size() != 2)
        throw ShapeError("parameter '" + e.name + "' is not a matrix");
    Matrix m(e.shape[0], e.shape[1]);
    m.raw() = e.value;
    return m;
}

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const ShapeError& e) {
        throw ShapeError(std::string(name) + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(name) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string(name) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string(name) + ": " + e.what());
    }
}

}  // namespace

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "dwt") return Variant::dwt;
    if (s == "no-ada") return Variant::no_ada;
    if (s == "no-we") return Variant::no_we;
    if (s == "mlp") return Variant::mlp;
    if (s == "flok") return Variant::flok;
    if (s == "fhok") return Variant::fhok;
    throw ConfigError("unknown variant '" + s +
                      "'; expected one of full, dwt, no-ada, no-we, mlp, flok, fhok");
}

std::string variant_to_string(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::dwt: return "dwt";
        case Variant::no_ada: return "no-ada";
        case Variant::no_we: return "no-we";
        case Variant::mlp: return "mlp";
        case Variant::flok: return "flok";
        case Variant::fhok: return "fhok";
    }
    throw ConfigError("invalid variant value");
}

std::vector<std::string> all_variant_names() {
    return {"full", "dwt", "no-ada", "no-we", "mlp", "flok", "fhok"};
}

std::size_t ModelConfig::num_bands() const {
    return variant == Variant::dwt ? static_cast<std::size_t>(levels) + 1
                                   : std::size_t{1} << levels;
}

void ModelConfig::validate() const {
    if (channels < 1) throw ConfigError("channels must be >= 1");
    if (levels < 1) throw ConfigError("levels must be >= 1");
    if (embed_dim < 1) throw ConfigError("embed-dim must be >= 1");
    if (router_hidden < 1) throw ConfigError("router hidden width must be >= 1");
    if (base_order < 0) throw ConfigError("base-order must be >= 0");
    std::size_t div = std::size_t{1} << levels;
    if (lookback % div != 0)
        throw ConfigError("2^" + std::to_string(levels) + " = " + std::to_string(div) +
                          " does not divide lookback " + std::to_string(lookback));
    if (horizon % div != 0)
        throw ConfigError("2^" + std::to_string(levels) + " = " + std::to_string(div) +
                          " does not divide horizon " + std::to_string(horizon));
    wavelet::make_filter_bank(wavelet_family);  // validates family
}

double smooth_l1(const Matrix& pred, const Matrix& target) {
    Matrix::require_same_shape(pred, target, "smooth_l1");
    double total = 0;
    for (std::size_t i = 0; i < pred.raw().size(); ++i) {
        double e = pred.raw()[i] - target.raw()[i];
        double a = std::fabs(e);
        total += a < 1.0 ? 0.5 * e * e : a - 0.5;
    }
    return total / static_cast<double>(pred.raw().size());
}

Matrix smooth_l1_grad(const Matrix& pred, const Matrix& target) {
    Matrix::require_same_shape(pred, target, "smooth_l1");
    Matrix g(pred.rows(), pred.cols());
    double scale = 1.0 / static_cast<double>(pred.raw().size());
    for (std::size_t i = 0; i < pred.raw().size(); ++i) {
        double e = pred.raw()[i] - target.raw()[i];
        g.raw()[i] = scale * (std::fabs(e) < 1.0 ? e : (e > 0 ? 1.0 : -1.0));
    }
    return g;
}

WaveTuner::WaveTuner(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    fb_ = wavelet::make_filter_bank(cfg_.wavelet_family);

    const std::size_t d = cfg_.embed_dim;
    const std::size_t leaf_in = cfg_.lookback >> cfg_.levels;
    const std::size_t leaf_out = cfg_.horizon >> cfg_.levels;

    if (cfg_.variant == Variant::dwt) {
        // Mallat pyramid: deepest approximation first, then details from
        // deepest to shallowest, lengths doubling.
        std::string approx_label(static_cast<std::size_t>(cfg_.levels), 'a');
        bands_.push_back({approx_label, leaf_in, leaf_out, cfg_.base_order, 0});
        for (int l = cfg_.levels; l >= 1; --l) {
            std::string label(static_cast<std::size_t>(l - 1), 'a');
            label += 'd';
            std::size_t in_len = cfg_.lookback >> l;
            std::size_t out_len = cfg_.horizon >> l;
            int i = cfg_.levels - l + 1;
            bands_.push_back({label, in_len, out_len, cfg_.base_order + i, 0});
        }
    } else {
        std::size_t k = std::size_t{1} << cfg_.levels;
        for (std::size_t i = 0; i < k; ++i) {
            std::string label;
            for (int bit = cfg_.levels - 1; bit >= 0; --bit)
                label += ((i >> bit) & 1) ? 'd' : 'a';
            int order = cfg_.base_order + static_cast<int>(i);
            if (cfg_.variant == Variant::flok) order = 2;
            if (cfg_.variant == Variant::fhok) order = 5;
            bands_.push_back({label, leaf_in, leaf_out, order, 0});
        }
    }
    for (auto& b : bands_) {
        // MLP width matched to the KAN parameter count d*d*(order+1)
        double target = static_cast<double>(d * d * (b.order + 1));
        double h = (target - static_cast<double>(d)) / static_cast<double>(2 * d + 1);
        b.mlp_hidden = static_cast<std::size_t>(std::max(1.0, std::round(h)));
    }

    register_parameters();
}

void WaveTuner::register_parameters() {
    Rng rng(cfg_.seed);
    const std::size_t C = cfg_.channels;
    const std::size_t d = cfg_.embed_dim;
    const std::size_t H = cfg_.router_hidden;

    nn::init_constant(params_.add("revin.gamma", {C}), 1.0);
    nn::init_constant(params_.add("revin.beta", {C}), 0.0);

    // Identity routing at initialization: last layer zero weights, bias one.
    // Registered for every variant so seeds stay aligned across ablations.
    nn::init_xavier_uniform(params_.add("router.w1", {1, H}), 1, H, rng);
    nn::init_constant(params_.add("router.b1", {H}), 0.0);
    nn::init_constant(params_.add("router.w2", {H, 1}), 0.0);
    nn::init_constant(params_.add("router.b2", {1}), 1.0);

    for (const auto& b : bands_) {
        std::string p = "bands." + b.label + ".";
        if (cfg_.variant == Variant::no_we) {
            nn::init_xavier_uniform(params_.add(p + "embed.W", {b.in_len, d}), b.in_len, d, rng);
            nn::init_constant(params_.add(p + "embed.b", {d}), 0.0);
        } else {
            nn::init_xavier_uniform(params_.add(p + "ffn1.W", {b.in_len, d}), b.in_len, d, rng);
            nn::init_constant(params_.add(p + "ffn1.b", {d}), 0.0);
            nn::init_xavier_uniform(params_.add(p + "ffn2.W", {d, d}), d, d, rng);
            nn::init_constant(params_.add(p + "ffn2.b", {d}), 0.0);
            nn::init_constant(params_.add(p + "norm1.gamma", {d}), 1.0);
            nn::init_constant(params_.add(p + "norm1.beta", {d}), 0.0);
            nn::init_xavier_uniform(params_.add(p + "ffn3.W", {d, d}), d, d, rng);
            nn::init_constant(params_.add(p + "ffn3.b", {d}), 0.0);
            nn::init_constant(params_.add(p + "norm2.gamma", {C}), 1.0);
            nn::init_constant(params_.add(p + "norm2.beta", {C}), 0.0);
        }
        if (cfg_.variant == Variant::mlp) {
            std::size_t h = b.mlp_hidden;
            nn::init_xavier_uniform(params_.add(p + "mlp.W1", {d, h}), d, h, rng);
            nn::init_constant(params_.add(p + "mlp.b1", {h}), 0.0);
            nn::init_xavier_uniform(params_.add(p + "mlp.W2", {h, d}), h, d, rng);
            nn::init_constant(params_.add(p + "mlp.b2", {d}), 0.0);
        } else {
            auto& theta = params_.add(p + "kan.theta",
                                      {d, d, static_cast<std::size_t>(b.order) + 1});
            nn::init_normal(theta, 1.0 / static_cast<double>(d * (b.order + 1)), rng);
        }
        nn::init_xavier_uniform(params_.add(p + "head.W", {d, b.out_len}), d, b.out_len, rng);
        nn::init_constant(params_.add(p + "head.b", {b.out_len}), 0.0);
    }
}

std::vector<Matrix> WaveTuner::decompose(const Matrix& x, std::size_t expect_len) const {
    if (cfg_.variant == Variant::dwt) {
        std::vector<Matrix> details;
        Matrix cur = x;
        for (int l = 0; l < cfg_.levels; ++l) {
            Matrix a, det;
            wavelet::analysis_step(cur, fb_, a, det);
            details.push_back(std::move(det));
            cur = std::move(a);
        }
        std::vector<Matrix> out;
        out.push_back(std::move(cur));
        for (auto it = details.rbegin(); it != details.rend(); ++it) out.push_back(std::move(*it));
        return out;
    }
    auto s = wavelet::wpd(x, fb_, cfg_.levels);
    (void)expect_len;
    return std::move(s.bands);
}

Matrix WaveTuner::reconstruct(const std::vector<Matrix>& bands, std::size_t out_len) const {
    if (cfg_.variant == Variant::dwt) {
        Matrix cur = wavelet::synthesis_step(bands[0], bands[1], fb_);
        for (std::size_t i = 2; i < bands.size(); ++i)
            cur = wavelet::synthesis_step(cur, bands[i], fb_);
        return cur;
    }
    wavelet::SubbandSet s;
    s.bands = bands;
    s.level = cfg_.levels;
    s.original_length = out_len;
    for (const auto& b : bands_) s.labels.push_back(b.label);
    return wavelet::iwpt(s, fb_);
}

Matrix WaveTuner::embed_forward(std::size_t band, const Matrix& weighted, BandActs& a) const {
    std::string p = "bands." + bands_[band].label + ".";
    if (cfg_.variant == Variant::no_we) {
        a.e1 = nn::affine_forward(weighted, entry_matrix(params_.at(p + "embed.W")),
                                  params_.at(p + "embed.b").value);
        a.f = a.e1;
        return a.f;
    }
    a.e1 = nn::affine_forward(weighted, entry_matrix(params_.at(p + "ffn1.W")),
                              params_.at(p + "ffn1.b").value);
    a.res1 = nn::affine_forward(a.e1, entry_matrix(params_.at(p + "ffn2.W")),
                                params_.at(p + "ffn2.b").value) +
             a.e1;
    a.e2 = nn::layer_norm_forward(a.res1, params_.at(p + "norm1.gamma").value,
                                  params_.at(p + "norm1.beta").value, cfg_.norm_eps, &a.norm1);
    a.res2 = nn::affine_forward(a.e2, entry_matrix(params_.at(p + "ffn3.W")),
                                params_.at(p + "ffn3.b").value) +
             a.e2;
    Matrix normed = nn::layer_norm_forward(a.res2.transposed(),
                                           params_.at(p + "norm2.gamma").value,
                                           params_.at(p + "norm2.beta").value, cfg_.norm_eps,
                                           &a.norm2);
    a.f = normed.transposed();
    return a.f;
}

Matrix WaveTuner::embed_backward(std::size_t band, const BandActs& a, const Matrix& g_f) {
    std::string p = "bands." + bands_[band].label + ".";
    if (cfg_.variant == Variant::no_we) {
        auto& w = params_.at(p + "embed.W");
        return nn::affine_backward(a.weighted, entry_matrix(w), g_f, w.grad,
                                   params_.at(p + "embed.b").grad);
    }
    Matrix g_res2t = nn::layer_norm_backward(a.norm2, params_.at(p + "norm2.gamma").value,
                                             g_f.transposed(),
                                             params_.at(p + "norm2.gamma").grad,
                                             params_.at(p + "norm2.beta").grad);
    Matrix g_res2 = g_res2t.transposed();
    auto& w3 = params_.at(p + "ffn3.W");
    Matrix g_e2 = nn::affine_backward(a.e2, entry_matrix(w3), g_res2, w3.grad,
                                      params_.at(p + "ffn3.b").grad) +
                  g_res2;
    Matrix g_res1 = nn::layer_norm_backward(a.norm1, params_.at(p + "norm1.gamma").value, g_e2,
                                            params_.at(p + "norm1.gamma").grad,
                                            params_.at(p + "norm1.beta").grad);
    auto& w2 = params_.at(p + "ffn2.W");
    Matrix g_e1 = nn::affine_backward(a.e1, entry_matrix(w2), g_res1, w2.grad,
                                      params_.at(p + "ffn2.b").grad) +
                  g_res1;
    auto& w1 = params_.at(p + "ffn1.W");
    return nn::affine_backward(a.weighted, entry_matrix(w1), g_e1, w1.grad,
                               params_.at(p + "ffn1.b").grad);
}

Matrix WaveTuner::branch_forward(std::size_t band, const Matrix& f, BandActs& a) const {
    std::string p = "bands." + bands_[band].label + ".";
    if (cfg_.variant == Variant::mlp) {
        Matrix z = nn::affine_forward(f, entry_matrix(params_.at(p + "mlp.W1")),
                                      params_.at(p + "mlp.b1").value);
        a.mlp_hidden_act = Matrix(z.rows(), z.cols());
        for (std::size_t i = 0; i < z.raw().size(); ++i)
            a.mlp_hidden_act.raw()[i] = std::tanh(z.raw()[i]);
        a.fhat = nn::affine_forward(a.mlp_hidden_act, entry_matrix(params_.at(p + "mlp.W2")),
                                    params_.at(p + "mlp.b2").value) +
                 f;
        return a.fhat;
    }
    const auto& theta = params_.at(p + "kan.theta");
    nn::ChebKanParams kp{theta.value.data(), cfg_.embed_dim, bands_[band].order};
    a.fhat = nn::cheb_kan_forward(f, kp, &a.kan) + f;
    return a.fhat;
}

Matrix WaveTuner::branch_backward(std::size_t band, const BandActs& a, const Matrix& g_fhat) {
    std::string p = "bands." + bands_[band].label + ".";
    if (cfg_.variant == Variant::mlp) {
        auto& w2 = params_.at(p + "mlp.W2");
        Matrix g_h = nn::affine_backward(a.mlp_hidden_act, entry_matrix(w2), g_fhat, w2.grad,
                                         params_.at(p + "mlp.b2").grad);
        for (std::size_t i = 0; i < g_h.raw().size(); ++i) {
            double h = a.mlp_hidden_act.raw()[i];
            g_h.raw()[i] *= 1.0 - h * h;
        }
        auto& w1 = params_.at(p + "mlp.W1");
        return nn::affine_backward(a.f, entry_matrix(w1), g_h, w1.grad,
                                   params_.at(p + "mlp.b1").grad) +
               g_fhat;
    }
    auto& theta = params_.at(p + "kan.theta");
    nn::ChebKanParams kp{theta.value.data(), cfg_.embed_dim, bands_[band].order};
    return nn::cheb_kan_backward(a.kan, kp, g_fhat, theta.grad) + g_fhat;
}

ForecastOutput WaveTuner::forward(const Matrix& x) const {
    Activations acts;
    return forward(x, acts);
}

ForecastOutput WaveTuner::forward(const Matrix& x, Activations& acts) const {
    if (x.rows() != cfg_.channels || x.cols() != cfg_.lookback)
        throw ShapeError("model input " + x.shape_str() + " does not match config " +
                         std::to_string(cfg_.channels) + "x" + std::to_string(cfg_.lookback));

    const auto& gamma = params_.at("revin.gamma").value;
    const auto& beta = params_.at("revin.beta").value;
    auto rv = stage("revin", [&] { return revin::normalize(x, gamma, beta, cfg_.revin_eps); });
    acts.stats = std::move(rv.stats);
    acts.xnorm = std::move(rv.normalized);

    auto coeff_bands =
        stage("wpd", [&] { return decompose(acts.xnorm, cfg_.lookback >> cfg_.levels); });

    const bool use_router = cfg_.variant != Variant::no_ada;
    const auto& rw1 = params_.at("router.w1").value;  // 1 x H
    const auto& rb1 = params_.at("router.b1").value;
    const auto& rw2 = params_.at("router.w2").value;  // H x 1
    const double rb2 = params_.at("router.b2").value[0];
    const std::size_t H = cfg_.router_hidden;
    const std::size_t C = cfg_.channels;

    acts.bands.assign(bands_.size(), BandActs{});
    std::vector<Matrix> coeff_preds(bands_.size());
    for (std::size_t i = 0; i < bands_.size(); ++i) {
        BandActs& a = acts.bands[i];
        a.coeffs = std::move(coeff_bands[i]);

        stage("adaptive-weights", [&] {
            a.lambda.assign(C, 1.0);
            if (use_router) {
                a.pooled = nn::avg_pool_time(a.coeffs);
                a.router_hidden = Matrix(C, H);
                for (std::size_t c = 0; c < C; ++c) {
                    double lam = rb2;
                    for (std::size_t h = 0; h < H; ++h) {
                        double z = rw1[h] * a.pooled[c] + rb1[h];
                        double th = std::tanh(z);
                        a.router_hidden(c, h) = th;
                        lam += rw2[h] * th;
                    }
                    a.lambda[c] = lam;
                }
            }
            a.weighted = Matrix(a.coeffs.rows(), a.coeffs.cols());
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t t = 0; t < a.coeffs.cols(); ++t)
                    a.weighted(c, t) = a.lambda[c] * a.coeffs(c, t);
            return 0;
        });

        stage("wave-embedding", [&] { return embed_forward(i, a.weighted, a); });
        stage("mbs", [&] { return branch_forward(i, a.f, a); });
        std::string p = "bands." + bands_[i].label + ".";
        a.coeff_pred = stage("head", [&] {
            return nn::affine_forward(a.fhat, entry_matrix(params_.at(p + "head.W")),
                                      params_.at(p + "head.b").value);
        });
        coeff_preds[i] = a.coeff_pred;
    }

    acts.recon = stage("iwpt", [&] { return reconstruct(coeff_preds, cfg_.horizon); });
    Matrix out = stage("revin-denorm",
                       [&] { return revin::denormalize(acts.recon, acts.stats, gamma, beta); });
    acts.ready = true;

    ForecastOutput fo;
    fo.coeffs = std::move(coeff_preds);
    fo.recon_normalized = acts.recon;
    fo.forecast = std::move(out);
    return fo;
}

void WaveTuner::backward(const Activations& acts, const Matrix& g_output) {
    if (!acts.ready) throw StateError("model backward called before forward");
    const std::size_t C = cfg_.channels;
    auto& gamma_e = params_.at("revin.gamma");
    auto& beta_e = params_.at("revin.beta");
    const auto& gamma = gamma_e.value;
    const auto& beta = beta_e.value;

    // denormalize: out = (recon - beta) / gamma * std + mean
    Matrix g_recon(C, cfg_.horizon);
    for (std::size_t c = 0; c < C; ++c) {
        double sd = acts.stats.std[c];
        for (std::size_t t = 0; t < cfg_.horizon; ++t) {
            double g = g_output(c, t);
            g_recon(c, t) = g * sd / gamma[c];
            beta_e.grad[c] += -g * sd / gamma[c];
            gamma_e.grad[c] += -g * (acts.recon(c, t) - beta[c]) / (gamma[c] * gamma[c]) * sd;
        }
    }

    // adjoint of the orthogonal synthesis is the analysis pass
    std::vector<Matrix> g_coeff_preds = decompose(g_recon, cfg_.horizon >> cfg_.levels);

    const bool use_router = cfg_.variant != Variant::no_ada;
    auto& rw1 = params_.at("router.w1");
    auto& rb1 = params_.at("router.b1");
    auto& rw2 = params_.at("router.w2");
    auto& rb2 = params_.at("router.b2");
    const std::size_t H = cfg_.router_hidden;

    std::vector<Matrix> g_coeffs(bands_.size());
    for (std::size_t i = 0; i < bands_.size(); ++i) {
        const BandActs& a = acts.bands[i];
        std::string p = "bands." + bands_[i].label + ".";
        auto& hw = params_.at(p + "head.W");
        Matrix g_fhat = nn::affine_backward(a.fhat, entry_matrix(hw), g_coeff_preds[i], hw.grad,
                                            params_.at(p + "head.b").grad);
        Matrix g_f = branch_backward(i, a, g_fhat);
        Matrix g_weighted = embed_backward(i, a, g_f);

        const std::size_t Li = a.coeffs.cols();
        Matrix gc(C, Li);
        for (std::size_t c = 0; c < C; ++c) {
            double g_lambda = 0;
            for (std::size_t t = 0; t < Li; ++t) {
                g_lambda += g_weighted(c, t) * a.coeffs(c, t);
                gc(c, t) = a.lambda[c] * g_weighted(c, t);
            }
            if (use_router) {
                rb2.grad[0] += g_lambda;
                double g_pooled = 0;
                for (std::size_t h = 0; h < H; ++h) {
                    double th = a.router_hidden(c, h);
                    rw2.grad[h] += g_lambda * th;
                    double g_z = g_lambda * rw2.value[h] * (1.0 - th * th);
                    rw1.grad[h] += g_z * a.pooled[c];
                    rb1.grad[h] += g_z;
                    g_pooled += rw1.value[h] * g_z;
                }
                double per_step = g_pooled / static_cast<double>(Li);
                for (std::size_t t = 0; t < Li; ++t) gc(c, t) += per_step;
            }
        }
        g_coeffs[i] = std::move(gc);
    }

    // adjoint of the orthogonal analysis is the synthesis pass
    Matrix g_xnorm = reconstruct(g_coeffs, cfg_.lookback);

    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t t = 0; t < cfg_.lookback; ++t) {
            gamma_e.grad[c] += g_xnorm(c, t) * acts.stats.xtilde(c, t);
            beta_e.grad[c] += g_xnorm(c, t);
        }
}

std::vector<std::vector<double>> WaveTuner::router_weights(const Matrix& x) const {
    Activations acts;
    forward(x, acts);
    std::vector<std::vector<double>> out;
    out.reserve(acts.bands.size());
    for (const auto& a : acts.bands) out.push_back(a.lambda);
    return out;
}

}  // namespace wavetuner::model
