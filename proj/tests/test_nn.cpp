#include <doctest.h>

#include <cmath>
#include <functional>

#include "wavetuner/nn.hpp"
#include "wavetuner/rng.hpp"

using namespace wavetuner;
using namespace wavetuner::nn;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.raw()) v = rng.normal();
    return m;
}

// central finite differences of a scalar function of one flat parameter array
double fd_max_rel_error(std::vector<double>& values, const std::vector<double>& analytic,
                        const std::function<double()>& loss, double step = 1e-6) {
    double worst = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double orig = values[i];
        values[i] = orig + step;
        double lp = loss();
        values[i] = orig - step;
        double lm = loss();
        values[i] = orig;
        double fd = (lp - lm) / (2 * step);
        double rel = std::fabs(fd - analytic[i]) /
                     std::max({std::fabs(fd), std::fabs(analytic[i]), 1e-6});
        worst = std::max(worst, rel);
    }
    return worst;
}

double half_sq_sum(const Matrix& m) {
    double s = 0;
    for (double v : m.raw()) s += 0.5 * v * v;
    return s;
}

}  // namespace

TEST_CASE("param store") {
    ParamStore ps;
    auto& e = ps.add("a.w", {2, 3});
    CHECK(e.size() == 6);
    CHECK_THROWS_AS(ps.add("a.w", {1}), ConfigError);
    CHECK_THROWS_AS(ps.at("missing"), ConfigError);
    e.grad[0] = 5;
    ps.zero_grads();
    CHECK(ps.at("a.w").grad[0] == 0.0);
    ps.add("b", {4});
    CHECK(ps.total_parameters() == 10);
}

TEST_CASE("affine forward") {
    Matrix x = Matrix::from_rows({{1, 2}});
    Matrix id = Matrix::from_rows({{1, 0}, {0, 1}});
    auto y = affine_forward(x, id, {0, 0});
    CHECK(y(0, 0) == 1.0);
    CHECK(y(0, 1) == 2.0);

    Matrix sum_w = Matrix::from_rows({{1}, {1}});
    CHECK(affine_forward(x, sum_w, {3})(0, 0) == 6.0);

    Rng rng(1);
    Matrix a = random_matrix(3, 4, rng);
    Matrix w = random_matrix(4, 2, rng);
    std::vector<double> b = {rng.normal(), rng.normal()};
    auto out = affine_forward(a, w, b);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 2; ++c) {
            double acc = b[c];
            for (std::size_t k = 0; k < 4; ++k) acc += a(r, k) * w(k, c);
            CHECK(out(r, c) == doctest::Approx(acc).epsilon(1e-12));
        }

    CHECK_THROWS_AS(affine_forward(x, w, b), ShapeError);
}

TEST_CASE("affine backward vs finite differences") {
    Rng rng(2);
    Matrix x = random_matrix(3, 4, rng);
    Matrix w = random_matrix(4, 2, rng);
    std::vector<double> b = {0.1, -0.2};

    auto loss = [&] { return half_sq_sum(affine_forward(x, w, b)); };
    Matrix y = affine_forward(x, w, b);
    std::vector<double> gw(8, 0.0), gb(2, 0.0);
    Matrix gx = affine_backward(x, w, y, gw, gb);

    CHECK(fd_max_rel_error(w.raw(), gw, loss) < 1e-6);
    CHECK(fd_max_rel_error(b, gb, loss) < 1e-6);
    CHECK(fd_max_rel_error(x.raw(), gx.raw(), loss) < 1e-6);
}

TEST_CASE("gradient accumulation is additive and zero upstream is a no-op") {
    Rng rng(3);
    Matrix x = random_matrix(2, 3, rng);
    Matrix w = random_matrix(3, 2, rng);
    std::vector<double> b = {0, 0};
    Matrix g = random_matrix(2, 2, rng);

    std::vector<double> gw1(6, 0.0), gb1(2, 0.0);
    affine_backward(x, w, g, gw1, gb1);
    std::vector<double> gw2(6, 0.0), gb2(2, 0.0);
    affine_backward(x, w, g, gw2, gb2);
    affine_backward(x, w, g, gw2, gb2);
    for (std::size_t i = 0; i < gw1.size(); ++i)
        CHECK(gw2[i] == doctest::Approx(2.0 * gw1[i]).epsilon(1e-12));

    std::vector<double> gw3(6, 0.0), gb3(2, 0.0);
    affine_backward(x, w, Matrix(2, 2), gw3, gb3);
    for (double v : gw3) CHECK(v == 0.0);
    for (double v : gb3) CHECK(v == 0.0);
}

TEST_CASE("layer norm forward") {
    std::vector<double> g1 = {1, 1, 1}, b0 = {0, 0, 0};
    auto y = layer_norm_forward(Matrix::from_rows({{1, 1, 1}}), g1, b0, 1e-5);
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::fabs(y(0, c)) < 1e-12);

    std::vector<double> g2 = {1, 1}, b2 = {0, 0};
    auto y2 = layer_norm_forward(Matrix::from_rows({{-1, 1}}), g2, b2, 1e-12);
    CHECK(y2(0, 0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(y2(0, 1) == doctest::Approx(1.0).epsilon(1e-6));

    // scalar oracle
    Matrix x = Matrix::from_rows({{1, 2, 3}});
    double eps = 1e-5;
    auto y3 = layer_norm_forward(x, g1, b0, eps);
    double mean = 2.0, var = 2.0 / 3.0;
    for (std::size_t c = 0; c < 3; ++c)
        CHECK(y3(0, c) ==
              doctest::Approx((x(0, c) - mean) / std::sqrt(var + eps)).epsilon(1e-12));

    // row statistics invariants
    Rng rng(4);
    Matrix r = random_matrix(5, 8, rng);
    std::vector<double> g8(8, 1.0), bt8(8, 0.0);
    auto yr = layer_norm_forward(r, g8, bt8, 1e-8);
    for (std::size_t row = 0; row < 5; ++row) {
        double m = 0, v = 0;
        for (std::size_t c = 0; c < 8; ++c) m += yr(row, c);
        m /= 8;
        CHECK(std::fabs(m) < 1e-12);
        for (std::size_t c = 0; c < 8; ++c) v += (yr(row, c) - m) * (yr(row, c) - m);
        v /= 8;
        CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
    }

    CHECK_THROWS_AS(layer_norm_forward(x, g2, b2, 1e-5), ShapeError);
}

TEST_CASE("layer norm backward vs finite differences") {
    Rng rng(5);
    Matrix x = random_matrix(3, 6, rng);
    std::vector<double> gamma(6), beta(6);
    for (auto& v : gamma) v = rng.uniform(0.5, 1.5);
    for (auto& v : beta) v = rng.normal();
    double eps = 1e-5;

    auto loss = [&] { return half_sq_sum(layer_norm_forward(x, gamma, beta, eps)); };
    LayerNormCache cache;
    Matrix y = layer_norm_forward(x, gamma, beta, eps, &cache);
    std::vector<double> gg(6, 0.0), gb(6, 0.0);
    Matrix gx = layer_norm_backward(cache, gamma, y, gg, gb);

    CHECK(fd_max_rel_error(gamma, gg, loss) < 1e-5);
    CHECK(fd_max_rel_error(beta, gb, loss) < 1e-5);
    CHECK(fd_max_rel_error(x.raw(), gx.raw(), loss) < 1e-5);

    LayerNormCache empty;
    CHECK_THROWS_AS(layer_norm_backward(empty, gamma, y, gg, gb), StateError);
}

TEST_CASE("cheb_polys") {
    auto t = cheb_polys(0.5, 2);
    CHECK(t[0] == 1.0);
    CHECK(t[1] == 0.5);
    CHECK(t[2] == doctest::Approx(-0.5).epsilon(1e-15));

    for (int n = 0; n <= 4; ++n)
        for (double v : cheb_polys(1.0, n)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    auto t5 = cheb_polys(0.3, 5);
    for (int k = 0; k <= 5; ++k)
        CHECK(t5[k] == doctest::Approx(std::cos(k * std::acos(0.3))).epsilon(1e-12));

    // recurrence vs trigonometric oracle across the domain
    for (int i = 0; i <= 1000; ++i) {
        double u = -1.0 + 2.0 * i / 1000.0;
        auto tt = cheb_polys(u, 8);
        for (int k = 0; k <= 8; ++k)
            CHECK(std::fabs(tt[k] - std::cos(k * std::acos(u))) < 1e-10);
    }

    CHECK_THROWS_AS(cheb_polys(1.5, 2), NumericError);
}

TEST_CASE("cheb_kan forward") {
    {
        std::vector<double> theta = {0, 1, 0};  // D=1, orders 0..2
        ChebKanParams p{theta.data(), 1, 2};
        CHECK(cheb_kan_forward(Matrix(1, 1), p)(0, 0) == 0.0);
    }
    {
        std::vector<double> theta = {1, 0, 2};
        ChebKanParams p{theta.data(), 1, 2};
        Matrix x(1, 1);
        x(0, 0) = std::atanh(0.5);
        // 1 + 2*T_2(0.5) = 1 + 2*(-0.5) = 0
        CHECK(cheb_kan_forward(x, p)(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    }
    {
        std::vector<double> theta(2 * 2 * 4, 0.0);
        ChebKanParams p{theta.data(), 2, 3};
        Rng rng(6);
        auto y = cheb_kan_forward(random_matrix(3, 2, rng), p);
        for (double v : y.raw()) CHECK(v == 0.0);
    }
}

TEST_CASE("cheb_kan order 0 is a constant map") {
    Rng rng(7);
    std::vector<double> theta(3 * 3);
    for (auto& v : theta) v = rng.normal();
    ChebKanParams p{theta.data(), 3, 0};
    auto y1 = cheb_kan_forward(random_matrix(2, 3, rng), p);
    auto y2 = cheb_kan_forward(random_matrix(2, 3, rng), p);
    CHECK(max_abs_diff(y1, y2) == 0.0);
}

TEST_CASE("cheb_kan against the direct double-sum oracle") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t d = 1 + rng.next_u64() % 5;
        int n = static_cast<int>(rng.next_u64() % 5);
        std::vector<double> theta(d * d * (n + 1));
        for (auto& v : theta) v = rng.normal();
        Matrix x = random_matrix(2, d, rng);
        ChebKanParams p{theta.data(), d, n};
        auto y = cheb_kan_forward(x, p);
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t o = 0; o < d; ++o) {
                double acc = 0;
                for (std::size_t j = 0; j < d; ++j) {
                    double u = std::tanh(x(r, j));
                    for (int i = 0; i <= n; ++i)
                        acc += theta[(o * d + j) * (n + 1) + i] * std::cos(i * std::acos(u));
                }
                CHECK(y(r, o) == doctest::Approx(acc).epsilon(1e-12));
            }
    }
}

TEST_CASE("cheb_kan backward vs finite differences") {
    Rng rng(9);
    std::size_t d = 4;
    int n = 3;
    std::vector<double> theta(d * d * (n + 1));
    for (auto& v : theta) v = rng.normal(0.0, 0.3);
    Matrix x = random_matrix(3, d, rng);
    ChebKanParams p{theta.data(), d, n};

    auto loss = [&] { return half_sq_sum(cheb_kan_forward(x, p)); };
    ChebKanCache cache;
    Matrix y = cheb_kan_forward(x, p, &cache);
    std::vector<double> gt(theta.size(), 0.0);
    Matrix gx = cheb_kan_backward(cache, p, y, gt);

    CHECK(fd_max_rel_error(theta, gt, loss) < 1e-4);
    CHECK(fd_max_rel_error(x.raw(), gx.raw(), loss) < 1e-4);

    ChebKanCache empty;
    CHECK_THROWS_AS(cheb_kan_backward(empty, p, y, gt), StateError);
}

TEST_CASE("avg_pool_time") {
    auto v = avg_pool_time(Matrix::from_rows({{1, 3}, {2, 2}}));
    CHECK(v[0] == 2.0);
    CHECK(v[1] == 2.0);

    auto single = avg_pool_time(Matrix::from_rows({{4.5}, {-1}}));
    CHECK(single[0] == 4.5);
    CHECK(single[1] == -1.0);

    Rng rng(10);
    Matrix r = random_matrix(7, 24, rng);
    auto pooled = avg_pool_time(r);
    for (std::size_t c = 0; c < 7; ++c) {
        double s = 0;
        for (std::size_t t = 0; t < 24; ++t) s += r(c, t);
        CHECK(pooled[c] == doctest::Approx(s / 24.0).epsilon(1e-14));
    }

    CHECK_THROWS_AS(avg_pool_time(Matrix(3, 0)), ShapeError);
}
