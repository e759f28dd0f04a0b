#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "wavetuner/data.hpp"
#include "wavetuner/rng.hpp"

using namespace wavetuner;
using namespace wavetuner::data;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        static int counter = 0;
        path = "test_data_tmp_" + std::to_string(counter++) + ".csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

Dataset ramp_dataset(std::size_t channels, std::size_t length) {
    Dataset ds;
    ds.series = Matrix(channels, length);
    for (std::size_t c = 0; c < channels; ++c) {
        ds.channel_names.push_back("ch" + std::to_string(c));
        for (std::size_t t = 0; t < length; ++t)
            ds.series(c, t) = static_cast<double>(t) + 100.0 * static_cast<double>(c);
    }
    return ds;
}

}  // namespace

TEST_CASE("load_csv") {
    {
        std::string content = "date,a,b\n";
        for (int r = 0; r < 10; ++r)
            content += "2020-01-" + std::to_string(r + 1) + "," + std::to_string(r) + "," +
                       std::to_string(2 * r) + "\n";
        TempCsv f(content);
        auto ds = load_csv(f.path);
        CHECK(ds.channels() == 2);
        CHECK(ds.length() == 10);
        CHECK(ds.channel_names == std::vector<std::string>{"a", "b"});
        CHECK(ds.series(0, 3) == 3.0);
        CHECK(ds.series(1, 7) == 14.0);
    }
    {
        TempCsv f("x,y,z\n1,2,3\n4,5,6\n");
        auto ds = load_csv(f.path);
        CHECK(ds.channels() == 3);
        CHECK(ds.length() == 2);
        CHECK(ds.series(2, 1) == 6.0);
    }
    {
        TempCsv f("a,b\n1,NaN\n");
        CHECK_THROWS_AS(load_csv(f.path), DataError);
    }
    {
        TempCsv f("a,b\n1,2\n3\n");
        CHECK_THROWS_AS(load_csv(f.path), DataError);
    }
    CHECK_THROWS_AS(load_csv("no_such_file_here.csv"), DataError);
}

TEST_CASE("split boundaries") {
    auto ds = ramp_dataset(1, 100);
    split(ds, {0.7, 0.1, 0.2}, 4, 4);
    CHECK(ds.train.begin == 0);
    CHECK(ds.train.end == 70);
    CHECK(ds.val.begin == 70);
    CHECK(ds.val.end == 80);
    CHECK(ds.test.begin == 80);
    CHECK(ds.test.end == 100);

    auto ds2 = ramp_dataset(1, 100);
    CHECK_THROWS_AS(split(ds2, {0.8, 0.2, 0.2}, 4, 4), ConfigError);

    auto ds3 = ramp_dataset(1, 10);
    CHECK_THROWS_AS(split(ds3, {0.7, 0.1, 0.2}, 96, 96), ConfigError);
}

TEST_CASE("standardize uses train statistics only") {
    auto ds = ramp_dataset(2, 100);
    split(ds, {0.7, 0.1, 0.2}, 4, 4);
    auto pristine = ds;
    standardize(ds);

    // scalar oracle over the train range
    for (std::size_t c = 0; c < 2; ++c) {
        double mean = 0, var = 0;
        for (std::size_t t = 0; t < 70; ++t) mean += pristine.series(c, t);
        mean /= 70;
        for (std::size_t t = 0; t < 70; ++t) {
            double dlt = pristine.series(c, t) - mean;
            var += dlt * dlt;
        }
        var /= 70;
        CHECK(ds.norm_mean[c] == doctest::Approx(mean).epsilon(1e-12));
        CHECK(ds.norm_std[c] == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
        for (std::size_t t = 0; t < 100; ++t)
            CHECK(ds.series(c, t) ==
                  doctest::Approx((pristine.series(c, t) - mean) / std::sqrt(var))
                      .epsilon(1e-12));
    }

    // mean 10, std 2 -> 14 maps to 2.0
    Dataset small;
    small.series = Matrix::from_rows({{8, 12, 8, 12, 14}});
    small.channel_names = {"a"};
    small.train = {0, 4};
    small.val = {4, 4};
    small.test = {4, 5};
    small.has_splits = true;
    standardize(small);
    CHECK(small.series(0, 4) == doctest::Approx(2.0).epsilon(1e-12));

    // constant train channel is rejected, naming the channel
    Dataset flat;
    flat.series = Matrix::from_rows({{1, 2, 3, 4}, {5, 5, 5, 9}});
    flat.channel_names = {"ok", "stuck"};
    flat.train = {0, 3};
    flat.val = {3, 3};
    flat.test = {3, 4};
    flat.has_splits = true;
    CHECK_THROWS_WITH_AS(standardize(flat), doctest::Contains("stuck"), DataError);
}

TEST_CASE("no leakage: test rows do not affect statistics") {
    auto a = ramp_dataset(2, 100);
    auto b = a;
    for (std::size_t t = 80; t < 100; ++t) b.series(0, t) += 1e6;
    split(a, {0.7, 0.1, 0.2}, 4, 4);
    split(b, {0.7, 0.1, 0.2}, 4, 4);
    standardize(a);
    standardize(b);
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(a.norm_mean[c] == b.norm_mean[c]);
        CHECK(a.norm_std[c] == b.norm_std[c]);
    }
    for (std::size_t t = 0; t < 80; ++t) CHECK(a.series(0, t) == b.series(0, t));
}

TEST_CASE("window counts") {
    auto ds = ramp_dataset(1, 1000);
    ds.train = {0, 200};
    ds.val = {200, 300};
    ds.test = {300, 1000};
    ds.has_splits = true;

    CHECK(window_indices(ds, "train", 96, 96).size() == 9);  // 200-96-96+1

    // stride equal to the usable span -> exactly one sample
    CHECK(window_indices(ds, "train", 96, 96, 9).size() == 1);

    // val borrows lookback context from the train range
    auto val_idx = window_indices(ds, "val", 96, 4, 1);
    CHECK(val_idx.front().start == 200 - 96);
    // every val target lies inside the val range
    for (const auto& w : val_idx) {
        CHECK(w.start + 96 >= ds.val.begin);
        CHECK(w.start + 96 + 4 <= ds.val.end);
    }

    // windows never straddle the series end
    for (const auto& w : window_indices(ds, "test", 96, 96))
        CHECK(w.start + 192 <= ds.length());

    CHECK_THROWS_AS(window_indices(ds, "nope", 4, 4), ConfigError);
    auto tiny = ramp_dataset(1, 100);
    tiny.train = {0, 10};
    tiny.val = {10, 20};
    tiny.test = {20, 100};
    tiny.has_splits = true;
    CHECK_THROWS_AS(window_indices(tiny, "train", 96, 96), ConfigError);
}

TEST_CASE("extract_window shapes and content") {
    auto ds = ramp_dataset(2, 50);
    WindowIndex idx{5};
    auto w = extract_window(ds, idx, 8, 4);
    CHECK(w.input.rows() == 2);
    CHECK(w.input.cols() == 8);
    CHECK(w.target.rows() == 2);
    CHECK(w.target.cols() == 4);
    CHECK(w.input(0, 0) == 5.0);
    CHECK(w.input(1, 7) == 112.0);
    CHECK(w.target(0, 0) == 13.0);
    CHECK(w.target(0, 3) == 16.0);
}

TEST_CASE("stride-T windows tile a split exactly") {
    auto ds = ramp_dataset(1, 260);
    ds.train = {0, 260};
    ds.val = {260, 260};
    ds.test = {260, 260};
    ds.has_splits = true;
    std::size_t L = 20, T = 30;
    auto windows = make_windows(ds, "train", L, T, T);
    // targets cover [L, L + k*T) contiguously
    std::size_t pos = L;
    for (const auto& w : windows) {
        for (std::size_t t = 0; t < T; ++t)
            CHECK(w.target(0, t) == ds.series(0, pos + t));
        pos += T;
    }
    CHECK(pos == 260);
}
