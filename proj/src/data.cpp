#include "wavetuner/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wavetuner::data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw DataError("cannot parse cell '" + cell + "' at row " + std::to_string(row) +
                        ", column " + std::to_string(col) + " as a finite number");
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
    auto header = split_line(line);
    std::size_t first_col = (!header.empty() && header[0] == "date") ? 1 : 0;
    if (header.size() <= first_col) throw DataError("'" + path + "' has no value columns");

    Dataset ds;
    for (std::size_t c = first_col; c < header.size(); ++c) ds.channel_names.push_back(header[c]);
    const std::size_t C = ds.channel_names.size();

    std::vector<double> values;  // row-major by time
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError("ragged row " + std::to_string(rows + 1) + " in '" + path + "': " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header.size()));
        for (std::size_t c = first_col; c < cells.size(); ++c)
            values.push_back(parse_cell(cells[c], rows + 1, c));
        ++rows;
    }
    if (rows == 0) throw DataError("'" + path + "' has no data rows");

    ds.series = Matrix(C, rows);
    for (std::size_t t = 0; t < rows; ++t)
        for (std::size_t c = 0; c < C; ++c) ds.series(c, t) = values[t * C + c];
    return ds;
}

void split(Dataset& ds, const std::vector<double>& ratios, std::size_t lookback,
           std::size_t horizon) {
    if (ratios.size() != 3) throw ConfigError("expected exactly 3 split ratios");
    double sum = 0;
    for (double r : ratios) {
        if (r <= 0) throw ConfigError("split ratios must be positive");
        sum += r;
    }
    if (sum > 1.0 + 1e-12) throw ConfigError("split ratios sum to more than 1");

    const std::size_t n = ds.length();
    std::size_t n1 = static_cast<std::size_t>(std::floor(ratios[0] * static_cast<double>(n)));
    std::size_t n2 = n1 + static_cast<std::size_t>(std::floor(ratios[1] * static_cast<double>(n)));
    std::size_t n3 =
        n2 + static_cast<std::size_t>(std::floor(ratios[2] * static_cast<double>(n)));
    if (sum >= 1.0 - 1e-12) n3 = n;  // absorb rounding into the test split

    ds.train = {0, n1};
    ds.val = {n1, n2};
    ds.test = {n2, n3};
    ds.has_splits = true;

    if (n1 < lookback + horizon)
        throw ConfigError("train split of length " + std::to_string(n1) +
                          " cannot fit lookback " + std::to_string(lookback) + " + horizon " +
                          std::to_string(horizon));
    if (ds.val.length() < horizon || ds.test.length() < horizon)
        throw ConfigError("val/test splits must cover at least one horizon of " +
                          std::to_string(horizon) + " steps");
}

void standardize(Dataset& ds) {
    if (!ds.has_splits) throw ConfigError("standardize requires split boundaries");
    const std::size_t C = ds.channels();
    ds.norm_mean.assign(C, 0.0);
    ds.norm_std.assign(C, 0.0);
    const std::size_t n = ds.train.length();
    for (std::size_t c = 0; c < C; ++c) {
        double mean = 0;
        for (std::size_t t = ds.train.begin; t < ds.train.end; ++t) mean += ds.series(c, t);
        mean /= static_cast<double>(n);
        double var = 0;
        for (std::size_t t = ds.train.begin; t < ds.train.end; ++t) {
            double d = ds.series(c, t) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        if (var <= 0)
            throw DataError("channel '" + ds.channel_names[c] +
                            "' has zero variance on the train split");
        ds.norm_mean[c] = mean;
        ds.norm_std[c] = std::sqrt(var);
    }
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t t = 0; t < ds.length(); ++t)
            ds.series(c, t) = (ds.series(c, t) - ds.norm_mean[c]) / ds.norm_std[c];
}

std::vector<WindowIndex> window_indices(const Dataset& ds, const std::string& split_name,
                                        std::size_t lookback, std::size_t horizon,
                                        std::size_t stride) {
    if (!ds.has_splits) throw ConfigError("make_windows requires split boundaries");
    if (stride < 1) throw ConfigError("stride must be >= 1");
    std::size_t lo, hi;
    if (split_name == "train") {
        lo = ds.train.begin;
        hi = ds.train.end;
    } else if (split_name == "val") {
        // look back into the preceding split for context, never forward
        lo = ds.val.begin - std::min(ds.val.begin, lookback);
        hi = ds.val.end;
    } else if (split_name == "test") {
        lo = ds.test.begin - std::min(ds.test.begin, lookback);
        hi = ds.test.end;
    } else {
        throw ConfigError("unknown split '" + split_name + "'; expected train, val or test");
    }
    if (hi - lo < lookback + horizon)
        throw ConfigError("split '" + split_name + "' is too short for lookback " +
                          std::to_string(lookback) + " + horizon " + std::to_string(horizon));
    std::vector<WindowIndex> out;
    for (std::size_t s = lo; s + lookback + horizon <= hi; s += stride) out.push_back({s});
    if (out.empty())
        throw ConfigError("split '" + split_name + "' yields zero windows");
    return out;
}

Window extract_window(const Dataset& ds, const WindowIndex& idx, std::size_t lookback,
                      std::size_t horizon) {
    Window w;
    const std::size_t C = ds.channels();
    w.input = Matrix(C, lookback);
    w.target = Matrix(C, horizon);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t t = 0; t < lookback; ++t) w.input(c, t) = ds.series(c, idx.start + t);
        for (std::size_t t = 0; t < horizon; ++t)
            w.target(c, t) = ds.series(c, idx.start + lookback + t);
    }
    return w;
}

std::vector<Window> make_windows(const Dataset& ds, const std::string& split_name,
                                 std::size_t lookback, std::size_t horizon, std::size_t stride) {
    auto idx = window_indices(ds, split_name, lookback, horizon, stride);
    std::vector<Window> out;
    out.reserve(idx.size());
    for (const auto& i : idx) out.push_back(extract_window(ds, i, lookback, horizon));
    return out;
}

}  // namespace wavetuner::data
