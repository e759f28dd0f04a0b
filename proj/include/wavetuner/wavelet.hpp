#pragma once

#include <string>
#include <vector>

#include "wavetuner/matrix.hpp"

namespace wavetuner::wavelet {

// Orthogonal analysis/synthesis filter pair. Analysis convention:
//   a[k] = sum_t lo[t] * x[(2k + t) mod L]
//   d[k] = sum_t hi[t] * x[(2k + t) mod L]
// with hi[t] = (-1)^t * lo[N-1-t] (quadrature mirror). The transform matrix is
// orthogonal, so synthesis filters equal the analysis filters and the inverse
// is the adjoint.
struct FilterBank {
    std::string family;
    std::vector<double> analysis_low;
    std::vector<double> analysis_high;
    std::vector<double> synthesis_low;
    std::vector<double> synthesis_high;

    std::size_t filter_length() const { return analysis_low.size(); }
};

FilterBank make_filter_bank(const std::string& family);
std::vector<std::string> supported_families();

struct SubbandSet {
    std::vector<Matrix> bands;        // each C x L_i
    std::vector<std::string> labels;  // {a,d}^m paths, natural recursive order
    int level = 0;
    std::size_t original_length = 0;
};

// Leaf length under periodic extension; errors unless 2^m divides L.
std::size_t coeff_length(std::size_t length, int level);

// Full wavelet packet tree to level m with periodic boundary handling.
SubbandSet wpd(const Matrix& x, const FilterBank& fb, int level);

// Inverse of wpd; exact up to floating point for orthogonal banks.
Matrix iwpt(const SubbandSet& s, const FilterBank& fb);

// One analysis / synthesis step, exposed for the Mallat-pyramid model variant.
void analysis_step(const Matrix& x, const FilterBank& fb, Matrix& approx, Matrix& detail);
Matrix synthesis_step(const Matrix& approx, const Matrix& detail, const FilterBank& fb);

// Reorder a level-m label set from natural to frequency (Gray-code) order.
std::vector<std::size_t> frequency_order(int level);

// Normalized-energy Shannon entropy in bits; 0 for an all-zero block.
double shannon_entropy(const Matrix& coeffs);

struct EntropyNode {
    std::string label;        // path from root; empty for root
    double entropy_bits = 0;  // summed over channels
    double energy_fraction = 0;
    bool split = false;       // Coifman-Wickerhauser: children cheaper than parent
};

struct EntropyTree {
    std::vector<EntropyNode> nodes;  // breadth-first: root, level 1, ...
    int depth = 0;

    const EntropyNode* find(const std::string& label) const;
};

EntropyTree best_basis_tree(const Matrix& x, const FilterBank& fb, int max_depth);

}  // namespace wavetuner::wavelet
