#pragma once

// Concrete model instances: species layout, Gaussian disorder with
// species-dependent variances, and Hamiltonian evaluation.
//
//   H(sigma) = (beta/sqrt(N)) sum_{i<j} g_ij sigma_i sigma_j + h sum_i sigma_i

#include <cstdint>
#include <vector>

#include "msk/linalg.hpp"
#include "msk/rng.hpp"

namespace msk {

struct ModelSpec {
    int m = 0;                    // species count
    std::vector<double> lambdas;  // species fractions, sum to 1
    SymMatrix delta2{1};          // m x m variance profile, entries >= 0
    double beta = 0.0;
    double h = 0.0;
    int n = 0;                    // spin count N

    void validate() const;  // throws ConfigError on any violated invariant
};

struct SpeciesLayout {
    std::vector<int> sizes;                     // |I_s|, sums to N
    std::vector<int> species_of;                // spin index -> species
    std::vector<std::pair<int, int>> ranges;    // [begin, end) per species
    int n() const { return static_cast<int>(species_of.size()); }
};

struct DisorderSample {
    int n = 0;
    std::vector<double> couplings;  // flat upper triangle, i < j, 0-based
    uint64_t seed = 0;

    // Requires i < j.
    double g(int i, int j) const {
        return couplings[static_cast<size_t>(i) * n - static_cast<size_t>(i) * (i + 1) / 2 +
                         (j - i - 1)];
    }
    // Symmetric accessor; g(i,i) does not exist (the sum is over i < j).
    double g_sym(int i, int j) const { return i < j ? g(i, j) : g(j, i); }
};

struct SpinConfig {
    std::vector<int8_t> spins;  // entries exactly -1 or +1
};

SpeciesLayout build_layout(const ModelSpec& spec);
DisorderSample sample_disorder(const ModelSpec& spec, const SpeciesLayout& layout,
                               uint64_t seed);
double hamiltonian(const ModelSpec& spec, const DisorderSample& disorder,
                   const SpinConfig& sigma);
// (beta/sqrt(N)) sum_{j != i} g_ij sigma_j + h; flipping sigma_i changes H by
// 2 * new_sigma_i * local_field(i).
double local_field(const ModelSpec& spec, const DisorderSample& disorder,
                   const SpinConfig& sigma, int i);

} // namespace msk
