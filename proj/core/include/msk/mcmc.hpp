#pragma once

// Glauber (heat-bath) dynamics for the Gibbs measure at N beyond exact
// reach. Sequential-scan sweeps; spin i is set to +1 with probability
// (1 + tanh(local_field(i))) / 2.

#include <cstdint>
#include <vector>

#include "msk/model.hpp"

namespace msk {

struct ChainConfig {
    long n_sweeps = 2000;       // measurement sweeps after burn-in
    long burn_in_sweeps = -1;   // < 0: default 10*N, with stationarity doubling
    int thin = 1;
    int n_replicas = 2;
    uint64_t seed = 0;
};

struct McmcEstimate {
    std::vector<double> magnetizations;
    std::vector<double> magnetization_se;
    std::vector<double> overlap_mean;  // per species, from replica pairs
    std::vector<double> overlap_se;
    long sweeps_used = 0;
    long burn_in_used = 0;
    double flip_fraction = 0.0;        // acceptance diagnostic
    double field_cache_max_err = 0.0;  // worst drift seen at periodic recompute
    bool outside_proven_regime = false;
};

// One full sequential heat-bath sweep, O(N^2).
void glauber_sweep(const ModelSpec& spec, const DisorderSample& disorder,
                   SpinConfig& sigma, SplitRng& rng);

McmcEstimate estimate(const ModelSpec& spec, const SpeciesLayout& layout,
                      const DisorderSample& disorder, const ChainConfig& cfg);

} // namespace msk
