#pragma once

#include <cstdint>

namespace msk {

// Counter-based splittable generator. Each (seed, stream) pair yields an
// independent sequence; output k depends only on (seed, stream, k), so
// sequences are reproducible regardless of threading. Disorder sampling
// uses stream 0, MCMC replica r uses stream r+1, and higher-level drivers
// carve further streams deterministically.
class SplitRng {
public:
    SplitRng(uint64_t seed, uint64_t stream);

    uint64_t next_u64();
    // Uniform in [0, 1) with 53-bit resolution.
    double u01();
    // Standard normal via the inverse CDF (branch-free across platforms).
    double normal();

private:
    uint64_t key_;
    uint64_t ctr_ = 0;
};

// Wichura's AS241 rational approximation of the standard normal quantile.
double normal_quantile(double p);

} // namespace msk
