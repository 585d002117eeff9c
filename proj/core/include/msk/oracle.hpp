#pragma once

// Exact Gibbs computations for small N: full enumeration of the 2^N
// configurations (Gray-code incremental Hamiltonian), magnetizations,
// two-replica overlap expectations, and the overlap-concentration
// bound check.

#include <cmath>
#include <functional>
#include <vector>

#include "msk/model.hpp"
#include "msk/order_params.hpp"

namespace msk {

struct GibbsTable {
    int n = 0;
    std::vector<double> log_weights;  // H(sigma) indexed by spin bitmask
    double log_z = 0.0;

    double prob(size_t idx) const { return std::exp(log_weights[idx] - log_z); }
    // Normalized probabilities for all 2^n states.
    std::vector<double> probabilities() const;
};

inline constexpr int kMaxExactSingle = 24;
inline constexpr int kMaxExactPair = 12;

GibbsTable enumerate_gibbs(const ModelSpec& spec, const SpeciesLayout& layout,
                           const DisorderSample& disorder);
std::vector<double> magnetizations(const GibbsTable& table);

// E f(R12) over two independent replicas of the Gibbs measure. The pair
// sum is grouped by the XOR pattern of the two configurations (R12 depends
// only on it); the per-pattern mass is the autocorrelation of the
// probability vector, computed with a Walsh-Hadamard transform.
double overlap_expectation(const GibbsTable& table, const SpeciesLayout& layout,
                           const std::function<double(const std::vector<double>&)>& f);

// P(x) = x^T Lambda^{1/2} V Lambda^{1/2} x with V = |Lambda^{1/2} Delta2 Lambda^{1/2}|.
struct OverlapFunctional {
    SymMatrix v{1};
    std::vector<double> lambdas;
    std::vector<double> q_ref;

    static OverlapFunctional build(const ModelSpec& spec, const std::vector<double>& q);
    double p(const std::vector<double>& x) const;
};

struct ConcentrationReport {
    double mean = 0.0;       // disorder average of <exp(gamma N P(R12 - q))>
    double se = 0.0;
    double bound = 0.0;      // det(I - (2 gamma + 4 alpha beta^2) V)^{-1/2}
    double gamma = 0.0;
    int n_disorder = 0;
    bool pass = false;
};

ConcentrationReport concentration_bound_check(const ModelSpec& spec,
                                              const SpeciesLayout& layout,
                                              const OrderParams& order,
                                              double gamma, int n_disorder,
                                              uint64_t seed, int threads = 1);

} // namespace msk
