#pragma once

// Onsager corrections, TAP residuals and their N-scaling, the iterative
// TAP solver, and the cavity-field identity checks.
//
// TAP residual for spin i in species s:
//   <sigma_i> - tanh( (beta/sqrt(N)) sum_{j != i} g_ij <sigma_j> + h
//                     - beta^2 (Delta2 Lambda (1 - q))_s <sigma_i> )

#include <cstdint>
#include <vector>

#include "msk/mcmc.hpp"
#include "msk/model.hpp"
#include "msk/oracle.hpp"
#include "msk/order_params.hpp"

namespace msk {

// c_s = beta^2 sum_t lambda_t Delta2_{s,t} (1 - q_t).
std::vector<double> onsager_correction(const ModelSpec& spec,
                                       const std::vector<double>& q);

struct TapReport {
    std::vector<double> onsager;    // per-species correction coefficients
    std::vector<double> residuals;  // per spin
    double moment2 = 0.0;           // mean residual^2
    double moment4 = 0.0;           // mean residual^4
    int n = 0;
    double beta_over_beta0 = 0.0;
};

TapReport tap_residuals(const ModelSpec& spec, const SpeciesLayout& layout,
                        const DisorderSample& disorder,
                        const std::vector<double>& mags,
                        const std::vector<double>& q);

struct TapIterateResult {
    std::vector<double> magnetizations;
    bool converged = false;
    int iterations = 0;
    double last_delta = 0.0;         // max |m^(t+1) - m^(t)| at the stop
    std::vector<double> delta_trace; // per-iteration deltas (trajectory summary)
};

// Two-step-memory iteration: the Onsager term uses the t-1 iterate, which
// suppresses the oscillation the naive one-step map is prone to.
// Convergence is reported, never assumed.
TapIterateResult tap_iterate(const ModelSpec& spec, const SpeciesLayout& layout,
                             const DisorderSample& disorder,
                             const std::vector<double>& q, int max_iter = 1000,
                             double tol = 1e-10);

enum class Estimator { Exact, Mcmc };

struct ScalingRow {
    int n = 0;
    double mean_r2 = 0.0, se_r2 = 0.0;
    double mean_r4 = 0.0, se_r4 = 0.0;
};

struct ScalingTable {
    std::vector<ScalingRow> rows;
    double slope = 0.0;  // log-log least squares of mean_r2 vs N
    bool slope_defined = false;
};

// Disorder-averaged residual moments over an ascending N-list. Chain
// settings apply to the MCMC estimator; n_sweeps < 0 picks a per-N default.
ScalingTable scaling_study(const ModelSpec& base, const std::vector<int>& n_list,
                           int n_disorder, Estimator estimator, uint64_t seed,
                           const ChainConfig& chain = {}, int threads = 1);

struct CavityProbe {
    int species = 0;
    int k = 1;          // checks the (2k)-th moment
    int n_eta = 0;
    // tanh identity: the tilted ratio <AV eps E>/<AV E> against
    // tanh(cavity field); (2k)-th moment of the difference.
    double moment_tanh = 0.0;
    double se_tanh = 0.0;
    // linear-response identity: the same ratio re-expressed through the
    // Onsager coefficient beta (Delta2 Lambda (1-q))_s.
    double moment_onsager = 0.0;
    double se_onsager = 0.0;
};

// Both sides of the cavity identities, exact inner Gibbs averages over the
// full 2^N table, Monte Carlo over the independent eta-fields.
CavityProbe cavity_check(const ModelSpec& spec, const SpeciesLayout& layout,
                         const DisorderSample& disorder,
                         const std::vector<double>& q, int species, int k,
                         int n_eta, uint64_t seed);

} // namespace msk
