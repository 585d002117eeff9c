#include "msk/mcmc.hpp"

#include <algorithm>
#include <cmath>

#include "msk/errors.hpp"
#include "msk/order_params.hpp"

namespace msk {

void glauber_sweep(const ModelSpec& spec, const DisorderSample& disorder,
                   SpinConfig& sigma, SplitRng& rng) {
    const int n = disorder.n;
    for (int i = 0; i < n; ++i) {
        const double f = local_field(spec, disorder, sigma, i);
        const double p_up = 0.5 * (1.0 + std::tanh(f));
        sigma.spins[i] = rng.u01() < p_up ? int8_t{1} : int8_t{-1};
    }
}

namespace {

struct Chain {
    std::vector<int8_t> spins;
    std::vector<double> fields;  // cached local fields, one per spin
    long flips = 0;
    long updates = 0;
    double cache_max_err = 0.0;
};

class DenseCouplings {
public:
    DenseCouplings(const ModelSpec& spec, const DisorderSample& disorder)
        : n_(disorder.n), j_(static_cast<size_t>(n_) * n_, 0.0) {
        const double scale = spec.beta / std::sqrt(static_cast<double>(n_));
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) {
                const double v = scale * disorder.g(i, j);
                j_[static_cast<size_t>(i) * n_ + j] = v;
                j_[static_cast<size_t>(j) * n_ + i] = v;
            }
    }
    int n() const { return n_; }
    const double* row(int i) const { return j_.data() + static_cast<size_t>(i) * n_; }

private:
    int n_;
    std::vector<double> j_;
};

void recompute_fields(const DenseCouplings& jm, double h, Chain& c) {
    const int n = jm.n();
    for (int i = 0; i < n; ++i) {
        const double* row = jm.row(i);
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += row[j] * c.spins[j];
        const double fresh = s + h;
        c.cache_max_err = std::max(c.cache_max_err, std::fabs(fresh - c.fields[i]));
        c.fields[i] = fresh;
    }
}

void fast_sweep(const DenseCouplings& jm, Chain& c, SplitRng& rng) {
    const int n = jm.n();
    for (int i = 0; i < n; ++i) {
        const double p_up = 0.5 * (1.0 + std::tanh(c.fields[i]));
        const int8_t next = rng.u01() < p_up ? int8_t{1} : int8_t{-1};
        ++c.updates;
        if (next != c.spins[i]) {
            const double delta = 2.0 * next;
            const double* row = jm.row(i);
            for (int j = 0; j < n; ++j) c.fields[j] += row[j] * delta;
            c.spins[i] = next;
            ++c.flips;
        }
    }
}

double energy_from_fields(const Chain& c, double h) {
    double quad = 0.0, lin = 0.0;
    for (size_t i = 0; i < c.spins.size(); ++i) {
        quad += c.spins[i] * (c.fields[i] - h);
        lin += c.spins[i];
    }
    return 0.5 * quad + h * lin;
}

// Cached fields are recomputed from scratch this often; the drift seen at
// each recompute is tracked and must stay within 1e-8.
constexpr long kFieldRefresh = 64;

long run_burn_in(const DenseCouplings& jm, double h, Chain& c, SplitRng& rng,
                 long initial) {
    long budget = std::max<long>(initial, 2);
    for (int round = 0; round < 6; ++round) {
        std::vector<double> energy;
        energy.reserve(budget);
        for (long t = 0; t < budget; ++t) {
            fast_sweep(jm, c, rng);
            if ((t + 1) % kFieldRefresh == 0) recompute_fields(jm, h, c);
            energy.push_back(energy_from_fields(c, h));
        }
        // First/second-half comparison; doubling when the halves disagree
        // by more than 3 sigma.
        const long half = budget / 2;
        double m1 = 0.0, m2 = 0.0, v1 = 0.0, v2 = 0.0;
        for (long t = 0; t < half; ++t) m1 += energy[t];
        for (long t = half; t < budget; ++t) m2 += energy[t];
        m1 /= half;
        m2 /= budget - half;
        for (long t = 0; t < half; ++t) v1 += (energy[t] - m1) * (energy[t] - m1);
        for (long t = half; t < budget; ++t) v2 += (energy[t] - m2) * (energy[t] - m2);
        v1 /= std::max<long>(1, half - 1) * half;
        v2 /= std::max<long>(1, budget - half - 1) * (budget - half);
        const double sigma = std::sqrt(v1 + v2);
        if (std::fabs(m1 - m2) <= 3.0 * sigma || sigma == 0.0) return budget;
        budget *= 2;
    }
    return budget;
}

} // namespace

McmcEstimate estimate(const ModelSpec& spec, const SpeciesLayout& layout,
                      const DisorderSample& disorder, const ChainConfig& cfg) {
    const int n = disorder.n;
    const int m = static_cast<int>(layout.sizes.size());
    if (cfg.n_sweeps < 20 * static_cast<long>(cfg.thin))
        throw InsufficientSamples("mcmc::estimate: n_sweeps < 20 * thin");

    const DenseCouplings jm(spec, disorder);
    const long n_samples = cfg.n_sweeps / cfg.thin;
    constexpr int kBatches = 20;
    const long batch_len = std::max<long>(1, n_samples / kBatches);

    // Per replica: per-spin batch sums of the conditional mean tanh(field),
    // which estimates <sigma_i> with far less variance than the raw spin.
    std::vector<Chain> chains(cfg.n_replicas);
    std::vector<std::vector<double>> batch_sums(cfg.n_replicas);
    std::vector<std::vector<long>> batch_counts(cfg.n_replicas);
    // Replica-pair overlaps per species per batch.
    const int n_pairs = cfg.n_replicas / 2;
    std::vector<std::vector<double>> overlap_batch(n_pairs);

    McmcEstimate out;
    try {
        out.outside_proven_regime = spec.beta > beta_0(spec).first;
    } catch (const DegenerateModel&) {
        out.outside_proven_regime = false;  // no interactions: every beta is fine
    }

    long burn_used = 0;
    for (int r = 0; r < cfg.n_replicas; ++r) {
        Chain& c = chains[r];
        SplitRng rng(cfg.seed, static_cast<uint64_t>(r) + 1);
        c.spins.resize(n);
        for (int i = 0; i < n; ++i) c.spins[i] = rng.u01() < 0.5 ? int8_t{-1} : int8_t{1};
        c.fields.assign(n, 0.0);
        recompute_fields(jm, spec.h, c);
        c.cache_max_err = 0.0;

        const long initial =
            cfg.burn_in_sweeps >= 0 ? cfg.burn_in_sweeps : 10 * static_cast<long>(n);
        burn_used = std::max(burn_used, run_burn_in(jm, spec.h, c, rng, initial));

        auto& sums = batch_sums[r];
        auto& counts = batch_counts[r];
        sums.assign(static_cast<size_t>(kBatches) * n, 0.0);
        counts.assign(kBatches, 0);

        long sample = 0;
        for (long t = 0; t < cfg.n_sweeps; ++t) {
            fast_sweep(jm, c, rng);
            if ((t + 1) % kFieldRefresh == 0) recompute_fields(jm, spec.h, c);
            if ((t + 1) % cfg.thin != 0) continue;
            const int b = static_cast<int>(std::min<long>(sample / batch_len, kBatches - 1));
            double* dst = sums.data() + static_cast<size_t>(b) * n;
            for (int i = 0; i < n; ++i) dst[i] += std::tanh(c.fields[i]);
            ++counts[b];
            ++sample;
        }
        out.flip_fraction += static_cast<double>(c.flips) / std::max<long>(1, c.updates);
        out.field_cache_max_err = std::max(out.field_cache_max_err, c.cache_max_err);
    }
    out.flip_fraction /= cfg.n_replicas;
    out.burn_in_used = burn_used;
    out.sweeps_used = cfg.n_sweeps;

    // Pool batch means across replicas.
    out.magnetizations.assign(n, 0.0);
    out.magnetization_se.assign(n, 0.0);
    const int total_batches = kBatches * cfg.n_replicas;
    std::vector<double> bm(total_batches);
    for (int i = 0; i < n; ++i) {
        int k = 0;
        double grand = 0.0;
        for (int r = 0; r < cfg.n_replicas; ++r)
            for (int b = 0; b < kBatches; ++b) {
                const long cnt = batch_counts[r][b];
                bm[k] = cnt > 0 ? batch_sums[r][static_cast<size_t>(b) * n + i] / cnt : 0.0;
                grand += bm[k];
                ++k;
            }
        grand /= total_batches;
        double var = 0.0;
        for (int b = 0; b < total_batches; ++b) var += (bm[b] - grand) * (bm[b] - grand);
        var /= total_batches > 1 ? (total_batches - 1) : 1;
        out.magnetizations[i] = grand;
        out.magnetization_se[i] = std::sqrt(var / total_batches);
    }

    // Two-replica overlaps. For independent replicas a, b sharing the
    // disorder, E[R12^(s)] = (1/|I_s|) sum_i <sigma_i>^2, and products of
    // per-batch means from the paired replicas estimate it without bias
    // (their noises are independent).
    out.overlap_mean.assign(m, 0.0);
    out.overlap_se.assign(m, 0.0);
    if (n_pairs > 0) {
        std::vector<double> pair_bm(static_cast<size_t>(n_pairs) * kBatches);
        for (int s = 0; s < m; ++s) {
            const auto [lo, hi] = layout.ranges[s];
            int k = 0;
            double grand = 0.0;
            for (int p = 0; p < n_pairs; ++p) {
                const int ra = 2 * p, rb = 2 * p + 1;
                for (int b = 0; b < kBatches; ++b) {
                    const long ca = batch_counts[ra][b], cb = batch_counts[rb][b];
                    double acc = 0.0;
                    for (int i = lo; i < hi; ++i) {
                        const double ma =
                            ca > 0 ? batch_sums[ra][static_cast<size_t>(b) * n + i] / ca : 0.0;
                        const double mb =
                            cb > 0 ? batch_sums[rb][static_cast<size_t>(b) * n + i] / cb : 0.0;
                        acc += ma * mb;
                    }
                    pair_bm[k] = acc / (hi - lo);
                    grand += pair_bm[k];
                    ++k;
                }
            }
            grand /= k;
            double var = 0.0;
            for (int b = 0; b < k; ++b) var += (pair_bm[b] - grand) * (pair_bm[b] - grand);
            var /= k > 1 ? (k - 1) : 1;
            out.overlap_mean[s] = grand;
            out.overlap_se[s] = std::sqrt(var / k);
        }
    }
    return out;
}

} // namespace msk
