#include <doctest.h>

#include <cmath>
#include <vector>

#include "msk/mcmc.hpp"
#include "msk/oracle.hpp"
#include "msk/errors.hpp"
#include "test_helpers.hpp"

using namespace msk;
using namespace msk::test;

TEST_CASE("no couplings: chain reproduces independent spins") {
    ModelSpec spec = bipartite(0.7, 0.5, 16);
    spec.delta2 = SymMatrix(2);  // all interactions off
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 1);

    ChainConfig cfg;
    cfg.n_sweeps = 4000;
    cfg.seed = 42;
    const McmcEstimate est = estimate(spec, layout, dis, cfg);
    const double target = std::tanh(spec.h);
    for (int i = 0; i < spec.n; ++i) {
        // Rao-Blackwellized estimate: with zero couplings the local field is
        // constant, so the magnetization estimate is exactly tanh(h).
        CHECK(std::fabs(est.magnetizations[i] - target) < 1e-14);
        CHECK(est.magnetization_se[i] < 1e-14);
    }
    // replica overlap of independent spins: E R = tanh(h)^2
    for (int s = 0; s < 2; ++s)
        CHECK(std::fabs(est.overlap_mean[s] - target * target) <
              5.0 * est.overlap_se[s] + 1e-12);
    CHECK(est.field_cache_max_err < 1e-8);
}

TEST_CASE("estimate is deterministic in the seed") {
    const ModelSpec spec = bipartite(0.4, 0.3, 10);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 5);
    ChainConfig cfg;
    cfg.n_sweeps = 500;
    cfg.seed = 777;
    const McmcEstimate a = estimate(spec, layout, dis, cfg);
    const McmcEstimate b = estimate(spec, layout, dis, cfg);
    CHECK(a.magnetizations == b.magnetizations);
    CHECK(a.overlap_mean == b.overlap_mean);
    CHECK(a.sweeps_used == b.sweeps_used);

    cfg.seed = 778;
    const McmcEstimate c = estimate(spec, layout, dis, cfg);
    CHECK(a.magnetizations != c.magnetizations);
}

TEST_CASE("heat-bath kernel satisfies detailed balance (N=4)") {
    const ModelSpec spec = bipartite(0.6, 0.25, 4);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 9);
    const GibbsTable table = enumerate_gibbs(spec, layout, dis);
    const std::vector<double> p = table.probabilities();

    // Single-site heat bath: the new value of spin i ignores the old one,
    // P(sigma_i = +1) = (1 + tanh(f_i)) / 2. Detailed balance then reads
    // pi(x) P(x -> y) = pi(y) P(y -> x) for x, y differing at site i.
    for (size_t x = 0; x < p.size(); ++x) {
        SpinConfig sx;
        sx.spins.resize(4);
        for (int i = 0; i < 4; ++i)
            sx.spins[i] = (x >> i) & 1 ? int8_t{1} : int8_t{-1};
        for (int i = 0; i < 4; ++i) {
            const size_t y = x ^ (size_t{1} << i);
            const double f = local_field(spec, dis, sx, i);
            const double to_plus = 0.5 * (1.0 + std::tanh(f));
            const double p_xy = (y >> i) & 1 ? to_plus : 1.0 - to_plus;
            const double p_yx = (x >> i) & 1 ? to_plus : 1.0 - to_plus;
            CHECK(std::fabs(p[x] * p_xy - p[y] * p_yx) < 1e-14);
        }
    }
}

TEST_CASE("stationary distribution matches the exact Gibbs table (chi-square)") {
    const ModelSpec spec = bipartite(0.5, 0.2, 4);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 12);
    const GibbsTable table = enumerate_gibbs(spec, layout, dis);
    const std::vector<double> p = table.probabilities();

    for (uint64_t seed : {101u, 202u, 303u}) {
        SplitRng rng(seed, 0);
        SpinConfig sigma;
        sigma.spins.assign(4, int8_t{1});
        for (int t = 0; t < 200; ++t) glauber_sweep(spec, dis, sigma, rng);  // burn-in

        const int n_samples = 20000;
        const int thin = 5;
        std::vector<long> counts(16, 0);
        for (int t = 0; t < n_samples; ++t) {
            for (int rep = 0; rep < thin; ++rep) glauber_sweep(spec, dis, sigma, rng);
            size_t idx = 0;
            for (int i = 0; i < 4; ++i)
                if (sigma.spins[i] > 0) idx |= size_t{1} << i;
            ++counts[idx];
        }
        double chi2 = 0.0;
        for (size_t s = 0; s < 16; ++s) {
            const double expect = n_samples * p[s];
            REQUIRE(expect > 5.0);
            chi2 += (counts[s] - expect) * (counts[s] - expect) / expect;
        }
        const double pval = chi_square_pvalue(chi2, 15);
        CHECK(pval > 0.001);
    }
}

TEST_CASE("magnetizations agree with exact enumeration at N=12") {
    const ModelSpec spec = bipartite(0.45, 0.3, 12);  // below beta_0
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 31);
    const std::vector<double> exact =
        magnetizations(enumerate_gibbs(spec, layout, dis));

    ChainConfig cfg;
    cfg.n_sweeps = 30000;
    cfg.n_replicas = 4;
    cfg.seed = 1234;
    const McmcEstimate est = estimate(spec, layout, dis, cfg);
    CHECK_FALSE(est.outside_proven_regime);
    CHECK(est.field_cache_max_err < 1e-8);
    CHECK(est.flip_fraction > 0.1);

    int within3 = 0;
    for (int i = 0; i < spec.n; ++i) {
        const double se = std::max(est.magnetization_se[i], 1e-12);
        const double dev = std::fabs(est.magnetizations[i] - exact[i]);
        if (dev < 3.0 * se) ++within3;
        CHECK(dev < 8.0 * se);  // hard cap against silent bias
    }
    CHECK(within3 >= 10);  // >= ~83% of 12 spins inside 3 SE
}

TEST_CASE("replica overlap agrees with the exact two-replica average at N=10") {
    const ModelSpec spec = bipartite(0.45, 0.4, 10);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 8);
    const GibbsTable table = enumerate_gibbs(spec, layout, dis);
    std::vector<double> exact(2);
    for (int s = 0; s < 2; ++s)
        exact[s] = overlap_expectation(
            table, layout, [s](const std::vector<double>& r) { return r[s]; });

    ChainConfig cfg;
    cfg.n_sweeps = 30000;
    cfg.n_replicas = 6;
    cfg.seed = 99;
    const McmcEstimate est = estimate(spec, layout, dis, cfg);
    for (int s = 0; s < 2; ++s)
        CHECK(std::fabs(est.overlap_mean[s] - exact[s]) <
              5.0 * est.overlap_se[s] + 1e-6);
}

TEST_CASE("chain configuration validation") {
    const ModelSpec spec = bipartite(0.3, 0.2, 8);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 2);
    ChainConfig cfg;
    cfg.n_sweeps = 5;  // fewer than the minimum per batch
    CHECK_THROWS_AS(estimate(spec, layout, dis, cfg), InsufficientSamples);
}

TEST_CASE("above beta_0 the estimate is flagged") {
    const ModelSpec spec = bipartite(0.9, 0.2, 8);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 4);
    ChainConfig cfg;
    cfg.n_sweeps = 400;
    cfg.seed = 6;
    const McmcEstimate est = estimate(spec, layout, dis, cfg);
    CHECK(est.outside_proven_regime);
}

TEST_CASE("species overlap means agree with the solved order parameter at N=512") {
    const ModelSpec spec = bipartite(0.25, 0.3, 512);  // beta = 0.5 beta_0
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 64);
    const QuadratureRule rule = QuadratureRule::gauss_hermite();
    const std::vector<double> q = solve_q(spec, rule).q;

    ChainConfig cfg;
    cfg.n_sweeps = 4000;
    cfg.n_replicas = 4;
    cfg.seed = 2024;
    const McmcEstimate est = estimate(spec, layout, dis, cfg);
    for (int s = 0; s < 2; ++s) {
        CHECK(est.overlap_se[s] > 0.0);
        // finite-size + chain error; 3 SE plus a small O(1/N) allowance
        CHECK(std::fabs(est.overlap_mean[s] - q[s]) <
              3.0 * est.overlap_se[s] + 5.0 / spec.n);
    }
    for (int i = 0; i < spec.n; ++i) {
        CHECK(est.magnetizations[i] >= -1.0);
        CHECK(est.magnetizations[i] <= 1.0);
        CHECK(est.magnetization_se[i] >= 0.0);
    }
}

TEST_CASE("overlap variance shrinks as the system grows") {
    // Var(R12) per species from instantaneous two-replica overlaps; the
    // product of spins from independent chains is an unbiased sample of R.
    const QuadratureRule rule = QuadratureRule::gauss_hermite();
    double prev = 1e300, prev_se = 0.0;
    for (int n : {64, 128, 256, 512}) {
        const ModelSpec spec = bipartite(0.25, 0.3, n);
        const SpeciesLayout layout = build_layout(spec);
        const DisorderSample dis = sample_disorder(spec, layout, 1000 + n);

        SplitRng rng_a(500 + n, 1), rng_b(500 + n, 2);
        SpinConfig a, b;
        a.spins.resize(n);
        b.spins.resize(n);
        for (int i = 0; i < n; ++i) {
            a.spins[i] = rng_a.u01() < 0.5 ? -1 : 1;
            b.spins[i] = rng_b.u01() < 0.5 ? -1 : 1;
        }
        for (int t = 0; t < 10 * n; ++t) {
            glauber_sweep(spec, dis, a, rng_a);
            glauber_sweep(spec, dis, b, rng_b);
        }
        const int n_samples = 2000;
        const int n_batches = 10;
        std::vector<double> r1(n_samples), r2(n_samples);
        const auto [lo, hi] = layout.ranges[0];
        for (int t = 0; t < n_samples; ++t) {
            glauber_sweep(spec, dis, a, rng_a);
            glauber_sweep(spec, dis, b, rng_b);
            int acc = 0;
            for (int i = lo; i < hi; ++i) acc += a.spins[i] * b.spins[i];
            r1[t] = static_cast<double>(acc) / (hi - lo);
            r2[t] = r1[t] * r1[t];
        }
        // variance estimate and a batch-scatter SE for it
        const int blen = n_samples / n_batches;
        std::vector<double> bvar(n_batches);
        double var_sum = 0.0;
        for (int bi = 0; bi < n_batches; ++bi) {
            double m = 0.0, s = 0.0;
            for (int t = bi * blen; t < (bi + 1) * blen; ++t) {
                m += r1[t];
                s += r2[t];
            }
            m /= blen;
            s /= blen;
            bvar[bi] = s - m * m;
            var_sum += bvar[bi];
        }
        const double var = var_sum / n_batches;
        double scatter = 0.0;
        for (double v : bvar) scatter += (v - var) * (v - var);
        const double se = std::sqrt(scatter / (n_batches - 1) / n_batches);

        CHECK(var > 0.0);
        CHECK(var < prev + 2.0 * (se + prev_se));  // monotone within error bars
        prev = var;
        prev_se = se;
    }
}
