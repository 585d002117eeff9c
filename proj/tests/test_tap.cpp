#include <doctest.h>

#include <cmath>
#include <vector>

#include "msk/tap.hpp"
#include "msk/errors.hpp"
#include "test_helpers.hpp"

using namespace msk;
using namespace msk::test;

TEST_CASE("onsager_correction closed forms") {
    // bipartite: c_s = beta^2 * 0.5 * (1 - q_other)
    {
        const ModelSpec spec = bipartite(0.4, 0.0, 10);
        const std::vector<double> c = onsager_correction(spec, {0.1, 0.3});
        CHECK(std::fabs(c[0] - 0.16 * 0.5 * (1.0 - 0.3)) < 1e-14);
        CHECK(std::fabs(c[1] - 0.16 * 0.5 * (1.0 - 0.1)) < 1e-14);
    }
    // single species: c = beta^2 (1 - q)
    {
        const ModelSpec spec = sk(0.7, 0.0, 10);
        const std::vector<double> c = onsager_correction(spec, {0.25});
        CHECK(std::fabs(c[0] - 0.49 * 0.75) < 1e-14);
    }
    // convex preset: c_s = beta^2 (2*0.5(1-q_s) + 1*0.5(1-q_other))
    {
        const ModelSpec spec = convex(0.3, 0.0, 10);
        const std::vector<double> c = onsager_correction(spec, {0.1, 0.2});
        CHECK(std::fabs(c[0] - 0.09 * (1.0 * 0.9 + 0.5 * 0.8)) < 1e-14);
        CHECK(std::fabs(c[1] - 0.09 * (0.5 * 0.9 + 1.0 * 0.8)) < 1e-14);
    }
}

TEST_CASE("tap_iterate at beta=0 returns exactly tanh(h), residual exactly zero") {
    const ModelSpec spec = bipartite(0.0, 0.4, 10);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 3);
    const std::vector<double> q(2, std::tanh(0.4) * std::tanh(0.4));
    const TapIterateResult it = tap_iterate(spec, layout, dis, q);
    CHECK(it.converged);
    for (double m : it.magnetizations) CHECK(m == std::tanh(0.4));
    const TapReport rep = tap_residuals(spec, layout, dis, it.magnetizations, q);
    for (double r : rep.residuals) CHECK(r == 0.0);
    CHECK(rep.moment2 == 0.0);
    CHECK(rep.moment4 == 0.0);
}

TEST_CASE("tap_residuals N=1 closed form") {
    const ModelSpec spec = sk(0.5, 0.3, 1);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 1);
    const std::vector<double> q = {0.2};
    const std::vector<double> mags = {0.6};
    const TapReport rep = tap_residuals(spec, layout, dis, mags, q);
    const double c = 0.25 * 0.8;  // beta^2 (1 - q)
    const double expect = 0.6 - std::tanh(spec.h - c * 0.6);
    CHECK(std::fabs(rep.residuals[0] - expect) < 1e-15);
    CHECK(std::fabs(rep.moment2 - expect * expect) < 1e-15);
}

TEST_CASE("tap_residuals moment4 >= moment2^2 (Jensen)") {
    const ModelSpec spec = bipartite(0.45, 0.3, 14);
    const SpeciesLayout layout = build_layout(spec);
    for (uint64_t s = 1; s <= 5; ++s) {
        const DisorderSample dis = sample_disorder(spec, layout, s);
        const std::vector<double> mags =
            magnetizations(enumerate_gibbs(spec, layout, dis));
        const QuadratureRule rule = QuadratureRule::gauss_hermite();
        const TapReport rep =
            tap_residuals(spec, layout, dis, mags, solve_q(spec, rule).q);
        CHECK(rep.moment4 >= rep.moment2 * rep.moment2 - 1e-18);
        CHECK(rep.n == 14);
        CHECK(rep.beta_over_beta0 == doctest::Approx(0.9).epsilon(1e-12));
    }
}

TEST_CASE("tap_residuals rejects mismatched inputs") {
    const ModelSpec spec = bipartite(0.3, 0.1, 8);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 1);
    CHECK_THROWS_AS(
        tap_residuals(spec, layout, dis, std::vector<double>(7, 0.0), {0.1, 0.1}),
        DimensionError);
    CHECK_THROWS_AS(
        tap_residuals(spec, layout, dis, std::vector<double>(8, 0.0), {0.1}),
        DimensionError);
}

TEST_CASE("residual perturbation is controlled by the field Lipschitz constant") {
    const ModelSpec spec = bipartite(0.5, 0.3, 12);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 6);
    const QuadratureRule rule = QuadratureRule::gauss_hermite();
    const std::vector<double> q = solve_q(spec, rule).q;
    const std::vector<double> mags =
        magnetizations(enumerate_gibbs(spec, layout, dis));

    // L = 1 + max_i ( sum_j |beta g_ij| / sqrt(N) + c_{s(i)} ), using that
    // tanh is 1-Lipschitz in its argument.
    const std::vector<double> c = onsager_correction(spec, q);
    double lip = 0.0;
    for (int i = 0; i < spec.n; ++i) {
        double row = 0.0;
        for (int j = 0; j < spec.n; ++j)
            if (j != i) row += std::fabs(spec.beta * dis.g_sym(i, j));
        lip = std::max(lip, 1.0 + row / std::sqrt(12.0) + c[layout.species_of[i]]);
    }

    const double eps = 1e-3;
    std::vector<double> pert = mags;
    SplitRng rng(4, 0);
    for (double& m : pert) m += eps * (2.0 * rng.u01() - 1.0);
    const TapReport a = tap_residuals(spec, layout, dis, mags, q);
    const TapReport b = tap_residuals(spec, layout, dis, pert, q);
    for (int i = 0; i < spec.n; ++i)
        CHECK(std::fabs(a.residuals[i] - b.residuals[i]) <= lip * eps + 1e-15);
}

TEST_CASE("tap_iterate converges to a fixed point of the stationarity map") {
    const ModelSpec spec = bipartite(0.4, 0.3, 16);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 10);
    const QuadratureRule rule = QuadratureRule::gauss_hermite();
    const std::vector<double> q = solve_q(spec, rule).q;
    const TapIterateResult it = tap_iterate(spec, layout, dis, q, 2000, 1e-12);
    CHECK(it.converged);
    CHECK(it.last_delta <= 1e-12);
    CHECK(static_cast<int>(it.delta_trace.size()) == it.iterations);
    // a fixed point of the two-step map solves the stationarity condition
    const TapReport rep = tap_residuals(spec, layout, dis, it.magnetizations, q);
    for (double r : rep.residuals) CHECK(std::fabs(r) < 1e-10);
}

TEST_CASE("exact residual moments shrink with N") {
    const ModelSpec base = bipartite(0.25, 0.3, 8);  // beta = 0.5 beta_0
    const ScalingTable table = scaling_study(base, {8, 12, 16, 20}, 30,
                                             Estimator::Exact, 2025, {}, 1);
    REQUIRE(table.rows.size() == 4);
    CHECK(table.slope_defined);
    CHECK(table.slope < 0.0);
    // overall decay, with per-step slack for disorder fluctuation
    CHECK(table.rows.back().mean_r2 < table.rows.front().mean_r2);
    for (size_t i = 1; i < table.rows.size(); ++i)
        CHECK(table.rows[i].mean_r2 <
              1.15 * table.rows[i - 1].mean_r2 +
                  2.0 * (table.rows[i].se_r2 + table.rows[i - 1].se_r2));
    for (const ScalingRow& r : table.rows) {
        CHECK(r.mean_r4 >= 0.0);
        CHECK(r.se_r2 > 0.0);
    }
}

TEST_CASE("scaling_study validates its N-list") {
    const ModelSpec base = bipartite(0.25, 0.3, 8);
    CHECK_THROWS_AS(scaling_study(base, {8, 12, 16}, 5, Estimator::Exact, 1),
                    ConfigError);
    CHECK_THROWS_AS(scaling_study(base, {16, 12, 8, 20}, 5, Estimator::Exact, 1),
                    ConfigError);
}

TEST_CASE("scaling_study is deterministic and thread-count independent") {
    const ModelSpec base = bipartite(0.25, 0.3, 8);
    const ScalingTable a =
        scaling_study(base, {8, 10, 12, 14}, 6, Estimator::Exact, 99, {}, 1);
    const ScalingTable b =
        scaling_study(base, {8, 10, 12, 14}, 6, Estimator::Exact, 99, {}, 3);
    for (size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].mean_r2 == b.rows[i].mean_r2);
        CHECK(a.rows[i].mean_r4 == b.rows[i].mean_r4);
    }
    CHECK(a.slope == b.slope);
}

TEST_CASE("cavity identities: beta=0 differences are exactly zero") {
    const ModelSpec spec = bipartite(0.0, 0.4, 10);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 3);
    const std::vector<double> q(2, std::tanh(0.4) * std::tanh(0.4));
    const CavityProbe probe = cavity_check(spec, layout, dis, q, 0, 1, 50, 11);
    CHECK(probe.moment_tanh == 0.0);
    CHECK(probe.se_tanh == 0.0);
}

TEST_CASE("cavity identities: no-interaction profile gives exact zeros too") {
    ModelSpec spec = bipartite(0.6, 0.3, 10);
    spec.delta2 = SymMatrix(2);  // eta fields and couplings all vanish
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 5);
    const CavityProbe probe =
        cavity_check(spec, layout, dis, {0.0, 0.0}, 1, 1, 50, 12);
    CHECK(probe.moment_tanh == 0.0);
    CHECK(probe.moment_onsager == 0.0);
}

TEST_CASE("cavity identity moments are small at moderate N") {
    const ModelSpec spec = bipartite(0.25, 0.3, 14);  // beta = 0.5 beta_0
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 21);
    const QuadratureRule rule = QuadratureRule::gauss_hermite();
    const std::vector<double> q = solve_q(spec, rule).q;
    const CavityProbe probe = cavity_check(spec, layout, dis, q, 0, 1, 400, 17);
    CHECK(probe.k == 1);
    CHECK(probe.n_eta == 400);
    CHECK(probe.moment_tanh >= 0.0);
    CHECK(probe.moment_tanh < 0.05);
    CHECK(probe.moment_onsager < 0.05);
    CHECK(probe.se_tanh > 0.0);

    // higher moment (k=2) is bounded by the lower one for |diff| <= 2
    const CavityProbe p2 = cavity_check(spec, layout, dis, q, 0, 2, 400, 17);
    CHECK(p2.moment_tanh <= 4.0 * probe.moment_tanh + 1e-15);
}

TEST_CASE("cavity_check rejects N too large for exact enumeration") {
    ModelSpec spec = bipartite(0.2, 0.1, 22);
    const SpeciesLayout layout = build_layout(spec);
    DisorderSample fake;
    fake.n = 22;
    CHECK_THROWS_AS(cavity_check(spec, layout, fake, {0.0, 0.0}, 0, 1, 10, 1),
                    TooLargeForExact);
}

TEST_CASE("onsager_correction is equivariant under species relabeling") {
    ModelSpec spec = bipartite(0.4, 0.1, 10);
    spec.lambdas = {0.3, 0.7};
    spec.delta2 = SymMatrix::from_rows({{0.5, 1.2}, {1.2, 0.8}});
    const std::vector<double> q = {0.15, 0.35};
    const std::vector<double> c = onsager_correction(spec, q);

    ModelSpec perm = spec;
    perm.lambdas = {0.7, 0.3};
    perm.delta2 = SymMatrix::from_rows({{0.8, 1.2}, {1.2, 0.5}});
    const std::vector<double> cp = onsager_correction(perm, {0.35, 0.15});
    CHECK(std::fabs(c[0] - cp[1]) < 1e-15);
    CHECK(std::fabs(c[1] - cp[0]) < 1e-15);
}

TEST_CASE("scaling_study at beta=0 reports an undefined slope") {
    const ModelSpec base = bipartite(0.0, 0.3, 8);
    const ScalingTable table =
        scaling_study(base, {8, 10, 12, 14}, 4, Estimator::Exact, 5, {}, 1);
    CHECK_FALSE(table.slope_defined);
    for (const ScalingRow& r : table.rows) CHECK(r.mean_r2 == 0.0);
}

TEST_CASE("tap_iterate tracks MCMC magnetizations at N=512") {
    const ModelSpec spec = bipartite(0.15, 0.3, 512);  // beta = 0.3 beta_0
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 9);
    const QuadratureRule rule = QuadratureRule::gauss_hermite();
    const std::vector<double> q = solve_q(spec, rule).q;

    const TapIterateResult it = tap_iterate(spec, layout, dis, q, 2000, 1e-10);
    REQUIRE(it.converged);

    ChainConfig cfg;
    cfg.n_sweeps = 4000;
    cfg.n_replicas = 2;
    cfg.seed = 77;
    const McmcEstimate est = estimate(spec, layout, dis, cfg);

    double msd = 0.0, mse = 0.0;
    for (int i = 0; i < spec.n; ++i) {
        const double d = it.magnetizations[i] - est.magnetizations[i];
        msd += d * d;
        mse += est.magnetization_se[i] * est.magnetization_se[i];
    }
    msd /= spec.n;
    mse /= spec.n;
    CHECK(msd <= 10.0 * mse);
}
