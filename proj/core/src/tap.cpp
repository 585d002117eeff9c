#include "msk/tap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "msk/errors.hpp"
#include "msk/parallel.hpp"

namespace msk {

std::vector<double> onsager_correction(const ModelSpec& spec,
                                       const std::vector<double>& q) {
    std::vector<double> c(spec.m, 0.0);
    for (int s = 0; s < spec.m; ++s) {
        double acc = 0.0;
        for (int t = 0; t < spec.m; ++t)
            acc += spec.lambdas[t] * spec.delta2(s, t) * (1.0 - q[t]);
        c[s] = spec.beta * spec.beta * acc;
    }
    return c;
}

TapReport tap_residuals(const ModelSpec& spec, const SpeciesLayout& layout,
                        const DisorderSample& disorder,
                        const std::vector<double>& mags,
                        const std::vector<double>& q) {
    const int n = disorder.n;
    if (static_cast<int>(mags.size()) != n)
        throw DimensionError("tap_residuals: mags length does not match N");
    if (static_cast<int>(q.size()) != spec.m)
        throw DimensionError("tap_residuals: q length does not match m");

    TapReport rep;
    rep.n = n;
    rep.onsager = onsager_correction(spec, q);
    const auto [b0, alpha] = beta_0(spec);
    (void)alpha;
    rep.beta_over_beta0 = spec.beta / b0;

    const double scale = spec.beta / std::sqrt(static_cast<double>(n));
    rep.residuals.resize(n);
    for (int i = 0; i < n; ++i) {
        double cav = 0.0;
        for (int j = 0; j < i; ++j) cav += disorder.g(j, i) * mags[j];
        for (int j = i + 1; j < n; ++j) cav += disorder.g(i, j) * mags[j];
        const double arg = scale * cav + spec.h - rep.onsager[layout.species_of[i]] * mags[i];
        rep.residuals[i] = mags[i] - std::tanh(arg);
    }
    double s2 = 0.0, s4 = 0.0;
    for (double r : rep.residuals) {
        s2 += r * r;
        s4 += r * r * r * r;
    }
    rep.moment2 = s2 / n;
    rep.moment4 = s4 / n;
    return rep;
}

TapIterateResult tap_iterate(const ModelSpec& spec, const SpeciesLayout& layout,
                             const DisorderSample& disorder,
                             const std::vector<double>& q, int max_iter,
                             double tol) {
    const int n = disorder.n;
    const std::vector<double> c = onsager_correction(spec, q);
    const double scale = spec.beta / std::sqrt(static_cast<double>(n));

    const double m0 = std::tanh(spec.h);
    std::vector<double> prev(n, m0);  // m^(t-1)
    std::vector<double> cur(n, m0);   // m^(t)
    std::vector<double> next(n);

    TapIterateResult res;
    for (int t = 0; t < max_iter; ++t) {
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
            double cav = 0.0;
            for (int j = 0; j < i; ++j) cav += disorder.g(j, i) * cur[j];
            for (int j = i + 1; j < n; ++j) cav += disorder.g(i, j) * cur[j];
            next[i] = std::tanh(scale * cav + spec.h -
                                c[layout.species_of[i]] * prev[i]);
            delta = std::max(delta, std::fabs(next[i] - cur[i]));
        }
        std::swap(prev, cur);
        std::swap(cur, next);
        res.delta_trace.push_back(delta);
        res.iterations = t + 1;
        res.last_delta = delta;
        if (delta <= tol) {
            res.converged = true;
            break;
        }
    }
    res.magnetizations = cur;
    return res;
}

namespace {

// r_i = outer_i - tanh(field built from inner). Splitting the two roles
// between independent estimates makes the product r^{AB} r^{BA} nearly
// unbiased for the true residual^2: the sampling noise of A enters one
// factor additively and the other only through couplings that exclude
// spin i, so the noise cross-terms vanish in expectation.
std::vector<double> cross_residuals(const ModelSpec& spec, const SpeciesLayout& layout,
                                    const DisorderSample& disorder,
                                    const std::vector<double>& outer,
                                    const std::vector<double>& inner,
                                    const std::vector<double>& c) {
    const int n = disorder.n;
    const double scale = spec.beta / std::sqrt(static_cast<double>(n));
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
        double cav = 0.0;
        for (int j = 0; j < i; ++j) cav += disorder.g(j, i) * inner[j];
        for (int j = i + 1; j < n; ++j) cav += disorder.g(i, j) * inner[j];
        const double arg = scale * cav + spec.h - c[layout.species_of[i]] * inner[i];
        r[i] = outer[i] - std::tanh(arg);
    }
    return r;
}

} // namespace

ScalingTable scaling_study(const ModelSpec& base, const std::vector<int>& n_list,
                           int n_disorder, Estimator estimator, uint64_t seed,
                           const ChainConfig& chain, int threads) {
    if (n_list.size() < 4)
        throw ConfigError("scaling_study: need at least 4 N values");
    if (!std::is_sorted(n_list.begin(), n_list.end()))
        throw ConfigError("scaling_study: N-list must be ascending");

    const QuadratureRule rule = QuadratureRule::gauss_hermite();
    const OrderParams order = solve_q(base, rule);

    ScalingTable out;
    for (size_t ni = 0; ni < n_list.size(); ++ni) {
        ModelSpec spec = base;
        spec.n = n_list[ni];
        const SpeciesLayout layout = build_layout(spec);

        auto one_draw = [&](int d) {
            const uint64_t stream = (static_cast<uint64_t>(ni) << 32) + d + 1;
            const uint64_t disorder_seed = SplitRng(seed, stream).next_u64();
            const DisorderSample dis = sample_disorder(spec, layout, disorder_seed);

            if (spec.beta == 0.0) {
                // Independent spins: the Gibbs magnetization is tanh(h) in
                // closed form, and the stationarity residual vanishes
                // identically (every beta-weighted term is exactly zero).
                const std::vector<double> mags(spec.n, std::tanh(spec.h));
                const TapReport rep = tap_residuals(spec, layout, dis, mags, order.q);
                return std::pair<double, double>{rep.moment2, rep.moment4};
            }

            if (estimator == Estimator::Exact) {
                const std::vector<double> mags =
                    magnetizations(enumerate_gibbs(spec, layout, dis));
                const TapReport rep = tap_residuals(spec, layout, dis, mags, order.q);
                return std::pair<double, double>{rep.moment2, rep.moment4};
            }

            // Four independent chains; the product of two residual vectors
            // built from disjoint chains is free of the sampling-noise
            // floor a single squared residual carries (the factors are
            // independent, and each is an unbiased residual estimate up to
            // second-order tanh curvature).
            ChainConfig cfg = chain;
            if (cfg.n_sweeps < 0) cfg.n_sweeps = std::max<long>(2000, 6L * spec.n);
            cfg.n_replicas = 1;
            std::vector<std::vector<double>> mags(4);
            for (int chain_id = 0; chain_id < 4; ++chain_id) {
                cfg.seed = SplitRng(disorder_seed, 7 + chain_id).next_u64();
                mags[chain_id] = estimate(spec, layout, dis, cfg).magnetizations;
            }

            const std::vector<double> c = onsager_correction(spec, order.q);
            const std::vector<double> rab =
                cross_residuals(spec, layout, dis, mags[0], mags[1], c);
            const std::vector<double> rcd =
                cross_residuals(spec, layout, dis, mags[2], mags[3], c);
            double s2 = 0.0, s4 = 0.0;
            for (int i = 0; i < spec.n; ++i) {
                const double p = rab[i] * rcd[i];
                s2 += p;
                s4 += p * p;
            }
            return std::pair<double, double>{s2 / spec.n, s4 / spec.n};
        };
        const auto draws = parallel_map(n_disorder, threads, one_draw);

        ScalingRow row;
        row.n = spec.n;
        double s2 = 0.0, s2sq = 0.0, s4 = 0.0, s4sq = 0.0;
        for (const auto& [r2, r4] : draws) {
            s2 += r2;
            s2sq += r2 * r2;
            s4 += r4;
            s4sq += r4 * r4;
        }
        row.mean_r2 = s2 / n_disorder;
        row.mean_r4 = s4 / n_disorder;
        if (n_disorder > 1) {
            row.se_r2 = std::sqrt(std::max(0.0, (s2sq - s2 * s2 / n_disorder) /
                                                    (n_disorder - 1) / n_disorder));
            row.se_r4 = std::sqrt(std::max(0.0, (s4sq - s4 * s4 / n_disorder) /
                                                    (n_disorder - 1) / n_disorder));
        }
        out.rows.push_back(row);
    }

    // Log-log least squares of mean residual^2 against N.
    out.slope_defined = std::all_of(out.rows.begin(), out.rows.end(),
                                    [](const ScalingRow& r) { return r.mean_r2 > 0.0; });
    if (out.slope_defined) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        const double k = static_cast<double>(out.rows.size());
        for (const ScalingRow& r : out.rows) {
            const double x = std::log(static_cast<double>(r.n));
            const double y = std::log(r.mean_r2);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        out.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    }
    return out;
}

CavityProbe cavity_check(const ModelSpec& spec, const SpeciesLayout& layout,
                         const DisorderSample& disorder,
                         const std::vector<double>& q, int species, int k,
                         int n_eta, uint64_t seed) {
    const int n = disorder.n;
    if (n > 20) throw TooLargeForExact("cavity_check: N > 20");

    const GibbsTable table = enumerate_gibbs(spec, layout, disorder);
    const std::vector<double> probs = table.probabilities();
    const std::vector<double> mags = magnetizations(table);

    const double root_n = std::sqrt(static_cast<double>(n));
    const double bsc = spec.beta / root_n;
    // Onsager coefficient of the linear-response identity:
    // beta * (Delta2 Lambda (1 - q))_s.
    double dl1q = 0.0;
    for (int t = 0; t < spec.m; ++t)
        dl1q += spec.delta2(species, t) * spec.lambdas[t] * (1.0 - q[t]);
    const double ons_coeff = spec.beta * dl1q;

    SplitRng rng(seed, 0);
    const size_t count = size_t{1} << n;
    std::vector<double> eta(n);
    std::vector<int8_t> spins(n);

    double m_t = 0.0, m_tsq = 0.0, m_o = 0.0, m_osq = 0.0;
    for (int draw = 0; draw < n_eta; ++draw) {
        for (int j = 0; j < n; ++j) {
            const double sd = std::sqrt(spec.delta2(species, layout.species_of[j]));
            eta[j] = sd * rng.normal();
        }

        // rhs field uses the exact magnetizations.
        double eta_m = 0.0;
        for (int j = 0; j < n; ++j) eta_m += eta[j] * mags[j];
        const double t_rhs = bsc * eta_m + spec.h;
        // Same arithmetic form as the per-state tanh below, so equal
        // arguments give an identically zero difference.
        const double e_rhs = std::exp(t_rhs);
        const double tanh_rhs = (e_rhs - 1.0 / e_rhs) / (e_rhs + 1.0 / e_rhs);

        // Gray-code walk tracking v = sum_j eta_j sigma_j. Writing
        // <AV eps E> = <cosh(w) tanh(w)> keeps the beta = 0 difference
        // identically zero (w == t_rhs state by state).
        double v = 0.0;
        for (int j = 0; j < n; ++j) {
            spins[j] = -1;
            v -= eta[j];
        }
        double num_t = 0.0, denom = 0.0, num_v = 0.0;
        uint32_t state = 0;
        for (size_t step = 0; step < count; ++step) {
            if (step > 0) {
                const int b = std::countr_zero(step);
                spins[b] = static_cast<int8_t>(-spins[b]);
                state ^= uint32_t{1} << b;
                v += 2.0 * spins[b] * eta[b];
            }
            const double w = bsc * v + spec.h;
            const double e = std::exp(w);
            const double ch = 0.5 * (e + 1.0 / e);
            const double th = (e - 1.0 / e) / (e + 1.0 / e);
            const double pc = probs[state] * ch;
            denom += pc;
            num_t += pc * (th - tanh_rhs);
            num_v += pc * v;
        }

        const double diff_t = num_t / denom;
        const double lhs_ratio = (num_t / denom) + tanh_rhs;  // <AV eps E>/<AV E>
        const double diff_o =
            num_v / denom / root_n - ons_coeff * lhs_ratio - eta_m / root_n;

        const double pw_t = std::pow(diff_t, 2 * k);
        const double pw_o = std::pow(diff_o, 2 * k);
        m_t += pw_t;
        m_tsq += pw_t * pw_t;
        m_o += pw_o;
        m_osq += pw_o * pw_o;
    }

    CavityProbe probe;
    probe.species = species;
    probe.k = k;
    probe.n_eta = n_eta;
    probe.moment_tanh = m_t / n_eta;
    probe.moment_onsager = m_o / n_eta;
    if (n_eta > 1) {
        probe.se_tanh = std::sqrt(
            std::max(0.0, (m_tsq - m_t * m_t / n_eta) / (n_eta - 1) / n_eta));
        probe.se_onsager = std::sqrt(
            std::max(0.0, (m_osq - m_o * m_o / n_eta) / (n_eta - 1) / n_eta));
    }
    return probe;
}

} // namespace msk
