#include "msk/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "msk/errors.hpp"
#include "msk/parallel.hpp"

namespace msk {

namespace {

// Pairwise (tree) summation; the accumulations here run over up to 2^24 terms.
double pairwise_sum(const double* x, size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

} // namespace

std::vector<double> GibbsTable::probabilities() const {
    std::vector<double> p(log_weights.size());
    for (size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_weights[i] - log_z);
    return p;
}

GibbsTable enumerate_gibbs(const ModelSpec& spec, const SpeciesLayout& layout,
                           const DisorderSample& disorder) {
    (void)layout;
    const int n = disorder.n;
    if (n > kMaxExactSingle)
        throw TooLargeForExact("enumerate_gibbs: N > " + std::to_string(kMaxExactSingle));

    const size_t count = size_t{1} << n;
    GibbsTable table;
    table.n = n;
    table.log_weights.resize(count);

    const double scale = spec.beta / std::sqrt(static_cast<double>(n));

    // Gray-code walk: state k differs from k-1 in bit ctz(k). Spin i is +1
    // when bit i of the state mask is set.
    std::vector<int8_t> spins(n, -1);
    double energy = 0.0;
    size_t k = 0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = i + 1; j < n; ++j) row += disorder.couplings[k++] * spins[j];
        energy += row * spins[i];
    }
    energy *= scale;
    energy += spec.h * static_cast<double>(-n);
    table.log_weights[0] = energy;

    uint32_t state = 0;
    for (size_t step = 1; step < count; ++step) {
        const int b = std::countr_zero(step);
        double lf = 0.0;
        for (int j = 0; j < b; ++j) lf += disorder.g(j, b) * spins[j];
        for (int j = b + 1; j < n; ++j) lf += disorder.g(b, j) * spins[j];
        lf = scale * lf + spec.h;

        spins[b] = static_cast<int8_t>(-spins[b]);
        state ^= uint32_t{1} << b;
        energy += 2.0 * spins[b] * lf;
        table.log_weights[state] = energy;
    }

    const double shift = *std::max_element(table.log_weights.begin(),
                                           table.log_weights.end());
    std::vector<double> terms(count);
    for (size_t i = 0; i < count; ++i) terms[i] = std::exp(table.log_weights[i] - shift);
    table.log_z = shift + std::log(pairwise_sum(terms.data(), count));
    return table;
}

std::vector<double> magnetizations(const GibbsTable& table) {
    const int n = table.n;
    const size_t count = size_t{1} << n;
    std::vector<double> mag(n, 0.0);
    for (size_t idx = 0; idx < count; ++idx) {
        const double p = table.prob(idx);
        for (int i = 0; i < n; ++i)
            mag[i] += (idx >> i) & 1 ? p : -p;
    }
    return mag;
}

namespace {

// In-place unnormalized Walsh-Hadamard transform.
void wht(std::vector<double>& v) {
    const size_t n = v.size();
    for (size_t len = 1; len < n; len <<= 1) {
        for (size_t i = 0; i < n; i += len << 1) {
            for (size_t j = i; j < i + len; ++j) {
                const double a = v[j];
                const double b = v[j + len];
                v[j] = a + b;
                v[j + len] = a - b;
            }
        }
    }
}

// Mass of each XOR pattern z over independent replica pairs:
// c(z) = sum_x p(x) p(x ^ z), via two transforms.
std::vector<double> xor_pattern_mass(const GibbsTable& table) {
    std::vector<double> c = table.probabilities();
    wht(c);
    for (double& x : c) x *= x;
    wht(c);
    const double inv = 1.0 / static_cast<double>(c.size());
    for (double& x : c) x *= inv;
    return c;
}

} // namespace

double overlap_expectation(const GibbsTable& table, const SpeciesLayout& layout,
                           const std::function<double(const std::vector<double>&)>& f) {
    const int n = table.n;
    if (n > kMaxExactPair)
        throw TooLargeForExact("overlap_expectation: N > " + std::to_string(kMaxExactPair));

    const int m = static_cast<int>(layout.sizes.size());
    std::vector<uint32_t> masks(m, 0);
    for (int s = 0; s < m; ++s)
        for (int i = layout.ranges[s].first; i < layout.ranges[s].second; ++i)
            masks[s] |= uint32_t{1} << i;

    const std::vector<double> c = xor_pattern_mass(table);
    std::vector<double> r(m);
    double acc = 0.0;
    for (size_t z = 0; z < c.size(); ++z) {
        for (int s = 0; s < m; ++s) {
            const int disagree = std::popcount(static_cast<uint32_t>(z) & masks[s]);
            r[s] = static_cast<double>(layout.sizes[s] - 2 * disagree) / layout.sizes[s];
        }
        acc += c[z] * f(r);
    }
    return acc;
}

OverlapFunctional OverlapFunctional::build(const ModelSpec& spec,
                                           const std::vector<double>& q) {
    const int m = spec.m;
    SymMatrix inner(m);
    for (int s = 0; s < m; ++s)
        for (int t = s; t < m; ++t)
            inner.set(s, t, std::sqrt(spec.lambdas[s]) * spec.delta2(s, t) *
                                std::sqrt(spec.lambdas[t]));
    OverlapFunctional out;
    out.v = matrix_abs(inner);
    out.lambdas = spec.lambdas;
    out.q_ref = q;
    return out;
}

double OverlapFunctional::p(const std::vector<double>& x) const {
    const int m = v.dim();
    double acc = 0.0;
    for (int s = 0; s < m; ++s)
        for (int t = 0; t < m; ++t)
            acc += x[s] * std::sqrt(lambdas[s]) * v(s, t) * std::sqrt(lambdas[t]) * x[t];
    return acc;
}

ConcentrationReport concentration_bound_check(const ModelSpec& spec,
                                              const SpeciesLayout& layout,
                                              const OrderParams& order,
                                              double gamma, int n_disorder,
                                              uint64_t seed, int threads) {
    if (spec.n > kMaxExactPair)
        throw TooLargeForExact("concentration_bound_check: N > " +
                               std::to_string(kMaxExactPair));
    const double admissible = order.beta_c * order.beta_c -
                              4.0 * order.alpha * spec.beta * spec.beta;
    if (gamma < 0.0 || 2.0 * gamma >= admissible)
        throw InvalidGamma("concentration_bound_check: need 0 <= 2*gamma < beta_c^2 - 4*alpha*beta^2");

    const OverlapFunctional pf = OverlapFunctional::build(spec, order.q);
    const double gn = gamma * spec.n;

    auto one_draw = [&](int d) {
        const uint64_t disorder_seed = SplitRng(seed, static_cast<uint64_t>(d) + 1).next_u64();
        const DisorderSample dis = sample_disorder(spec, layout, disorder_seed);
        const GibbsTable table = enumerate_gibbs(spec, layout, dis);
        std::vector<double> diff(spec.m);
        return overlap_expectation(table, layout, [&](const std::vector<double>& r) {
            for (int s = 0; s < spec.m; ++s) diff[s] = r[s] - pf.q_ref[s];
            return std::exp(gn * pf.p(diff));
        });
    };
    const std::vector<double> vals = parallel_map(n_disorder, threads, one_draw);

    ConcentrationReport rep;
    rep.gamma = gamma;
    rep.n_disorder = n_disorder;
    double sum = 0.0, sum2 = 0.0;
    for (double v : vals) {
        sum += v;
        sum2 += v * v;
    }
    rep.mean = sum / n_disorder;
    if (n_disorder > 1) {
        const double var = std::max(0.0, (sum2 - sum * sum / n_disorder) / (n_disorder - 1));
        rep.se = std::sqrt(var / n_disorder);
    }

    const double c = 2.0 * gamma + 4.0 * order.alpha * spec.beta * spec.beta;
    const EigenDecomp ev = sym_eigen(pf.v);
    double det = 1.0;
    for (double lam : ev.eigenvalues) det *= 1.0 - c * lam;
    if (det <= 0.0)
        throw InvalidGamma("concentration_bound_check: determinant bound degenerate");
    rep.bound = 1.0 / std::sqrt(det);
    rep.pass = rep.mean <= rep.bound;
    return rep;
}

} // namespace msk
