#include "msk/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msk/errors.hpp"

namespace msk {

void ModelSpec::validate() const {
    if (m < 1) throw ConfigError("ModelSpec: m must be >= 1");
    if (static_cast<int>(lambdas.size()) != m)
        throw ConfigError("ModelSpec: lambdas size does not match m");
    double sum = std::accumulate(lambdas.begin(), lambdas.end(), 0.0);
    if (std::fabs(sum - 1.0) > 1e-12)
        throw ConfigError("ModelSpec: lambdas must sum to 1 (got " + std::to_string(sum) + ")");
    for (double l : lambdas)
        if (!(l > 0.0 && l < 1.0) && !(m == 1 && l == 1.0))
            throw ConfigError("ModelSpec: each lambda must lie in (0,1)");
    if (delta2.dim() != m) throw ConfigError("ModelSpec: delta2 dim does not match m");
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (!(delta2(i, j) >= 0.0))
                throw ConfigError("ModelSpec: delta2 entries must be >= 0");
    if (!(beta >= 0.0)) throw ConfigError("ModelSpec: beta must be >= 0");
    if (!(h >= 0.0)) throw ConfigError("ModelSpec: h must be >= 0");
    if (n < 1) throw ConfigError("ModelSpec: n must be >= 1");
}

SpeciesLayout build_layout(const ModelSpec& spec) {
    spec.validate();
    const int m = spec.m;
    const int n = spec.n;

    std::vector<int> sizes(m);
    std::vector<double> frac(m);
    int assigned = 0;
    for (int s = 0; s < m; ++s) {
        if (spec.lambdas[s] * n < 1.0)
            throw SpeciesTooSmall("build_layout: species " + std::to_string(s) +
                                  " would receive less than one spin");
        sizes[s] = static_cast<int>(std::floor(spec.lambdas[s] * n));
        frac[s] = spec.lambdas[s] * n - sizes[s];
        assigned += sizes[s];
    }
    // Remainder units go to the largest fractional parts, ties to the
    // lowest species index.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[a] > frac[b]; });
    for (int k = 0; k < n - assigned; ++k) ++sizes[order[k]];

    SpeciesLayout layout;
    layout.sizes = sizes;
    layout.species_of.resize(n);
    int pos = 0;
    for (int s = 0; s < m; ++s) {
        layout.ranges.emplace_back(pos, pos + sizes[s]);
        std::fill(layout.species_of.begin() + pos,
                  layout.species_of.begin() + pos + sizes[s], s);
        pos += sizes[s];
    }
    return layout;
}

DisorderSample sample_disorder(const ModelSpec& spec, const SpeciesLayout& layout,
                               uint64_t seed) {
    const int n = spec.n;
    DisorderSample out;
    out.n = n;
    out.seed = seed;
    out.couplings.resize(static_cast<size_t>(n) * (n - 1) / 2);

    SplitRng rng(seed, 0);
    size_t k = 0;
    for (int i = 0; i < n; ++i) {
        const int si = layout.species_of[i];
        for (int j = i + 1; j < n; ++j) {
            const double sd = std::sqrt(spec.delta2(si, layout.species_of[j]));
            out.couplings[k++] = sd * rng.normal();
        }
    }
    return out;
}

double hamiltonian(const ModelSpec& spec, const DisorderSample& disorder,
                   const SpinConfig& sigma) {
    const int n = disorder.n;
    const double scale = spec.beta / std::sqrt(static_cast<double>(n));
    double quad = 0.0;
    size_t k = 0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = i + 1; j < n; ++j) row += disorder.couplings[k++] * sigma.spins[j];
        quad += row * sigma.spins[i];
    }
    double field = 0.0;
    for (int i = 0; i < n; ++i) field += sigma.spins[i];
    return scale * quad + spec.h * field;
}

double local_field(const ModelSpec& spec, const DisorderSample& disorder,
                   const SpinConfig& sigma, int i) {
    const int n = disorder.n;
    const double scale = spec.beta / std::sqrt(static_cast<double>(n));
    double s = 0.0;
    for (int j = 0; j < i; ++j) s += disorder.g(j, i) * sigma.spins[j];
    for (int j = i + 1; j < n; ++j) s += disorder.g(i, j) * sigma.spins[j];
    return scale * s + spec.h;
}

} // namespace msk
