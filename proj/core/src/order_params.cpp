#include "msk/order_params.hpp"

#include <algorithm>
#include <cmath>

#include "msk/errors.hpp"

namespace msk {

QuadratureRule QuadratureRule::gauss_hermite(int n) {
    // Golub-Welsch on the probabilists' Hermite recurrence: the Jacobi
    // matrix has zero diagonal and off-diagonals sqrt(k). Eigenvalues are
    // the nodes; weights are squared first eigenvector components (they
    // sum to 1, giving the N(0,1) expectation rule directly).
    SymMatrix jac(n);
    for (int k = 1; k < n; ++k) jac.set(k - 1, k, std::sqrt(static_cast<double>(k)));
    EigenDecomp d = sym_eigen(jac);

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        // sym_eigen sorts descending; store nodes ascending.
        const int src = n - 1 - k;
        rule.nodes[k] = d.eigenvalues[src];
        rule.weights[k] = d.vec(0, src) * d.vec(0, src);
    }
    return rule;
}

double gauss_expect(const std::function<double(double)>& f, double a, double h,
                    const QuadratureRule& rule) {
    const double root_a = std::sqrt(a);
    double s = 0.0;
    for (size_t k = 0; k < rule.nodes.size(); ++k)
        s += rule.weights[k] * f(rule.nodes[k] * root_a + h);
    return s;
}

double rho_delta2_lambda(const ModelSpec& spec) {
    const int m = spec.m;
    SymMatrix sym(m);
    for (int s = 0; s < m; ++s)
        for (int t = s; t < m; ++t)
            sym.set(s, t, std::sqrt(spec.lambdas[s]) * spec.delta2(s, t) *
                              std::sqrt(spec.lambdas[t]));
    return spectral_radius(sym);
}

double beta_c(const ModelSpec& spec) {
    const double rho = rho_delta2_lambda(spec);
    if (rho <= 0.0) throw DegenerateModel("beta_c: rho(Delta2 Lambda) is zero");
    return 1.0 / std::sqrt(rho);
}

std::pair<double, int> beta_0(const ModelSpec& spec) {
    const double bc = beta_c(spec);
    const int alpha =
        classify_definiteness(spec.delta2) == Definiteness::Indefinite ? 2 : 1;
    return {bc / std::sqrt(4.0 * alpha), alpha};
}

std::vector<double> delta2_lambda_apply(const ModelSpec& spec,
                                        const std::vector<double>& q) {
    std::vector<double> out(spec.m, 0.0);
    for (int s = 0; s < spec.m; ++s)
        for (int t = 0; t < spec.m; ++t)
            out[s] += spec.delta2(s, t) * spec.lambdas[t] * q[t];
    return out;
}

namespace {

double tanh_sq(double x) {
    const double t = std::tanh(x);
    return t * t;
}

std::vector<double> picard_map(const ModelSpec& spec, const QuadratureRule& rule,
                               const std::vector<double>& q) {
    const std::vector<double> dq = delta2_lambda_apply(spec, q);
    std::vector<double> out(spec.m);
    for (int s = 0; s < spec.m; ++s)
        out[s] = gauss_expect(tanh_sq, spec.beta * spec.beta * dq[s], spec.h, rule);
    return out;
}

double max_residual(const std::vector<double>& a, const std::vector<double>& b) {
    double r = 0.0;
    for (size_t i = 0; i < a.size(); ++i) r = std::max(r, std::fabs(a[i] - b[i]));
    return r;
}

} // namespace

OrderParams solve_q_from(const ModelSpec& spec, const QuadratureRule& rule,
                         std::vector<double> q0, double damping, double tol,
                         int max_iter) {
    spec.validate();
    OrderParams out;
    out.beta_c = beta_c(spec);
    std::tie(out.beta_0, out.alpha) = beta_0(spec);
    out.outside_proven_regime = spec.beta >= out.beta_0;

    std::vector<double> q = std::move(q0);
    std::vector<double> f = picard_map(spec, rule, q);
    double res = max_residual(q, f);
    double damp = damping;

    int iter = 0;
    while (res > tol) {
        if (iter >= max_iter)
            throw NoConvergence("solve_q: max_iter exceeded", q, res);
        for (int s = 0; s < spec.m; ++s) q[s] = (1.0 - damp) * q[s] + damp * f[s];
        f = picard_map(spec, rule, q);
        const double next = max_residual(q, f);
        if (next > res) damp = std::max(0.125, 0.5 * damp);
        res = next;
        ++iter;
    }
    out.q = q;
    out.iterations = iter;
    out.residual = res;
    return out;
}

OrderParams solve_q(const ModelSpec& spec, const QuadratureRule& rule,
                    double damping, double tol, int max_iter) {
    // tanh^2(h) is exact at beta = 0 and close for small beta.
    const double q0 = std::tanh(spec.h) * std::tanh(spec.h);
    return solve_q_from(spec, rule, std::vector<double>(spec.m, q0), damping, tol,
                        max_iter);
}

std::vector<double> q_sensitivity(const ModelSpec& spec, const OrderParams& solved,
                                  const QuadratureRule& rule) {
    const int m = spec.m;
    const std::vector<double> dq = delta2_lambda_apply(spec, solved.q);
    const double beta = spec.beta;

    // g(x) = tanh^2(x); g''(x) = (2 - 4 sinh^2 x) / cosh^4 x.
    auto g2 = [](double x) {
        const double sh = std::sinh(x);
        const double ch = std::cosh(x);
        return (2.0 - 4.0 * sh * sh) / (ch * ch * ch * ch);
    };

    std::vector<double> eg2(m);
    for (int t = 0; t < m; ++t)
        eg2[t] = gauss_expect(g2, beta * beta * dq[t], spec.h, rule);

    std::vector<double> a(static_cast<size_t>(m) * m, 0.0);
    std::vector<double> b(m);
    for (int t = 0; t < m; ++t) {
        for (int r = 0; r < m; ++r) {
            const double jac = 0.5 * beta * beta * spec.delta2(t, r) * spec.lambdas[r] * eg2[t];
            a[t * m + r] = (t == r ? 1.0 : 0.0) - jac;
        }
        b[t] = beta * dq[t] * eg2[t];
    }
    return solve_linear(std::move(a), std::move(b));
}

} // namespace msk
