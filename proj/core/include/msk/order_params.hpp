#pragma once

// Fixed-point system for the order parameter q,
//
//   q_s = E tanh^2( beta * eta * sqrt((Delta2 Lambda q)_s) + h ),  eta ~ N(0,1)
//
// plus the critical temperatures beta_c = rho(Delta2 Lambda)^{-1/2},
// beta_0 = beta_c / sqrt(4 alpha), and the sensitivity dq/dbeta.

#include <functional>
#include <vector>

#include "msk/model.hpp"

namespace msk {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;  // standard-normal expectation rule, sum 1
    // Gauss-Hermite rescaled to N(0,1) weighting (Golub-Welsch on the
    // probabilists' recurrence).
    static QuadratureRule gauss_hermite(int n = 61);
};

// E f(eta * sqrt(a) + h) under the rule, eta ~ N(0,1).
double gauss_expect(const std::function<double(double)>& f, double a, double h,
                    const QuadratureRule& rule);

struct OrderParams {
    std::vector<double> q;
    double beta_c = 0.0;
    double beta_0 = 0.0;
    int alpha = 1;
    int iterations = 0;
    double residual = 0.0;
    bool outside_proven_regime = false;  // beta >= beta_0: no uniqueness claim
};

double beta_c(const ModelSpec& spec);
// Returns (beta_0, alpha) with alpha = 2 iff delta2 is indefinite.
std::pair<double, int> beta_0(const ModelSpec& spec);

// Symmetrized spectral computation rho(Delta2 Lambda) =
// rho(Lambda^{1/2} Delta2 Lambda^{1/2}).
double rho_delta2_lambda(const ModelSpec& spec);

// (Delta2 Lambda q)_s for s = 0..m-1.
std::vector<double> delta2_lambda_apply(const ModelSpec& spec,
                                        const std::vector<double>& q);

OrderParams solve_q(const ModelSpec& spec, const QuadratureRule& rule,
                    double damping = 1.0, double tol = 1e-12, int max_iter = 2000);
// Allows a custom start (uniqueness checks use several).
OrderParams solve_q_from(const ModelSpec& spec, const QuadratureRule& rule,
                         std::vector<double> q0, double damping = 1.0,
                         double tol = 1e-12, int max_iter = 2000);

// dq/dbeta at the solved point, via (I - J) q' = b from the implicit
// function theorem applied to the fixed-point system.
std::vector<double> q_sensitivity(const ModelSpec& spec, const OrderParams& solved,
                                  const QuadratureRule& rule);

} // namespace msk
