#pragma once

#include <cmath>
#include <functional>

#include "hamflow/types.hpp"

namespace hamflow {

/// Tolerances shared by every implicit solve in the library.
struct NewtonOptions {
    double tol = 1e-10;            // on ||F(x)||_inf
    int max_iter = 50;
    double armijo = 1e-4;          // sufficient-decrease constant
    double backtrack = 0.5;        // step shrink factor
    double min_step = std::ldexp(1.0, -30);
    double fd_step = 1e-7;         // relative step for finite-difference Jacobians
    // After convergence, take one extra step with the last factorization when
    // it does not increase the residual. Time steppers enable this so that
    // round-off, not tol, governs drift over long runs.
    bool polish = false;
};

struct NewtonResult {
    Vec x;
    double residual = 0.0;
    int iterations = 0;
};

using ResidualFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;

/// Damped Newton iteration for F(x) = 0.
///
/// The Jacobian is formed by central differences unless `jacobian` is given.
/// Steps are globalized with Armijo backtracking on 0.5*||F||^2.
///
/// Throws NoConvergence (best iterate attached) when max_iter is exhausted or
/// the line search falls below min_step, and SingularJacobian when the
/// reciprocal condition estimate drops below machine epsilon.
NewtonResult newton_solve(const ResidualFn& residual, const Vec& x0, const NewtonOptions& opts = {},
                          const JacobianFn& jacobian = {});

/// Central-difference Jacobian of F at x, step opts.fd_step*(1+|x_i|).
Mat finite_difference_jacobian(const ResidualFn& residual, const Vec& x, double rel_step = 1e-7);

}  // namespace hamflow
