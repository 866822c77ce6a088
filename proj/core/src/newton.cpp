#include "hamflow/newton.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hamflow/errors.hpp"

namespace hamflow {

Mat finite_difference_jacobian(const ResidualFn& residual, const Vec& x, double rel_step) {
    const Vec f0 = residual(x);
    Mat jac(f0.size(), x.size());
    Vec xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double step = rel_step * (1.0 + std::abs(x[j]));
        // Divide by the representable spacing so linear maps are differenced exactly.
        const double hi = x[j] + step;
        const double lo = x[j] - step;
        xp[j] = hi;
        const Vec fp = residual(xp);
        xp[j] = lo;
        const Vec fm = residual(xp);
        xp[j] = x[j];
        jac.col(j) = (fp - fm) / (hi - lo);
    }
    return jac;
}

namespace {

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace

NewtonResult newton_solve(const ResidualFn& residual, const Vec& x0, const NewtonOptions& opts,
                          const JacobianFn& jacobian) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    Vec x = x0;
    Vec fx = residual(x);
    if (fx.size() != x.size()) {
        throw std::invalid_argument("newton_solve: residual size differs from unknown size");
    }
    double res = inf_norm(fx);
    if (!std::isfinite(res)) {
        throw NoConvergence("newton_solve: residual is not finite at the initial guess", x, res, 0);
    }

    Eigen::PartialPivLU<Mat> lu;
    bool have_lu = false;
    int it = 0;
    while (res > opts.tol) {
        if (it >= opts.max_iter) {
            std::ostringstream msg;
            msg << "newton_solve: no convergence after " << it << " iterations (residual " << res << ")";
            throw NoConvergence(msg.str(), x, res, it);
        }
        const Mat jac = jacobian ? jacobian(x) : finite_difference_jacobian(residual, x, opts.fd_step);
        lu.compute(jac);
        have_lu = true;
        const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
        const double rcond = pivot > 0.0 && std::isfinite(pivot) ? lu.rcond() : 0.0;
        if (!(rcond > eps)) {
            throw SingularJacobian("newton_solve: singular Jacobian", std::isfinite(rcond) ? rcond : 0.0);
        }
        const Vec dx = lu.solve(-fx);
        ++it;

        // Armijo backtracking on phi = 0.5 |F|^2; the Newton direction gives
        // directional derivative -2 phi.
        const double phi = 0.5 * fx.squaredNorm();
        double alpha = 1.0;
        Vec x_trial;
        Vec f_trial;
        for (;;) {
            x_trial = x + alpha * dx;
            f_trial = residual(x_trial);
            const double phi_trial = 0.5 * f_trial.squaredNorm();
            if (std::isfinite(phi_trial) && phi_trial <= (1.0 - 2.0 * opts.armijo * alpha) * phi) break;
            alpha *= opts.backtrack;
            if (alpha < opts.min_step) {
                throw NoConvergence("newton_solve: line search failed", x, res, it);
            }
        }
        x = std::move(x_trial);
        fx = std::move(f_trial);
        res = inf_norm(fx);
    }

    if (opts.polish && have_lu && res > 0.0) {
        const Vec x_polish = x + lu.solve(-fx);
        const Vec f_polish = residual(x_polish);
        const double r_polish = inf_norm(f_polish);
        if (r_polish <= res) {
            x = x_polish;
            res = r_polish;
        }
    }
    return {x, res, it};
}

}  // namespace hamflow
