#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hamflow/errors.hpp"
#include "hamflow/integrators.hpp"
#include "lagrange_basis.hpp"

namespace hamflow {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DegenerateRegression("loglog_slope: need at least two points");
    const auto m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DegenerateRegression("loglog_slope: nonpositive sample");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = m * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw DegenerateRegression("loglog_slope: abscissae coincide");
    return (m * sxy - sx * sy) / denom;
}

OrderEstimate estimate_order(const DiscreteHamiltonianFamily& family, const HamiltonianProblem& prob,
                             const PhasePoint& z0, double T, const std::vector<int>& steps,
                             const std::optional<PhasePoint>& reference) {
    if (steps.size() < 3) throw DegenerateRegression("estimate_order: need at least three step counts");
    const PhasePoint ref = reference ? *reference : reference_flow(prob, 0.0, z0, T, 1e-13);
    const Vec ref_x = ref.stacked();
    const double floor = 1e-11 * std::max(1.0, ref_x.lpNorm<Eigen::Infinity>());

    OrderEstimate est;
    std::vector<double> hs;
    std::vector<double> errs;
    for (int N : steps) {
        if (N < 1) throw std::invalid_argument("estimate_order: step counts must be positive");
        const double h = T / N;
        const DiscreteHamiltonian dh = family(h);
        PhasePoint z = z0;
        for (int k = 0; k < N; ++k) z = dh.step(k * h, z);
        const double err = (z.stacked() - ref_x).lpNorm<Eigen::Infinity>();
        est.steps.push_back(h);
        est.errors.push_back(err);
        if (err > floor) {
            hs.push_back(h);
            errs.push_back(err);
        }
    }
    if (hs.size() < 3) {
        std::ostringstream msg;
        msg << "estimate_order: only " << hs.size() << " errors above the noise floor " << floor;
        throw DegenerateRegression(msg.str());
    }
    est.order = loglog_slope(hs, errs);
    return est;
}

double symplecticity_defect(const Stepper& stepper, double t, const PhasePoint& z, double h) {
    const int n = z.dim();
    const Vec x = z.stacked();
    const double delta = 1e-6 * (1.0 + x.norm());
    Mat jac(2 * n, 2 * n);
    Vec xp = x;
    for (int j = 0; j < 2 * n; ++j) {
        const double hi = x[j] + delta;
        const double lo = x[j] - delta;
        xp[j] = hi;
        const Vec fp = stepper.advance(t, PhasePoint::unstack(xp), h).stacked();
        xp[j] = lo;
        const Vec fm = stepper.advance(t, PhasePoint::unstack(xp), h).stacked();
        xp[j] = x[j];
        jac.col(j) = (fp - fm) / (hi - lo);
    }
    const Mat omega = canonical_symplectic(n);
    return (jac.transpose() * omega * jac - omega).cwiseAbs().maxCoeff();
}

double momentum_map_drift(const Trajectory& traj, const MomentumMap& J) {
    if (traj.states.empty()) throw std::invalid_argument("momentum_map_drift: empty trajectory");
    const double j0 = J(traj.states.front());
    double drift = 0.0;
    for (const PhasePoint& z : traj.states) drift = std::max(drift, std::abs(J(z) - j0));
    return drift;
}

namespace {

/// p solving v = D_p H(t, q, p).
Vec legendre_momentum(const HamiltonianProblem& prob, double t, const Vec& q, const Vec& v, const Vec& guess) {
    const int n = prob.dim();
    auto residual = [&](const Vec& p) -> Vec { return prob.grad_p(t, q, p) - v; };
    auto jacobian = [&](const Vec& p) -> Mat { return prob.hessian(t, q, p).bottomRightCorner(n, n); };
    NewtonOptions opts;
    opts.polish = true;
    try {
        return newton_solve(residual, guess, opts, jacobian).x;
    } catch (const SingularJacobian& e) {
        throw LegendreInversionFailure(std::string("Legendre transform: ") + e.what());
    } catch (const NoConvergence& e) {
        throw LegendreInversionFailure(std::string("Legendre transform: ") + e.what());
    }
}

/// Galerkin discrete Lagrangian map (q0, p0) -> (q1, p1), with
/// L(t, q, v) = <p, v> - H(t, q, p), v = D_p H. Uses D_v L = p and D_q L = -D_q H.
class LagrangianMap {
public:
    LagrangianMap(const HamiltonianProblem& prob, const GalerkinScheme& scheme)
        : prob_(prob), sc_(scheme), basis_(scheme.s, scheme.c) {}

    PhasePoint step(double t, const PhasePoint& z, double h) const {
        const int n = prob_.dim();
        const int s = sc_.s;
        const Vec v0 = prob_.grad_p(t, z.q, z.p);
        Vec x(n * s);
        for (int i = 1; i <= s; ++i) x.segment((i - 1) * n, n) = z.q + (static_cast<double>(i) / s) * h * v0;

        auto residual = [&](const Vec& y) -> Vec {
            const std::vector<Vec> g = stationarity(t, h, z.q, y, z.p);
            Vec r(n * s);
            for (int k = 1; k < s; ++k) r.segment((k - 1) * n, n) = g[k];
            r.segment((s - 1) * n, n) = -g[0] - z.p;
            return r;
        };
        NewtonOptions opts;
        opts.polish = true;
        const Vec sol = newton_solve(residual, x, opts).x;
        const std::vector<Vec> g = stationarity(t, h, z.q, sol, z.p);
        return {sol.segment((s - 1) * n, n), g[s]};
    }

private:
    /// G_i = sum_j b_j [P_j l_i'(c_j) - h D_q H_j l_i(c_j)], i = 0..s: the
    /// derivative of h sum_j b_j L(Q_j, V_j) in the coefficient q^i.
    std::vector<Vec> stationarity(double t, double h, const Vec& q0, const Vec& y, const Vec& p_guess) const {
        const int n = prob_.dim();
        const int s = sc_.s;
        std::vector<Vec> qi(s + 1);
        qi[0] = q0;
        for (int i = 1; i <= s; ++i) qi[i] = y.segment((i - 1) * n, n);
        std::vector<Vec> g(s + 1, Vec::Zero(n));
        for (int j = 0; j < sc_.nodes(); ++j) {
            const double tj = t + sc_.c[j] * h;
            Vec Q = Vec::Zero(n);
            Vec V = Vec::Zero(n);
            for (int i = 0; i <= s; ++i) {
                Q += basis_.l(i, j) * qi[i];
                V += basis_.dl(i, j) * qi[i];
            }
            V /= h;
            const Vec P = legendre_momentum(prob_, tj, Q, V, p_guess);
            const Vec dq = prob_.grad_q(tj, Q, P);
            for (int i = 0; i <= s; ++i) g[i] += sc_.b[j] * (basis_.dl(i, j) * P - h * basis_.l(i, j) * dq);
        }
        return g;
    }

    const HamiltonianProblem& prob_;
    const GalerkinScheme& sc_;
    detail::BasisTable basis_;
};

}  // namespace

double lagrangian_equivalence_gap(const HamiltonianProblem& prob, const GalerkinScheme& scheme, double h,
                                  const PhasePoint& z0, int N) {
    scheme.validate();
    if (N < 0) throw std::invalid_argument("lagrangian_equivalence_gap: N must be nonnegative");
    const int n = prob.dim();
    const Mat hpp = prob.hessian(0.0, z0.q, z0.p).bottomRightCorner(n, n);
    const double smin = Eigen::JacobiSVD<Mat>(hpp).singularValues().minCoeff();
    if (!(smin > 1e-8)) {
        throw LegendreInversionFailure("lagrangian_equivalence_gap: D_pp H is singular at the initial point");
    }
    if (N == 0) return 0.0;

    const DiscreteHamiltonian dh = galerkin_discrete_hamiltonian(prob, scheme, h);
    const LagrangianMap lag(prob, scheme);
    PhasePoint zh = z0;
    PhasePoint zl = z0;
    double gap = 0.0;
    for (int k = 0; k < N; ++k) {
        const double t = k * h;
        zh = dh.step(t, zh);
        zl = lag.step(t, zl, h);
        gap = std::max(gap, (zh.stacked() - zl.stacked()).lpNorm<Eigen::Infinity>());
    }
    return gap;
}

}  // namespace hamflow
