#include "hamflow/optcontrol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hamflow/newton.hpp"

namespace hamflow {

namespace {

Vec scalar_gradient(const std::function<double(const Vec&)>& fn, const Vec& x) {
    return finite_difference_jacobian([&](const Vec& y) { return Vec::Constant(1, fn(y)); }, x).row(0).transpose();
}

}  // namespace

Mat ControlProblem::jacobian_q(double t, const Vec& q, const Vec& u) const {
    if (f_q) return f_q(t, q, u);
    return finite_difference_jacobian([&](const Vec& y) { return f(t, y, u); }, q);
}

Mat ControlProblem::jacobian_u(double t, const Vec& q, const Vec& u) const {
    if (f_u) return f_u(t, q, u);
    return finite_difference_jacobian([&](const Vec& v) { return f(t, q, v); }, u);
}

Vec ControlProblem::grad_g_q(double t, const Vec& q, const Vec& u) const {
    if (!g) return Vec::Zero(q.size());
    if (g_q) return g_q(t, q, u);
    return scalar_gradient([&](const Vec& y) { return g(t, y, u); }, q);
}

Vec ControlProblem::grad_g_u(double t, const Vec& q, const Vec& u) const {
    if (!g) return Vec::Zero(u.size());
    if (g_u) return g_u(t, q, u);
    return scalar_gradient([&](const Vec& v) { return g(t, q, v); }, u);
}

void ControlProblem::validate() const {
    if (!f || !C || !dC) throw std::invalid_argument("ControlProblem: f, C and dC are required");
    if (q0.size() == 0 || u_dim < 1) throw std::invalid_argument("ControlProblem: empty state or control");
    if (!(T > 0.0)) throw std::invalid_argument("ControlProblem: horizon must be positive");
    const Vec u = Vec::Zero(u_dim);
    if (f(0.0, q0, u).size() != q0.size()) throw std::invalid_argument("ControlProblem: f has the wrong dimension");
    for (const auto& v : u_init) {
        if (v.size() != u_dim) throw std::invalid_argument("ControlProblem: initial control of wrong dimension");
    }
    const Vec fd = scalar_gradient(C, q0);
    if ((dC(q0) - fd).lpNorm<Eigen::Infinity>() > 1e-6 * std::max(1.0, fd.lpNorm<Eigen::Infinity>())) {
        throw std::invalid_argument("ControlProblem: dC disagrees with finite differences of C");
    }
}

ControlHamiltonian control_hamiltonian(const ControlProblem& cp) {
    return [cp](double t, const Vec& q, const Vec& p, const Vec& u) {
        return p.dot(cp.f(t, q, u)) + (cp.g ? cp.g(t, q, u) : 0.0);
    };
}

Vec control_gradient(const ControlProblem& cp, double t, const Vec& q, const Vec& p, const Vec& u) {
    return cp.jacobian_u(t, q, u).transpose() * p + cp.grad_g_u(t, q, u);
}

Vec interpolate_control(const std::vector<Vec>& nodes, double T, double t) {
    const int N = static_cast<int>(nodes.size()) - 1;
    if (N < 1) throw std::invalid_argument("interpolate_control: need at least two nodes");
    const double s = std::clamp(t / T, 0.0, 1.0) * N;
    const int k = std::min(static_cast<int>(s), N - 1);
    const double w = s - k;
    return (1.0 - w) * nodes[k] + w * nodes[k + 1];
}

CostProblem frozen_cost(const ControlProblem& cp, const std::vector<Vec>& controls) {
    const double T = cp.T;
    auto u = [controls, T](double t) { return interpolate_control(controls, T, t); };
    CostProblem out;
    out.label = cp.label;
    out.f = [cp, u](double t, const Vec& q) { return cp.f(t, q, u(t)); };
    out.f_jacobian = [cp, u](double t, const Vec& q) { return cp.jacobian_q(t, q, u(t)); };
    if (cp.g) {
        out.g = [cp, u](double t, const Vec& q) { return cp.g(t, q, u(t)); };
        out.g_gradient = [cp, u](double t, const Vec& q) { return cp.grad_g_q(t, q, u(t)); };
    }
    out.C = cp.C;
    out.dC = cp.dC;
    out.T = cp.T;
    out.q0 = cp.q0;
    return out;
}

FbsmResult solve_fbsm(const ControlProblem& cp, Method method, int N, int max_sweeps, double relax, double tol) {
    if (!(relax > 0.0 && relax <= 1.0)) throw std::invalid_argument("solve_fbsm: relax must lie in (0, 1]");
    if (N < 1 || max_sweeps < 1) throw std::invalid_argument("solve_fbsm: need N >= 1 and max_sweeps >= 1");
    cp.validate();
    std::vector<Vec> u = cp.u_init;
    if (u.empty()) u.assign(N + 1, Vec::Zero(cp.u_dim));
    if (static_cast<int>(u.size()) != N + 1) throw std::invalid_argument("solve_fbsm: u_init needs N + 1 nodes");

    FbsmResult best;
    best.residual = std::numeric_limits<double>::infinity();
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        Trajectory tr = sensitivity(frozen_cost(cp, u), method, N).traj;
        std::vector<Vec> du(N + 1);
        double res = 0.0;
        for (int k = 0; k <= N; ++k) {
            du[k] = control_gradient(cp, tr.times[k], tr.states[k].q, tr.states[k].p, u[k]);
            res = std::max(res, du[k].lpNorm<Eigen::Infinity>());
        }
        if (!std::isfinite(res)) break;
        tr.controls = u;
        tr.solver = "fbsm/" + std::string(to_string(method));
        if (res < best.residual) best = FbsmResult{tr, res, sweep};
        if (res <= tol) return best;
        for (int k = 0; k <= N; ++k) u[k] -= relax * du[k];
    }
    throw FbsmNoConvergence("solve_fbsm: no convergence", best);
}

double PontryaginResiduals::max() const { return std::max({state, costate, stationarity, initial, terminal}); }

PontryaginResiduals pontryagin_residuals(const ControlProblem& cp, const Trajectory& traj, Method method) {
    const int N = static_cast<int>(traj.size()) - 1;
    if (N < 1 || traj.controls.size() != traj.size()) {
        throw std::invalid_argument("pontryagin_residuals: trajectory needs states and controls at every node");
    }
    const HamiltonianProblem adj = make_adjoint_problem(frozen_cost(cp, traj.controls));
    const Stepper stepper = make_stepper(adj, method);
    PontryaginResiduals r;
    for (int k = 0; k < N; ++k) {
        const double h = traj.times[k + 1] - traj.times[k];
        const PhasePoint z = stepper.advance(traj.times[k], traj.states[k], h);
        r.state = std::max(r.state, (z.q - traj.states[k + 1].q).lpNorm<Eigen::Infinity>());
        r.costate = std::max(r.costate, (z.p - traj.states[k + 1].p).lpNorm<Eigen::Infinity>());
    }
    for (int k = 0; k <= N; ++k) {
        const auto& z = traj.states[k];
        r.stationarity = std::max(
            r.stationarity, control_gradient(cp, traj.times[k], z.q, z.p, traj.controls[k]).lpNorm<Eigen::Infinity>());
    }
    r.initial = (traj.front().q - cp.q0).lpNorm<Eigen::Infinity>();
    r.terminal = (traj.back().p - cp.dC(traj.back().q)).lpNorm<Eigen::Infinity>();
    return r;
}

}  // namespace hamflow
