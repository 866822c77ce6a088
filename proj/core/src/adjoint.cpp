#include "hamflow/adjoint.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "hamflow/errors.hpp"
#include "hamflow/newton.hpp"
#include "hamflow/ode.hpp"

namespace hamflow {

Mat CostProblem::jacobian_f(double t, const Vec& q) const {
    if (f_jacobian) return f_jacobian(t, q);
    return finite_difference_jacobian([&](const Vec& y) { return f(t, y); }, q);
}

double CostProblem::running(double t, const Vec& q) const { return g ? g(t, q) : 0.0; }

Vec CostProblem::grad_g(double t, const Vec& q) const {
    if (!g) return Vec::Zero(q.size());
    if (g_gradient) return g_gradient(t, q);
    return finite_difference_jacobian([&](const Vec& y) { return Vec::Constant(1, g(t, y)); }, q).row(0).transpose();
}

void CostProblem::validate() const {
    if (!f || !C || !dC) throw std::invalid_argument("CostProblem: f, C and dC are required");
    if (q0.size() == 0) throw std::invalid_argument("CostProblem: empty initial state");
    if (!(T >= 0.0)) throw std::invalid_argument("CostProblem: negative horizon");
    if (f(0.0, q0).size() != q0.size()) throw std::invalid_argument("CostProblem: f has the wrong dimension");
    const Vec grad = dC(q0);
    if (grad.size() != q0.size()) throw std::invalid_argument("CostProblem: dC has the wrong dimension");
    const Vec fd =
        finite_difference_jacobian([&](const Vec& y) { return Vec::Constant(1, C(y)); }, q0).row(0).transpose();
    if ((grad - fd).lpNorm<Eigen::Infinity>() > 1e-6 * std::max(1.0, fd.lpNorm<Eigen::Infinity>())) {
        throw std::invalid_argument("CostProblem: dC disagrees with finite differences of C");
    }
}

HamiltonianProblem make_adjoint_problem(const CostProblem& cp) {
    const int n = cp.dim();
    auto value = [cp](double t, const Vec& q, const Vec& p) { return p.dot(cp.f(t, q)) + cp.running(t, q); };
    auto grad_q = [cp](double t, const Vec& q, const Vec& p) -> Vec {
        return cp.jacobian_f(t, q).transpose() * p + cp.grad_g(t, q);
    };
    auto gradient = [cp, grad_q](double t, const Vec& q, const Vec& p) {
        HamiltonianGradient g;
        g.dq = grad_q(t, q, p);
        g.dp = cp.f(t, q);
        const double dt = 1e-6 * (1.0 + std::abs(t));
        g.dt = (p.dot(cp.f(t + dt, q) - cp.f(t - dt, q)) + cp.running(t + dt, q) - cp.running(t - dt, q)) /
               ((t + dt) - (t - dt));
        return g;
    };
    // D_pp H = 0 exactly; D_qp H = D_q f^T; D_qq H by differences of the q-gradient.
    auto hessian = [cp, grad_q, n](double t, const Vec& q, const Vec& p) {
        Mat hess = Mat::Zero(2 * n, 2 * n);
        const Mat jf = cp.jacobian_f(t, q);
        if (cp.curvature) {
            hess.topLeftCorner(n, n) = cp.curvature(t, q, p);
        } else {
            const Mat fd = finite_difference_jacobian([&](const Vec& y) { return grad_q(t, y, p); }, q);
            hess.topLeftCorner(n, n) = 0.5 * (fd + fd.transpose());
        }
        hess.topRightCorner(n, n) = jf.transpose();
        hess.bottomLeftCorner(n, n) = jf;
        return hess;
    };
    return HamiltonianProblem::analytic(n, value, gradient, hessian, "adjoint/" + cp.label)
        .with_maximal_degeneracy();
}

Sensitivity sensitivity(const CostProblem& cp, Method method, int N) {
    if (cp.T == 0.0) {
        Trajectory tr;
        tr.times = {0.0};
        tr.states = {PhasePoint{cp.q0, cp.dC(cp.q0)}};
        tr.solver = "sweep/identity";
        return {tr.front().p, tr};
    }
    const HamiltonianProblem adj = make_adjoint_problem(cp);
    const auto dC = cp.dC;
    Trajectory tr = solve_type_ii_sweep(adj, BoundarySpec::type2_free(cp.q0, [dC](const Vec& q) { return dC(q); }),
                                        cp.T, make_stepper(adj, method), N);
    return {tr.front().p, std::move(tr)};
}

double integrated_cost(const CostProblem& cp, const Vec& q0, int N) {
    if (cp.T == 0.0) return cp.C(q0);
    const int n = cp.dim();
    const VectorField field = [&cp, n](double t, const Vec& x) {
        Vec dx(n + 1);
        const Vec q = x.head(n);
        dx.head(n) = cp.f(t, q);
        dx[n] = cp.running(t, q);
        return dx;
    };
    Vec x(n + 1);
    x << q0, 0.0;
    const double h = cp.T / N;
    for (int k = 0; k < N; ++k) x = rk4_step(field, k * h, x, h);
    return cp.C(x.head(n)) + x[n];
}

double gradient_check(const CostProblem& cp, Method method, int N, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("gradient_check: eps must be positive");
    const Vec grad = sensitivity(cp, method, N).grad;
    double worst = 0.0;
    for (int i = 0; i < cp.dim(); ++i) {
        Vec hi = cp.q0, lo = cp.q0;
        hi[i] += eps;
        lo[i] -= eps;
        const double fd = (integrated_cost(cp, hi, N) - integrated_cost(cp, lo, N)) / (hi[i] - lo[i]);
        worst = std::max(worst, std::abs(grad[i] - fd) / std::max(1.0, std::abs(fd)));
    }
    return worst;
}

const char* to_string(AdjointPair s) {
    switch (s) {
        case AdjointPair::Symplectic: return "symplectic_pair";
        case AdjointPair::ExplicitEuler: return "explicit_euler";
    }
    return "?";
}

double commutativity_gap(const CostProblem& cp, AdjointPair pair, int N) {
    if (N < 1) throw std::invalid_argument("commutativity_gap: need N >= 1");
    const double h = cp.T / N;

    // Discretize, then optimize: q_{k+1} = q_k + h f_k, J_h = C(q_N) + h sum g_k.
    std::vector<Vec> qs{cp.q0};
    for (int k = 0; k < N; ++k) qs.push_back(qs.back() + h * cp.f(k * h, qs.back()));
    Vec lambda = cp.dC(qs.back());
    for (int k = N - 1; k >= 0; --k) {
        lambda += h * (cp.jacobian_f(k * h, qs[k]).transpose() * lambda + cp.grad_g(k * h, qs[k]));
    }

    // Optimize, then discretize.
    const Method m = pair == AdjointPair::Symplectic ? Method::SymplecticEuler : Method::ExplicitEuler;
    const Vec otd = sensitivity(cp, m, N).grad;
    return (lambda - otd).lpNorm<Eigen::Infinity>();
}

Mat laplacian_1d(int nx) {
    if (nx < 1) throw std::invalid_argument("laplacian_1d: need nx >= 1");
    const double dx = 1.0 / (nx + 1);
    Mat a = Mat::Zero(nx, nx);
    for (int i = 0; i < nx; ++i) {
        a(i, i) = -2.0;
        if (i > 0) a(i, i - 1) = 1.0;
        if (i + 1 < nx) a(i, i + 1) = 1.0;
    }
    return a / (dx * dx);
}

DiffusionAdjoint diffusion_adjoint_demo(int nx, double T, int N) {
    if (nx < 3) throw std::invalid_argument("diffusion_adjoint_demo: need nx >= 3");
    const Mat a = laplacian_1d(nx);
    CostProblem cp;
    cp.label = "diffusion";
    cp.f = [a](double, const Vec& q) -> Vec { return a * q; };
    cp.f_jacobian = [a](double, const Vec&) { return a; };
    cp.curvature = [nx](double, const Vec&, const Vec&) -> Mat { return Mat::Zero(nx, nx); };
    cp.C = [](const Vec& q) { return 0.5 * q.squaredNorm(); };
    cp.dC = [](const Vec& q) { return q; };
    cp.T = T;
    cp.q0.resize(nx);
    for (int i = 0; i < nx; ++i) {
        const double x = (i + 1.0) / (nx + 1);
        cp.q0[i] = std::sin(M_PI * x) + 0.5 * x * (1.0 - x);
    }

    DiffusionAdjoint out;
    out.q0 = cp.q0;
    out.grad = sensitivity(cp, Method::Midpoint, N).grad;
    const Mat at = (a * T).eval();
    const Vec qT = at.exp() * cp.q0;
    out.oracle = Mat(at.transpose()).exp() * qT;
    out.err_vs_oracle = (out.grad - out.oracle).lpNorm<Eigen::Infinity>() / out.oracle.lpNorm<Eigen::Infinity>();
    // exp(-A T) is symmetric; its largest singular value is exp(-lambda_min T).
    const Vec eig = Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues();
    out.reverse_growth = std::exp(-eig.minCoeff() * T);
    return out;
}

namespace adjoint_battery {

CostProblem nilpotent_linear(Vec q0) {
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    CostProblem cp;
    cp.label = "nilpotent";
    cp.f = [a](double, const Vec& q) -> Vec { return a * q; };
    cp.f_jacobian = [a](double, const Vec&) { return a; };
    cp.C = [](const Vec& q) { return q[0]; };
    cp.dC = [](const Vec&) { return Vec::Unit(2, 0); };
    cp.T = 1.0;
    cp.q0 = std::move(q0);
    return cp;
}

std::vector<CostProblem> nonlinear() {
    std::vector<CostProblem> out;

    CostProblem sine;
    sine.label = "sine";
    sine.f = [](double, const Vec& q) -> Vec { return q.array().sin().matrix(); };
    sine.f_jacobian = [](double, const Vec& q) -> Mat { return q.array().cos().matrix().asDiagonal(); };
    sine.g = [](double, const Vec& q) { return q.squaredNorm(); };
    sine.g_gradient = [](double, const Vec& q) -> Vec { return 2.0 * q; };
    sine.C = [](const Vec& q) { return q.squaredNorm(); };
    sine.dC = [](const Vec& q) -> Vec { return 2.0 * q; };
    sine.T = 1.0;
    sine.q0 = Vec::Constant(1, 0.7);
    out.push_back(sine);

    CostProblem pend;
    pend.label = "pendulum";
    pend.f = [](double, const Vec& q) {
        Vec d(2);
        d << q[1], -std::sin(q[0]);
        return d;
    };
    pend.f_jacobian = [](double, const Vec& q) {
        Mat j(2, 2);
        j << 0, 1, -std::cos(q[0]), 0;
        return j;
    };
    pend.g = [](double, const Vec& q) { return 0.5 * q[0] * q[0]; };
    pend.g_gradient = [](double, const Vec& q) {
        Vec d(2);
        d << q[0], 0.0;
        return d;
    };
    pend.C = [](const Vec& q) { return std::cos(q[0]) + q[1] * q[1]; };
    pend.dC = [](const Vec& q) {
        Vec d(2);
        d << -std::sin(q[0]), 2.0 * q[1];
        return d;
    };
    pend.T = 1.5;
    pend.q0 = (Vec(2) << 0.5, -0.3).finished();
    out.push_back(pend);

    CostProblem vdp;
    vdp.label = "van_der_pol";
    vdp.f = [](double, const Vec& q) {
        Vec d(2);
        d << q[1], (1.0 - q[0] * q[0]) * q[1] - q[0];
        return d;
    };
    vdp.f_jacobian = [](double, const Vec& q) {
        Mat j(2, 2);
        j << 0, 1, -2.0 * q[0] * q[1] - 1.0, 1.0 - q[0] * q[0];
        return j;
    };
    vdp.g = [](double t, const Vec& q) { return 0.1 * (1.0 + t) * q.squaredNorm(); };
    vdp.g_gradient = [](double t, const Vec& q) -> Vec { return 0.2 * (1.0 + t) * q; };
    vdp.C = [](const Vec& q) { return 0.5 * q.squaredNorm(); };
    vdp.dC = [](const Vec& q) { return q; };
    vdp.T = 1.0;
    vdp.q0 = (Vec(2) << 1.0, 0.0).finished();
    out.push_back(vdp);

    CostProblem lv;
    lv.label = "lotka_volterra";
    lv.f = [](double, const Vec& q) {
        Vec d(2);
        d << q[0] * (1.0 - q[1]), q[1] * (q[0] - 1.0);
        return d;
    };
    lv.f_jacobian = [](double, const Vec& q) {
        Mat j(2, 2);
        j << 1.0 - q[1], -q[0], q[1], q[0] - 1.0;
        return j;
    };
    lv.g = [](double, const Vec& q) { return q[0] * q[1]; };
    lv.g_gradient = [](double, const Vec& q) {
        Vec d(2);
        d << q[1], q[0];
        return d;
    };
    lv.C = [](const Vec& q) { return q[0] + q[1] * q[1]; };
    lv.dC = [](const Vec& q) {
        Vec d(2);
        d << 1.0, 2.0 * q[1];
        return d;
    };
    lv.T = 1.0;
    lv.q0 = (Vec(2) << 0.8, 1.2).finished();
    out.push_back(lv);

    return out;
}

}  // namespace adjoint_battery

}  // namespace hamflow
