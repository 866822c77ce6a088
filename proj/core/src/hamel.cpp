#include "hamflow/hamel.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

#include "hamflow/errors.hpp"
#include "hamflow/ode.hpp"

namespace hamflow {

namespace {

Mat directional_difference(const Trivialization::MatrixFn& phi, const Vec& q, const Vec& v) {
    const double eps = 1e-6 * (1.0 + q.norm()) / std::max(1.0, v.norm());
    return (phi(q + eps * v) - phi(q - eps * v)) / (2.0 * eps);
}

}  // namespace

Trivialization Trivialization::analytic(int dim, MatrixFn phi, DerivativeFn dphi, std::string label) {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int trial = 0; trial < 5; ++trial) {
        Vec q(dim), v(dim);
        for (int i = 0; i < dim; ++i) {
            q[i] = u(rng);
            v[i] = u(rng);
        }
        const Mat a = dphi(q, v);
        const Mat b = directional_difference(phi, q, v);
        if ((a - b).cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
            throw std::invalid_argument("Trivialization: supplied DPhi disagrees with differences of Phi");
        }
    }
    return Trivialization(dim, std::move(phi), std::move(dphi), std::move(label));
}

Trivialization Trivialization::finite_difference(int dim, MatrixFn phi, std::string label) {
    DerivativeFn dphi = [phi](const Vec& q, const Vec& v) { return directional_difference(phi, q, v); };
    return Trivialization(dim, std::move(phi), std::move(dphi), std::move(label));
}

Vec Trivialization::phi_inv(const Vec& q, const Vec& v) const {
    const Eigen::FullPivLU<Mat> lu(phi_(q));
    if (!lu.isInvertible()) throw DomainError("Trivialization: Phi(q) is singular");
    return lu.solve(v);
}

Vec Trivialization::dual_inv(const Vec& q, const Vec& mu) const {
    const Eigen::FullPivLU<Mat> lu(phi_(q).transpose());
    if (!lu.isInvertible()) throw DomainError("Trivialization: Phi(q) is singular");
    return lu.solve(mu);
}

namespace trivializations {

Trivialization identity(int dim) {
    return Trivialization::analytic(
        dim, [dim](const Vec&) { return Mat(Mat::Identity(dim, dim)); },
        [dim](const Vec&, const Vec&) { return Mat(Mat::Zero(dim, dim)); }, "identity");
}

Trivialization scaling(int dim, double c) {
    return Trivialization::analytic(
        dim, [dim, c](const Vec&) { return Mat(c * Mat::Identity(dim, dim)); },
        [dim](const Vec&, const Vec&) { return Mat(Mat::Zero(dim, dim)); }, "scaling");
}

Trivialization so3_left_zyx() {
    return Trivialization::automatic(3, [](const auto& q) { return so3_left_zyx_matrix(q); }, "so3_left_zyx");
}

Mat so3_rotation(const Vec& q) {
    const double cr = std::cos(q[0]), sr = std::sin(q[0]);
    const double cp = std::cos(q[1]), sp = std::sin(q[1]);
    const double cy = std::cos(q[2]), sy = std::sin(q[2]);
    Mat rx(3, 3), ry(3, 3), rz(3, 3);
    rx << 1, 0, 0, 0, cr, -sr, 0, sr, cr;
    ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
    rz << cy, -sy, 0, sy, cy, 0, 0, 0, 1;
    return rz * ry * rx;
}

}  // namespace trivializations

Vec hamel_bracket(const Trivialization& triv, const Vec& q, const Vec& u, const Vec& v) {
    const Mat phi = triv.matrix(q);
    const Vec w = triv.derivative(q, phi * u) * v - triv.derivative(q, phi * v) * u;
    return triv.phi_inv(q, w);
}

Vec coadjoint(const Trivialization& triv, const Vec& q, const Vec& xi, const Vec& alpha) {
    const int n = triv.dim();
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = alpha.dot(hamel_bracket(triv, q, xi, Vec::Unit(n, i)));
    return out;
}

HamiltonianProblem trivialized_hamiltonian(const HamiltonianProblem& prob, const Trivialization& triv) {
    if (prob.dim() != triv.dim()) throw std::invalid_argument("trivialized_hamiltonian: dimension mismatch");
    const int n = prob.dim();
    auto value = [prob, triv](double t, const Vec& q, const Vec& mu) {
        return prob.value(t, q, triv.dual_inv(q, mu));
    };
    auto gradient = [prob, triv, n](double t, const Vec& q, const Vec& mu) {
        const Vec p = triv.dual_inv(q, mu);
        const HamiltonianGradient g = prob.gradient(t, q, p);
        HamiltonianGradient out;
        out.dt = g.dt;
        out.dp = triv.phi_inv(q, g.dp);
        out.dq = g.dq;
        // p(q) = Phi^{-*} mu moves with q: dp.w = -Phi^{-*} (DPhi.w)^T p.
        for (int i = 0; i < n; ++i) out.dq[i] -= p.dot(triv.derivative(q, Vec::Unit(n, i)) * out.dp);
        return out;
    };
    return HamiltonianProblem::analytic(n, value, gradient, {}, prob.label() + "/trivialized");
}

HamelVelocity hamel_vector_field(const HamiltonianProblem& h, const Trivialization& triv, double t,
                                 const TrivializedState& state) {
    if (!state.q.allFinite() || !state.mu.allFinite()) {
        throw EvaluationError("hamel_vector_field: non-finite state", t, {state.q, state.mu});
    }
    const HamiltonianGradient g = h.gradient(t, state.q, state.mu);
    const Vec& xi = g.dp;
    HamelVelocity out;
    const Mat phi = triv.matrix(state.q);
    out.dq = phi * xi;
    out.dmu = coadjoint(triv, state.q, xi, state.mu) - phi.transpose() * g.dq;
    if (!out.dq.allFinite() || !out.dmu.allFinite()) {
        throw EvaluationError("hamel_vector_field: non-finite velocity", t, {state.q, state.mu});
    }
    return out;
}

Trajectory integrate_hamel(const HamiltonianProblem& h, const Trivialization& triv, const TrivializedState& start,
                           double T, int N, const NewtonOptions& opts) {
    if (N < 1 || !(T > 0.0)) throw std::invalid_argument("integrate_hamel: need N >= 1 and T > 0");
    const int n = triv.dim();
    const VectorField field = [&](double t, const Vec& x) {
        const HamelVelocity v = hamel_vector_field(h, triv, t, {x.head(n), x.tail(n)});
        Vec dx(2 * n);
        dx << v.dq, v.dmu;
        return dx;
    };
    const double dt = T / N;
    Trajectory tr;
    tr.solver = "hamel/midpoint/" + triv.label();
    tr.times.push_back(0.0);
    tr.states.push_back({start.q, start.mu});
    Vec x(2 * n);
    x << start.q, start.mu;
    for (int k = 0; k < N; ++k) {
        try {
            x = implicit_midpoint_step(field, k * dt, x, dt, opts);
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "integrate_hamel: step " << k << " failed: " << e.what();
            throw StepFailure(msg.str(), k);
        }
        tr.times.push_back((k + 1) * dt);
        tr.states.push_back({x.head(n), x.tail(n)});
    }
    return tr;
}

Trajectory solve_hamel_type_ii(const HamiltonianProblem& h, const Trivialization& triv, const Vec& q0,
                               const Vec& mu1, double T, int N, const NewtonOptions& opts, const Vec& guess) {
    const int n = triv.dim();
    if (q0.size() != n || mu1.size() != n) throw std::invalid_argument("solve_hamel_type_ii: dimension mismatch");
    NewtonOptions step_opts;
    step_opts.polish = true;
    auto residual = [&](const Vec& mu0) -> Vec {
        return integrate_hamel(h, triv, {q0, mu0}, T, N, step_opts).back().p - mu1;
    };
    const NewtonResult sol = newton_solve(residual, guess.size() == n ? guess : mu1, opts);
    Trajectory tr = integrate_hamel(h, triv, {q0, sol.x}, T, N, step_opts);
    tr.solver = "hamel-type2/" + triv.label();
    tr.residuals.push_back(sol.residual);
    return tr;
}

HamiltonianProblem rigid_body_canonical(const Vec& inertia) {
    if (inertia.size() != 3 || (inertia.array() <= 0.0).any()) {
        throw std::invalid_argument("rigid_body_canonical: need three positive moments of inertia");
    }
    const Vec inv = inertia.cwiseInverse();
    return HamiltonianProblem::automatic(
        3,
        [inv](auto, const auto& q, const auto& p) {
            using S = typename std::decay_t<decltype(q)>::Scalar;
            const VecX<S> qs = q;
            const VecX<S> mu = trivializations::so3_left_zyx_matrix<S>(qs).transpose() * p;
            S e = S(0.0);
            for (int i = 0; i < 3; ++i) e = e + 0.5 * inv[i] * mu[i] * mu[i];
            return e;
        },
        "rigid_body");
}

HamiltonianProblem rigid_body_trivialized(const Vec& inertia) {
    if (inertia.size() != 3 || (inertia.array() <= 0.0).any()) {
        throw std::invalid_argument("rigid_body_trivialized: need three positive moments of inertia");
    }
    const Vec inv = inertia.cwiseInverse();
    return HamiltonianProblem::automatic(
        3,
        [inv](auto t, const auto&, const auto& mu) {
            auto e = 0.0 * t;
            for (int i = 0; i < 3; ++i) e = e + 0.5 * inv[i] * mu[i] * mu[i];
            return e;
        },
        "rigid_body_trivialized");
}

}  // namespace hamflow
