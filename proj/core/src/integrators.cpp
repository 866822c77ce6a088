#include "hamflow/integrators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hamflow/errors.hpp"
#include "hamflow/ode.hpp"

namespace hamflow {

namespace {

Mat central_step_jacobian(const std::function<PhasePoint(const PhasePoint&)>& map, const PhasePoint& z) {
    const int n = z.dim();
    const Vec x = z.stacked();
    const double delta = 1e-6 * (1.0 + x.norm());
    Mat jac(2 * n, 2 * n);
    Vec xp = x;
    for (int j = 0; j < 2 * n; ++j) {
        const double hi = x[j] + delta;
        const double lo = x[j] - delta;
        xp[j] = hi;
        const Vec fp = map(PhasePoint::unstack(xp)).stacked();
        xp[j] = lo;
        const Vec fm = map(PhasePoint::unstack(xp)).stacked();
        xp[j] = x[j];
        jac.col(j) = (fp - fm) / (hi - lo);
    }
    return jac;
}

struct ActionRun {
    Vec q;
    Vec p;
    double action = 0.0;
};

/// RK4 on (q, p, S) with S' = <p, D_p H> - H.
ActionRun integrate_with_action(const HamiltonianProblem& prob, double t0, const Vec& q0, const Vec& p0, double h,
                                int substeps) {
    const int n = prob.dim();
    const VectorField field = [&prob, n](double t, const Vec& x) {
        const Vec q = x.head(n);
        const Vec p = x.segment(n, n);
        const HamiltonianGradient g = prob.gradient(t, q, p);
        Vec dx(2 * n + 1);
        dx.head(n) = g.dp;
        dx.segment(n, n) = -g.dq;
        dx[2 * n] = p.dot(g.dp) - prob.value(t, q, p);
        return dx;
    };
    Vec x(2 * n + 1);
    x << q0, p0, 0.0;
    const double dt = h / substeps;
    for (int k = 0; k < substeps; ++k) x = rk4_step(field, t0 + k * dt, x, dt);
    if (!x.allFinite()) throw EvaluationError("exact discrete Hamiltonian: non-finite trajectory", t0, {q0, p0});
    return {x.head(n), x.segment(n, n), x[2 * n]};
}

constexpr int kMaxSubsteps = 1 << 16;

struct ExactSolve {
    double value = 0.0;
    Vec p0;
    Vec q1;
};

ExactSolve solve_exact(const HamiltonianProblem& prob, double t, const Vec& q0, const Vec& p1, double h, double tol) {
    NewtonOptions opts;
    opts.tol = std::min(1e-12, tol);
    opts.polish = true;
    Vec p0 = p1;
    auto run = [&](int substeps) {
        auto residual = [&](const Vec& guess) {
            return Vec(integrate_with_action(prob, t, q0, guess, h, substeps).p - p1);
        };
        p0 = newton_solve(residual, p0, opts).x;
        const ActionRun a = integrate_with_action(prob, t, q0, p0, h, substeps);
        return ExactSolve{p1.dot(a.q) - a.action, p0, a.q};
    };
    int substeps = 8;
    ExactSolve coarse = run(substeps);
    while (substeps < kMaxSubsteps) {
        substeps *= 2;
        ExactSolve fine = run(substeps);
        const double diff = std::abs(fine.value - coarse.value);
        if (diff <= tol * std::max(1.0, std::abs(fine.value))) {
            fine.value += (fine.value - coarse.value) / 15.0;
            return fine;
        }
        coarse = std::move(fine);
    }
    throw NoConvergence("exact discrete Hamiltonian: grid refinement did not settle", p0,
                        std::numeric_limits<double>::infinity(), substeps);
}

class ExactModel final : public detail::DiscreteHamiltonianModel {
public:
    ExactModel(HamiltonianProblem prob, double tol) : prob_(std::move(prob)), tol_(tol) {}

    [[nodiscard]] int dim() const override { return prob_.dim(); }

    [[nodiscard]] DiscreteHamiltonianEval evaluate(double t, const Vec& q0, const Vec& p1, double h) const override {
        const ExactSolve sol = solve_exact(prob_, t, q0, p1, h, tol_);
        DiscreteHamiltonianEval out;
        out.value = sol.value;
        out.d1 = sol.p0;
        out.d2 = sol.q1;
        return out;
    }

    [[nodiscard]] StepOutcome step(double t, const PhasePoint& z, double h) const override {
        return {reference_flow(prob_, t, z, h, tol_), 0.0};
    }

private:
    HamiltonianProblem prob_;
    double tol_;
};

}  // namespace

DiscreteHamiltonian::DiscreteHamiltonian(std::shared_ptr<const detail::DiscreteHamiltonianModel> model, double h,
                                         std::string label)
    : model_(std::move(model)), h_(h), label_(std::move(label)) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("DiscreteHamiltonian: step must be positive");
}

DiscreteHamiltonianEval DiscreteHamiltonian::evaluate(double t, const Vec& q0, const Vec& p1) const {
    if (q0.size() != dim() || p1.size() != dim()) throw std::invalid_argument("DiscreteHamiltonian: dimension mismatch");
    return model_->evaluate(t, q0, p1, h_);
}

StepOutcome DiscreteHamiltonian::step_detailed(double t, const PhasePoint& z) const {
    if (z.dim() != dim() || z.p.size() != dim()) throw std::invalid_argument("DiscreteHamiltonian: dimension mismatch");
    if (!z.finite()) throw EvaluationError("DiscreteHamiltonian::step: non-finite state", t, z);
    return model_->step(t, z, h_);
}

Mat DiscreteHamiltonian::tangent(double t, const PhasePoint& z) const {
    Mat phi = model_->tangent(t, z, h_);
    if (phi.size() > 0) return phi;
    return central_step_jacobian([&](const PhasePoint& w) { return step(t, w); }, z);
}

double exact_discrete_hamiltonian(const HamiltonianProblem& prob, const Vec& q0, const Vec& p1, double h, double tol,
                                  double t) {
    if (!(h > 0.0)) throw std::invalid_argument("exact_discrete_hamiltonian: step must be positive");
    return solve_exact(prob, t, q0, p1, h, tol).value;
}

DiscreteHamiltonian exact_discrete_hamiltonian_map(const HamiltonianProblem& prob, double h, double tol) {
    return DiscreteHamiltonian(std::make_shared<ExactModel>(prob, tol), h, "exact");
}

DiscreteHamiltonianFamily exact_family(const HamiltonianProblem& prob, double tol) {
    return [prob, tol](double h) { return exact_discrete_hamiltonian_map(prob, h, tol); };
}

FiberDerivatives fiber_derivatives(const DiscreteHamiltonian& dH, const Vec& q0, const Vec& p1, double t) {
    const DiscreteHamiltonianEval ev = dH.evaluate(t, q0, p1);
    return {PhasePoint{ev.d2, p1}, PhasePoint{q0, ev.d1}};
}

// ---------------------------------------------------------------------------

Stepper::Stepper(std::string label, AdvanceFn advance, TangentFn tangent, bool symplectic)
    : label_(std::move(label)), advance_(std::move(advance)), tangent_(std::move(tangent)), symplectic_(symplectic) {}

Mat Stepper::tangent(double t, const PhasePoint& z, double h) const {
    if (tangent_) return tangent_(t, z, h);
    return central_step_jacobian([&](const PhasePoint& w) { return advance(t, w, h); }, z);
}

const char* to_string(Method m) {
    switch (m) {
        case Method::Midpoint: return "midpoint";
        case Method::Gauss4: return "gauss4";
        case Method::SymplecticEuler: return "symplectic_euler";
        case Method::ExplicitEuler: return "explicit_euler";
        case Method::RK4: return "rk4";
        case Method::Exact: return "exact";
    }
    return "?";
}

Method method_from_string(const std::string& name) {
    for (Method m : {Method::Midpoint, Method::Gauss4, Method::SymplecticEuler, Method::ExplicitEuler, Method::RK4,
                     Method::Exact}) {
        if (name == to_string(m)) return m;
    }
    throw std::invalid_argument("unknown method '" + name + "'");
}

Stepper stepper_from_family(DiscreteHamiltonianFamily family, std::string label) {
    auto advance = [family](double t, const PhasePoint& z, double h) { return family(h).step_detailed(t, z); };
    auto tangent = [family](double t, const PhasePoint& z, double h) { return family(h).tangent(t, z); };
    return Stepper(std::move(label), advance, tangent, true);
}

namespace {

Stepper stepper_from_dh(const DiscreteHamiltonian& dh, std::string label = {}) {
    auto advance = [dh](double t, const PhasePoint& z, double h) { return dh.with_step(h).step_detailed(t, z); };
    auto tangent = [dh](double t, const PhasePoint& z, double h) { return dh.with_step(h).tangent(t, z); };
    return Stepper(label.empty() ? dh.label() : std::move(label), advance, tangent, true);
}

}  // namespace

Stepper make_stepper(const HamiltonianProblem& prob, Method method, const NewtonOptions& opts) {
    switch (method) {
        case Method::Midpoint: return stepper_from_dh(midpoint_discrete_hamiltonian(prob, 1.0, opts));
        case Method::Gauss4:
            return stepper_from_dh(galerkin_discrete_hamiltonian(prob, GalerkinScheme::gauss_legendre(2), 1.0, opts),
                                   "gauss4");
        case Method::SymplecticEuler: return stepper_from_dh(symplectic_euler_discrete_hamiltonian(prob, 1.0, opts));
        case Method::Exact: return stepper_from_dh(exact_discrete_hamiltonian_map(prob, 1.0));
        case Method::ExplicitEuler: {
            auto advance = [prob](double t, const PhasePoint& z, double h) {
                const PhaseVelocity v = hamiltonian_vector_field(prob, t, z);
                return StepOutcome{PhasePoint{z.q + h * v.dq, z.p + h * v.dp}, 0.0};
            };
            auto tangent = [prob](double t, const PhasePoint& z, double h) {
                const int n = z.dim();
                const Mat H = prob.hessian(t, z.q, z.p);
                Mat phi = Mat::Identity(2 * n, 2 * n);
                phi.topRows(n) += h * H.bottomRows(n);
                phi.bottomRows(n) -= h * H.topRows(n);
                return phi;
            };
            return Stepper("explicit_euler", advance, tangent, false);
        }
        case Method::RK4: {
            auto advance = [prob](double t, const PhasePoint& z, double h) {
                const VectorField f = [&prob](double s, const Vec& x) {
                    return hamiltonian_vector_field_stacked(prob, s, x);
                };
                return StepOutcome{PhasePoint::unstack(rk4_step(f, t, z.stacked(), h)), 0.0};
            };
            return Stepper("rk4", advance, {}, false);
        }
    }
    throw std::invalid_argument("make_stepper: unknown method");
}

Trajectory propagate(const Stepper& stepper, const PhasePoint& z0, double t0, double T, int N) {
    if (N < 1) throw std::invalid_argument("propagate: N must be at least 1");
    if (!(T > 0.0)) throw std::invalid_argument("propagate: T must be positive");
    const double h = T / N;
    Trajectory traj;
    traj.solver = stepper.label();
    traj.times.reserve(N + 1);
    traj.states.reserve(N + 1);
    traj.times.push_back(t0);
    traj.states.push_back(z0);
    for (int k = 0; k < N; ++k) {
        const double tk = t0 + k * h;
        StepOutcome out;
        try {
            out = stepper.advance_detailed(tk, traj.states.back(), h);
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << stepper.label() << ": step " << k << " failed: " << e.what();
            throw StepFailure(msg.str(), k);
        }
        if (!out.z.finite()) {
            std::ostringstream msg;
            msg << stepper.label() << ": step " << k << " produced a non-finite state";
            throw StepFailure(msg.str(), k);
        }
        traj.times.push_back(t0 + (k + 1) * h);
        traj.states.push_back(std::move(out.z));
        traj.residuals.push_back(out.residual);
    }
    return traj;
}

PhasePoint reference_flow(const HamiltonianProblem& prob, double t0, const PhasePoint& z0, double T, double tol) {
    const VectorField f = [&prob](double t, const Vec& x) { return hamiltonian_vector_field_stacked(prob, t, x); };
    auto run = [&](int steps) {
        Vec x = z0.stacked();
        const double dt = T / steps;
        for (int k = 0; k < steps; ++k) x = rk4_step(f, t0 + k * dt, x, dt);
        return x;
    };
    int steps = std::max(4, static_cast<int>(std::ceil(std::abs(T) / 0.1)));
    Vec coarse = run(steps);
    while (steps < (1 << 24)) {
        steps *= 2;
        const Vec fine = run(steps);
        const double diff = (fine - coarse).lpNorm<Eigen::Infinity>();
        if (!fine.allFinite()) break;
        if (diff <= tol * std::max(1.0, fine.lpNorm<Eigen::Infinity>())) {
            return PhasePoint::unstack(fine + (fine - coarse) / 15.0);
        }
        coarse = fine;
    }
    throw NoConvergence("reference_flow: grid refinement did not settle", z0.stacked(),
                        std::numeric_limits<double>::infinity(), steps);
}

}  // namespace hamflow
