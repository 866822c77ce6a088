#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hamflow/hamiltonian.hpp"
#include "hamflow/newton.hpp"
#include "hamflow/types.hpp"

namespace hamflow {

/// Position space of degree-s polynomials on [0, h] (Lagrange basis on the
/// equispaced points i/s, i = 0..s) paired with an m-point quadrature rule.
struct GalerkinScheme {
    int s = 1;
    std::vector<double> c;  // nodes in [0, 1]
    std::vector<double> b;  // weights, sum 1

    /// Degree-s space with the s-point Gauss-Legendre rule.
    static GalerkinScheme gauss_legendre(int s);
    /// s = 1 with the single node 1/2.
    static GalerkinScheme midpoint();

    [[nodiscard]] int nodes() const { return static_cast<int>(c.size()); }
    /// Throws std::invalid_argument unless sizes agree, nodes lie in [0, 1]
    /// and the weights sum to one within 1e-12.
    void validate() const;
};

/// Gauss-Legendre nodes and weights on [0, 1] (Golub-Welsch).
void gauss_legendre_rule(int m, std::vector<double>& nodes, std::vector<double>& weights);

/// Internal stage values from the extremization: position coefficients q^0..q^s
/// (columns) and momenta at the quadrature nodes.
struct StageRecord {
    Mat positions;  // n x (s+1)
    Mat momenta;    // n x m
    double residual = 0.0;
};

struct DiscreteHamiltonianEval {
    double value = 0.0;
    Vec d1;  // D_1 H_d^+ (q0, p1)
    Vec d2;  // D_2 H_d^+ (q0, p1)
    std::optional<StageRecord> stages;
};

struct StepOutcome {
    PhasePoint z;
    double residual = 0.0;  // Newton residual of the implicit solve (0 for explicit maps)
};

namespace detail {
class DiscreteHamiltonianModel {
public:
    virtual ~DiscreteHamiltonianModel() = default;
    [[nodiscard]] virtual int dim() const = 0;
    [[nodiscard]] virtual DiscreteHamiltonianEval evaluate(double t, const Vec& q0, const Vec& p1, double h) const = 0;
    [[nodiscard]] virtual StepOutcome step(double t, const PhasePoint& z, double h) const = 0;
    /// Jacobian of the step map, or an empty matrix when not available.
    [[nodiscard]] virtual Mat tangent(double, const PhasePoint&, double) const { return {}; }
};
}  // namespace detail

/// Type II generating function H_d^+(q_k, p_{k+1}; h) together with its
/// partials and the one-step map it generates. Cheap to copy; immutable.
class DiscreteHamiltonian {
public:
    DiscreteHamiltonian(std::shared_ptr<const detail::DiscreteHamiltonianModel> model, double h, std::string label);

    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] const std::string& label() const { return label_; }
    [[nodiscard]] int dim() const { return model_->dim(); }
    /// Same generating function at another step size.
    [[nodiscard]] DiscreteHamiltonian with_step(double h) const { return {model_, h, label_}; }

    [[nodiscard]] DiscreteHamiltonianEval evaluate(double t, const Vec& q0, const Vec& p1) const;
    [[nodiscard]] double value(double t, const Vec& q0, const Vec& p1) const { return evaluate(t, q0, p1).value; }
    [[nodiscard]] Vec d1(double t, const Vec& q0, const Vec& p1) const { return evaluate(t, q0, p1).d1; }
    [[nodiscard]] Vec d2(double t, const Vec& q0, const Vec& p1) const { return evaluate(t, q0, p1).d2; }

    /// Solves p_k = D1(q_k, p_{k+1}) for p_{k+1}, then q_{k+1} = D2(q_k, p_{k+1}).
    [[nodiscard]] StepOutcome step_detailed(double t, const PhasePoint& z) const;
    [[nodiscard]] PhasePoint step(double t, const PhasePoint& z) const { return step_detailed(t, z).z; }

    /// d(z_{k+1})/d(z_k); analytic where the model provides it, else central
    /// differences.
    [[nodiscard]] Mat tangent(double t, const PhasePoint& z) const;

private:
    std::shared_ptr<const detail::DiscreteHamiltonianModel> model_;
    double h_;
    std::string label_;
};

using DiscreteHamiltonianFamily = std::function<DiscreteHamiltonian(double h)>;

/// Options used by the implicit steppers: module tolerance plus a polishing step.
NewtonOptions stepper_newton_options();

DiscreteHamiltonian midpoint_discrete_hamiltonian(const HamiltonianProblem& prob, double h,
                                                  const NewtonOptions& opts = stepper_newton_options());
DiscreteHamiltonian galerkin_discrete_hamiltonian(const HamiltonianProblem& prob, const GalerkinScheme& scheme,
                                                  double h, const NewtonOptions& opts = stepper_newton_options());
/// H_d^+ = <p1, q0> + h H(t, q0, p1).
DiscreteHamiltonian symplectic_euler_discrete_hamiltonian(const HamiltonianProblem& prob, double h,
                                                          const NewtonOptions& opts = stepper_newton_options());
/// Exact discrete Hamiltonian evaluated to `tol`; its step map is the exact flow.
DiscreteHamiltonian exact_discrete_hamiltonian_map(const HamiltonianProblem& prob, double h, double tol = 1e-12);

DiscreteHamiltonianFamily midpoint_family(const HamiltonianProblem& prob);
DiscreteHamiltonianFamily galerkin_family(const HamiltonianProblem& prob, const GalerkinScheme& scheme);
DiscreteHamiltonianFamily symplectic_euler_family(const HamiltonianProblem& prob);
DiscreteHamiltonianFamily exact_family(const HamiltonianProblem& prob, double tol = 1e-12);

/// Exact discrete Hamiltonian p(h)q(h) - int_0^h [p qdot - H] dt along the
/// Type II solution with q(0) = q0, p(h) = p1, started at time t.
/// Fine-grid RK4 shooting, refined until two grids agree to `tol`.
double exact_discrete_hamiltonian(const HamiltonianProblem& prob, const Vec& q0, const Vec& p1, double h,
                                  double tol = 1e-12, double t = 0.0);

/// Discrete fiber derivatives F+ = (D2, p1) and F- = (q0, D1).
struct FiberDerivatives {
    PhasePoint plus;
    PhasePoint minus;
};
FiberDerivatives fiber_derivatives(const DiscreteHamiltonian& dH, const Vec& q0, const Vec& p1, double t = 0.0);

// ---------------------------------------------------------------------------
// One-step maps with a variable step size.

class Stepper {
public:
    using AdvanceFn = std::function<StepOutcome(double t, const PhasePoint& z, double h)>;
    using TangentFn = std::function<Mat(double t, const PhasePoint& z, double h)>;

    Stepper(std::string label, AdvanceFn advance, TangentFn tangent = {}, bool symplectic = false);

    [[nodiscard]] const std::string& label() const { return label_; }
    [[nodiscard]] bool symplectic() const { return symplectic_; }
    [[nodiscard]] bool has_tangent() const { return static_cast<bool>(tangent_); }

    [[nodiscard]] StepOutcome advance_detailed(double t, const PhasePoint& z, double h) const {
        return advance_(t, z, h);
    }
    [[nodiscard]] PhasePoint advance(double t, const PhasePoint& z, double h) const { return advance_(t, z, h).z; }
    /// Jacobian of the step map; central differences when no tangent was supplied.
    [[nodiscard]] Mat tangent(double t, const PhasePoint& z, double h) const;

private:
    std::string label_;
    AdvanceFn advance_;
    TangentFn tangent_;
    bool symplectic_;
};

enum class Method { Midpoint, Gauss4, SymplecticEuler, ExplicitEuler, RK4, Exact };

const char* to_string(Method m);
/// Accepts the names printed by to_string (case-sensitive, e.g. "midpoint").
Method method_from_string(const std::string& name);

Stepper make_stepper(const HamiltonianProblem& prob, Method method,
                     const NewtonOptions& opts = stepper_newton_options());
Stepper stepper_from_family(DiscreteHamiltonianFamily family, std::string label);

/// N uniform steps over [t0, t0 + T]. Step failures are rethrown as StepFailure.
Trajectory propagate(const Stepper& stepper, const PhasePoint& z0, double t0, double T, int N);

/// High-accuracy flow map phi_{t0 -> t0+T}(z0): RK4 with Richardson-checked
/// grid doubling until successive results agree to `tol`.
PhasePoint reference_flow(const HamiltonianProblem& prob, double t0, const PhasePoint& z0, double T,
                          double tol = 1e-12);

// ---------------------------------------------------------------------------
// Diagnostics

struct OrderEstimate {
    double order = 0.0;
    std::vector<double> steps;   // h values
    std::vector<double> errors;  // phase-space error at T (inf norm)
};

/// Least-squares slope of log(error) vs log(h) for the maps of `family` run
/// with the given step counts over [0, T]. Without `reference`, the target is
/// reference_flow at tol 1e-13. Errors below 1e-11 * max(1, |ref|) count as
/// noise; fewer than three usable errors throws DegenerateRegression.
OrderEstimate estimate_order(const DiscreteHamiltonianFamily& family, const HamiltonianProblem& prob,
                             const PhasePoint& z0, double T, const std::vector<int>& steps,
                             const std::optional<PhasePoint>& reference = std::nullopt);

/// Least-squares slope of log(y) vs log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// max |(J^T Omega J - Omega)_{ij}| with J the central-difference Jacobian of
/// the step map at z (step 1e-6 (1 + |z|)).
double symplecticity_defect(const Stepper& stepper, double t, const PhasePoint& z, double h);

using MomentumMap = std::function<double(const PhasePoint&)>;
double momentum_map_drift(const Trajectory& traj, const MomentumMap& J);

/// Runs the Galerkin discrete Hamiltonian map and the matching Galerkin
/// discrete Lagrangian map (built from L(q, v) = p v - H with v = D_p H
/// inverted by Newton) for N steps from z0; returns the largest phase-space
/// discrepancy. Throws LegendreInversionFailure when D_pp H is singular.
double lagrangian_equivalence_gap(const HamiltonianProblem& prob, const GalerkinScheme& scheme, double h,
                                  const PhasePoint& z0, int N);

}  // namespace hamflow
