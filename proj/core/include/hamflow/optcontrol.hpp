#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hamflow/adjoint.hpp"
#include "hamflow/errors.hpp"
#include "hamflow/integrators.hpp"

namespace hamflow {

/// min_u C(q(T)) + int_0^T g(t, q, u) dt  subject to  q' = f(t, q, u), q(0) = q0.
/// Partial derivatives are optional (central differences otherwise).
struct ControlProblem {
    using Dynamics = std::function<Vec(double t, const Vec& q, const Vec& u)>;
    using DynamicsJacobian = std::function<Mat(double t, const Vec& q, const Vec& u)>;
    using Running = std::function<double(double t, const Vec& q, const Vec& u)>;
    using RunningGradient = std::function<Vec(double t, const Vec& q, const Vec& u)>;

    std::string label = "control";
    Dynamics f;
    DynamicsJacobian f_q, f_u;
    Running g;
    RunningGradient g_q, g_u;
    CostProblem::Terminal C;
    CostProblem::TerminalGradient dC;
    Vec q0;
    double T = 1.0;
    int u_dim = 1;
    std::vector<Vec> u_init;  // one per grid node; empty means zero

    [[nodiscard]] int dim() const { return static_cast<int>(q0.size()); }
    [[nodiscard]] Mat jacobian_q(double t, const Vec& q, const Vec& u) const;
    [[nodiscard]] Mat jacobian_u(double t, const Vec& q, const Vec& u) const;
    [[nodiscard]] Vec grad_g_q(double t, const Vec& q, const Vec& u) const;
    [[nodiscard]] Vec grad_g_u(double t, const Vec& q, const Vec& u) const;

    /// Throws std::invalid_argument on inconsistent dimensions or dC not
    /// matching central differences of C to 1e-6.
    void validate() const;
};

using ControlHamiltonian = std::function<double(double t, const Vec& q, const Vec& p, const Vec& u)>;

/// H(t, q, p, u) = <p, f(t, q, u)> + g(t, q, u).
ControlHamiltonian control_hamiltonian(const ControlProblem& cp);

/// D_u H = D_u f^T p + D_u g.
Vec control_gradient(const ControlProblem& cp, double t, const Vec& q, const Vec& p, const Vec& u);

/// Piecewise-linear control through the nodes t_k = k T / N.
Vec interpolate_control(const std::vector<Vec>& nodes, double T, double t);

/// Cost problem with the control frozen to the piecewise-linear interpolant.
CostProblem frozen_cost(const ControlProblem& cp, const std::vector<Vec>& controls);

struct FbsmResult {
    Trajectory traj;  // states (q, p) and controls at the nodes
    double residual = 0.0;  // max_k |D_u H|
    int sweeps = 0;
};

/// Raised when max_sweeps is exhausted; carries the best iterate.
class FbsmNoConvergence : public NoConvergence {
public:
    FbsmNoConvergence(const std::string& what, FbsmResult best)
        : NoConvergence(what, Vec(), best.residual, best.sweeps), best_(std::move(best)) {}
    [[nodiscard]] const FbsmResult& best_iterate() const { return best_; }

private:
    FbsmResult best_;
};

/// Forward-backward sweep: state forward from q0 and costate backward from
/// p(T) = dC(q(T)) (one free-boundary adjoint sweep with the frozen control),
/// then u <- u - relax D_u H at every node, until max |D_u H| <= tol.
FbsmResult solve_fbsm(const ControlProblem& cp, Method method, int N, int max_sweeps = 500, double relax = 0.5,
                      double tol = 1e-10);

struct PontryaginResiduals {
    double state = 0.0;       // q-part of the one-step defect of the discrete Hamiltonian system
    double costate = 0.0;     // p-part of the same defect
    double stationarity = 0.0;  // max |D_u H|
    double initial = 0.0;     // |q(0) - q0|
    double terminal = 0.0;    // |p(T) - dC(q(T))|

    [[nodiscard]] double max() const;
};

PontryaginResiduals pontryagin_residuals(const ControlProblem& cp, const Trajectory& traj, Method method);

}  // namespace hamflow
