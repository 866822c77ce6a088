#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hamflow/bvp.hpp"
#include "hamflow/hamiltonian.hpp"
#include "hamflow/integrators.hpp"

namespace hamflow {

/// Cost J(q0) = C(q(T)) + int_0^T g(t, q) dt subject to q' = f(t, q), q(0) = q0.
/// Jacobians are optional; central differences are used when absent. An empty
/// `g` means zero running cost.
struct CostProblem {
    using Dynamics = std::function<Vec(double t, const Vec& q)>;
    using DynamicsJacobian = std::function<Mat(double t, const Vec& q)>;
    using Running = std::function<double(double t, const Vec& q)>;
    using RunningGradient = std::function<Vec(double t, const Vec& q)>;
    using Terminal = std::function<double(const Vec& q)>;
    using TerminalGradient = std::function<Vec(const Vec& q)>;
    /// sum_i p_i D_qq f_i + D_qq g.
    using Curvature = std::function<Mat(double t, const Vec& q, const Vec& p)>;

    std::string label = "cost";
    Dynamics f;
    DynamicsJacobian f_jacobian;
    Running g;
    RunningGradient g_gradient;
    Curvature curvature;  // optional
    Terminal C;
    TerminalGradient dC;
    double T = 1.0;
    Vec q0;

    [[nodiscard]] int dim() const { return static_cast<int>(q0.size()); }
    [[nodiscard]] Mat jacobian_f(double t, const Vec& q) const;
    [[nodiscard]] double running(double t, const Vec& q) const;
    [[nodiscard]] Vec grad_g(double t, const Vec& q) const;

    /// Throws std::invalid_argument on missing closures, dimension mismatch,
    /// T < 0, or dC disagreeing with central differences of C by more than 1e-6.
    void validate() const;
};

/// H_g(t, q, p) = <p, f(t, q)> + g(t, q), flagged maximally degenerate.
HamiltonianProblem make_adjoint_problem(const CostProblem& cp);

struct Sensitivity {
    Vec grad;         // p(0) = dJ/dq0
    Trajectory traj;  // (q, p) on the grid
};

/// Free-boundary Type II sweep on H_g with p(T) = dC(q(T)).
Sensitivity sensitivity(const CostProblem& cp, Method method, int N);

/// J(q0) by RK4 on the cost-augmented state (q, int g) with N steps.
double integrated_cost(const CostProblem& cp, const Vec& q0, int N);

/// max_i |grad_i - fd_i| / max(1, |fd_i|), fd by central differences of
/// integrated_cost in each q0 component.
double gradient_check(const CostProblem& cp, Method method, int N, double eps);

enum class AdjointPair { Symplectic, ExplicitEuler };

const char* to_string(AdjointPair s);

/// Discretize-then-optimize (hand-derived adjoint recursion of the explicit
/// Euler state update with left-point cost quadrature) against
/// optimize-then-discretize (the continuous adjoint system solved by the
/// sweep with the pair's Hamiltonian stepper: symplectic Euler or explicit
/// Euler). Returns the infinity-norm gap of the two gradients.
double commutativity_gap(const CostProblem& cp, AdjointPair pair, int N);

struct DiffusionAdjoint {
    Vec q0;
    Vec grad;
    Vec oracle;
    double err_vs_oracle = 0.0;  // relative, infinity norm
    double reverse_growth = 0.0; // largest singular value of exp(-A T)
};

/// Second-difference Laplacian on nx interior points of (0, 1), Dirichlet.
Mat laplacian_1d(int nx);

/// Sensitivity of C = |q(T)|^2 / 2 for the semi-discrete heat equation with
/// q0_i = sin(pi x_i) + x_i (1 - x_i) / 2, midpoint in time, against the
/// matrix-exponential oracle exp(A^T T) exp(A T) q0.
DiffusionAdjoint diffusion_adjoint_demo(int nx, double T, int N);

namespace adjoint_battery {

/// Smooth nonlinear cost problems with analytic derivatives.
std::vector<CostProblem> nonlinear();
/// f(q) = A q, A = [[0, 1], [0, 0]], g = 0, C(q) = q_1, T = 1.
CostProblem nilpotent_linear(Vec q0);

}  // namespace adjoint_battery

}  // namespace hamflow
