#pragma once

#include "hamflow/hamiltonian.hpp"

namespace hamflow::problems {

/// H = (|p|^2 + |q|^2) / 2.
HamiltonianProblem oscillator(int dim = 1);
/// H = |p|^2 / 2.
HamiltonianProblem free_particle(int dim = 1);
/// H = 0.
HamiltonianProblem zero(int dim = 1);
/// H = sum(p): free drift in q at unit speed.
HamiltonianProblem linear_drift(int dim = 1);
/// H = sum(q): constant unit force.
HamiltonianProblem pure_force(int dim = 1);
/// H = p^2/2 + cos q.
HamiltonianProblem pendulum();
/// H = <p, q>; maximally degenerate, flagged as such.
HamiltonianProblem linear_degenerate(int dim = 1);
/// H = <p, q> + |q|^2 / 2; maximally degenerate with a running cost.
HamiltonianProblem degenerate_with_cost(int dim = 1);

/// Planar central force H = |p|^2/2 + V(|q|^2), V(s) = s/2 + s^2/8.
/// Rotation invariant, so J = q1 p2 - q2 p1 is conserved.
HamiltonianProblem central_force();
double angular_momentum(const PhasePoint& z);

/// Sum of a regular oscillator on (q_r, p_r) and a maximally degenerate part
/// <p_d, f(q_d)> + g(q_d) on (q_d, p_d), with
///   f(q_d) = f_lin q_d + f_quad q_d^2,   g(q_d) = g_lin q_d + g_quad q_d^2 / 2.
/// Coordinates are ordered q = (q_r, q_d), p = (p_r, p_d).
struct ModelParams {
    double f_lin = 1.0;
    double f_quad = 0.0;
    double g_lin = 1.0;
    double g_quad = 0.0;
};
HamiltonianProblem model_degenerate(const ModelParams& params = {});

}  // namespace hamflow::problems
