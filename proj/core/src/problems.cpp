#include "hamflow/problems.hpp"

namespace hamflow::problems {

HamiltonianProblem oscillator(int dim) {
    return HamiltonianProblem::automatic(
        dim, [](auto, const auto& q, const auto& p) { return 0.5 * (p.squaredNorm() + q.squaredNorm()); },
        "oscillator");
}

HamiltonianProblem free_particle(int dim) {
    return HamiltonianProblem::automatic(
        dim, [](auto, const auto&, const auto& p) { return 0.5 * p.squaredNorm(); }, "free_particle");
}

HamiltonianProblem zero(int dim) {
    return HamiltonianProblem::automatic(
               dim, [](auto t, const auto&, const auto&) { return 0.0 * t; }, "zero")
        .with_maximal_degeneracy();
}

HamiltonianProblem linear_drift(int dim) {
    return HamiltonianProblem::automatic(
               dim, [](auto, const auto&, const auto& p) { return p.sum(); }, "linear_drift")
        .with_maximal_degeneracy();
}

HamiltonianProblem pure_force(int dim) {
    return HamiltonianProblem::automatic(
        dim, [](auto, const auto& q, const auto&) { return q.sum(); }, "pure_force");
}

HamiltonianProblem pendulum() {
    return HamiltonianProblem::automatic(
        1,
        [](auto, const auto& q, const auto& p) {
            using std::cos;
            return 0.5 * p[0] * p[0] + cos(q[0]);
        },
        "pendulum");
}

HamiltonianProblem linear_degenerate(int dim) {
    return HamiltonianProblem::automatic(
               dim, [](auto, const auto& q, const auto& p) { return p.dot(q); }, "linear_degenerate")
        .with_maximal_degeneracy();
}

HamiltonianProblem degenerate_with_cost(int dim) {
    return HamiltonianProblem::automatic(
               dim, [](auto, const auto& q, const auto& p) { return p.dot(q) + 0.5 * q.squaredNorm(); },
               "degenerate_with_cost")
        .with_maximal_degeneracy();
}

HamiltonianProblem central_force() {
    return HamiltonianProblem::automatic(
        2,
        [](auto, const auto& q, const auto& p) {
            const auto s = q.squaredNorm();
            return 0.5 * p.squaredNorm() + 0.5 * s + 0.125 * s * s;
        },
        "central_force");
}

double angular_momentum(const PhasePoint& z) { return z.q[0] * z.p[1] - z.q[1] * z.p[0]; }

HamiltonianProblem model_degenerate(const ModelParams& m) {
    return HamiltonianProblem::automatic(
        2,
        [m](auto, const auto& q, const auto& p) {
            const auto qr = q[0];
            const auto qd = q[1];
            const auto pr = p[0];
            const auto pd = p[1];
            const auto f = m.f_lin * qd + m.f_quad * qd * qd;
            const auto g = m.g_lin * qd + 0.5 * m.g_quad * qd * qd;
            return 0.5 * (pr * pr + qr * qr) + pd * f + g;
        },
        "model_degenerate");
}

}  // namespace hamflow::problems
