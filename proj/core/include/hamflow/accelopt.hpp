#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hamflow/hamiltonian.hpp"
#include "hamflow/integrators.hpp"

namespace hamflow {

/// Euclidean Bregman dynamics for minimizing f at rate O(1/t^p).
/// v0 is the initial velocity dx/dt at t0.
struct BregmanConfig {
    std::string label = "bregman";
    double p = 2.0;
    double p_ring = 2.0;  // target rescaling exponent of the adaptive time
    double C = 1.0;
    std::function<double(const Vec& x)> f;
    std::function<Vec(const Vec& x)> grad;
    std::function<Mat(const Vec& x)> hess;  // optional
    double f_min = 0.0;  // used for the reported gap f - f_min
    Vec x0;
    Vec v0;
    double t0 = 1.0;

    [[nodiscard]] int dim() const { return static_cast<int>(x0.size()); }
    /// Throws std::invalid_argument on nonpositive exponents, missing closures,
    /// size mismatch, or a gradient off central differences by more than 1e-6.
    void validate() const;
    /// r0 = v0 t0^(p+1) / p, the momentum that produces velocity v0.
    [[nodiscard]] Vec initial_momentum() const;
};

/// Extended phase point (q, q_t; r, r_t) with q_t the physical time.
struct ExtendedState {
    Vec q;
    double q_t = 0.0;
    Vec r;
    double r_t = 0.0;

    [[nodiscard]] PhasePoint phase() const;
    static ExtendedState from_phase(const PhasePoint& z);
};

/// H(t, x, r) = p t^(p-1) [ |r|^2 / (2 t^(2p)) + C t^p f(x) ].
/// Throws DomainError for t <= 0.
HamiltonianProblem bregman_hamiltonian(const BregmanConfig& cfg);

/// Positive time-rescaling factor dt/dtau; may depend on physical time.
using Monitor = std::function<double(double t, const PhasePoint& z)>;

struct PoincareSystem {
    HamiltonianProblem extended;  // dimension n + 1, autonomous
    ExtendedState start;
};

/// Hbar(q, q_t, r, r_t) = g(q_t, q, r) (H(q_t, q, r) + r_t), started at
/// (z0, t0) with r_t = -H(t0, z0) so that Hbar vanishes on the trajectory.
/// Throws DomainError when the monitor is not positive at the start.
PoincareSystem poincare_transform(const HamiltonianProblem& prob, Monitor monitor, const PhasePoint& z0, double t0);

/// Poincare transform of the Bregman Hamiltonian with g = (p / p_ring) t^(1 - p_ring / p):
/// Hbar = (1/p_ring) [ p^2 |r|^2 / (2 t^(p + p_ring/p)) + C p^2 t^(2p - p_ring/p) f(q)
///                     + p r_t t^(1 - p_ring/p) ],  t = q_t.
/// Throws DomainError when evaluated at q_t <= 0.
HamiltonianProblem adaptive_bregman_problem(const BregmanConfig& cfg);

/// Start of the adaptive system: (x0, t0; r0, r_t) with Hbar = 0.
ExtendedState adaptive_bregman_start(const BregmanConfig& cfg);

struct RateReport {
    std::vector<double> times;  // physical time q_t at each iterate
    std::vector<double> gaps;   // f(x_k) - f_min
    double slope = 0.0;         // log-log slope of the tail envelope over the final decade
};

struct MinimizeResult {
    std::vector<ExtendedState> iterates;
    RateReport rate;
    double max_hbar = 0.0;  // max |Hbar| along the run
    bool aborted = false;   // blow-up: objective or state beyond 1e12
};

/// Slope of log(envelope) against log(t) over t in [t_end / 10, t_end], where
/// envelope_k = max_{j >= k} gap_j. Oscillating gaps (heavy-ball ringing) are
/// bounded by the envelope, which decays at the rate of the amplitude.
double decay_slope(const std::vector<double>& times, const std::vector<double>& gaps);

MinimizeResult minimize(const BregmanConfig& cfg, Method method, int fictive_steps, double h_tau);

namespace accel_battery {

/// f(x) = |x - a|^2 / 2 in two dimensions, a = (1, -0.5), x0 = (2, 0.5), v0 = 0.
BregmanConfig shifted_quadratic();
/// Convex quadratics (x - a)^T A (x - a) / 2 with varied conditioning.
std::vector<BregmanConfig> quadratics();

}  // namespace accel_battery

}  // namespace hamflow
