#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hamflow/hamiltonian.hpp"
#include "hamflow/integrators.hpp"
#include "hamflow/newton.hpp"

namespace hamflow {

enum class BoundaryKind { Type0, TypeI, TypeII, TypeIII, TypeIV, TypeIIFree };

const char* to_string(BoundaryKind k);

using Section = std::function<Vec(const Vec& q)>;
using SectionJacobian = std::function<Mat(const Vec& q)>;

/// Boundary data per kind:
///   Type0 (q0, p0), TypeI (q0, q1), TypeII (q0, p1), TypeIII (p0, q1),
///   TypeIV (p0, p1), TypeIIFree (q0, p1 = section(q(T))).
struct BoundarySpec {
    BoundaryKind kind = BoundaryKind::TypeII;
    Vec first;   // the fixed initial component
    Vec second;  // the fixed terminal component (unused for TypeIIFree)
    Section section;
    SectionJacobian section_jacobian;  // optional; central differences otherwise

    static BoundarySpec type0(Vec q0, Vec p0);
    static BoundarySpec type1(Vec q0, Vec q1);
    static BoundarySpec type2(Vec q0, Vec p1);
    static BoundarySpec type3(Vec p0, Vec q1);
    static BoundarySpec type4(Vec p0, Vec p1);
    static BoundarySpec type2_free(Vec q0, Section section, SectionJacobian jacobian = {});

    [[nodiscard]] int dim() const { return static_cast<int>(first.size()); }
    /// Throws std::invalid_argument on dimension mismatch with `n`.
    void validate(int n) const;
};

/// N steps of `stepper` from z0 over [0, T].
Trajectory solve_ivp(const HamiltonianProblem& prob, const PhasePoint& z0, double T, const Stepper& stepper, int N);

/// Product of step tangents along `traj`: d z_N / d z_0.
Mat flow_jacobian(const Stepper& stepper, const Trajectory& traj);

/// Single shooting on the unfixed initial component (p0 for Types I, II and
/// IIFree; q0 for Types III and IV). The Newton Jacobian is the matching block
/// of the propagated step tangents. Throws NoConvergence or SingularJacobian.
Trajectory solve_shooting(const HamiltonianProblem& prob, const BoundarySpec& bc, double T, const Stepper& stepper,
                          int N, const Vec& guess, const NewtonOptions& opts = {});

/// Type II / free-boundary solve for maximally degenerate problems: the
/// position equation is integrated forward on its own, then the momentum
/// (affine in p for every scheme here) is recovered by a backward sweep from
/// p(T) = p1 or p(T) = section(q(T)). Requires prob.maximally_degenerate().
Trajectory solve_type_ii_sweep(const HamiltonianProblem& prob, const BoundarySpec& bc, double T,
                               const Stepper& stepper, int N);

struct CompletenessReport {
    BoundaryKind kind = BoundaryKind::Type0;
    double min_singular_value = 0.0;
    double max_singular_value = 0.0;
    double condition_estimate = 0.0;  // max / min singular value (inf when singular)
    double threshold = 0.0;
    bool complete = false;
    Mat sensitivity;  // the block whose rank decides completeness

    [[nodiscard]] const char* verdict() const { return complete ? "complete" : "incomplete"; }
};

/// Linearizes the shooting map about the Type 0 trajectory from `base` and
/// reports the smallest singular value of the block mapping the unknown
/// initial components to the fixed terminal ones. The verdict is complete iff
/// that value exceeds threshold_scale * max(1, largest singular value).
/// This is a numerical surrogate for a rank condition, not a proof.
/// For TypeIIFree, `section_jacobian` (d p1 / d q at q(T)) must be supplied.
CompletenessReport completeness_diagnostic(const HamiltonianProblem& prob, BoundaryKind kind, double T,
                                           const Stepper& stepper, int N, const PhasePoint& base,
                                           double threshold_scale = 1e-8,
                                           const SectionJacobian& section_jacobian = {});

/// H~(t, q, p) = -H(T - t, q, p).
HamiltonianProblem reverse_time(const HamiltonianProblem& prob, double T);

/// Type III solve through time reversal: a Type II shooting problem on the
/// reversed Hamiltonian with q0 := q1 and p1 := p0, mapped back to forward time.
Trajectory solve_type_iii_by_reversal(const HamiltonianProblem& prob, const BoundarySpec& bc, double T,
                                      Method method, int N, const Vec& guess, const NewtonOptions& opts = {});

/// Discrete phase-space action sum_k [<pbar, q_{k+1} - q_k> - h H(t_k + h/2, qbar, pbar)].
/// Along a midpoint solution its first variation is exactly <p_N, dq_N> - <p_0, dq_0>.
double midpoint_action(const HamiltonianProblem& prob, const Trajectory& traj);

/// Cubic variation fields in s = t/T: dq(s) = sum_{i=1..3} a_i s^i (vanishes at
/// t = 0), dp(s) = sum_{i=0..3} b_i s^i.
struct Variation {
    Mat a;  // n x 3
    Mat b;  // n x 4
    [[nodiscard]] Vec dq(double s) const;
    [[nodiscard]] Vec dp(double s) const;
};

std::vector<Variation> random_variations(int n, int count, std::uint64_t seed);

struct VirtualWork {
    double delta_action = 0.0;  // central difference of the discrete action along the varied curve
    double work = 0.0;          // <p_N, dq(T)>
    double scale = 1.0;         // max(1, |delta_action|, |work|)
};

VirtualWork virtual_work(const HamiltonianProblem& prob, const Trajectory& traj, const Variation& var,
                         double eps = 1e-6);

}  // namespace hamflow
