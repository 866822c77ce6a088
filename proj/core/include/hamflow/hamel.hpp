#pragma once

#include <functional>
#include <string>

#include "hamflow/dual.hpp"
#include "hamflow/hamiltonian.hpp"
#include "hamflow/newton.hpp"
#include "hamflow/types.hpp"

namespace hamflow {

/// Fiberwise-linear identification TM ~ M x V given by a q-dependent matrix:
/// phi(q, xi) = Phi(q) xi. DPhi(q).v is the directional derivative of the
/// matrix entries.
class Trivialization {
public:
    using MatrixFn = std::function<Mat(const Vec& q)>;
    using DerivativeFn = std::function<Mat(const Vec& q, const Vec& v)>;

    /// `fn` callable as MatX<S> fn(const VecX<S>& q) for S = double, Dual1;
    /// DPhi comes from forward-mode AD.
    template <class F>
    static Trivialization automatic(int dim, F fn, std::string label = "automatic");
    /// Analytic DPhi, cross-checked against central differences of Phi at
    /// random points on construction (std::invalid_argument on mismatch).
    static Trivialization analytic(int dim, MatrixFn phi, DerivativeFn dphi, std::string label = "analytic");
    static Trivialization finite_difference(int dim, MatrixFn phi, std::string label = "finite-difference");

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] const std::string& label() const { return label_; }

    [[nodiscard]] Mat matrix(const Vec& q) const { return phi_(q); }
    /// DPhi(q).v as a matrix.
    [[nodiscard]] Mat derivative(const Vec& q, const Vec& v) const { return dphi_(q, v); }

    [[nodiscard]] Vec phi(const Vec& q, const Vec& xi) const { return phi_(q) * xi; }
    /// Throws DomainError when Phi(q) is singular.
    [[nodiscard]] Vec phi_inv(const Vec& q, const Vec& v) const;
    [[nodiscard]] Vec dphi(const Vec& q, const Vec& v, const Vec& xi) const { return dphi_(q, v) * xi; }
    /// Phi(q)^{-*} mu, the canonical covector paired with mu.
    [[nodiscard]] Vec dual_inv(const Vec& q, const Vec& mu) const;

private:
    Trivialization(int dim, MatrixFn phi, DerivativeFn dphi, std::string label)
        : dim_(dim), phi_(std::move(phi)), dphi_(std::move(dphi)), label_(std::move(label)) {}

    int dim_;
    MatrixFn phi_;
    DerivativeFn dphi_;
    std::string label_;
};

namespace trivializations {

Trivialization identity(int dim);
/// Phi(q) = c I.
Trivialization scaling(int dim, double c);

/// SO(3) in ZYX Euler angles q = (roll, pitch, yaw), R = Rz(yaw) Ry(pitch) Rx(roll),
/// left (body) trivialization: qdot = Phi(q) Omega with Omega the body angular velocity.
template <class S>
MatX<S> so3_left_zyx_matrix(const VecX<S>& q) {
    using std::cos;
    using std::sin;
    using std::tan;
    const S sr = sin(q[0]);
    const S cr = cos(q[0]);
    const S tp = tan(q[1]);
    const S cp = cos(q[1]);
    MatX<S> m(3, 3);
    m << S(1.0), sr * tp, cr * tp,  //
        S(0.0), cr, -sr,            //
        S(0.0), sr / cp, cr / cp;
    return m;
}

Trivialization so3_left_zyx();

/// Rotation matrix of the ZYX chart.
Mat so3_rotation(const Vec& q);

}  // namespace trivializations

/// [u, v]_q = Phi^{-1} (DPhi.(Phi u)) v - Phi^{-1} (DPhi.(Phi v)) u.
Vec hamel_bracket(const Trivialization& triv, const Vec& q, const Vec& u, const Vec& v);

/// ad*_xi alpha, assembled from <ad*_xi alpha, e_i> = <alpha, [xi, e_i]_q>.
Vec coadjoint(const Trivialization& triv, const Vec& q, const Vec& xi, const Vec& alpha);

/// h(t, q, mu) = H(t, q, Phi(q)^{-*} mu) as a problem on (q, mu); the gradient
/// is exact given the derivatives of H and DPhi, the Hessian is differenced.
HamiltonianProblem trivialized_hamiltonian(const HamiltonianProblem& prob, const Trivialization& triv);

struct TrivializedState {
    Vec q;
    Vec mu;
};

struct HamelVelocity {
    Vec dq;
    Vec dmu;
};

/// qdot = Phi(q) D_mu h, mudot = ad*_xi mu - Phi(q)^* D_q h with xi = D_mu h.
HamelVelocity hamel_vector_field(const HamiltonianProblem& h, const Trivialization& triv, double t,
                                 const TrivializedState& state);

/// Implicit-midpoint integration of the Hamel field; the returned trajectory
/// stores mu in the momentum slot of each PhasePoint.
Trajectory integrate_hamel(const HamiltonianProblem& h, const Trivialization& triv, const TrivializedState& start,
                           double T, int N, const NewtonOptions& opts = {});

/// Trivialized Type II problem q(0) = q0, mu(T) = mu1 by single shooting on
/// mu(0) with midpoint stepping. The induced canonical terminal momentum is
/// p(T) = Phi(q(T))^{-*} mu1. `guess` defaults to mu1.
Trajectory solve_hamel_type_ii(const HamiltonianProblem& h, const Trivialization& triv, const Vec& q0,
                               const Vec& mu1, double T, int N, const NewtonOptions& opts = {},
                               const Vec& guess = Vec());

/// Rigid body: canonical H(q, p) = 1/2 (Phi^T p)^T I^{-1} (Phi^T p) in the ZYX chart.
HamiltonianProblem rigid_body_canonical(const Vec& inertia);
/// Trivialized rigid body h(q, mu) = 1/2 mu^T I^{-1} mu.
HamiltonianProblem rigid_body_trivialized(const Vec& inertia);

// ---------------------------------------------------------------------------

template <class F>
Trivialization Trivialization::automatic(int dim, F fn, std::string label) {
    MatrixFn phi = [fn](const Vec& q) { return Mat(fn(VecX<double>(q))); };
    DerivativeFn dphi = [fn, dim](const Vec& q, const Vec& v) {
        VecX<Dual1> qd(dim);
        for (int i = 0; i < dim; ++i) qd[i] = Dual1(q[i], v[i]);
        const MatX<Dual1> m = fn(qd);
        Mat out(m.rows(), m.cols());
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).d;
        }
        return out;
    };
    return Trivialization(dim, std::move(phi), std::move(dphi), std::move(label));
}

}  // namespace hamflow
