#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hamflow/dual.hpp"
#include "hamflow/types.hpp"

namespace hamflow {

enum class DerivativeMode { Analytic, Automatic, FiniteDifference };

enum class Degeneracy { Regular, Degenerate, MaximallyDegenerate };

const char* to_string(DerivativeMode mode);
const char* to_string(Degeneracy d);

struct HamiltonianGradient {
    double dt = 0.0;
    Vec dq;
    Vec dp;
};

/// Right-hand side of Hamilton's equations: (dq/dt, dp/dt).
struct PhaseVelocity {
    Vec dq;
    Vec dp;
};

/// Time-dependent scalar H(t, q, p) on a flat phase space of dimension 2n,
/// together with its first and second partial derivatives.
///
/// Three construction routes:
///  - automatic(): H given as a generic callable, instantiated on doubles and
///    on dual numbers. This is the default derivative stack.
///  - analytic(): value and gradient closures; the Hessian is either supplied
///    or formed by central differences of the gradient.
///  - finite_difference(): value only; derivatives by central differences.
///
/// Instances are immutable and safe to share across threads.
class HamiltonianProblem {
public:
    using ValueFn = std::function<double(double t, const Vec& q, const Vec& p)>;
    using GradientFn = std::function<HamiltonianGradient(double t, const Vec& q, const Vec& p)>;
    using HessianFn = std::function<Mat(double t, const Vec& q, const Vec& p)>;

    /// `fn` must be callable as S fn(S t, const VecX<S>& q, const VecX<S>& p)
    /// for S = double, Dual1 and Dual2.
    template <class F>
    static HamiltonianProblem automatic(int dim, F fn, std::string label = "automatic");

    static HamiltonianProblem analytic(int dim, ValueFn value, GradientFn gradient, HessianFn hessian = {},
                                       std::string label = "analytic");

    static HamiltonianProblem finite_difference(int dim, ValueFn value, std::string label = "finite-difference");

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] DerivativeMode mode() const { return mode_; }
    [[nodiscard]] const std::string& label() const { return label_; }

    [[nodiscard]] double value(double t, const Vec& q, const Vec& p) const { return value_(t, q, p); }
    [[nodiscard]] HamiltonianGradient gradient(double t, const Vec& q, const Vec& p) const;
    [[nodiscard]] Vec grad_q(double t, const Vec& q, const Vec& p) const { return gradient(t, q, p).dq; }
    [[nodiscard]] Vec grad_p(double t, const Vec& q, const Vec& p) const { return gradient(t, q, p).dp; }
    [[nodiscard]] double grad_t(double t, const Vec& q, const Vec& p) const { return gradient(t, q, p).dt; }

    /// Phase-space Hessian over (q, p), ordered [[H_qq, H_qp], [H_pq, H_pp]].
    [[nodiscard]] Mat hessian(double t, const Vec& q, const Vec& p) const;
    [[nodiscard]] Mat hessian_pp(double t, const Vec& q, const Vec& p) const;

    /// Structural flag set by constructions that are affine in p by design
    /// (adjoint Hamiltonians); solvers that exploit the affine structure
    /// require it.
    [[nodiscard]] bool maximally_degenerate() const { return max_degenerate_; }
    [[nodiscard]] HamiltonianProblem with_maximal_degeneracy() const;
    [[nodiscard]] HamiltonianProblem relabeled(std::string label) const;

    /// Underlying closures; used by wrappers that build derived problems.
    [[nodiscard]] ValueFn value_fn() const { return value_; }
    [[nodiscard]] GradientFn gradient_fn() const { return gradient_; }
    [[nodiscard]] HessianFn hessian_fn() const { return hessian_; }

private:
    HamiltonianProblem(int dim, DerivativeMode mode, std::string label, ValueFn value, GradientFn gradient,
                       HessianFn hessian);

    int dim_ = 0;
    DerivativeMode mode_ = DerivativeMode::Automatic;
    std::string label_;
    ValueFn value_;
    GradientFn gradient_;
    HessianFn hessian_;
    bool max_degenerate_ = false;
};

/// (D_p H, -D_q H). Throws EvaluationError on non-finite derivatives.
PhaseVelocity hamiltonian_vector_field(const HamiltonianProblem& prob, double t, const PhasePoint& z);

/// Same field as a stacked 2n-vector.
Vec hamiltonian_vector_field_stacked(const HamiltonianProblem& prob, double t, const Vec& z);

struct TimedPoint {
    double t = 0.0;
    PhasePoint z;
};

/// Uniform random samples, q and p in [-scale, scale]^n, t in [t_lo, t_hi].
std::vector<TimedPoint> sample_points(int dim, int count, std::uint64_t seed, double scale = 1.0, double t_lo = 0.0,
                                      double t_hi = 1.0);

/// Sample-relative classification by the rank of D_pp H.
Degeneracy degeneracy_class(const HamiltonianProblem& prob, const std::vector<TimedPoint>& samples,
                            double tol = 1e-8);

struct DerivativeCheck {
    double gradient_error = 0.0;   // max ||g - g_fd||_inf / max(1, ||g_fd||_inf)
    double hessian_error = 0.0;    // same measure against differences of the gradient
    double hessian_asymmetry = 0.0;
};

/// Compare the problem's derivatives against central finite differences of H.
DerivativeCheck check_derivatives(const HamiltonianProblem& prob, const std::vector<TimedPoint>& samples);

/// Checked construction: returns `prob` unchanged when its derivatives agree with
/// finite differences to `gradient_tol` and D_pp H is symmetric to `symmetry_tol`
/// at every sample; throws std::invalid_argument otherwise.
HamiltonianProblem validated(HamiltonianProblem prob, const std::vector<TimedPoint>& samples,
                             double gradient_tol = 1e-6, double symmetry_tol = 1e-10);

// ---------------------------------------------------------------------------

template <class F>
HamiltonianProblem HamiltonianProblem::automatic(int dim, F fn, std::string label) {
    ValueFn value = [fn](double t, const Vec& q, const Vec& p) { return static_cast<double>(fn(t, q, p)); };

    GradientFn gradient = [fn, dim](double t, const Vec& q, const Vec& p) {
        HamiltonianGradient g{0.0, Vec(dim), Vec(dim)};
        VecX<Dual1> qd = q.template cast<Dual1>();
        VecX<Dual1> pd = p.template cast<Dual1>();
        for (int i = 0; i < dim; ++i) {
            qd[i].d = 1.0;
            g.dq[i] = fn(Dual1(t), qd, pd).d;
            qd[i].d = 0.0;
        }
        for (int i = 0; i < dim; ++i) {
            pd[i].d = 1.0;
            g.dp[i] = fn(Dual1(t), qd, pd).d;
            pd[i].d = 0.0;
        }
        g.dt = fn(Dual1(t, 1.0), qd, pd).d;
        return g;
    };

    HessianFn hessian = [fn, dim](double t, const Vec& q, const Vec& p) {
        const int m = 2 * dim;
        Mat hess(m, m);
        VecX<Dual2> x(m);
        for (int k = 0; k < dim; ++k) {
            x[k] = Dual2(q[k]);
            x[dim + k] = Dual2(p[k]);
        }
        for (int i = 0; i < m; ++i) {
            x[i].v.d = 1.0;
            for (int j = i; j < m; ++j) {
                x[j].d.v = 1.0;
                const VecX<Dual2> qd = x.head(dim);
                const VecX<Dual2> pd = x.tail(dim);
                const double hij = fn(Dual2(t), qd, pd).d.d;
                hess(i, j) = hij;
                hess(j, i) = hij;
                x[j].d.v = 0.0;
            }
            x[i].v.d = 0.0;
        }
        return hess;
    };

    return HamiltonianProblem(dim, DerivativeMode::Automatic, std::move(label), std::move(value),
                              std::move(gradient), std::move(hessian));
}

}  // namespace hamflow
