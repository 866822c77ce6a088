#include "hamflow/hamiltonian.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "hamflow/errors.hpp"

namespace hamflow {

const char* to_string(DerivativeMode mode) {
    switch (mode) {
        case DerivativeMode::Analytic: return "analytic";
        case DerivativeMode::Automatic: return "automatic";
        case DerivativeMode::FiniteDifference: return "finite-difference";
    }
    return "unknown";
}

const char* to_string(Degeneracy d) {
    switch (d) {
        case Degeneracy::Regular: return "regular";
        case Degeneracy::Degenerate: return "degenerate";
        case Degeneracy::MaximallyDegenerate: return "maximally_degenerate";
    }
    return "unknown";
}

namespace {

// Central difference step near the cube root of machine epsilon.
constexpr double kGradStep = 6e-6;
// Second differences of the value: fourth root of epsilon.
constexpr double kHessStep = 1e-4;

HamiltonianGradient fd_gradient(const HamiltonianProblem::ValueFn& value, int n, double t, const Vec& q,
                                const Vec& p) {
    HamiltonianGradient g{0.0, Vec(n), Vec(n)};
    Vec qq = q;
    Vec pp = p;
    for (int i = 0; i < n; ++i) {
        const double s = kGradStep * (1.0 + std::abs(q[i]));
        qq[i] = q[i] + s;
        const double fp = value(t, qq, p);
        qq[i] = q[i] - s;
        const double fm = value(t, qq, p);
        qq[i] = q[i];
        g.dq[i] = (fp - fm) / (2.0 * s);
    }
    for (int i = 0; i < n; ++i) {
        const double s = kGradStep * (1.0 + std::abs(p[i]));
        pp[i] = p[i] + s;
        const double fp = value(t, q, pp);
        pp[i] = p[i] - s;
        const double fm = value(t, q, pp);
        pp[i] = p[i];
        g.dp[i] = (fp - fm) / (2.0 * s);
    }
    const double s = kGradStep * (1.0 + std::abs(t));
    g.dt = (value(t + s, q, p) - value(t - s, q, p)) / (2.0 * s);
    return g;
}

Vec stacked_gradient(const HamiltonianGradient& g) {
    Vec out(g.dq.size() + g.dp.size());
    out << g.dq, g.dp;
    return out;
}

// Central differences of an analytic gradient.
Mat fd_hessian_from_gradient(const HamiltonianProblem::GradientFn& gradient, int n, double t, const Vec& q,
                             const Vec& p) {
    const int m = 2 * n;
    Mat hess(m, m);
    Vec z(m);
    z << q, p;
    for (int j = 0; j < m; ++j) {
        const double s = kGradStep * (1.0 + std::abs(z[j]));
        Vec zp = z;
        Vec zm = z;
        zp[j] += s;
        zm[j] -= s;
        const Vec gp = stacked_gradient(gradient(t, zp.head(n), zp.tail(n)));
        const Vec gm = stacked_gradient(gradient(t, zm.head(n), zm.tail(n)));
        hess.col(j) = (gp - gm) / (2.0 * s);
    }
    return 0.5 * (hess + hess.transpose());
}

// Second differences of the value only.
Mat fd_hessian_from_value(const HamiltonianProblem::ValueFn& value, int n, double t, const Vec& q, const Vec& p) {
    const int m = 2 * n;
    Mat hess(m, m);
    Vec z(m);
    z << q, p;
    auto f = [&](const Vec& x) { return value(t, x.head(n), x.tail(n)); };
    const double f0 = f(z);
    for (int i = 0; i < m; ++i) {
        const double si = kHessStep * (1.0 + std::abs(z[i]));
        Vec zp = z;
        Vec zm = z;
        zp[i] += si;
        zm[i] -= si;
        hess(i, i) = (f(zp) - 2.0 * f0 + f(zm)) / (si * si);
        for (int j = i + 1; j < m; ++j) {
            const double sj = kHessStep * (1.0 + std::abs(z[j]));
            Vec a = z, b = z, c = z, d = z;
            a[i] += si; a[j] += sj;
            b[i] += si; b[j] -= sj;
            c[i] -= si; c[j] += sj;
            d[i] -= si; d[j] -= sj;
            const double hij = (f(a) - f(b) - f(c) + f(d)) / (4.0 * si * sj);
            hess(i, j) = hij;
            hess(j, i) = hij;
        }
    }
    return hess;
}

}  // namespace

HamiltonianProblem::HamiltonianProblem(int dim, DerivativeMode mode, std::string label, ValueFn value,
                                       GradientFn gradient, HessianFn hessian)
    : dim_(dim),
      mode_(mode),
      label_(std::move(label)),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)) {
    if (dim_ <= 0) throw std::invalid_argument("HamiltonianProblem: dim must be positive");
    if (!value_) throw std::invalid_argument("HamiltonianProblem: value function is required");
}

HamiltonianProblem HamiltonianProblem::analytic(int dim, ValueFn value, GradientFn gradient, HessianFn hessian,
                                                std::string label) {
    if (!gradient) throw std::invalid_argument("HamiltonianProblem::analytic: gradient is required");
    if (!hessian) {
        hessian = [gradient, dim](double t, const Vec& q, const Vec& p) {
            return fd_hessian_from_gradient(gradient, dim, t, q, p);
        };
    }
    return HamiltonianProblem(dim, DerivativeMode::Analytic, std::move(label), std::move(value), std::move(gradient),
                              std::move(hessian));
}

HamiltonianProblem HamiltonianProblem::finite_difference(int dim, ValueFn value, std::string label) {
    GradientFn gradient = [value, dim](double t, const Vec& q, const Vec& p) {
        return fd_gradient(value, dim, t, q, p);
    };
    HessianFn hessian = [value, dim](double t, const Vec& q, const Vec& p) {
        return fd_hessian_from_value(value, dim, t, q, p);
    };
    return HamiltonianProblem(dim, DerivativeMode::FiniteDifference, std::move(label), std::move(value),
                              std::move(gradient), std::move(hessian));
}

HamiltonianGradient HamiltonianProblem::gradient(double t, const Vec& q, const Vec& p) const {
    return gradient_(t, q, p);
}

Mat HamiltonianProblem::hessian(double t, const Vec& q, const Vec& p) const { return hessian_(t, q, p); }

Mat HamiltonianProblem::hessian_pp(double t, const Vec& q, const Vec& p) const {
    return hessian(t, q, p).bottomRightCorner(dim_, dim_);
}

HamiltonianProblem HamiltonianProblem::with_maximal_degeneracy() const {
    HamiltonianProblem out = *this;
    out.max_degenerate_ = true;
    return out;
}

HamiltonianProblem HamiltonianProblem::relabeled(std::string label) const {
    HamiltonianProblem out = *this;
    out.label_ = std::move(label);
    return out;
}

PhaseVelocity hamiltonian_vector_field(const HamiltonianProblem& prob, double t, const PhasePoint& z) {
    const HamiltonianGradient g = prob.gradient(t, z.q, z.p);
    if (!g.dq.allFinite() || !g.dp.allFinite()) {
        throw EvaluationError("hamiltonian_vector_field: non-finite derivative", t, z);
    }
    return {g.dp, -g.dq};
}

Vec hamiltonian_vector_field_stacked(const HamiltonianProblem& prob, double t, const Vec& z) {
    const int n = prob.dim();
    const HamiltonianGradient g = prob.gradient(t, z.head(n), z.tail(n));
    if (!g.dq.allFinite() || !g.dp.allFinite()) {
        throw EvaluationError("hamiltonian_vector_field: non-finite derivative", t, PhasePoint::unstack(z));
    }
    Vec out(2 * n);
    out << g.dp, -g.dq;
    return out;
}

std::vector<TimedPoint> sample_points(int dim, int count, std::uint64_t seed, double scale, double t_lo,
                                      double t_hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> time(t_lo, t_hi);
    std::vector<TimedPoint> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        TimedPoint s;
        s.t = time(rng);
        s.z.q = Vec(dim);
        s.z.p = Vec(dim);
        for (int i = 0; i < dim; ++i) s.z.q[i] = scale * unit(rng);
        for (int i = 0; i < dim; ++i) s.z.p[i] = scale * unit(rng);
        out.push_back(std::move(s));
    }
    return out;
}

Degeneracy degeneracy_class(const HamiltonianProblem& prob, const std::vector<TimedPoint>& samples, double tol) {
    if (samples.empty()) throw std::invalid_argument("degeneracy_class: need at least one sample");
    bool all_regular = true;
    bool all_zero = true;
    for (const auto& s : samples) {
        const Mat hpp = prob.hessian_pp(s.t, s.z.q, s.z.p);
        if (!hpp.allFinite()) throw EvaluationError("degeneracy_class: non-finite Hessian", s.t, s.z);
        const Eigen::JacobiSVD<Mat> svd(hpp);
        const Vec& sv = svd.singularValues();
        if (!(sv.minCoeff() > tol)) all_regular = false;
        if (sv.maxCoeff() > tol) all_zero = false;
    }
    if (all_regular) return Degeneracy::Regular;
    if (all_zero) return Degeneracy::MaximallyDegenerate;
    return Degeneracy::Degenerate;
}

DerivativeCheck check_derivatives(const HamiltonianProblem& prob, const std::vector<TimedPoint>& samples) {
    const int n = prob.dim();
    const auto value = prob.value_fn();
    const auto gradient = prob.gradient_fn();
    DerivativeCheck out;
    for (const auto& s : samples) {
        const HamiltonianGradient g = prob.gradient(s.t, s.z.q, s.z.p);
        const HamiltonianGradient gf = fd_gradient(value, n, s.t, s.z.q, s.z.p);
        Vec a(2 * n + 1);
        Vec b(2 * n + 1);
        a << g.dq, g.dp, g.dt;
        b << gf.dq, gf.dp, gf.dt;
        out.gradient_error =
            std::max(out.gradient_error, (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>()));

        const Mat h = prob.hessian(s.t, s.z.q, s.z.p);
        const Mat hf = fd_hessian_from_gradient(gradient, n, s.t, s.z.q, s.z.p);
        out.hessian_error = std::max(out.hessian_error, (h - hf).lpNorm<Eigen::Infinity>() /
                                                            std::max(1.0, hf.lpNorm<Eigen::Infinity>()));
        const Mat hpp = h.bottomRightCorner(n, n);
        out.hessian_asymmetry =
            std::max(out.hessian_asymmetry, (hpp - hpp.transpose()).lpNorm<Eigen::Infinity>());
    }
    return out;
}

HamiltonianProblem validated(HamiltonianProblem prob, const std::vector<TimedPoint>& samples, double gradient_tol,
                             double symmetry_tol) {
    const DerivativeCheck c = check_derivatives(prob, samples);
    if (c.gradient_error > gradient_tol) {
        throw std::invalid_argument("validated: gradient disagrees with finite differences of H (" +
                                    std::to_string(c.gradient_error) + ")");
    }
    if (c.hessian_asymmetry > symmetry_tol) {
        throw std::invalid_argument("validated: D_pp H is not symmetric (" + std::to_string(c.hessian_asymmetry) +
                                    ")");
    }
    return prob;
}

}  // namespace hamflow
