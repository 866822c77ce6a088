#include "hamflow/bvp.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

#include "hamflow/errors.hpp"

namespace hamflow {

const char* to_string(BoundaryKind k) {
    switch (k) {
        case BoundaryKind::Type0: return "Type0";
        case BoundaryKind::TypeI: return "TypeI";
        case BoundaryKind::TypeII: return "TypeII";
        case BoundaryKind::TypeIII: return "TypeIII";
        case BoundaryKind::TypeIV: return "TypeIV";
        case BoundaryKind::TypeIIFree: return "TypeIIFree";
    }
    return "?";
}

BoundarySpec BoundarySpec::type0(Vec q0, Vec p0) { return {BoundaryKind::Type0, std::move(q0), std::move(p0), {}, {}}; }
BoundarySpec BoundarySpec::type1(Vec q0, Vec q1) { return {BoundaryKind::TypeI, std::move(q0), std::move(q1), {}, {}}; }
BoundarySpec BoundarySpec::type2(Vec q0, Vec p1) { return {BoundaryKind::TypeII, std::move(q0), std::move(p1), {}, {}}; }
BoundarySpec BoundarySpec::type3(Vec p0, Vec q1) { return {BoundaryKind::TypeIII, std::move(p0), std::move(q1), {}, {}}; }
BoundarySpec BoundarySpec::type4(Vec p0, Vec p1) { return {BoundaryKind::TypeIV, std::move(p0), std::move(p1), {}, {}}; }

BoundarySpec BoundarySpec::type2_free(Vec q0, Section section, SectionJacobian jacobian) {
    return {BoundaryKind::TypeIIFree, std::move(q0), Vec(), std::move(section), std::move(jacobian)};
}

void BoundarySpec::validate(int n) const {
    if (first.size() != n) throw std::invalid_argument("BoundarySpec: initial data has the wrong dimension");
    if (kind == BoundaryKind::TypeIIFree) {
        if (!section) throw std::invalid_argument("BoundarySpec: free boundary requires a section");
    } else if (second.size() != n) {
        throw std::invalid_argument("BoundarySpec: terminal data has the wrong dimension");
    }
}

Trajectory solve_ivp(const HamiltonianProblem& prob, const PhasePoint& z0, double T, const Stepper& stepper, int N) {
    if (z0.q.size() != prob.dim() || z0.p.size() != prob.dim()) {
        throw std::invalid_argument("solve_ivp: initial point has the wrong dimension");
    }
    return propagate(stepper, z0, 0.0, T, N);
}

Mat flow_jacobian(const Stepper& stepper, const Trajectory& traj) {
    const int n = traj.states.front().dim();
    Mat phi = Mat::Identity(2 * n, 2 * n);
    for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
        const double h = traj.times[k + 1] - traj.times[k];
        phi = stepper.tangent(traj.times[k], traj.states[k], h) * phi;
    }
    return phi;
}

namespace {

bool unknown_is_momentum(BoundaryKind k) {
    return k == BoundaryKind::TypeI || k == BoundaryKind::TypeII || k == BoundaryKind::TypeIIFree;
}

bool terminal_is_position(BoundaryKind k) { return k == BoundaryKind::TypeI || k == BoundaryKind::TypeIII; }

Mat section_derivative(const BoundarySpec& bc, const Vec& q) {
    if (bc.section_jacobian) return bc.section_jacobian(q);
    return finite_difference_jacobian([&](const Vec& x) { return bc.section(x); }, q);
}

}  // namespace

Trajectory solve_shooting(const HamiltonianProblem& prob, const BoundarySpec& bc, double T, const Stepper& stepper,
                          int N, const Vec& guess, const NewtonOptions& opts) {
    const int n = prob.dim();
    bc.validate(n);
    if (bc.kind == BoundaryKind::Type0) throw std::invalid_argument("solve_shooting: use solve_ivp for Type 0 data");
    if (guess.size() != n) throw std::invalid_argument("solve_shooting: guess has the wrong dimension");

    const bool mom = unknown_is_momentum(bc.kind);
    auto initial = [&](const Vec& u) { return mom ? PhasePoint{bc.first, u} : PhasePoint{u, bc.first}; };

    Vec cached_u;
    Trajectory cached;
    auto run = [&](const Vec& u) -> const Trajectory& {
        if (cached_u.size() != u.size() || cached_u != u) {
            cached = propagate(stepper, initial(u), 0.0, T, N);
            cached_u = u;
        }
        return cached;
    };
    auto residual = [&](const Vec& u) -> Vec {
        const PhasePoint& zN = run(u).back();
        switch (bc.kind) {
            case BoundaryKind::TypeI:
            case BoundaryKind::TypeIII: return zN.q - bc.second;
            case BoundaryKind::TypeII:
            case BoundaryKind::TypeIV: return zN.p - bc.second;
            case BoundaryKind::TypeIIFree: return zN.p - bc.section(zN.q);
            default: break;
        }
        throw std::logic_error("solve_shooting: unreachable");
    };
    auto jacobian = [&](const Vec& u) -> Mat {
        const Trajectory& tr = run(u);
        const Mat phi = flow_jacobian(stepper, tr);
        const int col = mom ? n : 0;
        if (bc.kind == BoundaryKind::TypeIIFree) {
            return phi.block(n, col, n, n) - section_derivative(bc, tr.back().q) * phi.block(0, col, n, n);
        }
        return phi.block(terminal_is_position(bc.kind) ? 0 : n, col, n, n);
    };

    const NewtonResult sol = newton_solve(residual, guess, opts, jacobian);
    Trajectory out = run(sol.x);
    out.solver = std::string("shooting/") + to_string(bc.kind) + "/" + stepper.label();
    out.residuals.push_back(sol.residual);
    return out;
}

Trajectory solve_type_ii_sweep(const HamiltonianProblem& prob, const BoundarySpec& bc, double T,
                               const Stepper& stepper, int N) {
    const int n = prob.dim();
    bc.validate(n);
    if (bc.kind != BoundaryKind::TypeII && bc.kind != BoundaryKind::TypeIIFree) {
        throw std::invalid_argument("solve_type_ii_sweep: requires Type II or free-boundary Type II data");
    }
    if (!prob.maximally_degenerate()) {
        throw std::invalid_argument("solve_type_ii_sweep: problem is not flagged maximally degenerate");
    }
    if (N < 1 || !(T > 0.0)) throw std::invalid_argument("solve_type_ii_sweep: need N >= 1 and T > 0");

    const double h = T / N;
    const Vec zero = Vec::Zero(n);
    Trajectory tr;
    tr.solver = std::string("sweep/") + to_string(bc.kind) + "/" + stepper.label();
    tr.times.resize(N + 1);
    tr.states.resize(N + 1);
    std::vector<Vec> offset(N);
    std::vector<Eigen::PartialPivLU<Mat>> gain(N);

    // Forward: positions do not see p; the step from (q_k, 0) gives the affine offset.
    Vec q = bc.first;
    for (int k = 0; k < N; ++k) {
        const double t = k * h;
        tr.times[k] = t;
        tr.states[k].q = q;
        StepOutcome out;
        Mat tangent;
        try {
            out = stepper.advance_detailed(t, PhasePoint{q, zero}, h);
            tangent = stepper.tangent(t, PhasePoint{q, zero}, h);
        } catch (const Error& e) {
            throw StepFailure(std::string("solve_type_ii_sweep: forward step failed: ") + e.what(), k);
        }
        if (!out.z.finite()) throw StepFailure("solve_type_ii_sweep: non-finite forward state", k);
        offset[k] = out.z.p;
        gain[k].compute(tangent.bottomRightCorner(n, n));
        q = out.z.q;
        tr.residuals.push_back(out.residual);
    }
    tr.times[N] = T;
    tr.states[N].q = q;

    // Backward: p_k from p_{k+1} = A_k p_k + c_k.
    Vec p = bc.kind == BoundaryKind::TypeIIFree ? bc.section(q) : bc.second;
    tr.states[N].p = p;
    for (int k = N - 1; k >= 0; --k) {
        p = gain[k].solve(p - offset[k]);
        if (!p.allFinite()) throw StepFailure("solve_type_ii_sweep: non-finite backward state", k);
        tr.states[k].p = p;
    }
    return tr;
}

CompletenessReport completeness_diagnostic(const HamiltonianProblem& prob, BoundaryKind kind, double T,
                                           const Stepper& stepper, int N, const PhasePoint& base,
                                           double threshold_scale, const SectionJacobian& section_jacobian) {
    const int n = prob.dim();
    const Trajectory tr = solve_ivp(prob, base, T, stepper, N);
    const Mat phi = flow_jacobian(stepper, tr);

    CompletenessReport rep;
    rep.kind = kind;
    switch (kind) {
        case BoundaryKind::Type0: rep.sensitivity = phi; break;
        case BoundaryKind::TypeI: rep.sensitivity = phi.block(0, n, n, n); break;
        case BoundaryKind::TypeII: rep.sensitivity = phi.block(n, n, n, n); break;
        case BoundaryKind::TypeIII: rep.sensitivity = phi.block(0, 0, n, n); break;
        case BoundaryKind::TypeIV: rep.sensitivity = phi.block(n, 0, n, n); break;
        case BoundaryKind::TypeIIFree:
            if (!section_jacobian) {
                throw std::invalid_argument("completeness_diagnostic: free boundary needs the section Jacobian");
            }
            rep.sensitivity = phi.block(n, n, n, n) - section_jacobian(tr.back().q) * phi.block(0, n, n, n);
            break;
    }
    const Vec sv = Eigen::JacobiSVD<Mat>(rep.sensitivity).singularValues();
    rep.max_singular_value = sv.maxCoeff();
    rep.min_singular_value = sv.minCoeff();
    rep.condition_estimate = rep.min_singular_value > 0.0 ? rep.max_singular_value / rep.min_singular_value
                                                          : std::numeric_limits<double>::infinity();
    rep.threshold = threshold_scale * std::max(1.0, rep.max_singular_value);
    rep.complete = rep.min_singular_value > rep.threshold;
    return rep;
}

HamiltonianProblem reverse_time(const HamiltonianProblem& prob, double T) {
    const auto value = prob.value_fn();
    const auto gradient = prob.gradient_fn();
    const auto hessian = prob.hessian_fn();
    HamiltonianProblem rev = HamiltonianProblem::analytic(
        prob.dim(), [value, T](double t, const Vec& q, const Vec& p) { return -value(T - t, q, p); },
        [gradient, T](double t, const Vec& q, const Vec& p) {
            HamiltonianGradient g = gradient(T - t, q, p);
            g.dq = -g.dq;
            g.dp = -g.dp;  // dt keeps its sign: d/dt of -H(T - t) is +H_t
            return g;
        },
        [hessian, T](double t, const Vec& q, const Vec& p) { return Mat(-hessian(T - t, q, p)); },
        prob.label() + "/reversed");
    return prob.maximally_degenerate() ? rev.with_maximal_degeneracy() : rev;
}

Trajectory solve_type_iii_by_reversal(const HamiltonianProblem& prob, const BoundarySpec& bc, double T,
                                      Method method, int N, const Vec& guess, const NewtonOptions& opts) {
    if (bc.kind != BoundaryKind::TypeIII) throw std::invalid_argument("solve_type_iii_by_reversal: Type III data expected");
    bc.validate(prob.dim());
    const HamiltonianProblem rev = reverse_time(prob, T);
    const Trajectory back =
        solve_shooting(rev, BoundarySpec::type2(bc.second, bc.first), T, make_stepper(rev, method), N, guess, opts);
    Trajectory out;
    out.solver = "reversal/" + back.solver;
    out.residuals = back.residuals;
    for (int k = N; k >= 0; --k) {
        out.times.push_back(T - back.times[k]);
        out.states.push_back(back.states[k]);
    }
    out.times.front() = 0.0;
    out.times.back() = T;
    return out;
}

double midpoint_action(const HamiltonianProblem& prob, const Trajectory& traj) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
        const PhasePoint& a = traj.states[k];
        const PhasePoint& b = traj.states[k + 1];
        const double h = traj.times[k + 1] - traj.times[k];
        const Vec qbar = 0.5 * (a.q + b.q);
        const Vec pbar = 0.5 * (a.p + b.p);
        s += pbar.dot(b.q - a.q) - h * prob.value(traj.times[k] + 0.5 * h, qbar, pbar);
    }
    return s;
}

Vec Variation::dq(double s) const { return a.col(0) * s + a.col(1) * (s * s) + a.col(2) * (s * s * s); }

Vec Variation::dp(double s) const { return b.col(0) + b.col(1) * s + b.col(2) * (s * s) + b.col(3) * (s * s * s); }

std::vector<Variation> random_variations(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Variation> out(count);
    for (auto& v : out) {
        v.a.resize(n, 3);
        v.b.resize(n, 4);
        for (Eigen::Index i = 0; i < v.a.size(); ++i) v.a(i) = u(rng);
        for (Eigen::Index i = 0; i < v.b.size(); ++i) v.b(i) = u(rng);
    }
    return out;
}

VirtualWork virtual_work(const HamiltonianProblem& prob, const Trajectory& traj, const Variation& var, double eps) {
    const double t0 = traj.times.front();
    const double span = traj.times.back() - t0;
    auto varied = [&](double e) {
        Trajectory v = traj;
        for (std::size_t k = 0; k < v.states.size(); ++k) {
            const double s = (v.times[k] - t0) / span;
            v.states[k].q += e * var.dq(s);
            v.states[k].p += e * var.dp(s);
        }
        return midpoint_action(prob, v);
    };
    VirtualWork w;
    w.delta_action = (varied(eps) - varied(-eps)) / (2.0 * eps);
    w.work = traj.back().p.dot(var.dq(1.0));
    w.scale = std::max({1.0, std::abs(w.delta_action), std::abs(w.work)});
    return w;
}

}  // namespace hamflow
