#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include <hamflow/accelopt.hpp>
#include <hamflow/adjoint.hpp>
#include <hamflow/optcontrol.hpp>

#include "util.hpp"

namespace hamflow::cli {

namespace {

/// f = u, g = (q^2 + u^2) / 2, C = 0.
ControlProblem scalar_lqr(double q0, double T) {
    ControlProblem cp;
    cp.label = "lqr";
    cp.f = [](double, const Vec&, const Vec& u) { return u; };
    cp.f_q = [](double, const Vec&, const Vec&) { return Mat::Zero(1, 1); };
    cp.f_u = [](double, const Vec&, const Vec&) { return Mat::Identity(1, 1); };
    cp.g = [](double, const Vec& q, const Vec& u) { return 0.5 * (q.squaredNorm() + u.squaredNorm()); };
    cp.g_q = [](double, const Vec& q, const Vec&) { return q; };
    cp.g_u = [](double, const Vec&, const Vec& u) { return u; };
    cp.C = [](const Vec&) { return 0.0; };
    cp.dC = [](const Vec&) { return Vec::Zero(1); };
    cp.q0 = Vec::Constant(1, q0);
    cp.T = T;
    return cp;
}

std::vector<CostProblem> commutativity_problems() {
    auto out = adjoint_battery::nonlinear();
    out.push_back(adjoint_battery::nilpotent_linear((Vec(2) << 0.3, -2.0).finished()));
    return out;
}

}  // namespace

ExperimentResult adjoint_gradient(const Params& p) {
    const Method method = method_from_string(p.str("method"));
    const int N = p.integer("N");
    ExperimentResult r;

    Table battery{"battery", {"problem", "component", "adjoint", "finite_difference_error"}, {}};
    double worst = 0.0;
    for (const auto& cp : adjoint_battery::nonlinear()) {
        const Vec g = sensitivity(cp, method, N).grad;
        const double err = gradient_check(cp, method, N, p.real("eps"));
        worst = std::max(worst, err);
        for (int i = 0; i < g.size(); ++i) battery.add({cp.label, static_cast<long long>(i), g[i], err});
    }
    r.metrics["battery_max_error"] = worst;

    // Linear dynamics: dJ/dq0 = exp(A^T T) dC.
    const auto lin = adjoint_battery::nilpotent_linear(Vec::Ones(2));
    const Mat A = lin.jacobian_f(0.0, lin.q0);
    const Vec oracle = Mat(A.transpose() * lin.T).exp() * lin.dC(Vec::Zero(2));
    const Vec g = sensitivity(lin, method, N).grad;
    Table linear{"linear_oracle", {"component", "adjoint", "oracle", "error"}, {}};
    for (int i = 0; i < 2; ++i) linear.add({static_cast<long long>(i), g[i], oracle[i], std::abs(g[i] - oracle[i])});
    r.metrics["linear_oracle_error"] = inf_norm(g - oracle);

    const auto diff = diffusion_adjoint_demo(p.integer("nx"), p.real("diffusion_T"), p.integer("diffusion_N"));
    r.metrics["diffusion_relative_error"] = diff.err_vs_oracle;

    r.tables.push_back(std::move(battery));
    r.tables.push_back(std::move(linear));
    return r;
}

ExperimentResult diffusion_adjoint(const Params& p) {
    const double T = p.real("T");
    const auto d = diffusion_adjoint_demo(p.integer("nx"), T, p.integer("N"));
    ExperimentResult r;
    Table nodes{"gradient", {"x", "q0", "adjoint", "oracle", "error"}, {}};
    const int nx = static_cast<int>(d.grad.size());
    for (int i = 0; i < nx; ++i) {
        nodes.add({(i + 1.0) / (nx + 1), d.q0[i], d.grad[i], d.oracle[i], std::abs(d.grad[i] - d.oracle[i])});
    }
    r.metrics["relative_error"] = d.err_vs_oracle;
    r.metrics["reverse_growth"] = d.reverse_growth;

    // Backward-in-time heat flow amplifies the finest modes; the adjoint
    // (run forward in reversed time) never does.
    Table growth{"reverse_growth", {"nx", "reverse_growth", "relative_error"}, {}};
    for (int n : p.integers("growth_nx")) {
        if (n < 3) throw ConfigError("growth_nx entries must be at least 3");
        const auto g = diffusion_adjoint_demo(n, T, p.integer("growth_N"));
        growth.add({static_cast<long long>(n), g.reverse_growth, g.err_vs_oracle});
    }
    r.tables.push_back(std::move(nodes));
    r.tables.push_back(std::move(growth));
    return r;
}

ExperimentResult commutativity(const Params& p) {
    const auto Ns = p.integers("Ns");
    ExperimentResult r;
    Table gaps{"gaps", {"problem", "pair", "N", "gap"}, {}};
    Table ratios{"ratios", {"problem", "N_coarse", "N_fine", "ratio"}, {}};
    double symp = 0.0;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& cp : commutativity_problems()) {
        std::vector<double> ee;
        for (int N : Ns) {
            const double gs = commutativity_gap(cp, AdjointPair::Symplectic, N);
            const double ge = commutativity_gap(cp, AdjointPair::ExplicitEuler, N);
            symp = std::max(symp, gs);
            gaps.add({cp.label, std::string(to_string(AdjointPair::Symplectic)), static_cast<long long>(N), gs});
            gaps.add({cp.label, std::string(to_string(AdjointPair::ExplicitEuler)), static_cast<long long>(N), ge});
            ee.push_back(ge);
        }
        // A gap at round-off level has no rate.
        for (std::size_t k = 0; k + 1 < Ns.size(); ++k) {
            if (!(ee[k] > 1e-12)) continue;
            const double ratio = ee[k] / ee[k + 1];
            ratios.add({cp.label, static_cast<long long>(Ns[k]), static_cast<long long>(Ns[k + 1]), ratio});
            rmin = std::min(rmin, ratio);
            rmax = std::max(rmax, ratio);
        }
    }
    r.metrics["symplectic_max_gap"] = symp;
    r.metrics["explicit_euler_ratio_min"] = ratios.rows.empty() ? 0.0 : rmin;
    r.metrics["explicit_euler_ratio_max"] = rmax;
    r.tables.push_back(std::move(gaps));
    r.tables.push_back(std::move(ratios));
    return r;
}

ExperimentResult pontryagin_lqr(const Params& p) {
    const double T = p.real("T"), q0 = p.real("q0");
    const int N = p.integer("N");
    const auto cp = scalar_lqr(q0, T);
    const Method method = method_from_string(p.str("method"));
    const auto res = solve_fbsm(cp, method, N, p.integer("max_sweeps"), p.real("relax"), p.real("tol"));
    const auto pr = pontryagin_residuals(cp, res.traj, method);

    // Riccati: P = tanh(T - t), q = q0 cosh(T - t) / cosh(T), u = -P q, p = P q.
    ExperimentResult r;
    Table traj{"trajectory", {"t", "q", "p", "u", "q_exact", "u_exact"}, {}};
    double gap = 0.0;
    const int stride = std::max(1, N / 100);
    for (int k = 0; k <= N; ++k) {
        const double t = res.traj.times[k];
        const double qe = q0 * std::cosh(T - t) / std::cosh(T), ue = -std::tanh(T - t) * qe;
        const double q = res.traj.states[k].q[0], u = res.traj.controls[k][0];
        gap = std::max({gap, std::abs(q - qe), std::abs(u - ue)});
        if (k % stride == 0 || k == N) traj.add({t, q, res.traj.states[k].p[0], u, qe, ue});
    }
    r.metrics["stationarity"] = res.residual;
    r.metrics["oracle_gap"] = gap;
    r.metrics["sweeps"] = res.sweeps;
    r.metrics["residual_state"] = pr.state;
    r.metrics["residual_costate"] = pr.costate;
    r.metrics["residual_terminal"] = pr.terminal;
    r.tables.push_back(std::move(traj));
    return r;
}

ExperimentResult accelopt_rate(const Params& p) {
    BregmanConfig cfg;
    for (const auto& c : accel_battery::quadratics()) {
        if (c.label == p.str("problem")) cfg = c;
    }
    cfg.p = p.real("p");
    cfg.p_ring = p.real("p_ring");
    cfg.C = p.real("C");
    const auto run = minimize(cfg, method_from_string(p.str("method")), p.integer("N"), p.real("h"));
    const auto prob = adaptive_bregman_problem(cfg);

    ExperimentResult r;
    Table hist{"history", {"step", "t", "gap", "hbar"}, {}};
    const int stride = p.integer("stride");
    const int last = static_cast<int>(run.iterates.size()) - 1;
    for (int k = 0; k <= last; ++k) {
        if (k % stride != 0 && k != last) continue;
        const PhasePoint z = run.iterates[k].phase();
        hist.add({static_cast<long long>(k), run.rate.times[k], run.rate.gaps[k], prob.value(0.0, z.q, z.p)});
    }
    r.metrics["slope"] = run.rate.slope;
    r.metrics["max_abs_hbar"] = run.max_hbar;
    r.metrics["t_end"] = run.rate.times.back();
    r.metrics["final_gap"] = run.rate.gaps.back();
    r.metrics["aborted"] = run.aborted ? 1.0 : 0.0;
    r.tables.push_back(std::move(hist));
    return r;
}

}  // namespace hamflow::cli
