#include <cmath>
#include <numbers>
#include <random>

#include <hamflow/bvp.hpp>
#include <hamflow/hamel.hpp>
#include <hamflow/problems.hpp>

#include "util.hpp"

namespace hamflow::cli {

namespace {

double max_state_gap(const Trajectory& a, const Trajectory& b) {
    double gap = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) gap = std::max(gap, inf_norm(a.states[k].stacked() - b.states[k].stacked()));
    return gap;
}

/// H = <p, sin q> + q^2.
HamiltonianProblem sin_drift() {
    return HamiltonianProblem::automatic(
               1,
               [](auto, const auto& q, const auto& p) {
                   using std::sin;
                   return p[0] * sin(q[0]) + q[0] * q[0];
               },
               "sin_drift")
        .with_maximal_degeneracy();
}

PhasePoint rotation(const PhasePoint& z, double t) {
    return {z.q * std::cos(t) + z.p * std::sin(t), -z.q * std::sin(t) + z.p * std::cos(t)};
}

struct NamedFamily {
    std::string name;
    DiscreteHamiltonianFamily family;
};

NamedFamily scheme_family(const std::string& name, const HamiltonianProblem& prob) {
    if (name == "midpoint") return {name, midpoint_family(prob)};
    if (name == "gauss4") return {name, galerkin_family(prob, GalerkinScheme::gauss_legendre(2))};
    if (name == "gauss6") return {name, galerkin_family(prob, GalerkinScheme::gauss_legendre(3))};
    if (name == "symplectic_euler") return {name, symplectic_euler_family(prob)};
    throw ConfigError("unknown scheme '" + name + "' (midpoint, gauss4, gauss6, symplectic_euler)");
}

HamiltonianProblem named_problem(const std::string& name) {
    return name == "pendulum" ? problems::pendulum() : problems::oscillator();
}

Vec cross(const Vec& a, const Vec& b) { return Eigen::Vector3d(a.head<3>()).cross(Eigen::Vector3d(b.head<3>())); }

}  // namespace

ExperimentResult completeness_table(const Params& p) {
    problems::ModelParams mp;
    mp.f_lin = p.real("f_lin");
    mp.f_quad = p.real("f_quad");
    mp.g_lin = p.real("g_lin");
    mp.g_quad = p.real("g_quad");
    const auto model = problems::model_degenerate(mp);
    const auto stepper = make_stepper(model, method_from_string(p.str("method")));
    const PhasePoint base{vec_param(p, "base_q", 2), vec_param(p, "base_p", 2)};

    Table t{"completeness",
            {"type", "verdict", "min_singular_value", "max_singular_value", "condition_estimate", "threshold"},
            {}};
    ExperimentResult r;
    for (BoundaryKind k : {BoundaryKind::Type0, BoundaryKind::TypeI, BoundaryKind::TypeII, BoundaryKind::TypeIII,
                           BoundaryKind::TypeIV}) {
        const auto rep = completeness_diagnostic(model, k, p.real("T"), stepper, p.integer("N"), base,
                                                 p.real("threshold_scale"));
        t.add({std::string(to_string(k)), std::string(rep.verdict()), rep.min_singular_value, rep.max_singular_value,
               rep.condition_estimate, rep.threshold});
        r.metrics[std::string("min_sv_") + to_string(k)] = rep.min_singular_value;
        r.metrics[std::string("complete_") + to_string(k)] = rep.complete ? 1.0 : 0.0;
    }
    r.tables.push_back(std::move(t));
    return r;
}

ExperimentResult type2_bvp(const Params& p) {
    const double T = p.real("T");
    NewtonOptions opts;
    opts.tol = p.real("tol");
    ExperimentResult r;

    // Sweep against shooting on maximally degenerate problems.
    Table agree{"sweep_vs_shooting", {"problem", "method", "boundary", "max_state_gap"}, {}};
    const Vec q0 = Vec::Constant(1, 0.8);
    const int sweep_N = p.integer("sweep_N");
    double worst = 0.0;
    for (const auto& prob : {sin_drift(), problems::degenerate_with_cost(), problems::linear_degenerate()}) {
        for (Method m : {Method::Midpoint, Method::Gauss4, Method::SymplecticEuler, Method::ExplicitEuler}) {
            const auto st = make_stepper(prob, m);
            const BoundarySpec specs[] = {
                BoundarySpec::type2(q0, Vec::Constant(1, -0.5)),
                BoundarySpec::type2_free(q0, [](const Vec& q) { return Vec(2.0 * q); },
                                         [](const Vec&) { return Mat::Constant(1, 1, 2.0); })};
            for (const auto& bc : specs) {
                const double gap = max_state_gap(solve_type_ii_sweep(prob, bc, T, st, sweep_N),
                                                 solve_shooting(prob, bc, T, st, sweep_N, Vec::Zero(1), opts));
                worst = std::max(worst, gap);
                agree.add({prob.label(), std::string(to_string(m)),
                           std::string(bc.kind == BoundaryKind::TypeII ? "fixed" : "free"), gap});
            }
        }
    }
    r.metrics["sweep_shooting_max_gap"] = worst;
    r.tables.push_back(std::move(agree));

    // Oscillator: q(0) = 1, p(T) = 0 has the closed form with p(0) = tan T.
    const auto osc = problems::oscillator();
    const int N = p.integer("N");
    const auto tr = solve_shooting(osc, BoundarySpec::type2(Vec::Constant(1, 1.0), Vec::Zero(1)), T,
                                   make_stepper(osc, Method::Midpoint), N, Vec::Zero(1), opts);
    const PhasePoint start{Vec::Constant(1, 1.0), Vec::Constant(1, std::tan(T))};
    Table osc_t{"oscillator", {"t", "q", "p", "q_exact", "p_exact"}, {}};
    double osc_err = 0.0;
    const int stride = std::max(1, N / 100);
    for (int k = 0; k <= N; ++k) {
        const PhasePoint ex = rotation(start, tr.times[k]);
        osc_err = std::max(osc_err, inf_norm(tr.states[k].stacked() - ex.stacked()));
        if (k % stride == 0 || k == N) osc_t.add({tr.times[k], tr.states[k].q[0], tr.states[k].p[0], ex.q[0], ex.p[0]});
    }
    r.metrics["oscillator_max_error"] = osc_err;
    r.tables.push_back(std::move(osc_t));

    // Virtual work on a converged pendulum solution.
    const auto pend = problems::pendulum();
    const auto sol = solve_shooting(pend, BoundarySpec::type2(Vec::Constant(1, 0.5), Vec::Constant(1, 0.2)), T,
                                    make_stepper(pend, Method::Midpoint), p.integer("dalembert_N"), Vec::Zero(1), opts);
    Table vw{"virtual_work", {"variation", "delta_action", "work", "scale", "relative_residual"}, {}};
    double vw_max = 0.0;
    long long i = 0;
    for (const auto& var : random_variations(1, p.integer("variations"), p.seed())) {
        const VirtualWork w = virtual_work(pend, sol, var);
        const double rel = std::abs(w.delta_action - w.work) / w.scale;
        vw_max = std::max(vw_max, rel);
        vw.add({i++, w.delta_action, w.work, w.scale, rel});
    }
    r.metrics["virtual_work_max_relative"] = vw_max;
    r.tables.push_back(std::move(vw));
    return r;
}

ExperimentResult order_study(const Params& p) {
    const auto prob = named_problem(p.str("problem"));
    const double T = p.real("T");
    const PhasePoint z0{vec_param(p, "z0", 2).head(1), vec_param(p, "z0", 2).tail(1)};
    std::optional<PhasePoint> ref;
    if (p.str("problem") == "oscillator") ref = rotation(z0, T);

    ExperimentResult r;
    Table errs{"errors", {"scheme", "N", "h", "error"}, {}};
    Table orders{"orders", {"scheme", "order"}, {}};
    const auto steps = p.integers("steps");
    for (const auto& name : name_list(p.str("schemes"))) {
        const auto fam = scheme_family(name, prob);
        const auto est = estimate_order(fam.family, prob, z0, T, steps, ref);
        for (std::size_t k = 0; k < est.steps.size(); ++k) {
            errs.add({name, static_cast<long long>(std::llround(T / est.steps[k])), est.steps[k], est.errors[k]});
        }
        orders.add({name, est.order});
        r.metrics["order_" + name] = est.order;
    }

    // Local error of the midpoint generating function against the exact one.
    Table gap{"generating_gap", {"h", "max_gap"}, {}};
    const auto samples = sample_points(1, p.integer("gap_points"), p.seed(), 0.5);
    std::vector<double> hs, gaps;
    for (double h : p.reals("gap_h")) {
        if (!(h > 0.0)) throw ConfigError("gap_h entries must be positive");
        const auto dh = midpoint_discrete_hamiltonian(prob, h);
        double g = 0.0;
        for (const auto& s : samples) {
            g = std::max(g, std::abs(dh.value(0.0, s.z.q, s.z.p) - exact_discrete_hamiltonian(prob, s.z.q, s.z.p, h)));
        }
        gap.add({h, g});
        hs.push_back(h);
        gaps.push_back(g);
    }
    r.metrics["generating_gap_slope"] = loglog_slope(hs, gaps);
    r.tables.push_back(std::move(errs));
    r.tables.push_back(std::move(orders));
    r.tables.push_back(std::move(gap));
    return r;
}

ExperimentResult symplecticity_scan(const Params& p) {
    const auto prob = named_problem(p.str("problem"));
    const double h = p.real("h");
    struct Named {
        std::string name;
        Stepper stepper;
    };
    const std::vector<Named> maps = {
        {"midpoint", make_stepper(prob, Method::Midpoint)},
        {"gauss4", make_stepper(prob, Method::Gauss4)},
        {"gauss6", stepper_from_family(galerkin_family(prob, GalerkinScheme::gauss_legendre(3)), "gauss6")},
        {"symplectic_euler", make_stepper(prob, Method::SymplecticEuler)},
        {"exact", make_stepper(prob, Method::Exact)},
        {"explicit_euler", make_stepper(prob, Method::ExplicitEuler)},
    };
    ExperimentResult r;
    Table defects{"defects", {"map", "point", "t", "q", "p", "defect"}, {}};
    double builtin_max = 0.0;
    const auto pts = sample_points(1, p.integer("points"), p.seed());
    for (const auto& m : maps) {
        double worst = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double d = symplecticity_defect(m.stepper, pts[i].t, pts[i].z, h);
            worst = std::max(worst, d);
            defects.add({m.name, static_cast<long long>(i), pts[i].t, pts[i].z.q[0], pts[i].z.p[0], d});
        }
        r.metrics["max_defect_" + m.name] = worst;
        if (m.name != "explicit_euler") builtin_max = std::max(builtin_max, worst);
    }
    r.metrics["max_defect_builtin"] = builtin_max;

    Table noether{"noether", {"method", "steps", "angular_momentum_drift"}, {}};
    const auto cf = problems::central_force();
    const PhasePoint z0{(Vec(2) << 1.0, 0.2).finished(), (Vec(2) << -0.1, 0.8).finished()};
    for (Method m : {Method::Midpoint, Method::ExplicitEuler}) {
        const auto tr = propagate(make_stepper(cf, m), z0, 0.0, p.real("T"), p.integer("N"));
        const double drift = momentum_map_drift(tr, problems::angular_momentum);
        noether.add({std::string(to_string(m)), static_cast<long long>(p.integer("N")), drift});
        r.metrics[std::string("drift_") + to_string(m)] = drift;
    }
    r.tables.push_back(std::move(defects));
    r.tables.push_back(std::move(noether));
    return r;
}

ExperimentResult noether_drift(const Params& p) {
    const auto cf = problems::central_force();
    const PhasePoint z0{vec_param(p, "q0", 2), vec_param(p, "p0", 2)};
    const double J0 = problems::angular_momentum(z0);
    const int N = p.integer("N");
    const int stride = p.integer("stride");
    ExperimentResult r;
    Table series{"drift", {"method", "step", "t", "angular_momentum", "deviation"}, {}};
    Table summary{"max_drift", {"method", "max_drift"}, {}};
    for (const auto& name : name_list(p.str("methods"))) {
        Method m;
        try {
            m = method_from_string(name);
        } catch (const std::exception&) {
            throw ConfigError("unknown method '" + name + "'");
        }
        const auto tr = propagate(make_stepper(cf, m), z0, 0.0, p.real("T"), N);
        for (int k = 0; k <= N; ++k) {
            if (k % stride != 0 && k != N) continue;
            const double J = problems::angular_momentum(tr.states[k]);
            series.add({name, static_cast<long long>(k), tr.times[k], J, J - J0});
        }
        const double drift = momentum_map_drift(tr, problems::angular_momentum);
        summary.add({name, drift});
        r.metrics["drift_" + name] = drift;
    }
    r.tables.push_back(std::move(series));
    r.tables.push_back(std::move(summary));
    return r;
}

ExperimentResult hamel_rigid_body(const Params& p) {
    const Vec inertia = vec_param(p, "inertia", 3);
    if ((inertia.array() <= 0.0).any()) throw ConfigError("inertia must be positive");
    const auto triv = trivializations::so3_left_zyx();
    const auto h = rigid_body_trivialized(inertia);
    std::mt19937_64 rng(p.seed());
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto rvec = [&] { return Vec(Eigen::Vector3d(unit(rng), unit(rng), unit(rng))); };
    auto angles = [&] { return Vec(Eigen::Vector3d(std::numbers::pi * unit(rng), 1.2 * unit(rng), std::numbers::pi * unit(rng))); };

    ExperimentResult r;
    Table br{"bracket", {"triple", "bracket_error", "euler_rhs_error"}, {}};
    double bracket_max = 0.0, euler_max = 0.0;
    for (int i = 0; i < p.integer("triples"); ++i) {
        const Vec q = angles();
        const Vec u = rvec(), v = rvec();
        const double eb = inf_norm(hamel_bracket(triv, q, u, v) - cross(u, v));
        const Vec mu = rvec();
        const auto field = hamel_vector_field(h, triv, 0.0, {q, mu});
        const double ee = inf_norm(field.dmu - cross(mu, mu.cwiseQuotient(inertia)));
        bracket_max = std::max(bracket_max, eb);
        euler_max = std::max(euler_max, ee);
        br.add({static_cast<long long>(i), eb, ee});
    }
    r.metrics["bracket_max_error"] = bracket_max;
    r.metrics["euler_rhs_max_error"] = euler_max;

    // Forward run, then recover mu(0) from the Type II data (q0, mu(T)).
    const Vec q0 = vec_param(p, "q0", 3), mu0 = vec_param(p, "mu0", 3);
    const double T = p.real("T");
    const int N = p.integer("N");
    const auto ivp = integrate_hamel(h, triv, {q0, mu0}, T, N);
    const auto bvp = solve_hamel_type_ii(h, triv, q0, ivp.back().p, T, N);
    Table rt{"round_trip", {"component", "mu0", "recovered", "error"}, {}};
    for (int i = 0; i < 3; ++i) {
        rt.add({static_cast<long long>(i), mu0[i], bvp.front().p[i], std::abs(bvp.front().p[i] - mu0[i])});
    }
    r.metrics["round_trip_error"] = inf_norm(bvp.front().p - mu0);

    // Invariants of the implicit-midpoint Hamel integrator.
    NewtonOptions o;
    o.polish = true;
    const Vec imu = vec_param(p, "invariant_mu0", 3);
    const int steps = p.integer("invariant_steps");
    const auto inv = integrate_hamel(h, triv, {Vec::Zero(3), imu}, steps * p.real("invariant_h"), steps, o);
    const double c0 = imu.squaredNorm(), e0 = h.value(0.0, Vec::Zero(3), imu);
    Table series{"invariants", {"step", "t", "casimir_deviation", "energy_deviation"}, {}};
    double cmax = 0.0, emax = 0.0;
    const int stride = std::max(1, steps / 100);
    for (int k = 0; k <= steps; ++k) {
        const auto& z = inv.states[k];
        const double dc = z.p.squaredNorm() - c0, de = h.value(0.0, z.q, z.p) - e0;
        cmax = std::max(cmax, std::abs(dc));
        emax = std::max(emax, std::abs(de));
        if (k % stride == 0 || k == steps) series.add({static_cast<long long>(k), inv.times[k], dc, de});
    }
    r.metrics["casimir_drift"] = cmax;
    r.metrics["energy_drift"] = emax;
    r.tables.push_back(std::move(br));
    r.tables.push_back(std::move(rt));
    r.tables.push_back(std::move(series));
    return r;
}

}  // namespace hamflow::cli
