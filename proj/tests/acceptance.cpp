// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <hamflow/errors.hpp>

#include "experiments.hpp"

using namespace hamflow::cli;

namespace {

struct Timed {
    ExperimentResult result;
    double seconds = 0.0;
};

Timed run(const std::string& config) {
    const auto t0 = std::chrono::steady_clock::now();
    Timed out{run_experiment(parse_config_text(config)), 0.0};
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

double metric(const Timed& t, const std::string& key) { return t.result.metrics.at(key); }

int failures = 0;

void report(int id, const std::string& title, const std::function<bool(std::string&)>& check) {
    std::string detail;
    bool ok = false;
    try {
        ok = check(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

}  // namespace

int main() {
    report(1, "completeness table", [](std::string& d) {
        const auto r = run("experiment = completeness_table\n");
        const char* kinds[] = {"Type0", "TypeI", "TypeII", "TypeIII", "TypeIV"};
        const bool expected[] = {true, false, true, true, false};
        bool ok = r.seconds < 5.0;
        for (int i = 0; i < 5; ++i) {
            const double sv = metric(r, std::string("min_sv_") + kinds[i]);
            const bool complete = metric(r, std::string("complete_") + kinds[i]) == 1.0;
            ok = ok && complete == expected[i] && (expected[i] ? sv >= 1e-2 : sv <= 1e-10);
            d += std::string(kinds[i]) + (complete ? "=C" : "=I") + fmt("(%.2g) ", sv);
        }
        d += fmt("in %.2f s (< 5 s)", r.seconds);
        return ok;
    });

    const auto bvp = run("experiment = type2_bvp\n");
    report(2, "Type II solvers", [&](std::string& d) {
        const double gap = metric(bvp, "sweep_shooting_max_gap"), osc = metric(bvp, "oscillator_max_error");
        d = fmt("sweep/shooting gap %.3g (<= 1e-8), oscillator error %.3g at N=2000 (<= 1e-6), %.2f s (< 5 s)", gap, osc,
                bvp.seconds);
        return gap <= 1e-8 && osc <= 1e-6 && bvp.seconds < 5.0;
    });
    report(3, "virtual-work identity", [&](std::string& d) {
        const double v = metric(bvp, "virtual_work_max_relative");
        d = fmt("max |dS - p1.dq(T)| / scale %.3g over 20 variations (<= 1e-6)", v);
        return v <= 1e-6;
    });

    const auto order = run("experiment = order_study\n");
    report(4, "integrator orders", [&](std::string& d) {
        const double m = metric(order, "order_midpoint"), g = metric(order, "order_gauss4");
        d = fmt("midpoint %.4f in [1.8, 2.2], gauss4 %.4f (>= 3.8), %.2f s (< 30 s)", m, g, order.seconds);
        return m >= 1.8 && m <= 2.2 && g >= 3.8 && order.seconds < 30.0;
    });

    report(5, "symplecticity and Noether", [](std::string& d) {
        const auto r = run("experiment = symplecticity_scan\n");
        const double defect = metric(r, "max_defect_builtin"), drift = metric(r, "drift_midpoint");
        const double ee_defect = metric(r, "max_defect_explicit_euler"), ee_drift = metric(r, "drift_explicit_euler");
        d = fmt("defect %.3g (<= 1e-7), midpoint drift %.3g (<= 1e-10); explicit Euler %.3g / %.3g (must exceed)",
                defect, drift, ee_defect, ee_drift);
        return defect <= 1e-7 && drift <= 1e-10 && ee_defect > 1e-7 && ee_drift > 1e-10;
    });

    report(6, "generating-function error slope", [&](std::string& d) {
        const double s = metric(order, "generating_gap_slope"), m = metric(order, "order_midpoint");
        d = fmt("slope %.4f >= midpoint order %.4f - 0.2", s, m);
        return s >= m - 0.2;
    });

    report(7, "adjoint gradients", [](std::string& d) {
        const auto r = run("experiment = adjoint_gradient\n");
        const double b = metric(r, "battery_max_error"), l = metric(r, "linear_oracle_error"),
                     df = metric(r, "diffusion_relative_error");
        d = fmt("battery %.3g (<= 1e-5), linear %.3g (<= 1e-6), diffusion %.3g (<= 1e-4), ", b, l, df) +
            fmt("%.2f s (< 10 s)", r.seconds);
        return b <= 1e-5 && l <= 1e-6 && df <= 1e-4 && r.seconds < 10.0;
    });

    report(8, "discretize/optimize commutativity", [](std::string& d) {
        const auto r = run("experiment = commutativity\n");
        const double g = metric(r, "symplectic_max_gap"), lo = metric(r, "explicit_euler_ratio_min"),
                     hi = metric(r, "explicit_euler_ratio_max");
        d = fmt("symplectic gap %.3g (<= 1e-12), explicit Euler halving ratios in [%.4f, %.4f] (within [1.7, 2.3])", g,
                lo, hi);
        return g <= 1e-12 && lo >= 1.7 && hi <= 2.3;
    });

    report(9, "Pontryagin LQR", [](std::string& d) {
        const auto r = run("experiment = pontryagin_lqr\n");
        const double s = metric(r, "stationarity"), g = metric(r, "oracle_gap");
        d = fmt("max|D_uH| %.3g (<= 1e-8), Riccati gap %.3g (<= 1e-4), %.2f s (< 10 s)", s, g, r.seconds);
        return s <= 1e-8 && g <= 1e-4 && r.seconds < 10.0;
    });

    report(10, "Hamel rigid body", [](std::string& d) {
        const auto r = run("experiment = hamel_rigid_body\n");
        const double b = metric(r, "bracket_max_error"), e = metric(r, "euler_rhs_max_error"),
                     rt = metric(r, "round_trip_error");
        d = fmt("bracket %.3g (<= 1e-8), Euler rhs %.3g (<= 1e-12), round trip %.3g (<= 1e-6)", b, e, rt);
        return b <= 1e-8 && e <= 1e-12 && rt <= 1e-6;
    });

    report(11, "accelerated optimization", [](std::string& d) {
        bool ok = true;
        for (const char* prob : {"shifted", "diagonal", "coupled"}) {
            const auto r = run(std::string("experiment = accelopt_rate\n[numeric]\nN = 10000\n[accelopt_rate]\np = 2\nproblem = ") +
                               prob + "\n");
            const double s = metric(r, "slope"), h = metric(r, "max_abs_hbar");
            ok = ok && s <= -1.8 && h <= 1e-8 && metric(r, "aborted") == 0.0;
            d += std::string(prob) + fmt(": slope %.3f, |Hbar| %.3g; ", s, h);
        }
        d += "(slope <= -1.8, |Hbar| <= 1e-8 over 1e4 steps)";
        return ok;
    });

    report(12, "determinism", [](std::string& d) {
        int tables = 0;
        for (const auto& spec : registry()) {
            const auto cfg = default_config(spec.name);
            const auto a = run_experiment(cfg), b = run_experiment(cfg);
            if (a.tables.size() != b.tables.size() || summary_table(a).csv() != summary_table(b).csv()) {
                d = spec.name + " differs";
                return false;
            }
            for (std::size_t i = 0; i < a.tables.size(); ++i, ++tables) {
                if (a.tables[i].csv() != b.tables[i].csv()) {
                    d = spec.name + "/" + a.tables[i].name + " differs";
                    return false;
                }
            }
        }
        d = std::to_string(registry().size()) + " experiments, " + std::to_string(tables) +
            " tables byte-identical across re-runs";
        return true;
    });

    return failures == 0 ? 0 : 1;
}
