#include <cmath>

#include <gtest/gtest.h>

#include "hamflow/optcontrol.hpp"

using namespace hamflow;

namespace {

Vec s1(double x) { return Vec::Constant(1, x); }

/// f = u, g = (q^2 + u^2)/2, C = 0.
ControlProblem scalar_lqr(double T = 1.0) {
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
    cp.q0 = s1(1.0);
    cp.T = T;
    return cp;
}

/// Dense RK4 integration of P' = P^2 - 1, P(T) = 0 backward and q' = -P q
/// forward on a fine grid; returns (q, u = -P q) at the N + 1 coarse nodes.
struct RiccatiOracle {
    std::vector<double> q, u;
};

RiccatiOracle riccati_oracle(double T, int N, int refine = 64) {
    const int M = N * refine;
    const double h = T / M;
    // P on the half-step grid so the forward RK4 stages read exact values.
    std::vector<double> P(2 * M + 1);
    P[2 * M] = 0.0;
    auto dP = [](double x) { return x * x - 1.0; };
    const double hh = 0.5 * h;
    for (int k = 2 * M; k > 0; --k) {
        const double p = P[k];
        const double k1 = dP(p), k2 = dP(p - 0.5 * hh * k1), k3 = dP(p - 0.5 * hh * k2), k4 = dP(p - hh * k3);
        P[k - 1] = p - hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    std::vector<double> q(M + 1);
    q[0] = 1.0;
    for (int k = 0; k < M; ++k) {
        const double a = -P[2 * k], b = -P[2 * k + 1], c = -P[2 * k + 2];
        const double x = q[k];
        const double k1 = a * x, k2 = b * (x + 0.5 * h * k1), k3 = b * (x + 0.5 * h * k2), k4 = c * (x + h * k3);
        q[k + 1] = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    RiccatiOracle out;
    for (int i = 0; i <= N; ++i) {
        out.q.push_back(q[i * refine]);
        out.u.push_back(-P[2 * i * refine] * q[i * refine]);
    }
    return out;
}

double oracle_gap(const FbsmResult& r, const RiccatiOracle& o) {
    double gap = 0.0;
    for (std::size_t k = 0; k < o.q.size(); ++k) {
        gap = std::max({gap, std::abs(r.traj.states[k].q[0] - o.q[k]), std::abs(r.traj.controls[k][0] - o.u[k])});
    }
    return gap;
}

}  // namespace

TEST(ControlHamiltonian, Examples) {
    ControlProblem cp;
    cp.f = [](double, const Vec&, const Vec& u) { return u; };
    cp.g = [](double, const Vec&, const Vec& u) { return 0.5 * u.squaredNorm(); };
    const auto H = control_hamiltonian(cp);
    EXPECT_DOUBLE_EQ(H(0.0, s1(0.3), s1(2.0), s1(1.0)), 2.5);
    EXPECT_NEAR(control_gradient(cp, 0.0, s1(0.3), s1(2.0), s1(1.0))[0], 3.0, 1e-9);

    ControlProblem drift;
    drift.f = [](double t, const Vec& q, const Vec& u) { return Vec(q * t + u); };
    drift.g = [](double, const Vec& q, const Vec& u) { return q.sum() * u.squaredNorm(); };
    const auto Hd = control_hamiltonian(drift);
    EXPECT_DOUBLE_EQ(Hd(0.5, s1(0.3), s1(2.0), s1(0.0)), 2.0 * 0.5 * 0.3);
}

TEST(RiccatiOracle, MatchesClosedForm) {
    const auto o = riccati_oracle(1.0, 10);
    for (int k = 0; k <= 10; ++k) {
        const double t = k / 10.0;
        EXPECT_NEAR(o.q[k], std::cosh(1.0 - t) / std::cosh(1.0), 1e-12);
        EXPECT_NEAR(o.u[k], -std::sinh(1.0 - t) / std::cosh(1.0), 1e-12);
    }
}

TEST(Fbsm, ScalarLqrMatchesRiccati) {
    const auto cp = scalar_lqr();
    const auto r = solve_fbsm(cp, Method::Midpoint, 1000, 500, 0.5, 1e-8);
    EXPECT_LE(r.residual, 1e-8);
    EXPECT_LE(oracle_gap(r, riccati_oracle(1.0, 1000)), 1e-4);
}

TEST(Fbsm, EulerSweepIsFirstOrder) {
    const auto cp = scalar_lqr();
    const double e1 = oracle_gap(solve_fbsm(cp, Method::SymplecticEuler, 250, 500, 0.5, 1e-10), riccati_oracle(1.0, 250));
    const double e2 = oracle_gap(solve_fbsm(cp, Method::SymplecticEuler, 500, 500, 0.5, 1e-10), riccati_oracle(1.0, 500));
    EXPECT_GE(e1 / e2, 1.6);
    EXPECT_LE(e1 / e2, 2.4);
}

TEST(Fbsm, UncontrolledProblemConvergesInOneSweep) {
    ControlProblem cp;
    cp.f = [](double, const Vec& q, const Vec&) -> Vec { return Vec::Zero(q.size()); };
    cp.g = [](double, const Vec&, const Vec& u) { return 0.5 * u.squaredNorm(); };
    cp.g_u = [](double, const Vec&, const Vec& u) { return u; };
    cp.C = [](const Vec& q) { return q.squaredNorm(); };
    cp.dC = [](const Vec& q) -> Vec { return 2.0 * q; };
    cp.q0 = s1(0.4);
    const auto r = solve_fbsm(cp, Method::Midpoint, 50, 10, 0.5, 1e-10);
    EXPECT_EQ(r.sweeps, 1);
    EXPECT_LE(r.residual, 1e-10);
    for (const auto& u : r.traj.controls) EXPECT_EQ(u[0], 0.0);
}

TEST(Fbsm, ResidualsAndCrossModuleConsistency) {
    const double tol = 1e-9;
    // Nonlinear dynamics with a terminal cost.
    ControlProblem cp;
    cp.label = "cubic";
    cp.f = [](double, const Vec& q, const Vec& u) { return Vec(-q.array().cube().matrix() + u); };
    cp.g = [](double, const Vec& q, const Vec& u) { return 0.5 * (q.squaredNorm() + u.squaredNorm()); };
    cp.C = [](const Vec& q) { return 0.5 * q.squaredNorm(); };
    cp.dC = [](const Vec& q) { return q; };
    cp.q0 = s1(0.8);
    for (Method m : {Method::Midpoint, Method::SymplecticEuler}) {
        const auto r = solve_fbsm(cp, m, 200, 500, 0.5, tol);
        const auto res = pontryagin_residuals(cp, r.traj, m);
        EXPECT_LE(res.stationarity, tol);
        EXPECT_LE(res.state, tol);
        EXPECT_LE(res.costate, tol);
        EXPECT_EQ(res.initial, 0.0);
        EXPECT_LE(res.terminal, 1e-15);
        const auto frozen = sensitivity(frozen_cost(cp, r.traj.controls), m, 200).traj;
        for (std::size_t k = 0; k < frozen.size(); ++k) {
            EXPECT_LE((frozen.states[k].stacked() - r.traj.states[k].stacked()).lpNorm<Eigen::Infinity>(), 10 * tol);
        }
    }
}

TEST(Fbsm, ReportsBestIterateOnExhaustion) {
    const auto cp = scalar_lqr();
    try {
        solve_fbsm(cp, Method::Midpoint, 100, 3);
        FAIL() << "expected FbsmNoConvergence";
    } catch (const FbsmNoConvergence& e) {
        EXPECT_EQ(e.best_iterate().traj.size(), 101u);
        EXPECT_TRUE(std::isfinite(e.residual()));
        EXPECT_GT(e.residual(), 1e-10);
    }
    EXPECT_THROW(solve_fbsm(cp, Method::Midpoint, 100, 3, 0.0), std::invalid_argument);
    EXPECT_THROW(solve_fbsm(cp, Method::Midpoint, 100, 3, 1.5), std::invalid_argument);
}
