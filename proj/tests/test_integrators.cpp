#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hamflow/errors.hpp"
#include "hamflow/integrators.hpp"
#include "hamflow/problems.hpp"

using namespace hamflow;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
PhasePoint pp(double q, double p) { return {v1(q), v1(p)}; }

/// Implicit midpoint on z' = A z with A = [[0,1],[-1,0]]: (I - hA/2)^{-1}(I + hA/2).
Mat cayley(double h) {
    Mat A(2, 2);
    A << 0, 1, -1, 0;
    const Mat I = Mat::Identity(2, 2);
    return (I - 0.5 * h * A).inverse() * (I + 0.5 * h * A);
}

PhasePoint rotation(const PhasePoint& z, double t) {
    return pp(z.q[0] * std::cos(t) + z.p[0] * std::sin(t), -z.q[0] * std::sin(t) + z.p[0] * std::cos(t));
}

/// Type II generating function of the oscillator flow over time h.
double oscillator_generating_function(double q0, double p1, double h) {
    return p1 * q0 / std::cos(h) + 0.5 * (p1 * p1 + q0 * q0) * std::tan(h);
}

std::vector<DiscreteHamiltonian> builtin_maps(const HamiltonianProblem& prob, double h) {
    return {midpoint_discrete_hamiltonian(prob, h), galerkin_discrete_hamiltonian(prob, GalerkinScheme::gauss_legendre(2), h),
            galerkin_discrete_hamiltonian(prob, GalerkinScheme::gauss_legendre(3), h),
            symplectic_euler_discrete_hamiltonian(prob, h)};
}

}  // namespace

TEST(GalerkinScheme, Validation) {
    for (int s = 1; s <= 5; ++s) EXPECT_NO_THROW(GalerkinScheme::gauss_legendre(s).validate());
    const auto g2 = GalerkinScheme::gauss_legendre(2);
    EXPECT_NEAR(g2.c[0], 0.5 - std::sqrt(3.0) / 6.0, 1e-15);
    EXPECT_NEAR(g2.b[1], 0.5, 1e-15);
    EXPECT_THROW((GalerkinScheme{1, {0.5}, {0.9}}.validate()), std::invalid_argument);
    EXPECT_THROW((GalerkinScheme{1, {1.5}, {1.0}}.validate()), std::invalid_argument);
    EXPECT_THROW((GalerkinScheme{1, {0.5, 0.2}, {1.0}}.validate()), std::invalid_argument);
}

TEST(Midpoint, CayleyOracle) {
    const double h = 0.1;
    const auto dh = midpoint_discrete_hamiltonian(problems::oscillator(), h);
    const PhasePoint z1 = dh.step(0.0, pp(1.0, 0.0));
    const Mat C = cayley(h);
    EXPECT_NEAR(z1.q[0], C(0, 0), 1e-12);
    EXPECT_NEAR(z1.p[0], C(1, 0), 1e-12);
    // (1 - a^2, -2a) / (1 + a^2) with a = h/2.
    EXPECT_NEAR(z1.q[0], 0.995012, 1e-6);
    EXPECT_NEAR(z1.p[0], -0.099751, 1e-6);
}

TEST(Midpoint, TrivialMaps) {
    for (double h : {0.1, 0.37, 1.0}) {
        const PhasePoint drift = midpoint_discrete_hamiltonian(problems::linear_drift(), h).step(0.0, pp(0.0, 1.0));
        EXPECT_NEAR(drift.q[0], h, 1e-14);
        EXPECT_NEAR(drift.p[0], 1.0, 1e-14);
    }
    const auto zero = midpoint_discrete_hamiltonian(problems::zero(), 0.1);
    for (const auto& s : sample_points(1, 10, 5)) {
        const PhasePoint z = zero.step(s.t, s.z);
        EXPECT_EQ(z.q[0], s.z.q[0]);
        EXPECT_EQ(z.p[0], s.z.p[0]);
    }
    const PhasePoint force = midpoint_discrete_hamiltonian(problems::pure_force(), 0.1).step(0.0, pp(0.0, 1.0));
    EXPECT_NEAR(force.q[0], 0.0, 1e-14);
    EXPECT_NEAR(force.p[0], 0.9, 1e-14);
}

TEST(Galerkin, DegreeOneReproducesMidpoint) {
    const auto prob = problems::pendulum();
    const auto mid = midpoint_discrete_hamiltonian(prob, 0.1);
    const auto gal = galerkin_discrete_hamiltonian(prob, GalerkinScheme{1, {0.5}, {1.0}}, 0.1);
    for (const auto& s : sample_points(1, 20, 11)) {
        const auto a = mid.evaluate(s.t, s.z.q, s.z.p);
        const auto b = gal.evaluate(s.t, s.z.q, s.z.p);
        EXPECT_NEAR(a.value, b.value, 1e-12);
        EXPECT_NEAR(a.d1[0], b.d1[0], 1e-12);
        EXPECT_NEAR(a.d2[0], b.d2[0], 1e-12);
    }
}

TEST(Galerkin, StageRecordShape) {
    const auto gal = galerkin_discrete_hamiltonian(problems::oscillator(2), GalerkinScheme::gauss_legendre(3), 0.1);
    Vec q(2), p(2);
    q << 0.3, -0.2;
    p << 0.1, 0.4;
    const auto ev = gal.evaluate(0.0, q, p);
    ASSERT_TRUE(ev.stages.has_value());
    EXPECT_EQ(ev.stages->positions.cols(), 4);
    EXPECT_EQ(ev.stages->momenta.cols(), 3);
    EXPECT_LE(ev.stages->residual, 1e-10);
    EXPECT_TRUE(ev.stages->positions.col(0).isApprox(q));
}

TEST(Galerkin, MaximallyDegenerateStageSolveMatchesDirectOracle) {
    // Midpoint for q' = q, p' = -p solved by hand.
    const double h = 0.1;
    const auto dh = galerkin_discrete_hamiltonian(problems::linear_degenerate(), GalerkinScheme::midpoint(), h);
    const PhasePoint z1 = dh.step(0.0, pp(1.3, -0.7));
    EXPECT_NEAR(z1.q[0], 1.3 * (1 + h / 2) / (1 - h / 2), 1e-12);
    EXPECT_NEAR(z1.p[0], -0.7 * (1 - h / 2) / (1 + h / 2), 1e-12);
}

TEST(Galerkin, GaussDegreeTwoIsFourthOrder) {
    const auto osc = problems::oscillator();
    const PhasePoint z0 = pp(1.0, 0.0);
    const auto est = estimate_order(galerkin_family(osc, GalerkinScheme::gauss_legendre(2)), osc, z0, 1.0,
                                    {5, 10, 20, 40}, rotation(z0, 1.0));
    EXPECT_GE(est.order, 3.8);
}

TEST(Step, GeneratingFunctionRoundTrip) {
    for (const auto& prob : {problems::pendulum(), problems::oscillator()}) {
        for (const auto& dh : builtin_maps(prob, 0.1)) {
            for (const auto& s : sample_points(1, 10, 13)) {
                const PhasePoint z1 = dh.step(s.t, s.z);
                const auto ev = dh.evaluate(s.t, s.z.q, z1.p);
                EXPECT_NEAR(ev.d1[0], s.z.p[0], 1e-10) << dh.label();
                EXPECT_NEAR(ev.d2[0], z1.q[0], 1e-10) << dh.label();
            }
        }
    }
}

TEST(Step, PartialsMatchFiniteDifferencesOfValue) {
    const auto prob = problems::central_force();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto maps = builtin_maps(prob, 0.1);
    maps.push_back(exact_discrete_hamiltonian_map(prob, 0.1));
    for (const auto& dh : maps) {
        for (int trial = 0; trial < 5; ++trial) {
            Vec q(2), p(2);
            q << u(rng), u(rng);
            p << u(rng), u(rng);
            const auto ev = dh.evaluate(0.0, q, p);
            const double eps = 1e-5;
            for (int i = 0; i < 2; ++i) {
                Vec qp = q, qm = q, pp1 = p, pm = p;
                qp[i] += eps;
                qm[i] -= eps;
                pp1[i] += eps;
                pm[i] -= eps;
                const double fd1 = (dh.value(0.0, qp, p) - dh.value(0.0, qm, p)) / (2 * eps);
                const double fd2 = (dh.value(0.0, q, pp1) - dh.value(0.0, q, pm)) / (2 * eps);
                EXPECT_NEAR(ev.d1[i], fd1, 1e-6 * std::max(1.0, std::abs(fd1))) << dh.label();
                EXPECT_NEAR(ev.d2[i], fd2, 1e-6 * std::max(1.0, std::abs(fd2))) << dh.label();
            }
        }
    }
}

TEST(Step, AnalyticTangentMatchesFiniteDifferences) {
    const auto prob = problems::pendulum();
    for (const auto& dh : builtin_maps(prob, 0.2)) {
        const Stepper fd("fd", [&](double t, const PhasePoint& z, double) { return dh.step_detailed(t, z); });
        for (const auto& s : sample_points(1, 5, 17)) {
            const Mat a = dh.tangent(s.t, s.z);
            const Mat b = fd.tangent(s.t, s.z, 0.2);
            EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-7) << dh.label();
        }
    }
}

TEST(FiberDerivatives, Examples) {
    const auto zero = midpoint_discrete_hamiltonian(problems::zero(), 0.1);
    const auto f = fiber_derivatives(zero, v1(0.4), v1(-1.1));
    EXPECT_EQ(f.plus.q[0], 0.4);
    EXPECT_EQ(f.plus.p[0], -1.1);
    EXPECT_EQ(f.minus.q[0], 0.4);
    EXPECT_EQ(f.minus.p[0], -1.1);

    const double h = 0.1;
    const auto osc = midpoint_discrete_hamiltonian(problems::oscillator(), h);
    // Inverse Cayley oracle: p0 with (cayley * (1, p0))_p = 0.
    const Mat C = cayley(h);
    const double p0 = -C(1, 0) / C(1, 1);
    EXPECT_NEAR(fiber_derivatives(osc, v1(1.0), v1(0.0)).minus.p[0], p0, 1e-12);
    EXPECT_NEAR(p0, 0.100251, 1e-6);
}

TEST(FiberDerivatives, CompositionEqualsStepForLinearH) {
    const auto osc = midpoint_discrete_hamiltonian(problems::oscillator(), 0.3);
    for (const auto& s : sample_points(1, 20, 23)) {
        // Invert F-: D1(q0, .) is affine for linear H.
        const double a0 = fiber_derivatives(osc, s.z.q, v1(0.0)).minus.p[0];
        const double a1 = fiber_derivatives(osc, s.z.q, v1(1.0)).minus.p[0];
        const double p1 = (s.z.p[0] - a0) / (a1 - a0);
        const PhasePoint composed = fiber_derivatives(osc, s.z.q, v1(p1)).plus;
        const PhasePoint stepped = osc.step(0.0, s.z);
        EXPECT_NEAR(composed.q[0], stepped.q[0], 1e-12);
        EXPECT_NEAR(composed.p[0], stepped.p[0], 1e-12);
    }
}

TEST(ExactDiscreteHamiltonian, ClosedForms) {
    EXPECT_NEAR(exact_discrete_hamiltonian(problems::zero(), v1(0.7), v1(-0.3), 0.1), 0.7 * -0.3, 1e-14);
    for (double h : {0.05, 0.1, 0.5}) {
        const double q0 = 0.4, p1 = 1.2;
        EXPECT_NEAR(exact_discrete_hamiltonian(problems::free_particle(), v1(q0), v1(p1), h),
                    p1 * q0 + 0.5 * h * p1 * p1, 1e-12);
    }
    EXPECT_NEAR(exact_discrete_hamiltonian(problems::oscillator(), v1(1.0), v1(0.0), 0.1),
                oscillator_generating_function(1.0, 0.0, 0.1), 1e-9);
    for (const auto& s : sample_points(1, 10, 4)) {
        EXPECT_NEAR(exact_discrete_hamiltonian(problems::oscillator(), s.z.q, s.z.p, 0.2),
                    oscillator_generating_function(s.z.q[0], s.z.p[0], 0.2), 1e-9);
    }
}

TEST(Order, MidpointOnOscillator) {
    const auto osc = problems::oscillator();
    const PhasePoint z0 = pp(1.0, 0.0);
    const auto est = estimate_order(midpoint_family(osc), osc, z0, 1.0, {10, 20, 40, 80}, rotation(z0, 1.0));
    EXPECT_GE(est.order, 1.8);
    EXPECT_LE(est.order, 2.2);
}

TEST(Order, ReferenceFlowDefaultMatchesClosedForm) {
    const auto osc = problems::oscillator();
    const PhasePoint z0 = pp(0.3, 0.8);
    const PhasePoint ref = reference_flow(osc, 0.0, z0, 2.0, 1e-13);
    const PhasePoint exact = rotation(z0, 2.0);
    EXPECT_NEAR(ref.q[0], exact.q[0], 1e-12);
    EXPECT_NEAR(ref.p[0], exact.p[0], 1e-12);
    const auto est = estimate_order(midpoint_family(osc), osc, z0, 1.0, {10, 20, 40});
    EXPECT_NEAR(est.order, 2.0, 0.2);
}

TEST(Order, ExactMapIsFlaggedAsNoise) {
    const auto osc = problems::oscillator();
    const PhasePoint z0 = pp(1.0, 0.0);
    EXPECT_THROW(estimate_order(exact_family(osc), osc, z0, 1.0, {2, 4, 8, 16}, rotation(z0, 1.0)),
                 DegenerateRegression);
    EXPECT_THROW(estimate_order(midpoint_family(osc), osc, z0, 1.0, {10, 20}, rotation(z0, 1.0)),
                 DegenerateRegression);
}

TEST(Symplecticity, Examples) {
    const auto osc = problems::oscillator();
    const Stepper mid = make_stepper(osc, Method::Midpoint);
    for (const auto& s : sample_points(1, 10, 31)) EXPECT_LE(symplecticity_defect(mid, s.t, s.z, 0.1), 1e-8);

    const Stepper euler = make_stepper(osc, Method::ExplicitEuler);
    const double d = symplecticity_defect(euler, 0.0, pp(1.0, 0.0), 0.1);
    EXPECT_GT(d, 1e-4);
    EXPECT_NEAR(d, 0.01, 1e-6);

    const Stepper identity("identity", [](double, const PhasePoint& z, double) { return StepOutcome{z, 0.0}; });
    EXPECT_EQ(symplecticity_defect(identity, 0.0, pp(0.3, -2.0), 0.1), 0.0);
}

TEST(Symplecticity, AllDiscreteHamiltonianMapsAtRandomPoints) {
    const auto prob = problems::pendulum();
    std::vector<Stepper> steppers = {make_stepper(prob, Method::Midpoint), make_stepper(prob, Method::Gauss4),
                                     make_stepper(prob, Method::SymplecticEuler), make_stepper(prob, Method::Exact)};
    for (const auto& st : steppers) {
        for (const auto& s : sample_points(1, 20, 37)) {
            EXPECT_LE(symplecticity_defect(st, s.t, s.z, 0.1), 1e-7) << st.label();
        }
    }
}

TEST(Noether, CentralForceAngularMomentum) {
    const auto prob = problems::central_force();
    Vec q(2), p(2);
    q << 1.0, 0.2;
    p << -0.1, 0.8;
    const PhasePoint z0{q, p};
    const auto mid = propagate(make_stepper(prob, Method::Midpoint), z0, 0.0, 10.0, 1000);
    EXPECT_LE(momentum_map_drift(mid, problems::angular_momentum), 1e-10);
    const auto eul = propagate(make_stepper(prob, Method::ExplicitEuler), z0, 0.0, 10.0, 1000);
    EXPECT_GT(momentum_map_drift(eul, problems::angular_momentum), 1e-6);

    Trajectory constant;
    constant.times = {0.0, 1.0, 2.0};
    constant.states = {z0, z0, z0};
    EXPECT_EQ(momentum_map_drift(constant, problems::angular_momentum), 0.0);
}

TEST(LagrangianEquivalence, Examples) {
    const auto osc = problems::oscillator();
    EXPECT_LE(lagrangian_equivalence_gap(osc, GalerkinScheme::midpoint(), 0.1, pp(1.0, 0.0), 100), 1e-9);
    EXPECT_EQ(lagrangian_equivalence_gap(osc, GalerkinScheme::midpoint(), 0.1, pp(1.0, 0.0), 0), 0.0);
    EXPECT_LE(lagrangian_equivalence_gap(problems::pendulum(), GalerkinScheme::gauss_legendre(2), 0.1,
                                         pp(0.5, 0.2), 50),
              1e-9);
    EXPECT_THROW(lagrangian_equivalence_gap(problems::linear_degenerate(), GalerkinScheme::midpoint(), 0.1,
                                            pp(1.0, 1.0), 10),
                 LegendreInversionFailure);
}

TEST(LagrangianEquivalence, DegenerateProblemOnlyHasHamiltonianSide) {
    const auto prob = problems::degenerate_with_cost();
    const auto dh = galerkin_discrete_hamiltonian(prob, GalerkinScheme::gauss_legendre(2), 0.1);
    PhasePoint z = pp(0.5, -0.4);
    for (int k = 0; k < 10; ++k) z = dh.step(0.1 * k, z);
    EXPECT_TRUE(z.finite());
    EXPECT_THROW(lagrangian_equivalence_gap(prob, GalerkinScheme::gauss_legendre(2), 0.1, pp(0.5, -0.4), 10),
                 LegendreInversionFailure);
}

TEST(OrderTheorem, LocalGeneratingFunctionErrorBoundsMapOrder) {
    const auto osc = problems::oscillator();
    std::vector<double> hs, errs;
    const auto samples = sample_points(1, 8, 3);
    for (double h : {0.2, 0.1, 0.05, 0.025}) {
        const auto dh = midpoint_discrete_hamiltonian(osc, h);
        double worst = 0.0;
        for (const auto& s : samples) {
            const double e = std::abs(dh.value(0.0, s.z.q, s.z.p) - exact_discrete_hamiltonian(osc, s.z.q, s.z.p, h));
            worst = std::max(worst, e);
        }
        hs.push_back(h);
        errs.push_back(worst);
    }
    const double r_plus_1 = loglog_slope(hs, errs);
    const PhasePoint z0 = pp(1.0, 0.0);
    const double order = estimate_order(midpoint_family(osc), osc, z0, 1.0, {10, 20, 40, 80}, rotation(z0, 1.0)).order;
    EXPECT_GE(r_plus_1, order - 0.2);
}

TEST(Propagate, ReportsFailingStep) {
    const auto blowup = HamiltonianProblem::automatic(
        1, [](auto, const auto& q, const auto& p) { return 0.5 * p[0] * p[0] - q[0] * q[0] * q[0] * q[0] * q[0]; },
        "blowup");
    try {
        (void)propagate(make_stepper(blowup, Method::ExplicitEuler), pp(2.0, 0.0), 0.0, 50.0, 100);
        FAIL() << "expected StepFailure";
    } catch (const StepFailure& e) {
        EXPECT_GE(e.step_index(), 1);
    }
}
