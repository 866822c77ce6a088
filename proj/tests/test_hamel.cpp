#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hamflow/bvp.hpp"
#include "hamflow/hamel.hpp"
#include "hamflow/problems.hpp"

using namespace hamflow;

namespace {

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

Mat hat(const Vec& w) {
    Mat m(3, 3);
    m << 0, -w[2], w[1], w[2], 0, -w[0], -w[1], w[0], 0;
    return m;
}

Vec vee(const Mat& m) { return v3(m(2, 1), m(0, 2), m(1, 0)); }

Vec cross(const Vec& a, const Vec& b) { return v3(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]); }

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    Vec vec(int n, double scale = 1.0) {
        std::uniform_real_distribution<double> u(-scale, scale);
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = u(gen);
        return v;
    }
    /// Chart point away from the pitch singularity.
    Vec angles() {
        Vec q = vec(3, 3.0);
        q[1] = std::uniform_real_distribution<double>(-1.2, 1.2)(gen);
        return q;
    }
};

const Vec kInertia = v3(1.0, 2.0, 3.0);

}  // namespace

TEST(Trivialization, FiberwiseIsomorphismAndLinearity) {
    Rng rng(1);
    for (const auto& triv : {trivializations::so3_left_zyx(), trivializations::scaling(3, 2.0), trivializations::identity(3)}) {
        for (int i = 0; i < 20; ++i) {
            const Vec q = rng.angles();
            const Vec xi = rng.vec(3), eta = rng.vec(3);
            EXPECT_LE((triv.phi_inv(q, triv.phi(q, xi)) - xi).lpNorm<Eigen::Infinity>(), 1e-10);
            const Vec lhs = triv.phi(q, 2.5 * xi - 0.5 * eta);
            const Vec rhs = 2.5 * triv.phi(q, xi) - 0.5 * triv.phi(q, eta);
            EXPECT_LE((lhs - rhs).lpNorm<Eigen::Infinity>(), 1e-12);
        }
    }
}

TEST(Trivialization, ChartIsLeftTrivialization) {
    // R(q + eps Phi Omega) = R (I + eps hat(Omega)) + O(eps^2).
    Rng rng(2);
    const auto triv = trivializations::so3_left_zyx();
    for (int i = 0; i < 10; ++i) {
        const Vec q = rng.angles();
        const Vec omega = rng.vec(3);
        const double eps = 1e-6;
        const Mat dR = (trivializations::so3_rotation(q + eps * triv.phi(q, omega)) -
                        trivializations::so3_rotation(q - eps * triv.phi(q, omega))) /
                       (2 * eps);
        EXPECT_LE((dR - trivializations::so3_rotation(q) * hat(omega)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Trivialization, AnalyticDerivativeIsCrossChecked) {
    auto phi = [](const Vec& q) {
        Mat m = Mat::Identity(2, 2);
        m(0, 1) = q[0] * q[0];
        return m;
    };
    auto good = [](const Vec& q, const Vec& v) {
        Mat m = Mat::Zero(2, 2);
        m(0, 1) = 2 * q[0] * v[0];
        return m;
    };
    auto bad = [](const Vec& q, const Vec& v) {
        Mat m = Mat::Zero(2, 2);
        m(0, 1) = q[0] * v[0];
        return m;
    };
    EXPECT_NO_THROW(Trivialization::analytic(2, phi, good));
    EXPECT_THROW(Trivialization::analytic(2, phi, bad), std::invalid_argument);
    const auto fd = Trivialization::finite_difference(2, phi);
    const Vec q = Vec::Constant(2, 0.7), v = Vec::Constant(2, -0.3);
    EXPECT_LE((fd.derivative(q, v) - good(q, v)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(TrivializedHamiltonian, Examples) {
    Rng rng(3);
    const auto pend2 = HamiltonianProblem::automatic(
        3, [](auto t, const auto& q, const auto& p) {
            using std::cos;
            return 0.5 * p.squaredNorm() + cos(q[0]) * p[1] + t * q[2];
        });
    const auto hid = trivialized_hamiltonian(pend2, trivializations::identity(3));
    const auto hsc = trivialized_hamiltonian(pend2, trivializations::scaling(3, 2.0));
    for (int i = 0; i < 10; ++i) {
        const Vec q = rng.vec(3), mu = rng.vec(3);
        EXPECT_DOUBLE_EQ(hid.value(0.3, q, mu), pend2.value(0.3, q, mu));
        EXPECT_NEAR(hsc.value(0.3, q, mu), pend2.value(0.3, q, Vec(mu / 2.0)), 1e-15);
    }
    const auto h = trivialized_hamiltonian(rigid_body_canonical(kInertia), trivializations::so3_left_zyx());
    const Vec mu = v3(0.4, -1.0, 0.7);
    const double expected = 0.5 * (mu.array().square() / kInertia.array()).sum();
    for (int i = 0; i < 20; ++i) {
        const Vec q = rng.angles();
        EXPECT_NEAR(h.value(0.0, q, mu), expected, 1e-12);
        EXPECT_LE(h.grad_q(0.0, q, mu).lpNorm<Eigen::Infinity>(), 1e-10);
    }
}

TEST(HamelBracket, ConstantTrivializationVanishes) {
    Rng rng(4);
    const auto triv = trivializations::scaling(3, 2.0);
    const Vec q = rng.vec(3);
    EXPECT_EQ(hamel_bracket(triv, q, rng.vec(3), rng.vec(3)).lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(coadjoint(triv, q, rng.vec(3), rng.vec(3)).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(HamelBracket, AntisymmetryAndCrossProduct) {
    Rng rng(5);
    const auto triv = trivializations::so3_left_zyx();
    for (int i = 0; i < 100; ++i) {
        const Vec q = rng.angles();
        const Vec u = rng.vec(3), v = rng.vec(3);
        const Vec uv = hamel_bracket(triv, q, u, v);
        EXPECT_LE((uv + hamel_bracket(triv, q, v, u)).lpNorm<Eigen::Infinity>(), 1e-14);
        // Matrix-commutator oracle in so(3).
        const Vec oracle = vee(hat(u) * hat(v) - hat(v) * hat(u));
        EXPECT_LE((uv - oracle).lpNorm<Eigen::Infinity>(), 1e-8);
    }
    const Vec q = rng.angles();
    EXPECT_LE((hamel_bracket(triv, q, Vec::Unit(3, 0), Vec::Unit(3, 1)) - Vec::Unit(3, 2)).norm(), 1e-12);
}

TEST(Coadjoint, SO3ConventionAndDuality) {
    Rng rng(6);
    const auto triv = trivializations::so3_left_zyx();
    for (int i = 0; i < 20; ++i) {
        const Vec q = rng.angles();
        const Vec omega = rng.vec(3), pi = rng.vec(3), v = rng.vec(3);
        const Vec ad = coadjoint(triv, q, omega, pi);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(ad[k], pi.dot(cross(omega, Vec::Unit(3, k))), 1e-10);
        EXPECT_LE((ad - cross(pi, omega)).lpNorm<Eigen::Infinity>(), 1e-10);
        EXPECT_NEAR(ad.dot(v) - pi.dot(hamel_bracket(triv, q, omega, v)), 0.0, 1e-12);
    }
}

TEST(HamelVectorField, IdentityReducesToHamiltonField) {
    const auto pend = problems::central_force();
    const auto triv = trivializations::identity(2);
    for (const auto& s : sample_points(2, 10, 12)) {
        const auto a = hamel_vector_field(trivialized_hamiltonian(pend, triv), triv, s.t, {s.z.q, s.z.p});
        const auto b = hamiltonian_vector_field(pend, s.t, s.z);
        EXPECT_LE((a.dq - b.dq).lpNorm<Eigen::Infinity>(), 1e-12);
        EXPECT_LE((a.dmu - b.dp).lpNorm<Eigen::Infinity>(), 1e-12);
    }
}

TEST(HamelVectorField, RigidBodyEulerEquations) {
    const auto h = rigid_body_trivialized(kInertia);
    const auto triv = trivializations::so3_left_zyx();
    Rng rng(7);
    const Vec pi = v3(1.0, 1.0, 1.0);
    for (int i = 0; i < 5; ++i) {
        const auto v = hamel_vector_field(h, triv, 0.0, {rng.angles(), pi});
        EXPECT_LE((v.dmu - v3(-1.0 / 6.0, 2.0 / 3.0, -0.5)).lpNorm<Eigen::Infinity>(), 1e-12);
    }
    // Left-invariant h: the field is pure coadjoint motion.
    const Vec q = rng.angles(), mu = rng.vec(3);
    const auto v = hamel_vector_field(h, triv, 0.0, {q, mu});
    const Vec omega = mu.cwiseQuotient(kInertia);
    EXPECT_LE((v.dmu - coadjoint(triv, q, omega, mu)).lpNorm<Eigen::Infinity>(), 1e-14);
    // Trivialized canonical Hamiltonian gives the same Euler equations.
    const auto hc = trivialized_hamiltonian(rigid_body_canonical(kInertia), triv);
    const auto vc = hamel_vector_field(hc, triv, 0.0, {q, mu});
    EXPECT_LE((vc.dmu - v.dmu).lpNorm<Eigen::Infinity>(), 1e-9);
    EXPECT_LE((vc.dq - v.dq).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(HamelIntegration, CasimirAndEnergy) {
    const auto h = rigid_body_trivialized(kInertia);
    const auto triv = trivializations::so3_left_zyx();
    const Vec mu0 = v3(0.1, 0.1, 1.0);  // near the stable major axis; pitch stays small
    NewtonOptions o;
    o.polish = true;
    const auto tr = integrate_hamel(h, triv, {Vec::Zero(3), mu0}, 10.0, 10000, o);
    double casimir = 0.0, energy = 0.0;
    const double c0 = mu0.squaredNorm(), e0 = h.value(0.0, Vec::Zero(3), mu0);
    for (const auto& z : tr.states) {
        casimir = std::max(casimir, std::abs(z.p.squaredNorm() - c0));
        energy = std::max(energy, std::abs(h.value(0.0, z.q, z.p) - e0));
    }
    EXPECT_LE(casimir, 1e-6);
    EXPECT_LE(energy, 1e-6);
}

TEST(HamelTypeII, RoundTripRecoversInitialMomentum) {
    const auto h = rigid_body_trivialized(kInertia);
    const auto triv = trivializations::so3_left_zyx();
    const Vec q0 = v3(0.2, -0.3, 0.1), mu0 = v3(0.5, -0.4, 0.8);
    const auto ivp = integrate_hamel(h, triv, {q0, mu0}, 1.0, 100);
    const auto bvp = solve_hamel_type_ii(h, triv, q0, ivp.back().p, 1.0, 100);
    EXPECT_LE((bvp.front().p - mu0).lpNorm<Eigen::Infinity>(), 1e-6);
    EXPECT_LE((bvp.back().p - ivp.back().p).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(HamelTypeII, IdentityTrivializationMatchesCanonicalShooting) {
    const auto osc = problems::oscillator();
    const auto triv = trivializations::identity(1);
    const NewtonOptions opts;
    const auto a = solve_hamel_type_ii(trivialized_hamiltonian(osc, triv), triv, Vec::Constant(1, 1.0),
                                       Vec::Constant(1, 0.0), 1.0, 200, opts);
    const auto b = solve_shooting(osc, BoundarySpec::type2(Vec::Constant(1, 1.0), Vec::Constant(1, 0.0)), 1.0,
                                  make_stepper(osc, Method::Midpoint), 200, Vec::Constant(1, 0.0), opts);
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        EXPECT_LE((a.states[k].stacked() - b.states[k].stacked()).lpNorm<Eigen::Infinity>(), 10 * opts.tol);
    }
}

TEST(HamelTypeII, SingleShortStepIsConsistent) {
    const auto h = rigid_body_trivialized(kInertia);
    const auto triv = trivializations::so3_left_zyx();
    const Vec mu1 = v3(0.3, 0.9, -0.2);
    for (double T : {1e-2, 1e-3}) {
        const auto tr = solve_hamel_type_ii(h, triv, Vec::Zero(3), mu1, T, 1);
        EXPECT_LE((tr.front().p - mu1).norm(), 2.0 * T);
    }
}
