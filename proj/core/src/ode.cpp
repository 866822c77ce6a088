#include "hamflow/ode.hpp"

#include <cmath>
#include <stdexcept>

#include "hamflow/errors.hpp"

namespace hamflow {

namespace {

Mat fd_field_jacobian(const VectorField& f, double t, const Vec& x) {
    return finite_difference_jacobian([&](const Vec& y) { return f(t, y); }, x);
}

}  // namespace

Vec explicit_euler_step(const VectorField& f, double t, const Vec& x, double h) { return x + h * f(t, x); }

Vec rk4_step(const VectorField& f, double t, const Vec& x, double h) {
    const Vec k1 = f(t, x);
    const Vec k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const Vec k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const Vec k4 = f(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec implicit_midpoint_step(const VectorField& f, double t, const Vec& x, double h, const NewtonOptions& opts,
                           const VectorFieldJacobian& jac) {
    const double tm = t + 0.5 * h;
    const auto n = x.size();
    auto residual = [&](const Vec& y) -> Vec { return y - x - h * f(tm, 0.5 * (x + y)); };
    auto jacobian = [&](const Vec& y) -> Mat {
        const Vec xm = 0.5 * (x + y);
        const Mat df = jac ? jac(tm, xm) : fd_field_jacobian(f, tm, xm);
        return Mat::Identity(n, n) - 0.5 * h * df;
    };
    // Explicit Euler predictor.
    const Vec guess = x + h * f(t, x);
    NewtonOptions o = opts;
    o.polish = true;
    return newton_solve(residual, guess.allFinite() ? guess : x, o, jacobian).x;
}

Vec gauss4_step(const VectorField& f, double t, const Vec& x, double h, const NewtonOptions& opts,
                const VectorFieldJacobian& jac) {
    const double r3 = std::sqrt(3.0);
    const double a11 = 0.25, a12 = 0.25 - r3 / 6.0, a21 = 0.25 + r3 / 6.0, a22 = 0.25;
    const double c1 = 0.5 - r3 / 6.0, c2 = 0.5 + r3 / 6.0;
    const auto n = x.size();
    auto residual = [&](const Vec& k) -> Vec {
        const Vec k1 = k.head(n);
        const Vec k2 = k.tail(n);
        Vec r(2 * n);
        r.head(n) = k1 - f(t + c1 * h, x + h * (a11 * k1 + a12 * k2));
        r.tail(n) = k2 - f(t + c2 * h, x + h * (a21 * k1 + a22 * k2));
        return r;
    };
    auto jacobian = [&](const Vec& k) -> Mat {
        const Vec k1 = k.head(n);
        const Vec k2 = k.tail(n);
        const Vec x1 = x + h * (a11 * k1 + a12 * k2);
        const Vec x2 = x + h * (a21 * k1 + a22 * k2);
        const Mat j1 = jac ? jac(t + c1 * h, x1) : fd_field_jacobian(f, t + c1 * h, x1);
        const Mat j2 = jac ? jac(t + c2 * h, x2) : fd_field_jacobian(f, t + c2 * h, x2);
        Mat out = Mat::Identity(2 * n, 2 * n);
        out.topLeftCorner(n, n) -= h * a11 * j1;
        out.topRightCorner(n, n) -= h * a12 * j1;
        out.bottomLeftCorner(n, n) -= h * a21 * j2;
        out.bottomRightCorner(n, n) -= h * a22 * j2;
        return out;
    };
    const Vec f0 = f(t, x);
    Vec guess(2 * n);
    guess << f0, f0;
    NewtonOptions o = opts;
    o.polish = true;
    const Vec k = newton_solve(residual, guess, o, jacobian).x;
    return x + 0.5 * h * (k.head(n) + k.tail(n));
}

Vec ode_step(OdeScheme scheme, const VectorField& f, double t, const Vec& x, double h, const NewtonOptions& opts,
             const VectorFieldJacobian& jac) {
    switch (scheme) {
        case OdeScheme::ExplicitEuler: return explicit_euler_step(f, t, x, h);
        case OdeScheme::ImplicitMidpoint: return implicit_midpoint_step(f, t, x, h, opts, jac);
        case OdeScheme::Gauss4: return gauss4_step(f, t, x, h, opts, jac);
        case OdeScheme::RK4: return rk4_step(f, t, x, h);
    }
    throw std::invalid_argument("ode_step: unknown scheme");
}

std::vector<Vec> integrate(OdeScheme scheme, const VectorField& f, double t0, const Vec& x0, double T, int N,
                           const NewtonOptions& opts, const VectorFieldJacobian& jac) {
    if (N < 1) throw std::invalid_argument("integrate: need at least one step");
    const double h = T / N;
    std::vector<Vec> xs;
    xs.reserve(static_cast<std::size_t>(N) + 1);
    xs.push_back(x0);
    for (int k = 0; k < N; ++k) {
        try {
            xs.push_back(ode_step(scheme, f, t0 + k * h, xs.back(), h, opts, jac));
        } catch (const Error& e) {
            throw StepFailure(std::string("integrate: step failed: ") + e.what(), k);
        }
    }
    return xs;
}

}  // namespace hamflow
