#pragma once

#include <functional>
#include <vector>

#include "hamflow/newton.hpp"
#include "hamflow/types.hpp"

namespace hamflow {

/// Generic first-order system x' = F(t, x), used for reference solutions,
/// augmented cost integrals and non-canonical (Hamel) systems.
using VectorField = std::function<Vec(double t, const Vec& x)>;
using VectorFieldJacobian = std::function<Mat(double t, const Vec& x)>;

enum class OdeScheme { ExplicitEuler, ImplicitMidpoint, Gauss4, RK4 };

Vec explicit_euler_step(const VectorField& f, double t, const Vec& x, double h);
Vec rk4_step(const VectorField& f, double t, const Vec& x, double h);

/// y = x + h F(t + h/2, (x + y)/2), solved by Newton. Without `jac`, the
/// Newton Jacobian is formed by differences of F.
Vec implicit_midpoint_step(const VectorField& f, double t, const Vec& x, double h, const NewtonOptions& opts = {},
                           const VectorFieldJacobian& jac = {});

/// Two-stage Gauss-Legendre collocation (order 4).
Vec gauss4_step(const VectorField& f, double t, const Vec& x, double h, const NewtonOptions& opts = {},
                const VectorFieldJacobian& jac = {});

Vec ode_step(OdeScheme scheme, const VectorField& f, double t, const Vec& x, double h,
             const NewtonOptions& opts = {}, const VectorFieldJacobian& jac = {});

/// N uniform steps over [t0, t0 + T]; returns the N+1 nodes.
std::vector<Vec> integrate(OdeScheme scheme, const VectorField& f, double t0, const Vec& x0, double T, int N,
                           const NewtonOptions& opts = {}, const VectorFieldJacobian& jac = {});

}  // namespace hamflow
