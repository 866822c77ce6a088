#include "hamflow/accelopt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hamflow/errors.hpp"
#include "hamflow/newton.hpp"

namespace hamflow {

void BregmanConfig::validate() const {
    if (!(p > 0.0 && p_ring > 0.0 && C > 0.0)) throw std::invalid_argument("BregmanConfig: p, p_ring and C must be positive");
    if (!(t0 > 0.0)) throw std::invalid_argument("BregmanConfig: t0 must be positive");
    if (!f || !grad) throw std::invalid_argument("BregmanConfig: objective and gradient are required");
    if (x0.size() == 0 || v0.size() != x0.size()) throw std::invalid_argument("BregmanConfig: x0 and v0 sizes differ");
    const Vec g = grad(x0);
    const Vec fd =
        finite_difference_jacobian([this](const Vec& y) { return Vec::Constant(1, f(y)); }, x0).row(0).transpose();
    if (g.size() != x0.size() ||
        (g - fd).lpNorm<Eigen::Infinity>() > 1e-6 * std::max(1.0, fd.lpNorm<Eigen::Infinity>())) {
        throw std::invalid_argument("BregmanConfig: gradient disagrees with finite differences");
    }
}

Vec BregmanConfig::initial_momentum() const { return v0 * std::pow(t0, p + 1.0) / p; }

PhasePoint ExtendedState::phase() const {
    const auto n = q.size();
    PhasePoint z{Vec(n + 1), Vec(n + 1)};
    z.q << q, q_t;
    z.p << r, r_t;
    return z;
}

ExtendedState ExtendedState::from_phase(const PhasePoint& z) {
    const auto n = z.q.size() - 1;
    return {z.q.head(n), z.q[n], z.p.head(n), z.p[n]};
}

HamiltonianProblem bregman_hamiltonian(const BregmanConfig& cfg) {
    cfg.validate();
    const double p = cfg.p, C = cfg.C;
    const auto f = cfg.f;
    const auto grad = cfg.grad;
    auto check = [](double t) {
        if (!(t > 0.0)) throw DomainError("bregman_hamiltonian: evaluated at t <= 0");
    };
    auto value = [=](double t, const Vec& x, const Vec& r) {
        check(t);
        return p * std::pow(t, p - 1.0) * (0.5 * std::pow(t, -2.0 * p) * r.squaredNorm() + C * std::pow(t, p) * f(x));
    };
    auto gradient = [=](double t, const Vec& x, const Vec& r) {
        check(t);
        HamiltonianGradient g;
        const double r2 = r.squaredNorm();
        g.dq = C * p * std::pow(t, 2.0 * p - 1.0) * grad(x);
        g.dp = p * std::pow(t, -p - 1.0) * r;
        g.dt = 0.5 * p * (-p - 1.0) * std::pow(t, -p - 2.0) * r2 + C * p * (2.0 * p - 1.0) * std::pow(t, 2.0 * p - 2.0) * f(x);
        return g;
    };
    return HamiltonianProblem::analytic(cfg.dim(), value, gradient, {}, "bregman/" + cfg.label);
}

PoincareSystem poincare_transform(const HamiltonianProblem& prob, Monitor monitor, const PhasePoint& z0, double t0) {
    const int n = prob.dim();
    const double g0 = monitor(t0, z0);
    if (!(g0 > 0.0)) throw DomainError("poincare_transform: monitor is not positive at the initial point");

    auto split = [n](const Vec& qbar, const Vec& pbar) {
        return std::tuple<double, PhasePoint, double>{qbar[n], PhasePoint{qbar.head(n), pbar.head(n)}, pbar[n]};
    };
    auto value = [prob, monitor, split](double, const Vec& qbar, const Vec& pbar) {
        const auto [t, z, pt] = split(qbar, pbar);
        return monitor(t, z) * (prob.value(t, z.q, z.p) + pt);
    };
    auto gradient = [prob, monitor, split, n](double, const Vec& qbar, const Vec& pbar) {
        const auto [t, z, pt] = split(qbar, pbar);
        const double g = monitor(t, z);
        const double e = prob.value(t, z.q, z.p) + pt;
        const HamiltonianGradient dh = prob.gradient(t, z.q, z.p);
        // Monitor gradient over (q, t, p) by central differences.
        Vec x(2 * n + 1);
        x << z.q, t, z.p;
        const Vec dg = finite_difference_jacobian(
                           [&](const Vec& y) {
                               return Vec::Constant(1, monitor(y[n], PhasePoint{y.head(n), y.tail(n)}));
                           },
                           x)
                           .row(0)
                           .transpose();
        HamiltonianGradient out{0.0, Vec(n + 1), Vec(n + 1)};
        out.dq.head(n) = dg.head(n) * e + g * dh.dq;
        out.dq[n] = dg[n] * e + g * dh.dt;
        out.dp.head(n) = dg.tail(n) * e + g * dh.dp;
        out.dp[n] = g;
        return out;
    };
    PoincareSystem sys{HamiltonianProblem::analytic(n + 1, value, gradient, {}, "poincare/" + prob.label()), {}};
    sys.start = ExtendedState{z0.q, t0, z0.p, -prob.value(t0, z0.q, z0.p)};
    return sys;
}

namespace {

struct AdaptiveExponents {
    double a, b, c;  // |r|^2 t^-a, f t^b, r_t t^c
};

AdaptiveExponents exponents(const BregmanConfig& cfg) {
    const double k = cfg.p_ring / cfg.p;
    return {cfg.p + k, 2.0 * cfg.p - k, 1.0 - k};
}

}  // namespace

HamiltonianProblem adaptive_bregman_problem(const BregmanConfig& cfg) {
    cfg.validate();
    const int n = cfg.dim();
    const double p = cfg.p, pr = cfg.p_ring, C = cfg.C;
    const auto [a, b, c] = exponents(cfg);
    const auto f = cfg.f;
    const auto grad = cfg.grad;
    const auto hess = cfg.hess;
    auto time = [n](const Vec& qbar) {
        const double t = qbar[n];
        if (!(t > 0.0)) throw DomainError("adaptive_bregman_problem: physical time q_t <= 0");
        return t;
    };
    auto value = [=](double, const Vec& qbar, const Vec& rbar) {
        const double t = time(qbar);
        const double r2 = rbar.head(n).squaredNorm();
        return (0.5 * p * p * std::pow(t, -a) * r2 + C * p * p * std::pow(t, b) * f(qbar.head(n)) +
                p * rbar[n] * std::pow(t, c)) /
               pr;
    };
    auto gradient = [=](double, const Vec& qbar, const Vec& rbar) {
        const double t = time(qbar);
        const Vec x = qbar.head(n);
        const Vec r = rbar.head(n);
        HamiltonianGradient g{0.0, Vec(n + 1), Vec(n + 1)};
        g.dq.head(n) = C * p * p * std::pow(t, b) * grad(x) / pr;
        g.dq[n] = (-0.5 * a * p * p * std::pow(t, -a - 1.0) * r.squaredNorm() +
                   b * C * p * p * std::pow(t, b - 1.0) * f(x) + c * p * rbar[n] * std::pow(t, c - 1.0)) /
                  pr;
        g.dp.head(n) = p * p * std::pow(t, -a) * r / pr;
        g.dp[n] = p * std::pow(t, c) / pr;
        return g;
    };
    HamiltonianProblem::HessianFn hessian;
    if (hess) {
        hessian = [=](double, const Vec& qbar, const Vec& rbar) {
            const double t = time(qbar);
            const Vec x = qbar.head(n);
            const Vec r = rbar.head(n);
            const int m = n + 1;
            Mat H = Mat::Zero(2 * m, 2 * m);
            H.block(0, 0, n, n) = C * p * p * std::pow(t, b) * hess(x) / pr;
            const Vec hqt = b * C * p * p * std::pow(t, b - 1.0) * grad(x) / pr;
            H.block(0, n, n, 1) = hqt;
            H.block(n, 0, 1, n) = hqt.transpose();
            H(n, n) = (0.5 * a * (a + 1.0) * p * p * std::pow(t, -a - 2.0) * r.squaredNorm() +
                       b * (b - 1.0) * C * p * p * std::pow(t, b - 2.0) * f(x) +
                       c * (c - 1.0) * p * rbar[n] * std::pow(t, c - 2.0)) /
                      pr;
            const Vec htr = -a * p * p * std::pow(t, -a - 1.0) * r / pr;
            H.block(n, m, 1, n) = htr.transpose();
            H.block(m, n, n, 1) = htr;
            H(n, m + n) = H(m + n, n) = c * p * std::pow(t, c - 1.0) / pr;
            H.block(m, m, n, n) = p * p * std::pow(t, -a) / pr * Mat::Identity(n, n);
            return H;
        };
    }
    return HamiltonianProblem::analytic(n + 1, value, gradient, hessian, "adaptive-bregman/" + cfg.label);
}

ExtendedState adaptive_bregman_start(const BregmanConfig& cfg) {
    cfg.validate();
    const Vec r0 = cfg.initial_momentum();
    const double H0 = bregman_hamiltonian(cfg).value(cfg.t0, cfg.x0, r0);
    // Hbar = g (H + r_t) with g > 0, so r_t = -H makes Hbar vanish.
    return {cfg.x0, cfg.t0, r0, -H0};
}

double decay_slope(const std::vector<double>& times, const std::vector<double>& gaps) {
    if (times.size() != gaps.size() || times.size() < 3) throw std::invalid_argument("decay_slope: need matching series");
    std::vector<double> env(gaps.size());
    double run = 0.0;
    for (std::size_t k = gaps.size(); k-- > 0;) {
        run = std::max(run, std::abs(gaps[k]));
        env[k] = run;
    }
    const double t_end = times.back();
    const double t_lo = std::max(times.front(), t_end / 10.0);
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] >= t_lo && env[k] > 0.0) {
            xs.push_back(times[k]);
            ys.push_back(env[k]);
        }
    }
    if (xs.size() < 3) throw std::invalid_argument("decay_slope: too few positive samples in the final decade");
    return loglog_slope(xs, ys);
}

MinimizeResult minimize(const BregmanConfig& cfg, Method method, int fictive_steps, double h_tau) {
    if (fictive_steps < 1 || !(h_tau > 0.0)) throw std::invalid_argument("minimize: need positive steps and step size");
    const HamiltonianProblem prob = adaptive_bregman_problem(cfg);
    const Stepper stepper = make_stepper(prob, method);
    MinimizeResult out;
    PhasePoint z = adaptive_bregman_start(cfg).phase();
    auto record = [&](const PhasePoint& w) {
        const ExtendedState s = ExtendedState::from_phase(w);
        const double fx = cfg.f(s.q);
        out.iterates.push_back(s);
        out.rate.times.push_back(s.q_t);
        out.rate.gaps.push_back(fx - cfg.f_min);
        out.max_hbar = std::max(out.max_hbar, std::abs(prob.value(0.0, w.q, w.p)));
        return std::isfinite(fx) && std::abs(fx) <= 1e12 && w.finite() && w.q.lpNorm<Eigen::Infinity>() <= 1e12 &&
               w.p.lpNorm<Eigen::Infinity>() <= 1e12;
    };
    record(z);
    for (int k = 0; k < fictive_steps; ++k) {
        try {
            z = stepper.advance(k * h_tau, z, h_tau);
        } catch (const Error&) {
            out.aborted = true;
            break;
        }
        if (!record(z)) {
            out.aborted = true;
            break;
        }
    }
    if (out.rate.times.size() >= 3) {
        try {
            out.rate.slope = decay_slope(out.rate.times, out.rate.gaps);
        } catch (const std::invalid_argument&) {
            out.rate.slope = 0.0;
        }
    }
    return out;
}

namespace accel_battery {

namespace {

BregmanConfig quadratic(const std::string& label, const Mat& A, const Vec& a, const Vec& x0) {
    BregmanConfig cfg;
    cfg.label = label;
    cfg.f = [A, a](const Vec& x) { return 0.5 * (x - a).dot(A * (x - a)); };
    cfg.grad = [A, a](const Vec& x) -> Vec { return A * (x - a); };
    cfg.hess = [A](const Vec&) { return A; };
    cfg.x0 = x0;
    cfg.v0 = Vec::Zero(x0.size());
    return cfg;
}

}  // namespace

BregmanConfig shifted_quadratic() {
    return quadratic("shifted", Mat::Identity(2, 2), (Vec(2) << 1.0, -0.5).finished(), (Vec(2) << 2.0, 0.5).finished());
}

std::vector<BregmanConfig> quadratics() {
    std::vector<BregmanConfig> out{shifted_quadratic()};
    Mat d = Mat::Zero(2, 2);
    d.diagonal() << 1.0, 4.0;
    out.push_back(quadratic("diagonal", d, Vec::Zero(2), (Vec(2) << 1.0, 1.0).finished()));
    Mat r(2, 2);
    r << 2.0, 0.75, 0.75, 1.0;
    out.push_back(quadratic("coupled", r, (Vec(2) << -0.5, 0.25).finished(), (Vec(2) << 0.5, -1.0).finished()));
    return out;
}

}  // namespace accel_battery

}  // namespace hamflow
