#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "hamflow/errors.hpp"
#include "hamflow/integrators.hpp"
#include "lagrange_basis.hpp"

namespace hamflow {

void gauss_legendre_rule(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    if (m < 1) throw std::invalid_argument("gauss_legendre_rule: m must be positive");
    Mat jacobi = Mat::Zero(m, m);
    for (int k = 1; k < m; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = beta;
        jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(jacobi);
    nodes.resize(m);
    weights.resize(m);
    for (int j = 0; j < m; ++j) {
        nodes[j] = 0.5 * (eig.eigenvalues()[j] + 1.0);
        const double v0 = eig.eigenvectors()(0, j);
        weights[j] = v0 * v0;  // 2 v0^2 on [-1, 1], halved on [0, 1]
    }
}

GalerkinScheme GalerkinScheme::gauss_legendre(int s) {
    GalerkinScheme g;
    g.s = s;
    gauss_legendre_rule(s, g.c, g.b);
    return g;
}

GalerkinScheme GalerkinScheme::midpoint() { return GalerkinScheme{1, {0.5}, {1.0}}; }

void GalerkinScheme::validate() const {
    if (s < 1) throw std::invalid_argument("GalerkinScheme: degree must be at least 1");
    if (c.empty() || c.size() != b.size()) throw std::invalid_argument("GalerkinScheme: node/weight size mismatch");
    for (double cj : c) {
        if (!(cj >= 0.0 && cj <= 1.0)) throw std::invalid_argument("GalerkinScheme: node outside [0, 1]");
    }
    const double sum = std::accumulate(b.begin(), b.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("GalerkinScheme: weights do not sum to 1");
}

namespace {

class GalerkinModel final : public detail::DiscreteHamiltonianModel {
public:
    GalerkinModel(HamiltonianProblem prob, GalerkinScheme scheme, NewtonOptions opts)
        : prob_(std::move(prob)), sc_(std::move(scheme)), opts_(opts), basis_(sc_.s, sc_.c) {
        sc_.validate();
    }

    [[nodiscard]] int dim() const override { return prob_.dim(); }

    [[nodiscard]] DiscreteHamiltonianEval evaluate(double t, const Vec& q0, const Vec& p1, double h) const override {
        const int n = dim();
        const int s = sc_.s;
        const int m = sc_.nodes();
        const Vec dp = prob_.grad_p(t, q0, p1);
        Vec x(n * (s + m));
        for (int i = 1; i <= s; ++i) x.segment((i - 1) * n, n) = q0 + (static_cast<double>(i) / s) * h * dp;
        for (int j = 0; j < m; ++j) x.segment((s + j) * n, n) = p1;

        auto residual = [&](const Vec& y) {
            Vec r;
            system(t, h, q0, y, &p1, nullptr, &r, nullptr, nullptr);
            return r;
        };
        auto jacobian = [&](const Vec& y) {
            Mat jac;
            system(t, h, q0, y, &p1, nullptr, nullptr, &jac, nullptr);
            return jac;
        };
        const NewtonResult sol = solve(residual, x, jacobian);

        DiscreteHamiltonianEval out;
        StageRecord rec;
        rec.positions.resize(n, s + 1);
        rec.momenta.resize(n, m);
        rec.positions.col(0) = q0;
        for (int i = 1; i <= s; ++i) rec.positions.col(i) = sol.x.segment((i - 1) * n, n);
        for (int j = 0; j < m; ++j) rec.momenta.col(j) = sol.x.segment((s + j) * n, n);
        rec.residual = sol.residual;

        // Bracket value and D1 = -G_0.
        double action = 0.0;
        Vec g0 = Vec::Zero(n);
        for (int j = 0; j < m; ++j) {
            const double tj = t + sc_.c[j] * h;
            const Vec Q = rec.positions * basis_.l.col(j);
            const Vec qdot = rec.positions * basis_.dl.col(j) / h;
            const Vec P = rec.momenta.col(j);
            action += sc_.b[j] * (P.dot(qdot) - prob_.value(tj, Q, P));
            g0 += sc_.b[j] * (basis_.dl(0, j) * P - h * basis_.l(0, j) * prob_.grad_q(tj, Q, P));
        }
        out.d2 = rec.positions.col(s);
        out.value = p1.dot(out.d2) - h * action;
        out.d1 = -g0;
        out.stages = std::move(rec);
        return out;
    }

    [[nodiscard]] StepOutcome step(double t, const PhasePoint& z, double h) const override {
        const int n = dim();
        const int s = sc_.s;
        const int m = sc_.nodes();
        const HamiltonianGradient g = prob_.gradient(t, z.q, z.p);
        Vec x(n * (s + m + 1));
        for (int i = 1; i <= s; ++i) x.segment((i - 1) * n, n) = z.q + (static_cast<double>(i) / s) * h * g.dp;
        for (int j = 0; j < m; ++j) x.segment((s + j) * n, n) = z.p - sc_.c[j] * h * g.dq;
        x.segment((s + m) * n, n) = z.p - h * g.dq;
        if (!x.allFinite()) x = initial_from(z);

        auto residual = [&](const Vec& y) {
            Vec r;
            system(t, h, z.q, y, nullptr, &z.p, &r, nullptr, nullptr);
            return r;
        };
        auto jacobian = [&](const Vec& y) {
            Mat jac;
            system(t, h, z.q, y, nullptr, &z.p, nullptr, &jac, nullptr);
            return jac;
        };
        const NewtonResult sol = solve(residual, x, jacobian);
        StepOutcome out;
        out.z.q = sol.x.segment((s - 1) * n, n);
        out.z.p = sol.x.segment((s + m) * n, n);
        out.residual = sol.residual;
        return out;
    }

    [[nodiscard]] Mat tangent(double t, const PhasePoint& z, double h) const override {
        const int n = dim();
        const int s = sc_.s;
        const int m = sc_.nodes();
        const StepOutcome st = step(t, z, h);
        // Re-solve cheaply from the converged state to recover the stage vector.
        Vec x = stage_vector_for(t, z, h, st.z);
        Mat jx;
        Mat jz;
        system(t, h, z.q, x, nullptr, &z.p, nullptr, &jx, &jz);
        const Mat dx = -Eigen::PartialPivLU<Mat>(jx).solve(jz);
        Mat phi(2 * n, 2 * n);
        phi.topRows(n) = dx.middleRows((s - 1) * n, n);
        phi.bottomRows(n) = dx.middleRows((s + m) * n, n);
        return phi;
    }

private:
    [[nodiscard]] Vec initial_from(const PhasePoint& z) const {
        const int n = dim();
        const int s = sc_.s;
        const int m = sc_.nodes();
        Vec x(n * (s + m + 1));
        for (int i = 1; i <= s; ++i) x.segment((i - 1) * n, n) = z.q;
        for (int j = 0; j <= m; ++j) x.segment((s + j) * n, n) = z.p;
        return x;
    }

    [[nodiscard]] Vec stage_vector_for(double t, const PhasePoint& z, double h, const PhasePoint& z1) const {
        const int n = dim();
        const int s = sc_.s;
        const int m = sc_.nodes();
        const DiscreteHamiltonianEval ev = evaluate(t, z.q, z1.p, h);
        Vec x(n * (s + m + 1));
        for (int i = 1; i <= s; ++i) x.segment((i - 1) * n, n) = ev.stages->positions.col(i);
        for (int j = 0; j < m; ++j) x.segment((s + j) * n, n) = ev.stages->momenta.col(j);
        x.segment((s + m) * n, n) = z1.p;
        return x;
    }

    NewtonResult solve(const ResidualFn& residual, const Vec& x0, const JacobianFn& jacobian) const {
        try {
            return newton_solve(residual, x0, opts_, jacobian);
        } catch (const SingularJacobian& e) {
            throw RankDeficientStageSystem(std::string("Galerkin stage system: ") + e.what());
        }
    }

    /// Stage system of the extremization. Unknowns y = [q^1..q^s, P_1..P_m]
    /// (+ p1 when p0 is given, i.e. for the step map). Rows: stage equations
    /// at the nodes, stationarity in q^1..q^s, and p0 = D1 for the step map.
    /// `jz` receives the derivative with respect to (q0, p0).
    void system(double t, double h, const Vec& q0, const Vec& y, const Vec* p1_fixed, const Vec* p0, Vec* r,
                Mat* jy, Mat* jz) const {
        const int n = dim();
        const int s = sc_.s;
        const int m = sc_.nodes();
        const bool stepping = p0 != nullptr;
        const int rows = n * (s + m + (stepping ? 1 : 0));
        const bool need_hess = jy != nullptr || jz != nullptr;

        std::vector<Vec> qi(s + 1);
        qi[0] = q0;
        for (int i = 1; i <= s; ++i) qi[i] = y.segment((i - 1) * n, n);
        const Vec p1 = stepping ? Vec(y.segment((s + m) * n, n)) : *p1_fixed;

        if (r) r->setZero(rows);
        if (jy) jy->setZero(rows, rows);
        if (jz) jz->setZero(rows, 2 * n);
        const Mat I = Mat::Identity(n, n);
        const int row_q = m * n;        // first stationarity row
        const int row_p0 = (m + s) * n;  // p0 = D1 row (step only)

        Vec gsum0 = Vec::Zero(n);
        for (int j = 0; j < m; ++j) {
            const double tj = t + sc_.c[j] * h;
            const Vec P = y.segment((s + j) * n, n);
            Vec Q = Vec::Zero(n);
            Vec qdot = Vec::Zero(n);
            for (int i = 0; i <= s; ++i) {
                Q += basis_.l(i, j) * qi[i];
                qdot += basis_.dl(i, j) * qi[i];
            }
            qdot /= h;
            const HamiltonianGradient g = prob_.gradient(tj, Q, P);
            if (!g.dq.allFinite() || !g.dp.allFinite()) {
                throw EvaluationError("Galerkin stage: non-finite derivative", tj, PhasePoint{Q, P});
            }
            if (r) {
                r->segment(j * n, n) = qdot - g.dp;
                for (int i = 1; i <= s; ++i) {
                    r->segment(row_q + (i - 1) * n, n) +=
                        sc_.b[j] * (basis_.dl(i, j) * P - h * basis_.l(i, j) * g.dq);
                }
                gsum0 += sc_.b[j] * (basis_.dl(0, j) * P - h * basis_.l(0, j) * g.dq);
            }
            if (!need_hess) continue;
            const Mat H = prob_.hessian(tj, Q, P);
            const Mat Hqq = H.topLeftCorner(n, n);
            const Mat Hqp = H.topRightCorner(n, n);
            const Mat Hpq = H.bottomLeftCorner(n, n);
            const Mat Hpp = H.bottomRightCorner(n, n);
            const int col_P = (s + j) * n;

            // d/dq^k for k = 0..s; k = 0 feeds jz.
            for (int k = 0; k <= s; ++k) {
                Mat* target = (k == 0) ? jz : jy;
                if (!target) continue;
                const int col = (k == 0) ? 0 : (k - 1) * n;
                target->block(j * n, col, n, n) += basis_.dl(k, j) / h * I - basis_.l(k, j) * Hpq;
                for (int i = 1; i <= s; ++i) {
                    target->block(row_q + (i - 1) * n, col, n, n) +=
                        -h * sc_.b[j] * basis_.l(i, j) * basis_.l(k, j) * Hqq;
                }
                if (stepping) {
                    target->block(row_p0, col, n, n) += h * sc_.b[j] * basis_.l(0, j) * basis_.l(k, j) * Hqq;
                }
            }
            if (jy) {
                jy->block(j * n, col_P, n, n) = -Hpp;
                for (int i = 1; i <= s; ++i) {
                    jy->block(row_q + (i - 1) * n, col_P, n, n) =
                        sc_.b[j] * (basis_.dl(i, j) * I - h * basis_.l(i, j) * Hqp);
                }
                if (stepping) {
                    jy->block(row_p0, col_P, n, n) = -sc_.b[j] * (basis_.dl(0, j) * I - h * basis_.l(0, j) * Hqp);
                }
            }
        }
        if (r) {
            r->segment(row_q + (s - 1) * n, n) -= p1;
            if (stepping) r->segment(row_p0, n) = -gsum0 - *p0;
        }
        if (jy && stepping) jy->block(row_q + (s - 1) * n, (s + m) * n, n, n) = -I;
        if (jz && stepping) jz->block(row_p0, n, n, n) = -I;
    }

    HamiltonianProblem prob_;
    GalerkinScheme sc_;
    NewtonOptions opts_;
    detail::BasisTable basis_;
};

class SymplecticEulerModel final : public detail::DiscreteHamiltonianModel {
public:
    SymplecticEulerModel(HamiltonianProblem prob, NewtonOptions opts) : prob_(std::move(prob)), opts_(opts) {}

    [[nodiscard]] int dim() const override { return prob_.dim(); }

    [[nodiscard]] DiscreteHamiltonianEval evaluate(double t, const Vec& q0, const Vec& p1, double h) const override {
        const HamiltonianGradient g = prob_.gradient(t, q0, p1);
        DiscreteHamiltonianEval out;
        out.value = p1.dot(q0) + h * prob_.value(t, q0, p1);
        out.d1 = p1 + h * g.dq;
        out.d2 = q0 + h * g.dp;
        return out;
    }

    [[nodiscard]] StepOutcome step(double t, const PhasePoint& z, double h) const override {
        const int n = dim();
        auto residual = [&](const Vec& p1) -> Vec { return p1 + h * prob_.grad_q(t, z.q, p1) - z.p; };
        auto jacobian = [&](const Vec& p1) -> Mat {
            return Mat::Identity(n, n) + h * prob_.hessian(t, z.q, p1).topRightCorner(n, n);
        };
        const NewtonResult sol = newton_solve(residual, z.p, opts_, jacobian);
        StepOutcome out;
        out.z.p = sol.x;
        out.z.q = z.q + h * prob_.grad_p(t, z.q, sol.x);
        out.residual = sol.residual;
        return out;
    }

    [[nodiscard]] Mat tangent(double t, const PhasePoint& z, double h) const override {
        const int n = dim();
        const PhasePoint z1 = step(t, z, h).z;
        const Mat H = prob_.hessian(t, z.q, z1.p);
        const Mat I = Mat::Identity(n, n);
        const Eigen::FullPivLU<Mat> a(I + h * H.topRightCorner(n, n));
        const Mat dp_dq = -a.solve(h * H.topLeftCorner(n, n));
        const Mat dp_dp = a.inverse();
        Mat phi(2 * n, 2 * n);
        phi.topLeftCorner(n, n) = I + h * H.bottomLeftCorner(n, n) + h * H.bottomRightCorner(n, n) * dp_dq;
        phi.topRightCorner(n, n) = h * H.bottomRightCorner(n, n) * dp_dp;
        phi.bottomLeftCorner(n, n) = dp_dq;
        phi.bottomRightCorner(n, n) = dp_dp;
        return phi;
    }

private:
    HamiltonianProblem prob_;
    NewtonOptions opts_;
};

}  // namespace

NewtonOptions stepper_newton_options() {
    NewtonOptions o;
    o.polish = true;
    return o;
}

DiscreteHamiltonian galerkin_discrete_hamiltonian(const HamiltonianProblem& prob, const GalerkinScheme& scheme,
                                                  double h, const NewtonOptions& opts) {
    std::ostringstream label;
    label << "galerkin(s=" << scheme.s << ",m=" << scheme.nodes() << ")";
    return DiscreteHamiltonian(std::make_shared<GalerkinModel>(prob, scheme, opts), h, label.str());
}

DiscreteHamiltonian midpoint_discrete_hamiltonian(const HamiltonianProblem& prob, double h,
                                                  const NewtonOptions& opts) {
    return DiscreteHamiltonian(std::make_shared<GalerkinModel>(prob, GalerkinScheme::midpoint(), opts), h,
                               "midpoint");
}

DiscreteHamiltonian symplectic_euler_discrete_hamiltonian(const HamiltonianProblem& prob, double h,
                                                          const NewtonOptions& opts) {
    return DiscreteHamiltonian(std::make_shared<SymplecticEulerModel>(prob, opts), h, "symplectic_euler");
}

DiscreteHamiltonianFamily midpoint_family(const HamiltonianProblem& prob) {
    return [prob](double h) { return midpoint_discrete_hamiltonian(prob, h); };
}

DiscreteHamiltonianFamily galerkin_family(const HamiltonianProblem& prob, const GalerkinScheme& scheme) {
    scheme.validate();
    return [prob, scheme](double h) { return galerkin_discrete_hamiltonian(prob, scheme, h); };
}

DiscreteHamiltonianFamily symplectic_euler_family(const HamiltonianProblem& prob) {
    return [prob](double h) { return symplectic_euler_discrete_hamiltonian(prob, h); };
}

}  // namespace hamflow
