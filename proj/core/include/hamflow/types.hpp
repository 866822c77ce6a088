#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hamflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

/// Canonical phase-space point (q, p) on a flat cotangent bundle.
struct PhasePoint {
    Vec q;
    Vec p;

    [[nodiscard]] int dim() const { return static_cast<int>(q.size()); }
    [[nodiscard]] bool finite() const { return q.allFinite() && p.allFinite(); }

    /// Stacked [q; p] of length 2n.
    [[nodiscard]] Vec stacked() const;
    static PhasePoint unstack(const Vec& z);
};

/// Universal solver output: a time grid with phase points, optional controls
/// and per-solve residual metadata.
struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> states;
    std::vector<Vec> controls;  // empty or one per node
    std::string solver;
    std::vector<double> residuals;  // Newton residual per implicit solve, if any

    [[nodiscard]] std::size_t size() const { return states.size(); }
    [[nodiscard]] const PhasePoint& front() const { return states.front(); }
    [[nodiscard]] const PhasePoint& back() const { return states.back(); }

    /// Throws std::invalid_argument when lengths disagree or the grid is not
    /// strictly increasing.
    void validate() const;
};

/// Canonical symplectic matrix [[0, I], [-I, 0]] of size 2n.
Mat canonical_symplectic(int n);

}  // namespace hamflow
