#include "hamflow/types.hpp"

#include <stdexcept>

namespace hamflow {

Vec PhasePoint::stacked() const {
    Vec z(q.size() + p.size());
    z << q, p;
    return z;
}

PhasePoint PhasePoint::unstack(const Vec& z) {
    const Eigen::Index n = z.size() / 2;
    return {z.head(n), z.tail(n)};
}

void Trajectory::validate() const {
    if (times.size() != states.size()) {
        throw std::invalid_argument("trajectory: times and states differ in length");
    }
    if (!controls.empty() && controls.size() != states.size()) {
        throw std::invalid_argument("trajectory: controls and states differ in length");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) {
            throw std::invalid_argument("trajectory: time grid is not strictly increasing");
        }
    }
}

Mat canonical_symplectic(int n) {
    Mat omega = Mat::Zero(2 * n, 2 * n);
    omega.topRightCorner(n, n).setIdentity();
    omega.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return omega;
}

}  // namespace hamflow
