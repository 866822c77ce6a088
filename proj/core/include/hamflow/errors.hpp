#pragma once

#include <stdexcept>
#include <string>

#include "hamflow/types.hpp"

namespace hamflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A derivative or Hamiltonian evaluation produced a non-finite value.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, double t, PhasePoint z)
        : Error(what), t_(t), z_(std::move(z)) {}
    [[nodiscard]] double time() const { return t_; }
    [[nodiscard]] const PhasePoint& state() const { return z_; }

private:
    double t_;
    PhasePoint z_;
};

/// Newton (or an outer iteration) failed to reach tolerance. Carries the best
/// iterate seen and its residual.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, Vec best, double residual, int iterations)
        : Error(what), best_(std::move(best)), residual_(residual), iterations_(iterations) {}
    [[nodiscard]] const Vec& best() const { return best_; }
    [[nodiscard]] double residual() const { return residual_; }
    [[nodiscard]] int iterations() const { return iterations_; }

private:
    Vec best_;
    double residual_;
    int iterations_;
};

class SingularJacobian : public Error {
public:
    SingularJacobian(const std::string& what, double rcond) : Error(what), rcond_(rcond) {}
    [[nodiscard]] double rcond() const { return rcond_; }

private:
    double rcond_;
};

/// A one-step map failed inside a time loop; `step_index` is the failing step.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, int step_index) : Error(what), step_(step_index) {}
    [[nodiscard]] int step_index() const { return step_; }

private:
    int step_;
};

class RankDeficientStageSystem : public Error {
public:
    using Error::Error;
};

class LegendreInversionFailure : public Error {
public:
    using Error::Error;
};

/// Too few errors above the noise floor to fit a convergence order.
class DegenerateRegression : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace hamflow
