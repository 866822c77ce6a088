#include <benchmark/benchmark.h>

#include <hamflow/accelopt.hpp>
#include <hamflow/adjoint.hpp>
#include <hamflow/bvp.hpp>
#include <hamflow/hamel.hpp>
#include <hamflow/problems.hpp>

using namespace hamflow;

namespace {

PhasePoint pendulum_start() { return {Vec::Constant(1, 0.5), Vec::Constant(1, 0.2)}; }

void BM_Step(benchmark::State& state) {
    const auto pend = problems::pendulum();
    const auto method = static_cast<Method>(state.range(0));
    const auto st = make_stepper(pend, method);
    PhasePoint z = pendulum_start();
    for (auto _ : state) {
        z = st.advance(0.0, z, 0.01);
        benchmark::DoNotOptimize(z.q.data());
    }
    state.SetLabel(to_string(method));
}
BENCHMARK(BM_Step)
    ->Arg(static_cast<int>(Method::Midpoint))
    ->Arg(static_cast<int>(Method::Gauss4))
    ->Arg(static_cast<int>(Method::SymplecticEuler))
    ->Arg(static_cast<int>(Method::RK4));

void BM_HamiltonianHessian(benchmark::State& state) {
    const auto cf = problems::central_force();
    const Vec q = (Vec(2) << 1.0, 0.2).finished(), p = (Vec(2) << -0.1, 0.8).finished();
    for (auto _ : state) benchmark::DoNotOptimize(cf.hessian(0.0, q, p));
}
BENCHMARK(BM_HamiltonianHessian);

void BM_TypeIIShooting(benchmark::State& state) {
    const auto pend = problems::pendulum();
    const auto st = make_stepper(pend, Method::Midpoint);
    const auto bc = BoundarySpec::type2(Vec::Constant(1, 0.5), Vec::Constant(1, 0.2));
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_shooting(pend, bc, 1.0, st, N, Vec::Zero(1)));
}
BENCHMARK(BM_TypeIIShooting)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_TypeIISweep(benchmark::State& state) {
    const auto prob = problems::degenerate_with_cost();
    const auto st = make_stepper(prob, Method::Midpoint);
    const auto bc = BoundarySpec::type2(Vec::Constant(1, 0.8), Vec::Constant(1, -0.5));
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_type_ii_sweep(prob, bc, 1.0, st, N));
}
BENCHMARK(BM_TypeIISweep)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_AdjointSensitivity(benchmark::State& state) {
    const auto cp = adjoint_battery::nonlinear().front();
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sensitivity(cp, Method::Midpoint, N).grad);
}
BENCHMARK(BM_AdjointSensitivity)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_DiffusionAdjoint(benchmark::State& state) {
    const int nx = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(diffusion_adjoint_demo(nx, 0.1, 200).grad);
}
BENCHMARK(BM_DiffusionAdjoint)->Arg(7)->Arg(31)->Unit(benchmark::kMillisecond);

void BM_HamelBracket(benchmark::State& state) {
    const auto triv = trivializations::so3_left_zyx();
    const Vec q = (Vec(3) << 0.2, -0.3, 0.1).finished();
    const Vec u = Vec::Unit(3, 0), v = Vec::Unit(3, 1);
    for (auto _ : state) benchmark::DoNotOptimize(hamel_bracket(triv, q, u, v));
}
BENCHMARK(BM_HamelBracket);

void BM_AcceleratedMinimize(benchmark::State& state) {
    const auto cfg = accel_battery::shifted_quadratic();
    for (auto _ : state) benchmark::DoNotOptimize(minimize(cfg, Method::Gauss4, 1000, 0.01).max_hbar);
}
BENCHMARK(BM_AcceleratedMinimize)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
