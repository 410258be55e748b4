// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "liouville/gridlab.hpp"
#include "liouville/measure.hpp"
#include "liouville/walk_domain.hpp"

namespace {

struct Fixture {
  std::shared_ptr<const lv::WalkDomain> domain;
  std::vector<double> in, out;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    const auto m = lv::make_free(2);
    auto ball = std::make_shared<const lv::WordBall>(lv::WordBall::enumerate(m, 11));
    Fixture out;
    out.domain = std::make_shared<const lv::WalkDomain>(lv::simple_random_walk(m), ball);
    out.in.assign(ball->size(), 1.0 / static_cast<double>(ball->size()));
    out.out.assign(ball->size(), 0.0);
    return out;
  }();
  return f;
}

template <void (*Step)(const lv::WalkDomain&, std::span<const double>, std::span<double>)>
void BM_step(benchmark::State& state) {
  const auto& f = fixture();
  std::vector<double> out(f.out);
  for (auto _ : state) {
    Step(*f.domain, f.in, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.in.size()));
}

BENCHMARK(BM_step<lv::kernels::forward_step_serial>)->Name("forward_step/serial");
BENCHMARK(BM_step<lv::kernels::forward_step>)->Name("forward_step/openmp");
BENCHMARK(BM_step<lv::kernels::backward_step_serial>)->Name("backward_step/serial");
BENCHMARK(BM_step<lv::kernels::backward_step>)->Name("backward_step/openmp");

template <lv::Measure (*Conv)(const lv::Measure&, const lv::Measure&, std::size_t)>
void BM_convolve(benchmark::State& state) {
  static const auto mu = lv::lazy_walk(lv::make_heisenberg(), 0.2);
  static const auto a = lv::power(mu, 6).result;
  for (auto _ : state) benchmark::DoNotOptimize(Conv(a, a, lv::kDefaultSupportBudget));
}

BENCHMARK(BM_convolve<lv::convolve_serial>)->Name("convolve/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_convolve<lv::convolve>)->Name("convolve/openmp")->Unit(benchmark::kMillisecond);

void BM_mc_exit(benchmark::State& state) {
  static const auto d = lv::grid::GridDomain::rectangle(20, 20);
  static const auto K = lv::grid::exit_kernel(d);
  for (auto _ : state) benchmark::DoNotOptimize(lv::grid::mc_exit_sampler(d, K, d.center(), 1, 20000));
}
BENCHMARK(BM_mc_exit)->Name("mc_exit_sampler/openmp")->Unit(benchmark::kMillisecond);

void BM_exit_kernel(benchmark::State& state) {
  const auto d = lv::grid::GridDomain::rectangle(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lv::grid::exit_kernel(d));
}
BENCHMARK(BM_exit_kernel)->Name("exit_kernel")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
