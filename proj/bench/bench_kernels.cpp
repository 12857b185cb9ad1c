// Serial reference kernels against their OpenMP counterparts.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "radcrit/functionals.hpp"
#include "radcrit/radial_ode.hpp"

namespace {

using namespace radcrit;

const ProblemSpec& spec() {
  static const ProblemSpec s = ProblemSpec::variable_coefficient(3, 0.5, 1.0);
  return s;
}

std::vector<double> heights() { return log_grid(1e-2, 1e3, 16); }

void BM_ShotsSerial(benchmark::State& st) {
  const auto d = heights();
  for (auto _ : st) benchmark::DoNotOptimize(scan_shots_serial(spec(), d, ShootOptions{}));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(d.size()));
}

void BM_ShotsParallel(benchmark::State& st) {
  const auto d = heights();
  for (auto _ : st) benchmark::DoNotOptimize(scan_shots_parallel(spec(), d, ShootOptions{}));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(d.size()));
}

struct KernelFixture {
  std::vector<double> mesh = graded_mesh();
  EnergyKernel kernel{spec(), mesh};
  DiscreteRadialFunction u =
      DiscreteRadialFunction::from_function(3, mesh, [](double r) { return std::cos(0.5 * M_PI * r); });
};

KernelFixture& fixture() {
  static KernelFixture f;
  return f;
}

void BM_EnergyReference(benchmark::State& st) {
  auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(f.kernel.energy_reference(f.u.values()));
}

void BM_EnergySerial(benchmark::State& st) {
  auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(f.kernel.energy(f.u.values(), false));
}

void BM_EnergyParallel(benchmark::State& st) {
  auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(f.kernel.energy(f.u.values(), true));
}

void BM_DerivativeSerial(benchmark::State& st) {
  auto& f = fixture();
  std::vector<double> out(f.mesh.size());
  for (auto _ : st) {
    f.kernel.derivative(f.u.values(), out, false);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_DerivativeParallel(benchmark::State& st) {
  auto& f = fixture();
  std::vector<double> out(f.mesh.size());
  for (auto _ : st) {
    f.kernel.derivative(f.u.values(), out, true);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_ShotsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShotsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergyReference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EnergySerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EnergyParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DerivativeSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DerivativeParallel)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
