#include <benchmark/benchmark.h>

#include <memory>

#include "edgestates/field.hpp"
#include "edgestates/geometry.hpp"
#include "edgestates/oscillator.hpp"
#include "edgestates/spectra2d.hpp"

using namespace edgestates;

namespace {

struct Disk {
  BoundaryCurve curve = BoundaryCurve::build(CurveDescriptor::disk(1.0));
  GaugeData gauge = solve_poisson(curve);
};

const Disk& disk() {
  static const Disk d;
  return d;
}

ComplexVector ones(std::size_t n) { return ComplexVector(n, cplx(1.0, 0.5)); }

}  // namespace

static void BM_OscillatorSolve(benchmark::State& state) {
  const double k = -1.0;
  const HalfLineGrid grid = HalfLineGrid::for_wavenumber(k);
  for (auto _ : state) benchmark::DoNotOptimize(solve_oscillator(k, static_cast<int>(state.range(0)), grid));
}
BENCHMARK(BM_OscillatorSolve)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_BranchPoint(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(branch_point(1, 0.3));
}
BENCHMARK(BM_BranchPoint)->Unit(benchmark::kMillisecond);

// Grid spacing 1/range(0) on the unit-perimeter disk.
static void BM_Poisson(benchmark::State& state) {
  const BoundaryCurve curve = BoundaryCurve::build(CurveDescriptor::disk(1.0));
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_poisson(curve, h));
}
BENCHMARK(BM_Poisson)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

// Mesh eps / 6 with eps = 1 / range(0).
static void BM_OperatorApply(benchmark::State& state) {
  const double eps = 1.0 / static_cast<double>(state.range(0));
  const MagneticOperator2D op = MagneticOperator2D::assemble(disk().curve, disk().gauge, eps, eps / 6);
  const ComplexVector x = ones(op.size());
  ComplexVector y(op.size());
  for (auto _ : state) {
    op.apply(x.data(), y.data());
    benchmark::ClobberMemory();
  }
  state.counters["unknowns"] = static_cast<double>(op.size());
  state.SetItemsProcessed(state.iterations() * static_cast<long>(op.size()));
}
BENCHMARK(BM_OperatorApply)->Arg(20)->Arg(40)->Arg(80);

static void BM_Minres(benchmark::State& state) {
  const double eps = 1.0 / static_cast<double>(state.range(0));
  const MagneticOperator2D op = MagneticOperator2D::assemble(disk().curve, disk().gauge, eps, eps / 6);
  const ComplexVector b = ones(op.size());
  const auto apply = [&](const cplx* in, cplx* out) { op.apply(in, out); };
  const double sigma = 2.0 / (eps * eps) + 0.37 / eps;
  std::size_t iterations = 0;
  for (auto _ : state) {
    ComplexVector x(op.size());
    iterations = minres(apply, sigma, b, x, 1e-8, 100000).iterations;
    benchmark::DoNotOptimize(x.data());
  }
  state.counters["unknowns"] = static_cast<double>(op.size());
  state.counters["iterations"] = static_cast<double>(iterations);
}
BENCHMARK(BM_Minres)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
