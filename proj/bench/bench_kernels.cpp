#include <benchmark/benchmark.h>

#include <limits>
#include <vector>

#include "irf/engine.hpp"
#include "irf/kernels.hpp"

namespace {

using namespace irf;

MapFamily indep_family() {
  const TailModel z = TailModel::log_pareto(2.0, 3.0, 0.4);
  return MapFamily::affine(CoeffLaw::make(z, z, Dependence::independent));
}

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kN = 1 << 14;

void BM_chain_serial(benchmark::State& st) {
  const MapFamily f = indep_family();
  std::vector<double> out(kN);
  for (auto _ : st) {
    kernels::chain_serial(f, {1, 64, 0.0}, 0, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * kN);
}

void BM_chain_omp(benchmark::State& st) {
  const MapFamily f = indep_family();
  std::vector<double> out(kN);
  for (auto _ : st) {
    kernels::chain_omp(f, {1, 64, 0.0}, out, 1024, static_cast<int>(st.range(0)));
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * kN);
}

void BM_perpetuity_serial(benchmark::State& st) {
  const MapFamily f = indep_family();
  const Truncation tr = perpetuity_truncation(f.coeff, 1e-3);
  std::vector<double> out(kN);
  for (auto _ : st) {
    kernels::perpetuity_serial(f.coeff, 1, tr.terms, 0, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * kN);
}

void BM_perpetuity_omp(benchmark::State& st) {
  const MapFamily f = indep_family();
  const Truncation tr = perpetuity_truncation(f.coeff, 1e-3);
  std::vector<double> out(kN);
  for (auto _ : st) {
    kernels::perpetuity_omp(f.coeff, 1, tr.terms, out, 1024, static_cast<int>(st.range(0)));
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * kN);
}

struct SmoothedFixture {
  std::vector<double> y;
  std::vector<kernels::TailTable> tables;

  SmoothedFixture() {
    const MapFamily f = indep_family();
    SimConfig cfg;
    cfg.n_samples = 1 << 17;
    cfg.method = Method::perpetuity;
    cfg.seed = 3;
    y = sample_perpetuity(f.coeff, cfg).values;
    double lo = 1e300, hi = 0;
    for (double v : y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (double t : {10.0, 30.0, 100.0}) tables.emplace_back(ConditionalTail(f, t, Side::right), lo, hi, kInf, 0.0);
  }
};

const SmoothedFixture& fixture() {
  static const SmoothedFixture fx;
  return fx;
}

void BM_smoothed_serial(benchmark::State& st) {
  const auto& fx = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::smoothed_serial(fx.tables, fx.y, 1 << 14));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(fx.y.size() * fx.tables.size()));
}

void BM_smoothed_omp(benchmark::State& st) {
  const auto& fx = fixture();
  for (auto _ : st)
    benchmark::DoNotOptimize(kernels::smoothed_omp(fx.tables, fx.y, 1 << 14, static_cast<int>(st.range(0))));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(fx.y.size() * fx.tables.size()));
}

}  // namespace

BENCHMARK(BM_chain_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_chain_omp)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_perpetuity_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_perpetuity_omp)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_smoothed_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_smoothed_omp)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
