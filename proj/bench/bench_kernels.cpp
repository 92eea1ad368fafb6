// Serial reference vs OpenMP flavors of the hot loops, plus the full domain
// identification on a rendered scene. Run with --benchmark_filter=... to
// narrow; results are wall time per iteration.

#include <random>
#include <utility>
#include <vector>

#include <benchmark/benchmark.h>

#include "gridnet/domains.hpp"
#include "gridnet/field.hpp"
#include "gridnet/grid.hpp"
#include "gridnet/kernels.hpp"
#include "gridnet/preprocess.hpp"
#include "gridnet/similarity.hpp"
#include "gridnet/synthetic.hpp"

using namespace gridnet;

namespace {

Field random_field(int rows, int cols, int T) {
  Field f;
  f.grid = std::make_shared<GridGraph>(build_grid(rows, cols, {}, {}, {},
                                                  false, 4));
  f.T = T;
  f.data.resize(static_cast<std::size_t>(f.n_cells()) * T);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : f.data) v = u(rng);
  return f;
}

std::vector<std::pair<int, int>> all_pairs(int n) {
  std::vector<std::pair<int, int>> p;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) p.push_back({i, j});
  return p;
}

// Two coherent regions so identification does real merge/expand work.
Field scene_field() {
  SyntheticSpec s;
  s.rows = 24;
  s.cols = 32;
  s.T = 500;
  s.n_mothers = 3;
  s.phi = 0.3;
  s.decorrelate_lags = 10;
  s.rng_seed = 9;
  s.domains = {
      {11, 8, 3, 7, 9, {{0, 1.0, 0}}},
      {11, 23, 3, 7, 9, {{1, 1.0, 0}}},
      {4, 16, 2, 5, 4, {{2, 1.0, 0}}},
  };
  return render_field(s).first;
}

void bm_standardize_serial(benchmark::State& state) {
  Field f = random_field(40, 50, 600);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::standardize_rows_serial(f));
}

void bm_standardize_omp(benchmark::State& state) {
  Field f = random_field(40, 50, 600);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::standardize_rows(f));
}

void bm_pair_correlations_serial(benchmark::State& state) {
  Field f = random_field(24, 24, 600);
  kernels::Standardized s = kernels::standardize_rows(f);
  auto pairs = all_pairs(s.n);
  std::vector<double> out(pairs.size());
  for (auto _ : state) {
    kernels::pair_correlations_serial(s, pairs, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void bm_pair_correlations_omp(benchmark::State& state) {
  Field f = random_field(24, 24, 600);
  kernels::Standardized s = kernels::standardize_rows(f);
  auto pairs = all_pairs(s.n);
  std::vector<double> out(pairs.size());
  for (auto _ : state) {
    kernels::pair_correlations(s, pairs, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void bm_acf_serial(benchmark::State& state) {
  Field f = random_field(1, 4, 4000);
  kernels::Standardized s = kernels::standardize_rows(f);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::acf_serial(s.row(0)));
}

void bm_acf_omp(benchmark::State& state) {
  Field f = random_field(1, 4, 4000);
  kernels::Standardized s = kernels::standardize_rows(f);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::acf(s.row(0)));
}

void bm_homogeneity_field_serial(benchmark::State& state) {
  Field f = scene_field();
  CorrelationEngine eng(f);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        homogeneity_field_serial(eng, *f.grid, 4));
}

void bm_homogeneity_field_omp(benchmark::State& state) {
  Field f = scene_field();
  CorrelationEngine eng(f);
  for (auto _ : state)
    benchmark::DoNotOptimize(homogeneity_field(eng, *f.grid, 4));
}

void bm_detrend_serial(benchmark::State& state) {
  Field f = random_field(16, 16, 300);
  for (auto _ : state) {
    Field copy = f;
    theil_sen_detrend_serial(copy);
    benchmark::DoNotOptimize(copy.data.data());
  }
}

void bm_detrend_omp(benchmark::State& state) {
  Field f = random_field(16, 16, 300);
  for (auto _ : state) {
    Field copy = f;
    theil_sen_detrend(copy);
    benchmark::DoNotOptimize(copy.data.data());
  }
}

void bm_identify_reference(benchmark::State& state) {
  Field f = scene_field();
  for (auto _ : state) {
    CorrelationEngine eng(f);  // fresh memo, work is comparable
    benchmark::DoNotOptimize(
        identify_domains_reference(eng, *f.grid, 4, 0.55));
  }
}

void bm_identify_production(benchmark::State& state) {
  Field f = scene_field();
  for (auto _ : state) {
    CorrelationEngine eng(f);
    benchmark::DoNotOptimize(identify_domains(eng, *f.grid, 4, 0.55));
  }
}

BENCHMARK(bm_standardize_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_standardize_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_pair_correlations_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_pair_correlations_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_acf_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_acf_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_homogeneity_field_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_homogeneity_field_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_detrend_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_detrend_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_identify_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_identify_production)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
