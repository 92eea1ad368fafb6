#include "gridnet/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "gridnet/stats.hpp"

namespace gridnet::kernels {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t t = 0; t < n; ++t) s += a[t] * b[t];
  return s;
}

namespace {

void standardize_row(const Field& f, Standardized& s, int i) {
  auto x = f.series(i);
  int T = f.T;
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= T;
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  var /= T;
  double* z = s.z.data() + static_cast<std::size_t>(i) * T;
  s.mu[i] = mu;
  s.sigma[i] = std::sqrt(var);
  if (var < kDegenerateVariance) {
    s.degenerate[i] = 1;
    std::fill(z, z + T, 0.0);
    return;
  }
  double scale = 1.0 / (s.sigma[i] * std::sqrt(static_cast<double>(T)));
  for (int t = 0; t < T; ++t) z[t] = (x[t] - mu) * scale;
}

Standardized make_standardized(const Field& f) {
  Standardized s;
  s.n = f.n_cells();
  s.T = f.T;
  s.z.resize(static_cast<std::size_t>(s.n) * s.T);
  s.degenerate.assign(s.n, 0);
  s.mu.resize(s.n);
  s.sigma.resize(s.n);
  return s;
}

}  // namespace

Standardized standardize_rows(const Field& f) {
  Standardized s = make_standardized(f);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < s.n; ++i) standardize_row(f, s, i);
  return s;
}

Standardized standardize_rows_serial(const Field& f) {
  Standardized s = make_standardized(f);
  for (int i = 0; i < s.n; ++i) standardize_row(f, s, i);
  return s;
}

void pair_correlations(const Standardized& s,
                       std::span<const std::pair<int, int>> pairs,
                       std::span<double> out) {
  std::int64_t n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    out[k] = std::clamp(dot(s.row(pairs[k].first), s.row(pairs[k].second)),
                        -1.0, 1.0);
  }
}

void pair_correlations_serial(const Standardized& s,
                              std::span<const std::pair<int, int>> pairs,
                              std::span<double> out) {
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out[k] = std::clamp(dot(s.row(pairs[k].first), s.row(pairs[k].second)),
                        -1.0, 1.0);
  }
}

std::vector<double> acf(std::span<const double> z_row) {
  int T = static_cast<int>(z_row.size());
  std::vector<double> out(T);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < T; ++k) {
    double s = 0.0;
    for (int t = 0; t + k < T; ++t) s += z_row[t] * z_row[t + k];
    out[k] = s;
  }
  return out;
}

std::vector<double> acf_serial(std::span<const double> z_row) {
  int T = static_cast<int>(z_row.size());
  std::vector<double> out(T);
  for (int k = 0; k < T; ++k) {
    double s = 0.0;
    for (int t = 0; t + k < T; ++t) s += z_row[t] * z_row[t + k];
    out[k] = s;
  }
  return out;
}

}  // namespace gridnet::kernels
