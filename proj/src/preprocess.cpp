#include "gridnet/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gridnet/errors.hpp"

namespace gridnet {

namespace {

// Neumaier compensated sum; keeps per-cell means at rounding noise.
double compensated_sum(std::span<const double> x) {
  double s = 0.0, c = 0.0;
  for (double v : x) {
    double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }
  return s + c;
}

void subtract_mean(std::span<double> x) {
  double m = compensated_sum(x) / static_cast<double>(x.size());
  for (double& v : x) v -= m;
  // second pass removes the residual introduced by the subtraction itself
  double m2 = compensated_sum(x) / static_cast<double>(x.size());
  for (double& v : x) v -= m2;
}

}  // namespace

void deseasonalize(Field& f, int period) {
  if (period <= 1) throw config_error("seasonal period must be at least 2");
  if (f.T < 2 * period)
    throw config_error("series must cover at least two full periods");
  int n = f.n_cells();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    auto x = f.series(i);
    std::vector<double> mean(period, 0.0);
    std::vector<int> count(period, 0);
    for (int t = 0; t < f.T; ++t) {
      mean[t % period] += x[t];
      ++count[t % period];
    }
    for (int ph = 0; ph < period; ++ph) mean[ph] /= count[ph];
    for (int t = 0; t < f.T; ++t) x[t] -= mean[t % period];
  }
  f.preprocessing_log.push_back("deseasonalize(period=" +
                                std::to_string(period) + ")");
}

double theil_sen_slope(std::span<const double> y) {
  int T = static_cast<int>(y.size());
  if (T < 2) throw config_error("need at least 2 samples for a slope");
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(T) * (T - 1) / 2);
  for (int i = 0; i < T; ++i)
    for (int j = i + 1; j < T; ++j)
      slopes.push_back((y[j] - y[i]) / static_cast<double>(j - i));
  auto mid = slopes.begin() + slopes.size() / 2;
  std::nth_element(slopes.begin(), mid, slopes.end());
  if (slopes.size() % 2 == 1) return *mid;
  double hi = *mid;
  double lo = *std::max_element(slopes.begin(), mid);
  return 0.5 * (lo + hi);
}

namespace {

void detrend_cell(std::span<double> x, std::vector<double>& scratch) {
  int T = static_cast<int>(x.size());
  double slope = theil_sen_slope(x);
  scratch.resize(T);
  for (int t = 0; t < T; ++t) scratch[t] = x[t] - slope * t;
  auto mid = scratch.begin() + T / 2;
  std::nth_element(scratch.begin(), mid, scratch.end());
  double intercept;
  if (T % 2 == 1) {
    intercept = *mid;
  } else {
    double hi = *mid;
    double lo = *std::max_element(scratch.begin(), mid);
    intercept = 0.5 * (lo + hi);
  }
  for (int t = 0; t < T; ++t) x[t] -= intercept + slope * t;
}

}  // namespace

void theil_sen_detrend(Field& f) {
  if (f.T < 3) throw config_error("need at least 3 samples to detrend");
  int n = f.n_cells();
#pragma omp parallel
  {
    std::vector<double> scratch;
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) detrend_cell(f.series(i), scratch);
  }
  f.preprocessing_log.push_back("theil_sen_detrend");
}

void theil_sen_detrend_serial(Field& f) {
  if (f.T < 3) throw config_error("need at least 3 samples to detrend");
  std::vector<double> scratch;
  for (int i = 0; i < f.n_cells(); ++i) detrend_cell(f.series(i), scratch);
  f.preprocessing_log.push_back("theil_sen_detrend");
}

void center(Field& f) {
  int n = f.n_cells();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) subtract_mean(f.series(i));
  f.preprocessing_log.push_back("center");
}

}  // namespace gridnet
