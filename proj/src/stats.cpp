#include "gridnet/stats.hpp"

#include <algorithm>
#include <cmath>

#include "gridnet/errors.hpp"

namespace gridnet {

double series_mean(std::span<const double> x) {
  if (x.empty()) throw data_error("mean of an empty series");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double series_pop_std(std::span<const double> x) {
  double mu = series_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return std::sqrt(s / static_cast<double>(x.size()));
}

bool is_degenerate(std::span<const double> x) {
  if (x.size() < 2) return true;
  double sd = series_pop_std(x);
  return !(sd * sd >= kDegenerateVariance);
}

double pearson_zero_lag(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw data_error("series lengths differ");
  if (x.size() < 2) throw data_error("series too short for correlation");
  double mx = series_mean(x), my = series_mean(y);
  double sx = series_pop_std(x), sy = series_pop_std(y);
  if (sx * sx < kDegenerateVariance || sy * sy < kDegenerateVariance)
    throw data_error("degenerate (near-constant) series");
  double num = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t)
    num += (x[t] - mx) * (y[t] - my);
  double r = num / (static_cast<double>(x.size()) * sx * sy);
  return std::clamp(r, -1.0, 1.0);
}

double lagged_cross_corr(std::span<const double> x, std::span<const double> y,
                         int tau, bool unbiased) {
  if (x.size() != y.size()) throw data_error("series lengths differ");
  int T = static_cast<int>(x.size());
  if (T < 2) throw data_error("series too short for correlation");
  if (std::abs(tau) >= T) throw config_error("|lag| must be below the length");
  if (tau < 0) return lagged_cross_corr(y, x, -tau, unbiased);
  double mx = series_mean(x), my = series_mean(y);
  double sx = series_pop_std(x), sy = series_pop_std(y);
  if (sx * sx < kDegenerateVariance || sy * sy < kDegenerateVariance)
    throw data_error("degenerate (near-constant) series");
  double num = 0.0;
  for (int t = 0; t + tau < T; ++t) num += (x[t] - mx) * (y[t + tau] - my);
  double denom = static_cast<double>(unbiased ? T - tau : T) * sx * sy;
  return std::clamp(num / denom, -1.0, 1.0);
}

double autocorrelation(std::span<const double> x, int tau) {
  return lagged_cross_corr(x, x, std::abs(tau));
}

std::vector<double> full_autocorr(std::span<const double> x) {
  int T = static_cast<int>(x.size());
  if (T < 2) throw data_error("series too short for autocorrelation");
  double mu = series_mean(x);
  std::vector<double> c(x.begin(), x.end());
  for (double& v : c) v -= mu;
  double denom = 0.0;
  for (double v : c) denom += v * v;
  if (denom / T < kDegenerateVariance)
    throw data_error("degenerate (near-constant) series");
  std::vector<double> acf(T);
  for (int k = 0; k < T; ++k) {
    double s = 0.0;
    for (int t = 0; t + k < T; ++t) s += c[t] * c[t + k];
    acf[k] = s / denom;
  }
  return acf;
}

double bartlett_sum(const std::vector<double>& acf_x,
                    const std::vector<double>& acf_y) {
  if (acf_x.size() != acf_y.size() || acf_x.empty())
    throw data_error("autocorrelation arrays must have equal nonzero length");
  double s = 0.0;
  for (std::size_t k = 1; k < acf_x.size(); ++k) s += acf_x[k] * acf_y[k];
  return 2.0 * s + acf_x[0] * acf_y[0];
}

double bartlett_variance_from_sum(double bsum, int T, int tau) {
  if (std::abs(tau) >= T) throw config_error("|lag| must be below the length");
  double v = bsum / static_cast<double>(T - std::abs(tau));
  return std::max(v, 0.0);
}

double bartlett_variance(std::span<const double> x, std::span<const double> y,
                         int tau) {
  if (x.size() != y.size()) throw data_error("series lengths differ");
  double bsum = bartlett_sum(full_autocorr(x), full_autocorr(y));
  return bartlett_variance_from_sum(bsum, static_cast<int>(x.size()), tau);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

ZP z_and_p(double r, double variance, Sidedness side) {
  if (!(variance > 0.0)) throw config_error("variance must be positive");
  double z = r / std::sqrt(variance);
  double p = side == Sidedness::one_sided ? normal_sf(z)
                                          : 2.0 * normal_sf(std::abs(z));
  return {z, std::clamp(p, 0.0, 1.0)};
}

}  // namespace gridnet
