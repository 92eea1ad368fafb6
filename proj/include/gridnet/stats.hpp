#pragma once

#include <span>
#include <vector>

namespace gridnet {

// Variance threshold below which a centered series is treated as degenerate
// (constant up to rounding) and excluded from correlation work.
inline constexpr double kDegenerateVariance = 1e-12;

double series_mean(std::span<const double> x);

// Population standard deviation (1/T normalization). This convention is used
// consistently by every correlation in the library.
double series_pop_std(std::span<const double> x);

bool is_degenerate(std::span<const double> x);

// Zero-lag Pearson correlation with population normalization:
//   r = sum_t (x_t - mu_x)(y_t - mu_y) / (T sigma_x sigma_y), clamped to [-1,1].
// Throws data_error on length mismatch, empty input, or degenerate series.
double pearson_zero_lag(std::span<const double> x, std::span<const double> y);

// Lagged cross-correlation. For tau >= 0:
//   r(tau) = sum_{t=1..T-tau} (x_t - mu_x)(y_{t+tau} - mu_y) / (T sigma_x sigma_y)
// and r_{x,y}(-tau) = r_{y,x}(tau). Means and stds are full-series,
// population-normalized. `unbiased` swaps the T denominator for T-|tau|;
// that flavor can leave [-1, 1] when the overlap window gets short, so the
// result is clamped to the interval. Requires |tau| < T.
double lagged_cross_corr(std::span<const double> x, std::span<const double> y,
                         int tau, bool unbiased = false);

// Autocorrelation r_{x,x}(|tau|).
double autocorrelation(std::span<const double> x, int tau);

// Autocorrelation at every lag 0..T-1 (index = lag).
std::vector<double> full_autocorr(std::span<const double> x);

// sum over tau_k in [-(T-1), T-1] of acf_x(|tau_k|) * acf_y(|tau_k|).
double bartlett_sum(const std::vector<double>& acf_x,
                    const std::vector<double>& acf_y);

// Large-sample variance of the cross-correlation estimate at lag tau for two
// independent series:
//   Var[r(tau)] = (1/(T-|tau|)) * sum_k acf_x(k) acf_y(k)
// with the sum truncated at |k| <= T-1 and the result clamped at 0.
double bartlett_variance(std::span<const double> x, std::span<const double> y,
                         int tau);
double bartlett_variance_from_sum(double bsum, int T, int tau);

enum class Sidedness { one_sided, two_sided };

struct ZP {
  double z;
  double p;
};

// z = r / sqrt(variance); one-sided p = 1 - Phi(z), two-sided p = 2(1 - Phi(|z|)).
// Throws config_error when variance <= 0.
ZP z_and_p(double r, double variance, Sidedness side);

// Survival function of the standard normal, 1 - Phi(z).
double normal_sf(double z);

// Cross-correlogram of one pair over lags -tau_max..tau_max, plus Bartlett
// variances and p-values. `significant` is filled by FDR control downstream.
struct Correlogram {
  int tau_max = 0;
  std::vector<double> r, variance, z, p;
  std::vector<char> significant;

  int index(int tau) const { return tau + tau_max; }
  int n_lags() const { return 2 * tau_max + 1; }
};

}  // namespace gridnet
