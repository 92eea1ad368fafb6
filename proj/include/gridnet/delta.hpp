#pragma once

#include <cstdint>

#include "gridnet/field.hpp"
#include "gridnet/similarity.hpp"

namespace gridnet {

struct DeltaEstimate {
  double delta = 0.0;        // mean of the significant sampled correlations
  double alpha = 0.0;        // per-pair significance level used
  int n_pairs_sampled = 0;
  int n_significant = 0;     // positive-tail significant pairs feeding delta
  std::uint64_t rng_seed = 0;
};

// Data-driven homogeneity threshold. Sample n_pairs distinct unordered cell
// pairs uniformly without replacement (degenerate cells excluded); for each,
// compute the zero-lag correlation and its variance from the two full
// autocorrelation functions, then run a one-sided z-test at level alpha.
// delta is the mean of the significantly positive correlations. Requires at
// least 20 significant pairs, otherwise throws no_signal_error advising a
// manual threshold.
DeltaEstimate estimate_delta(const CorrelationEngine& eng, double alpha,
                             int n_pairs, std::uint64_t rng_seed);
DeltaEstimate estimate_delta(const Field& f, double alpha, int n_pairs,
                             std::uint64_t rng_seed);

}  // namespace gridnet
