#include "gridnet/delta.hpp"

#include <algorithm>
#include <unordered_set>
#include <vector>

#include "gridnet/errors.hpp"
#include "gridnet/rng.hpp"
#include "gridnet/stats.hpp"

namespace gridnet {

DeltaEstimate estimate_delta(const CorrelationEngine& eng, double alpha,
                             int n_pairs, std::uint64_t rng_seed) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("alpha must lie in (0, 1)");
  if (n_pairs < 100) throw config_error("need at least 100 sampled pairs");

  std::vector<int> valid;
  for (int i = 0; i < eng.size(); ++i)
    if (eng.valid(i)) valid.push_back(i);
  std::uint64_t nv = valid.size();
  if (nv < 2) throw data_error("fewer than 2 usable cells");
  std::uint64_t total = nv * (nv - 1) / 2;
  std::uint64_t want = std::min<std::uint64_t>(n_pairs, total);

  // Distinct unordered pairs, uniform without replacement. Linear index k
  // decodes to (i, j) with i < j over the valid-cell list.
  SplitMix64 rng(substream(rng_seed, 0x64656c74, 0));
  std::vector<std::uint64_t> picked;
  picked.reserve(want);
  if (want * 2 >= total) {
    std::vector<std::uint64_t> all(total);
    for (std::uint64_t k = 0; k < total; ++k) all[k] = k;
    for (std::uint64_t k = 0; k < want; ++k) {
      std::uint64_t j = k + rng.below(total - k);
      std::swap(all[k], all[j]);
      picked.push_back(all[k]);
    }
  } else {
    std::unordered_set<std::uint64_t> seen;
    while (picked.size() < want) {
      std::uint64_t k = rng.below(total);
      if (seen.insert(k).second) picked.push_back(k);
    }
  }

  int T = eng.T();
  std::vector<double> r(want), p(want);
  std::int64_t n = static_cast<std::int64_t>(want);
  // Warm the per-cell autocorrelation cache serially, then score pairs.
  for (std::uint64_t k : picked) {
    std::uint64_t j = static_cast<std::uint64_t>(
        (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(k))) / 2.0);
    while (j * (j - 1) / 2 > k) --j;
    while ((j + 1) * j / 2 <= k) ++j;
    std::uint64_t i = k - j * (j - 1) / 2;
    eng.acf(valid[i]);
    eng.acf(valid[j]);
  }
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t idx = 0; idx < n; ++idx) {
    std::uint64_t k = picked[idx];
    std::uint64_t j = static_cast<std::uint64_t>(
        (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(k))) / 2.0);
    while (j * (j - 1) / 2 > k) --j;
    while ((j + 1) * j / 2 <= k) ++j;
    std::uint64_t i = k - j * (j - 1) / 2;
    int a = valid[i], b = valid[j];
    r[idx] = eng.pair(a, b);
    double var = bartlett_variance_from_sum(
        bartlett_sum(eng.acf(a), eng.acf(b)), T, 0);
    if (var <= 0.0) {
      p[idx] = 1.0;
    } else {
      p[idx] = z_and_p(r[idx], var, Sidedness::one_sided).p;
    }
  }

  double sum = 0.0;
  int n_significant = 0;
  for (std::uint64_t idx = 0; idx < want; ++idx) {
    if (p[idx] <= alpha) {
      sum += r[idx];
      ++n_significant;
    }
  }
  if (n_significant < 20)
    throw no_signal_error(
        "only " + std::to_string(n_significant) +
        " significant pairs (need 20); the threshold cannot be estimated "
        "reliably, pass an explicit one instead");

  DeltaEstimate est;
  est.delta = sum / n_significant;
  est.alpha = alpha;
  est.n_pairs_sampled = static_cast<int>(want);
  est.n_significant = n_significant;
  est.rng_seed = rng_seed;
  return est;
}

DeltaEstimate estimate_delta(const Field& f, double alpha, int n_pairs,
                             std::uint64_t rng_seed) {
  CorrelationEngine eng(f);
  return estimate_delta(eng, alpha, n_pairs, rng_seed);
}

}  // namespace gridnet
