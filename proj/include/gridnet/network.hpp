#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gridnet/domains.hpp"
#include "gridnet/field.hpp"
#include "gridnet/stats.hpp"

#include "nlohmann/json.hpp"

namespace gridnet {

enum class SignalMode { mean, area_weighted_sum };

struct DomainSignal {
  int domain_id = -1;
  SignalMode mode = SignalMode::mean;
  std::vector<double> values;
};

DomainSignal domain_signal(const Field& f, const Domain& d, SignalMode mode);

// Correlogram over tau in [-tau_max, tau_max] with per-lag variances, z
// scores and two-sided p-values. Significance flags start false; the FDR
// pass fills them. tau_max must stay below T/2 (error); above T/4 the
// variance estimates get shaky, callers may warn.
Correlogram pair_correlogram(std::span<const double> a,
                             std::span<const double> b, int tau_max,
                             bool unbiased = false);

struct PTest {
  int pair = 0;  // index into the caller's pair list
  int tau = 0;
  double p = 1.0;
};

// Benjamini-Hochberg over M tests: sort p ascending, accept the first m where
// m is the largest index with p_m <= q*m/M. Returns flags aligned with the
// input order. Ties sort by (p, pair, tau) so acceptance is reproducible.
// The conservative variant divides q by the harmonic number H_M, valid under
// arbitrary dependence.
std::vector<char> benjamini_hochberg(std::span<const PTest> tests,
                                     std::size_t M, double q,
                                     bool conservative = false);

struct LagInfo {
  int tau_star = 0;
  double r_star = 0.0;
  double var_star = 0.0;
  int lo = 0;  // significant lag interval around tau_star, inclusive
  int hi = 0;
  bool directed = false;
  bool first_precedes = false;  // when directed: true iff the interval is
                                // at positive lags (first signal leads)
  std::vector<int> extra_significant_lags;  // significant lags outside [lo,hi]
};

// Pick tau* as the |r|-maximizing significant lag, then grow the maximal
// contiguous interval around it whose lags stay significant, share the sign
// of r(tau*), and keep |r| within one standard deviation (at tau*) of |r*|.
// Directed when 0 falls outside that interval. None when nothing significant.
std::optional<LagInfo> lag_range_and_direction(const Correlogram& c);

// Covariance-scale weight: sigma_a * sigma_b * r_star, population stds.
double edge_weight(std::span<const double> a, std::span<const double> b,
                   double r_star);

struct Edge {
  int src = -1;
  int dst = -1;
  bool directed = false;
  int lag_lo = 0;
  int lag_hi = 0;
  int tau_star = 0;
  double r_star = 0.0;
  double weight = 0.0;
  double variance_at_tau_star = 0.0;
  std::vector<int> extra_significant_lags;
};

struct NodeInfo {
  int id = -1;
  double strength = 0.0;  // sum of |weight| over incident edges
  int degree = 0;
};

struct DomainNetwork {
  double q = 0.0;
  int tau_max = 0;
  std::size_t M = 0;  // total hypothesis tests fed to the FDR pass
  std::vector<NodeInfo> nodes;
  std::vector<Edge> edges;
};

struct NetworkOptions {
  int tau_max = 20;
  double q = 0.10;
  SignalMode mode = SignalMode::mean;
  bool unbiased_lagged = false;
  bool conservative_fdr = false;
  // Weight from the mean significant-range correlation instead of r*.
  bool average_weight_over_range = false;
};

// All-pairs correlograms, one global FDR pass over every (pair, lag) test,
// then edge extraction. Directed edges are stored source-first with a
// positive lag range; undirected ones with src < dst and the range as seen
// from src. Nodes cover every domain, including isolated ones.
DomainNetwork infer_network(const std::vector<DomainSignal>& signals,
                            const NetworkOptions& opt);
DomainNetwork infer_network(const Field& f, const DomainSet& s,
                            const NetworkOptions& opt);

nlohmann::json network_to_json(const DomainNetwork& n);
DomainNetwork network_from_json(const nlohmann::json& j);
void write_edges_csv(const DomainNetwork& n, const std::filesystem::path& file);
void write_correlogram_csv(const Correlogram& c,
                           const std::filesystem::path& file);

}  // namespace gridnet
