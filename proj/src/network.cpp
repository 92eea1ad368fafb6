#include "gridnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>

#include "gridnet/errors.hpp"

namespace gridnet {

DomainSignal domain_signal(const Field& f, const Domain& d, SignalMode mode) {
  if (d.cells.empty()) throw config_error("domain has no cells");
  DomainSignal s;
  s.domain_id = d.id;
  s.mode = mode;
  s.values.assign(f.T, 0.0);
  double denom = static_cast<double>(d.cells.size());
  for (int c : d.cells) {
    auto row = f.series(c);
    double w = (mode == SignalMode::area_weighted_sum)
                   ? f.grid->cell_weight[c]
                   : 1.0;
    for (int t = 0; t < f.T; ++t) s.values[t] += w * row[t];
  }
  if (mode == SignalMode::mean)
    for (double& v : s.values) v /= denom;
  return s;
}

namespace {

Correlogram correlogram_from_acf(std::span<const double> a,
                                 std::span<const double> b,
                                 const std::vector<double>& acf_a,
                                 const std::vector<double>& acf_b, int tau_max,
                                 bool unbiased) {
  int T = static_cast<int>(a.size());
  Correlogram c;
  c.tau_max = tau_max;
  int L = c.n_lags();
  c.r.resize(L);
  c.variance.resize(L);
  c.z.resize(L);
  c.p.resize(L);
  c.significant.assign(L, 0);
  double bsum = bartlett_sum(acf_a, acf_b);
  for (int tau = -tau_max; tau <= tau_max; ++tau) {
    int k = c.index(tau);
    c.r[k] = lagged_cross_corr(a, b, tau, unbiased);
    double var = bartlett_variance_from_sum(bsum, T, tau);
    c.variance[k] = var;
    if (var > 0.0) {
      ZP zp = z_and_p(c.r[k], var, Sidedness::two_sided);
      c.z[k] = zp.z;
      c.p[k] = zp.p;
    } else {
      // Bartlett estimate collapsed; treat the lag as untestable.
      c.z[k] = 0.0;
      c.p[k] = 1.0;
    }
  }
  return c;
}

}  // namespace

Correlogram pair_correlogram(std::span<const double> a,
                             std::span<const double> b, int tau_max,
                             bool unbiased) {
  if (a.size() != b.size()) throw data_error("series length mismatch");
  int T = static_cast<int>(a.size());
  if (T < 2) throw data_error("series too short");
  if (tau_max < 0) throw config_error("tau_max must be nonnegative");
  if (2 * tau_max >= T)
    throw config_error("tau_max must stay below half the series length");
  if (is_degenerate(a) || is_degenerate(b))
    throw data_error("degenerate series in correlogram");
  std::vector<double> acf_a = full_autocorr(a);
  std::vector<double> acf_b = full_autocorr(b);
  return correlogram_from_acf(a, b, acf_a, acf_b, tau_max, unbiased);
}

std::vector<char> benjamini_hochberg(std::span<const PTest> tests,
                                     std::size_t M, double q,
                                     bool conservative) {
  if (!(q >= 0.0 && q <= 1.0))
    throw config_error("FDR rate must lie in [0, 1]");
  if (M < tests.size())
    throw config_error("hypothesis count smaller than the test list");
  std::vector<char> accept(tests.size(), 0);
  if (tests.empty() || q == 0.0 || M == 0) return accept;

  std::vector<std::size_t> order(tests.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (tests[x].p != tests[y].p) return tests[x].p < tests[y].p;
    if (tests[x].pair != tests[y].pair) return tests[x].pair < tests[y].pair;
    return tests[x].tau < tests[y].tau;
  });

  double qeff = q;
  if (conservative) {
    double harmonic = 0.0;
    for (std::size_t i = 1; i <= M; ++i)
      harmonic += 1.0 / static_cast<double>(i);
    qeff = q / harmonic;
  }
  std::size_t cutoff = 0;
  for (std::size_t m = 1; m <= order.size(); ++m) {
    double bound =
        qeff * static_cast<double>(m) / static_cast<double>(M);
    if (tests[order[m - 1]].p <= bound) cutoff = m;
  }
  for (std::size_t m = 0; m < cutoff; ++m) accept[order[m]] = 1;
  return accept;
}

std::optional<LagInfo> lag_range_and_direction(const Correlogram& c) {
  bool found = false;
  int best = 0;
  for (int tau = -c.tau_max; tau <= c.tau_max; ++tau) {
    int k = c.index(tau);
    if (!c.significant[k]) continue;
    if (!found) {
      found = true;
      best = tau;
      continue;
    }
    int kb = c.index(best);
    double ra = std::abs(c.r[k]), rb = std::abs(c.r[kb]);
    if (ra > rb ||
        (ra == rb && (std::abs(tau) < std::abs(best) ||
                      (std::abs(tau) == std::abs(best) && tau < best))))
      best = tau;
  }
  if (!found) return std::nullopt;

  LagInfo info;
  info.tau_star = best;
  info.r_star = c.r[c.index(best)];
  info.var_star = c.variance[c.index(best)];
  double floor_r = std::abs(info.r_star) - std::sqrt(info.var_star);
  bool positive = info.r_star > 0.0;
  auto in_band = [&](int tau) {
    int k = c.index(tau);
    if (!c.significant[k]) return false;
    if ((c.r[k] > 0.0) != positive) return false;
    return std::abs(c.r[k]) >= floor_r;
  };
  info.lo = best;
  while (info.lo - 1 >= -c.tau_max && in_band(info.lo - 1)) --info.lo;
  info.hi = best;
  while (info.hi + 1 <= c.tau_max && in_band(info.hi + 1)) ++info.hi;
  info.directed = info.lo > 0 || info.hi < 0;
  info.first_precedes = info.directed && info.lo > 0;
  for (int tau = -c.tau_max; tau <= c.tau_max; ++tau)
    if (c.significant[c.index(tau)] && (tau < info.lo || tau > info.hi))
      info.extra_significant_lags.push_back(tau);
  return info;
}

double edge_weight(std::span<const double> a, std::span<const double> b,
                   double r_star) {
  return series_pop_std(a) * series_pop_std(b) * r_star;
}

DomainNetwork infer_network(const std::vector<DomainSignal>& signals,
                            const NetworkOptions& opt) {
  DomainNetwork net;
  net.q = opt.q;
  net.tau_max = opt.tau_max;
  int n = static_cast<int>(signals.size());
  std::size_t n_lags = 2 * static_cast<std::size_t>(opt.tau_max) + 1;
  net.M = static_cast<std::size_t>(n) * (n - 1) / 2 * n_lags;
  for (const auto& s : signals)
    net.nodes.push_back({s.domain_id, 0.0, 0});
  if (n < 2) return net;

  int T = static_cast<int>(signals[0].values.size());
  for (const auto& s : signals) {
    if (static_cast<int>(s.values.size()) != T)
      throw data_error("domain signals differ in length");
    if (is_degenerate(s.values))
      throw data_error("degenerate signal for domain " +
                       std::to_string(s.domain_id));
  }
  if (2 * opt.tau_max >= T)
    throw config_error("tau_max must stay below half the series length");

  std::vector<std::vector<double>> acfs(n);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) acfs[i] = full_autocorr(signals[i].values);

  int n_pairs = n * (n - 1) / 2;
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(n_pairs);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  std::vector<Correlogram> grams(n_pairs);
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < n_pairs; ++p) {
    auto [i, j] = pairs[p];
    grams[p] = correlogram_from_acf(signals[i].values, signals[j].values,
                                    acfs[i], acfs[j], opt.tau_max,
                                    opt.unbiased_lagged);
  }

  std::vector<PTest> tests;
  tests.reserve(static_cast<std::size_t>(n_pairs) * n_lags);
  for (int p = 0; p < n_pairs; ++p)
    for (int tau = -opt.tau_max; tau <= opt.tau_max; ++tau)
      tests.push_back({p, tau, grams[p].p[grams[p].index(tau)]});
  std::vector<char> accept =
      benjamini_hochberg(tests, net.M, opt.q, opt.conservative_fdr);
  for (std::size_t k = 0; k < tests.size(); ++k)
    if (accept[k])
      grams[tests[k].pair].significant[grams[tests[k].pair].index(
          tests[k].tau)] = 1;

  for (int p = 0; p < n_pairs; ++p) {
    auto info = lag_range_and_direction(grams[p]);
    if (!info) continue;
    auto [i, j] = pairs[p];
    double r_for_weight = info->r_star;
    if (opt.average_weight_over_range) {
      double sum = 0.0;
      for (int tau = info->lo; tau <= info->hi; ++tau)
        sum += grams[p].r[grams[p].index(tau)];
      r_for_weight = sum / (info->hi - info->lo + 1);
    }
    Edge e;
    e.directed = info->directed;
    e.r_star = info->r_star;
    e.variance_at_tau_star = info->var_star;
    e.weight = edge_weight(signals[i].values, signals[j].values, r_for_weight);
    bool swap = info->directed && !info->first_precedes;
    if (swap) {
      e.src = signals[j].domain_id;
      e.dst = signals[i].domain_id;
      e.lag_lo = -info->hi;
      e.lag_hi = -info->lo;
      e.tau_star = -info->tau_star;
      for (int tau : info->extra_significant_lags)
        e.extra_significant_lags.push_back(-tau);
      std::sort(e.extra_significant_lags.begin(),
                e.extra_significant_lags.end());
    } else {
      e.src = signals[i].domain_id;
      e.dst = signals[j].domain_id;
      e.lag_lo = info->lo;
      e.lag_hi = info->hi;
      e.tau_star = info->tau_star;
      e.extra_significant_lags = info->extra_significant_lags;
    }
    net.nodes[i].strength += std::abs(e.weight);
    net.nodes[j].strength += std::abs(e.weight);
    net.nodes[i].degree += 1;
    net.nodes[j].degree += 1;
    net.edges.push_back(std::move(e));
  }
  return net;
}

DomainNetwork infer_network(const Field& f, const DomainSet& s,
                            const NetworkOptions& opt) {
  std::vector<DomainSignal> signals;
  signals.reserve(s.domains.size());
  for (const Domain& d : s.domains)
    signals.push_back(domain_signal(f, d, opt.mode));
  return infer_network(signals, opt);
}

nlohmann::json network_to_json(const DomainNetwork& n) {
  nlohmann::json j;
  j["q"] = n.q;
  j["tau_max"] = n.tau_max;
  j["n_tests"] = n.M;
  j["nodes"] = nlohmann::json::array();
  for (const auto& node : n.nodes)
    j["nodes"].push_back({{"id", node.id},
                          {"strength", node.strength},
                          {"degree", node.degree}});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : n.edges)
    j["edges"].push_back({{"src", e.src},
                          {"dst", e.dst},
                          {"directed", e.directed},
                          {"lag_lo", e.lag_lo},
                          {"lag_hi", e.lag_hi},
                          {"tau_star", e.tau_star},
                          {"r_star", e.r_star},
                          {"weight", e.weight},
                          {"variance_at_tau_star", e.variance_at_tau_star},
                          {"extra_significant_lags", e.extra_significant_lags}});
  return j;
}

DomainNetwork network_from_json(const nlohmann::json& j) {
  DomainNetwork n;
  n.q = j.at("q").get<double>();
  n.tau_max = j.at("tau_max").get<int>();
  n.M = j.at("n_tests").get<std::size_t>();
  for (const auto& nj : j.at("nodes")) {
    NodeInfo node;
    node.id = nj.at("id").get<int>();
    node.strength = nj.at("strength").get<double>();
    node.degree = nj.at("degree").get<int>();
    n.nodes.push_back(node);
  }
  for (const auto& ej : j.at("edges")) {
    Edge e;
    e.src = ej.at("src").get<int>();
    e.dst = ej.at("dst").get<int>();
    e.directed = ej.at("directed").get<bool>();
    e.lag_lo = ej.at("lag_lo").get<int>();
    e.lag_hi = ej.at("lag_hi").get<int>();
    e.tau_star = ej.at("tau_star").get<int>();
    e.r_star = ej.at("r_star").get<double>();
    e.weight = ej.at("weight").get<double>();
    e.variance_at_tau_star = ej.at("variance_at_tau_star").get<double>();
    e.extra_significant_lags =
        ej.at("extra_significant_lags").get<std::vector<int>>();
    n.edges.push_back(std::move(e));
  }
  return n;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_edges_csv(const DomainNetwork& n,
                     const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw data_error("cannot open for writing: " + file.string());
  out << "src,dst,directed,lag_lo,lag_hi,tau_star,r_star,weight,"
         "variance_at_tau_star,extra_significant_lags\n";
  for (const auto& e : n.edges) {
    out << e.src << ',' << e.dst << ',' << (e.directed ? 1 : 0) << ','
        << e.lag_lo << ',' << e.lag_hi << ',' << e.tau_star << ','
        << fmt_double(e.r_star) << ',' << fmt_double(e.weight) << ','
        << fmt_double(e.variance_at_tau_star) << ',';
    for (std::size_t k = 0; k < e.extra_significant_lags.size(); ++k) {
      if (k) out << ' ';
      out << e.extra_significant_lags[k];
    }
    out << "\n";
  }
  if (!out) throw data_error("write failed: " + file.string());
}

void write_correlogram_csv(const Correlogram& c,
                           const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw data_error("cannot open for writing: " + file.string());
  out << "tau,r,variance,z,p,significant\n";
  for (int tau = -c.tau_max; tau <= c.tau_max; ++tau) {
    int k = c.index(tau);
    out << tau << ',' << fmt_double(c.r[k]) << ',' << fmt_double(c.variance[k])
        << ',' << fmt_double(c.z[k]) << ',' << fmt_double(c.p[k]) << ','
        << (c.significant[k] ? 1 : 0) << "\n";
  }
  if (!out) throw data_error("write failed: " + file.string());
}

}  // namespace gridnet
