#include "gridnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

#include "gridnet/errors.hpp"

namespace gridnet {

namespace {

std::unordered_map<int, int> node_index(const DomainNetwork& net) {
  std::unordered_map<int, int> idx;
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    idx[net.nodes[i].id] = static_cast<int>(i);
  return idx;
}

}  // namespace

BalanceResult structural_balance(const DomainNetwork& net) {
  int n = static_cast<int>(net.nodes.size());
  auto idx = node_index(net);
  std::vector<std::vector<std::pair<int, bool>>> adj(n);  // (node, negative)
  for (const Edge& e : net.edges) {
    int u = idx.at(e.src), v = idx.at(e.dst);
    bool neg = e.weight < 0.0;
    adj[u].push_back({v, neg});
    adj[v].push_back({u, neg});
  }

  BalanceResult out;
  out.component.assign(n, -1);
  out.pole.assign(n, 0);
  for (int root = 0; root < n; ++root) {
    if (out.component[root] >= 0) continue;
    int comp = out.n_components++;
    out.balanced.push_back(1);
    out.component[root] = comp;
    out.pole[root] = 0;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (auto [v, neg] : adj[u]) {
        int want = out.pole[u] ^ (neg ? 1 : 0);
        if (out.component[v] < 0) {
          out.component[v] = comp;
          out.pole[v] = want;
          queue.push_back(v);
        } else if (out.pole[v] != want) {
          out.balanced[comp] = 0;
        }
      }
    }
  }
  return out;
}

namespace {

// Lags admitted when walking an edge from u to v.
std::vector<int> admissible_lags(const Edge& e, int u, int v) {
  std::vector<int> lags;
  auto add_range = [&](int lo, int hi) {
    for (int t = lo; t <= hi; ++t) lags.push_back(t);
  };
  if (e.directed) {
    if (e.src == u && e.dst == v)
      add_range(e.lag_lo, e.lag_hi);
    else
      add_range(-e.lag_hi, -e.lag_lo);
  } else {
    add_range(e.lag_lo, e.lag_hi);
    add_range(-e.lag_hi, -e.lag_lo);
  }
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  return lags;
}

}  // namespace

std::vector<TriangleReport> lag_consistent_triangles(const DomainNetwork& net) {
  std::map<std::pair<int, int>, const Edge*> by_pair;
  for (const Edge& e : net.edges)
    by_pair[{std::min(e.src, e.dst), std::max(e.src, e.dst)}] = &e;

  std::vector<int> ids;
  for (const auto& node : net.nodes) ids.push_back(node.id);
  std::sort(ids.begin(), ids.end());

  std::vector<TriangleReport> out;
  int n = static_cast<int>(ids.size());
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      auto exy = by_pair.find({ids[x], ids[y]});
      if (exy == by_pair.end()) continue;
      for (int z = y + 1; z < n; ++z) {
        auto eyz = by_pair.find({ids[y], ids[z]});
        auto exz = by_pair.find({ids[x], ids[z]});
        if (eyz == by_pair.end() || exz == by_pair.end()) continue;
        int a = ids[x], b = ids[y], c = ids[z];
        TriangleReport rep;
        rep.nodes = {a, b, c};
        std::vector<int> ab = admissible_lags(*exy->second, a, b);
        std::vector<int> bc = admissible_lags(*eyz->second, b, c);
        std::vector<int> ac = admissible_lags(*exz->second, a, c);
        for (std::size_t p = 0; p < ab.size() && !rep.consistent; ++p) {
          for (std::size_t r = 0; r < bc.size() && !rep.consistent; ++r) {
            int need = ab[p] + bc[r];
            if (std::binary_search(ac.begin(), ac.end(), need)) {
              rep.consistent = true;
              rep.witness = {ab[p], bc[r], need};
            }
          }
        }
        out.push_back(rep);
      }
    }
  }
  return out;
}

KCoreResult k_core_decomposition(const DomainNetwork& net) {
  int n = static_cast<int>(net.nodes.size());
  auto idx = node_index(net);
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : net.edges) {
    int u = idx.at(e.src), v = idx.at(e.dst);
    adj[u].push_back(v);
    adj[v].push_back(u);
  }

  KCoreResult out;
  out.core_number.assign(n, 0);
  std::vector<int> deg(n);
  for (int i = 0; i < n; ++i) deg[i] = static_cast<int>(adj[i].size());
  std::vector<char> removed(n, 0);
  int k = 0;
  for (int step = 0; step < n; ++step) {
    int v = -1;
    for (int i = 0; i < n; ++i)
      if (!removed[i] && (v < 0 || deg[i] < deg[v])) v = i;
    k = std::max(k, deg[v]);
    out.core_number[v] = k;
    removed[v] = 1;
    for (int u : adj[v])
      if (!removed[u]) --deg[u];
  }

  for (int level = 0;; ++level) {
    std::vector<char> keep(n, 0);
    int survivors = 0;
    for (int i = 0; i < n; ++i)
      if (out.core_number[i] > level) {
        keep[i] = 1;
        ++survivors;
      }
    if (survivors == 0) break;
    int inside = 0;
    for (const Edge& e : net.edges)
      if (keep[idx.at(e.src)] && keep[idx.at(e.dst)]) ++inside;
    double possible =
        static_cast<double>(survivors) * (survivors - 1) / 2.0;
    out.density_profile.push_back(possible > 0.0 ? inside / possible : 0.0);
  }
  return out;
}

namespace {

bool pearson_pairs(const std::vector<double>& xs, const std::vector<double>& ys,
                   double* out) {
  std::size_t n = xs.size();
  if (n < 2) return false;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return false;
  *out = sxy / std::sqrt(sxx * syy);
  return true;
}

}  // namespace

NetworkStats network_stats(const DomainNetwork& net, const DomainSet& s) {
  NetworkStats st;
  st.n_nodes = static_cast<int>(net.nodes.size());
  st.n_edges = static_cast<int>(net.edges.size());
  if (st.n_edges > 0) {
    int positive = 0, zero_lag = 0;
    for (const Edge& e : net.edges) {
      if (e.weight > 0.0) ++positive;
      if (e.tau_star == 0) ++zero_lag;
    }
    st.positive_edge_fraction = static_cast<double>(positive) / st.n_edges;
    st.zero_lag_fraction = static_cast<double>(zero_lag) / st.n_edges;
  }

  std::unordered_map<int, double> size_by_id;
  for (const Domain& d : s.domains)
    size_by_id[d.id] = static_cast<double>(d.cells.size());
  std::vector<double> degs, sizes;
  for (const auto& node : net.nodes) {
    auto it = size_by_id.find(node.id);
    if (it == size_by_id.end())
      throw data_error("network node " + std::to_string(node.id) +
                       " missing from the domain set");
    degs.push_back(node.degree);
    sizes.push_back(std::log10(it->second));
  }
  st.degree_size_defined =
      pearson_pairs(degs, sizes, &st.degree_size_correlation);

  auto idx = node_index(net);
  std::vector<double> xs, ys;
  for (const Edge& e : net.edges) {
    double du = net.nodes[idx.at(e.src)].degree;
    double dv = net.nodes[idx.at(e.dst)].degree;
    xs.push_back(du);
    ys.push_back(dv);
    xs.push_back(dv);
    ys.push_back(du);
  }
  st.assortativity_defined = pearson_pairs(xs, ys, &st.assortativity);
  return st;
}

nlohmann::json analysis_report(const DomainNetwork& net, const DomainSet& s) {
  nlohmann::json j;

  BalanceResult bal = structural_balance(net);
  bool all = true;
  for (char b : bal.balanced)
    if (!b) all = false;
  j["balance"] = {{"n_components", bal.n_components},
                  {"component", bal.component},
                  {"pole", bal.pole},
                  {"component_balanced", bal.balanced},
                  {"all_balanced", all}};

  auto triangles = lag_consistent_triangles(net);
  int consistent = 0;
  nlohmann::json tj = nlohmann::json::array();
  for (const auto& t : triangles) {
    if (t.consistent) ++consistent;
    nlohmann::json one = {{"nodes", t.nodes}, {"consistent", t.consistent}};
    if (t.consistent) one["witness"] = t.witness;
    tj.push_back(std::move(one));
  }
  j["triangles"] = {{"n_triangles", triangles.size()},
                    {"n_consistent", consistent},
                    {"detail", std::move(tj)}};

  KCoreResult kc = k_core_decomposition(net);
  int max_core = 0;
  for (int c : kc.core_number) max_core = std::max(max_core, c);
  j["k_core"] = {{"core_number", kc.core_number},
                 {"density_profile", kc.density_profile},
                 {"max_core", max_core}};

  NetworkStats st = network_stats(net, s);
  j["stats"] = {
      {"n_nodes", st.n_nodes},
      {"n_edges", st.n_edges},
      {"positive_edge_fraction", st.positive_edge_fraction},
      {"zero_lag_fraction", st.zero_lag_fraction},
      {"degree_size_correlation", st.degree_size_correlation},
      {"degree_size_defined", st.degree_size_defined},
      {"assortativity", st.assortativity},
      {"assortativity_defined", st.assortativity_defined},
  };
  return j;
}

}  // namespace gridnet
