#pragma once

#include <array>
#include <vector>

#include "gridnet/domains.hpp"
#include "gridnet/network.hpp"

#include "nlohmann/json.hpp"

namespace gridnet {

struct BalanceResult {
  int n_components = 0;
  std::vector<int> component;   // per node (index-aligned with net.nodes)
  std::vector<int> pole;        // 0/1 coloring attempt per node
  std::vector<char> balanced;   // per component: positive edges join equal
                                // poles, negative edges opposite poles
};

// Two-color every weakly connected component treating positive edges as
// "same pole" and negative edges as "opposite pole" constraints; a component
// is balanced exactly when the coloring is consistent (equivalently, no
// cycle with an odd number of negative edges).
BalanceResult structural_balance(const DomainNetwork& net);

struct TriangleReport {
  std::array<int, 3> nodes{};    // domain ids, ascending
  bool consistent = false;
  std::array<int, 3> witness{};  // lags for (a->b, b->c, a->c) when consistent
};

// A triangle is lag-consistent when lags can be picked from the three edges'
// admissible ranges with lag(a->b) + lag(b->c) = lag(a->c). Traversing an
// edge against its stored orientation negates the range; undirected edges
// admit the range and its mirror image. Checked by enumeration.
std::vector<TriangleReport> lag_consistent_triangles(const DomainNetwork& net);

struct KCoreResult {
  std::vector<int> core_number;          // per node, index-aligned
  std::vector<double> density_profile;   // edge density of what survives
                                         // after peeling cores <= k, k = 0...
};

KCoreResult k_core_decomposition(const DomainNetwork& net);

struct NetworkStats {
  int n_nodes = 0;
  int n_edges = 0;
  double positive_edge_fraction = 0.0;
  double zero_lag_fraction = 0.0;        // edges with tau* = 0
  double degree_size_correlation = 0.0;  // Pearson(degree, log10 |cells|)
  double assortativity = 0.0;            // endpoint-degree correlation
  bool degree_size_defined = false;
  bool assortativity_defined = false;
};

NetworkStats network_stats(const DomainNetwork& net, const DomainSet& s);

// Bundle every analysis into one report document.
nlohmann::json analysis_report(const DomainNetwork& net, const DomainSet& s);

}  // namespace gridnet
