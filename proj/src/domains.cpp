#include "gridnet/domains.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_map>

#include "gridnet/errors.hpp"
#include "gridnet/io.hpp"

namespace gridnet {

CellSet select_seeds(const GridGraph& g, std::span<const double> hfield, int K,
                     double delta) {
  if (static_cast<int>(hfield.size()) != g.n_cells)
    throw config_error("homogeneity field size mismatch");
  CellSet seeds;
  for (int i = 0; i < g.n_cells; ++i) {
    double h = hfield[i];
    if (std::isnan(h) || !(h > delta)) continue;
    bool is_max = true;
    for (int j : k_neighborhood(g, i, K)) {
      double hj = hfield[j];
      if (!std::isnan(hj) && hj > h) {
        is_max = false;
        break;
      }
    }
    if (is_max) seeds.push_back(i);
  }
  return seeds;
}

namespace {

double binom2(std::size_t n) {
  return static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
}

// Fixed-order sums so results never depend on caching or worker count.
double within_sum(const SimilarityProvider& sim, const CellSet& s) {
  double out = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      out += sim.pair(s[i], s[j]);
  return out;
}

double cross_sum(const SimilarityProvider& sim, const CellSet& a,
                 const CellSet& b) {
  double out = 0.0;
  for (int x : a)
    for (int y : b) out += sim.pair(x, y);
  return out;
}

}  // namespace

bool sets_adjacent(const GridGraph& g, const CellSet& a, const CellSet& b) {
  if (!cellset_intersection(a, b).empty()) return true;
  for (int c : a)
    for (int nb : g.adjacency[c])
      if (cellset_contains(b, nb)) return true;
  return false;
}

std::optional<std::pair<int, double>> best_expansion(
    const SimilarityProvider& sim, const GridGraph& g, const CellSet& cells,
    double delta) {
  if (cells.empty()) throw config_error("cannot expand an empty set");
  double denom = binom2(cells.size() + 1);
  int best_cell = -1;
  double best_sum = -std::numeric_limits<double>::infinity();
  for (int m : frontier_cells(g, cells)) {
    if (!sim.valid(m)) continue;
    double s = 0.0;
    for (int c : cells) s += sim.pair(c, m);
    if (s > best_sum) {
      best_sum = s;
      best_cell = m;
    }
  }
  if (best_cell < 0) return std::nullopt;
  // The joining cell must itself correlate with the current members above
  // delta on average. This is a stricter test than thresholding the pooled
  // homogeneity of the union: a large set with homogeneity comfortably above
  // delta could otherwise absorb arbitrarily weak cells while the pooled
  // average drifts down toward delta, ballooning past the real structure.
  // When the set's homogeneity exceeds delta, passing this test implies the
  // union's pooled homogeneity does too.
  if (!(best_sum > delta * static_cast<double>(cells.size())))
    return std::nullopt;
  double base = within_sum(sim, cells);
  double h = (base + best_sum) / denom;
  return std::make_pair(best_cell, h);
}

std::optional<MergeCandidate> find_best_merge(const SimilarityProvider& sim,
                                              const GridGraph& g,
                                              std::span<const CellSet> sets,
                                              double delta) {
  MergeCandidate best;
  best.homogeneity = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      if (!sets_adjacent(g, sets[i], sets[j])) continue;
      CellSet u = cellset_union(sets[i], sets[j]);
      double h = within_sum(sim, u) / binom2(u.size());
      if (h > best.homogeneity) {
        best = {static_cast<int>(i), static_cast<int>(j), h};
      }
    }
  }
  if (best.a < 0 || !(best.homogeneity > delta)) return std::nullopt;
  return best;
}

namespace {

// Greedy grower with the incremental state that makes the synthetic-scale
// problem fast: per-candidate frontier sums caught up lazily against the
// member insertion order, plus candidate adjacency tracked through a
// cell-to-owners index. All floating-point accumulation runs in fixed
// orders, so output is identical for any worker count.
class Grower {
 public:
  Grower(const SimilarityProvider& sim, const GridGraph& g, int K,
         double delta)
      : sim_(sim), g_(g), K_(K), delta_(delta) {}

  DomainSet run() {
    hfield_ = homogeneity_field(sim_, g_, K_);
    CellSet seeds = select_seeds(g_, hfield_, K_, delta_);
    init_candidates(seeds);

    std::uint64_t guard =
        static_cast<std::uint64_t>(g_.n_cells + 1) *
        std::max<std::uint64_t>(1, seeds.size());
    std::uint64_t iterations = 0;
    while (true) {
      bool merged = domain_merging();
      bool expanded = domain_expansion();
      if (!merged && !expanded) break;
      if (++iterations > guard)
        throw error("domain identification failed to terminate");
    }
    return finalize();
  }

 private:
  struct Candidate {
    bool alive = false;
    CellSet cells;
    CellSet seeds;
    std::vector<int> members_in_order;
    double pair_sum = 0.0;
    double sort_key = 0.0;
    std::set<int> frontier;
    std::unordered_map<int, std::pair<double, int>> halo;  // sum, version
  };

  void init_candidates(const CellSet& seeds) {
    owners_.assign(g_.n_cells, {});
    cand_.resize(seeds.size());
    adj_.resize(seeds.size());
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      int s = seeds[k];
      Candidate& c = cand_[k];
      c.alive = true;
      c.cells = {s};
      c.seeds = {s};
      c.members_in_order = {s};
      c.sort_key = hfield_[s];
      for (int nb : g_.adjacency[s])
        if (sim_.valid(nb)) c.frontier.insert(nb);
      owners_[s].push_back(static_cast<int>(k));
    }
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      int s = seeds[k];
      for (int nb : g_.adjacency[s])
        for (int other : owners_[nb])
          if (other != static_cast<int>(k))
            make_adjacent(static_cast<int>(k), other);
    }
  }

  void make_adjacent(int a, int b) {
    adj_[a].insert(b);
    adj_[b].insert(a);
  }

  double catch_up(Candidate& c, int m) {
    auto& entry = c.halo.try_emplace(m, 0.0, 0).first->second;
    while (entry.second < static_cast<int>(c.members_in_order.size())) {
      entry.first += sim_.pair(c.members_in_order[entry.second], m);
      ++entry.second;
    }
    return entry.first;
  }

  // Pair sum of the union of two candidates' cells.
  double union_sum(const Candidate& a, const Candidate& b, std::size_t* size) {
    CellSet common = cellset_intersection(a.cells, b.cells);
    CellSet only_a = cellset_difference(a.cells, common);
    CellSet only_b = cellset_difference(b.cells, common);
    if (size) *size = only_a.size() + only_b.size() + common.size();
    return a.pair_sum + b.pair_sum - within_sum(sim_, common) +
           cross_sum(sim_, only_a, only_b);
  }

  double union_homogeneity(int ia, int ib) {
    std::size_t n = 0;
    double s = union_sum(cand_[ia], cand_[ib], &n);
    return s / binom2(n);
  }

  bool can_merge(int ci) {
    for (int other : adj_[ci])
      if (union_homogeneity(ci, other) > delta_) return true;
    return false;
  }

  bool domain_merging() {
    bool merged = false;
    while (true) {
      int best_a = -1, best_b = -1;
      double best_h = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < cand_.size(); ++i) {
        if (!cand_[i].alive) continue;
        for (int j : adj_[i]) {
          if (j <= static_cast<int>(i)) continue;
          double h = union_homogeneity(static_cast<int>(i), j);
          if (h > best_h) {
            best_h = h;
            best_a = static_cast<int>(i);
            best_b = j;
          }
        }
      }
      if (best_a < 0 || !(best_h > delta_)) break;
      merge(best_a, best_b);
      merged = true;
    }
    return merged;
  }

  void merge(int ia, int ib) {
    Candidate& a = cand_[ia];
    Candidate& b = cand_[ib];
    std::size_t n = 0;
    double s = union_sum(a, b, &n);
    CellSet u = cellset_union(a.cells, b.cells);

    std::set<int> frontier;
    for (int fcell : a.frontier)
      if (!cellset_contains(u, fcell)) frontier.insert(fcell);
    for (int fcell : b.frontier)
      if (!cellset_contains(u, fcell)) frontier.insert(fcell);

    a.cells = u;
    a.seeds = cellset_union(a.seeds, b.seeds);
    a.members_in_order.assign(u.begin(), u.end());
    a.pair_sum = s;
    a.sort_key = s / binom2(n);
    a.frontier = std::move(frontier);
    a.halo.clear();

    for (int c : a.cells) {
      auto& own = owners_[c];
      own.erase(std::remove(own.begin(), own.end(), ib), own.end());
      if (!std::binary_search(own.begin(), own.end(), ia)) {
        own.insert(std::lower_bound(own.begin(), own.end(), ia), ia);
      }
    }
    for (int other : adj_[ib]) {
      adj_[other].erase(ib);
      if (other != ia) make_adjacent(ia, other);
    }
    adj_[ia].erase(ia);
    adj_[ia].erase(ib);
    adj_[ib].clear();
    b.alive = false;
    b.cells.clear();
    b.frontier.clear();
    b.halo.clear();
    b.members_in_order.clear();
  }

  bool expand_one(int ci) {
    Candidate& c = cand_[ci];
    if (c.frontier.empty()) return false;
    int best_cell = -1;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (int m : c.frontier) {
      double s = catch_up(c, m);
      if (s > best_sum) {
        best_sum = s;
        best_cell = m;
      }
    }
    if (!(best_sum > delta_ * static_cast<double>(c.cells.size())))
      return false;
    double h = (c.pair_sum + best_sum) / binom2(c.cells.size() + 1);

    int m = best_cell;
    c.pair_sum += best_sum;
    c.sort_key = h;
    cellset_insert(c.cells, m);
    c.members_in_order.push_back(m);
    c.frontier.erase(m);
    c.halo.erase(m);
    for (int nb : g_.adjacency[m])
      if (sim_.valid(nb) && !cellset_contains(c.cells, nb))
        c.frontier.insert(nb);

    auto& own = owners_[m];
    for (int other : own)
      if (other != ci) make_adjacent(ci, other);
    own.insert(std::lower_bound(own.begin(), own.end(), ci), ci);
    for (int nb : g_.adjacency[m])
      for (int other : owners_[nb])
        if (other != ci) make_adjacent(ci, other);
    return true;
  }

  bool domain_expansion() {
    bool start_merging = false;
    bool expanded_last_round = false;
    while (!start_merging) {
      bool expanded = false;
      std::vector<int> order;
      for (std::size_t i = 0; i < cand_.size(); ++i)
        if (cand_[i].alive) order.push_back(static_cast<int>(i));
      std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        if (cand_[x].sort_key != cand_[y].sort_key)
          return cand_[x].sort_key > cand_[y].sort_key;
        return x < y;
      });
      for (int ci : order) {
        if (expand_one(ci)) {
          expanded = true;
          if (can_merge(ci)) {
            start_merging = true;
            break;
          }
        }
      }
      expanded_last_round = expanded;
      if (!expanded) break;
    }
    return expanded_last_round;
  }

  DomainSet finalize() {
    std::vector<Domain> out;
    for (auto& c : cand_) {
      if (!c.alive || c.cells.size() < 2) continue;
      Domain d;
      d.cells = std::move(c.cells);
      d.seeds = std::move(c.seeds);
      d.pair_sum = c.pair_sum;
      d.homogeneity = c.pair_sum / binom2(d.cells.size());
      double best = -std::numeric_limits<double>::infinity();
      for (int cell : d.cells) {
        double h = hfield_[cell];
        if (std::isnan(h)) continue;
        if (h > best) {
          best = h;
          d.core = {cell};
        } else if (h == best) {
          d.core.push_back(cell);
        }
      }
      if (d.core.empty()) d.core = d.seeds;
      out.push_back(std::move(d));
    }
    std::sort(out.begin(), out.end(), [](const Domain& x, const Domain& y) {
      if (x.cells.size() != y.cells.size())
        return x.cells.size() > y.cells.size();
      return x.cells < y.cells;
    });
    DomainSet s;
    s.delta = delta_;
    s.K = K_;
    s.cell_to_domains.assign(g_.n_cells, {});
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].id = static_cast<int>(i);
      for (int cell : out[i].cells)
        s.cell_to_domains[cell].push_back(static_cast<int>(i));
    }
    s.domains = std::move(out);
    return s;
  }

  const SimilarityProvider& sim_;
  const GridGraph& g_;
  int K_;
  double delta_;
  std::vector<double> hfield_;
  std::vector<Candidate> cand_;
  std::vector<std::set<int>> adj_;
  std::vector<std::vector<int>> owners_;
};

}  // namespace

DomainSet identify_domains(const SimilarityProvider& sim, const GridGraph& g,
                           int K, double delta) {
  return Grower(sim, g, K, delta).run();
}

DomainSet identify_domains(const Field& f, int K, double delta) {
  CorrelationEngine eng(f);
  return identify_domains(eng, *f.grid, K, delta);
}

nlohmann::json domains_to_json(const DomainSet& s) {
  nlohmann::json out;
  out["delta"] = s.delta;
  out["K"] = s.K;
  out["n_domains"] = s.domains.size();
  out["domains"] = nlohmann::json::array();
  for (const Domain& d : s.domains) {
    out["domains"].push_back({{"id", d.id},
                              {"size", d.cells.size()},
                              {"seed_cells", d.seeds},
                              {"core_cells", d.core},
                              {"cells", d.cells},
                              {"homogeneity", d.homogeneity}});
  }
  out["cell_to_domains"] = s.cell_to_domains;
  return out;
}

DomainSet domains_from_json(const nlohmann::json& j) {
  DomainSet s;
  s.delta = j.at("delta").get<double>();
  s.K = j.at("K").get<int>();
  for (const auto& dj : j.at("domains")) {
    Domain d;
    d.id = dj.at("id").get<int>();
    d.seeds = dj.at("seed_cells").get<CellSet>();
    d.core = dj.at("core_cells").get<CellSet>();
    d.cells = dj.at("cells").get<CellSet>();
    d.homogeneity = dj.at("homogeneity").get<double>();
    s.domains.push_back(std::move(d));
  }
  s.cell_to_domains =
      j.at("cell_to_domains").get<std::vector<std::vector<int>>>();
  return s;
}

void write_domains_csv(const DomainSet& s, const GridGraph& g,
                       const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw data_error("cannot open for writing: " + file.string());
  out << "cell,row,col,domains\n";
  for (int c = 0; c < g.n_cells; ++c) {
    out << c << ',';
    if (g.is_lattice())
      out << g.cell_row[c] << ',' << g.cell_col[c];
    else
      out << ',';
    out << ',';
    const auto& ids = s.cell_to_domains[c];
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (k) out << ' ';
      out << ids[k];
    }
    out << "\n";
  }
  if (!out) throw data_error("write failed: " + file.string());
}

}  // namespace gridnet
