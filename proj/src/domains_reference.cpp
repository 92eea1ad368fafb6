#include <algorithm>
#include <cmath>
#include <limits>

#include "gridnet/domains.hpp"
#include "gridnet/errors.hpp"

namespace gridnet {

namespace {

struct RefCandidate {
  bool alive = false;
  CellSet cells;
  CellSet seeds;
  double seed_key = 0.0;  // local homogeneity of the seed, used while size 1
};

double ref_sort_key(const SimilarityProvider& sim, const RefCandidate& c) {
  if (c.cells.size() < 2) return c.seed_key;
  return set_homogeneity(sim, c.cells);
}

}  // namespace

DomainSet identify_domains_reference(const SimilarityProvider& sim,
                                     const GridGraph& g, int K, double delta) {
  std::vector<double> hfield = homogeneity_field_serial(sim, g, K);
  CellSet seeds = select_seeds(g, hfield, K, delta);

  std::vector<RefCandidate> cand(seeds.size());
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    cand[k].alive = true;
    cand[k].cells = {seeds[k]};
    cand[k].seeds = {seeds[k]};
    cand[k].seed_key = hfield[seeds[k]];
  }

  auto alive_ids = [&] {
    std::vector<int> ids;
    for (std::size_t i = 0; i < cand.size(); ++i)
      if (cand[i].alive) ids.push_back(static_cast<int>(i));
    return ids;
  };

  auto merging_pass = [&] {
    bool merged = false;
    while (true) {
      std::vector<int> ids = alive_ids();
      std::vector<CellSet> sets;
      for (int i : ids) sets.push_back(cand[i].cells);
      auto best = find_best_merge(sim, g, sets, delta);
      if (!best) break;
      int ia = ids[best->a];
      int ib = ids[best->b];
      cand[ia].cells = cellset_union(cand[ia].cells, cand[ib].cells);
      cand[ia].seeds = cellset_union(cand[ia].seeds, cand[ib].seeds);
      cand[ib] = RefCandidate{};
      merged = true;
    }
    return merged;
  };

  auto can_merge_with_any = [&](int ci) {
    for (std::size_t j = 0; j < cand.size(); ++j) {
      if (!cand[j].alive || static_cast<int>(j) == ci) continue;
      if (!sets_adjacent(g, cand[ci].cells, cand[j].cells)) continue;
      CellSet u = cellset_union(cand[ci].cells, cand[j].cells);
      if (set_homogeneity(sim, u) > delta) return true;
    }
    return false;
  };

  auto expansion_pass = [&] {
    bool start_merging = false;
    bool expanded_last_round = false;
    while (!start_merging) {
      bool expanded = false;
      std::vector<int> order = alive_ids();
      std::vector<double> keys(cand.size(), 0.0);
      for (int i : order) keys[i] = ref_sort_key(sim, cand[i]);
      std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        if (keys[x] != keys[y]) return keys[x] > keys[y];
        return x < y;
      });
      for (int ci : order) {
        auto step = best_expansion(sim, g, cand[ci].cells, delta);
        if (!step) continue;
        cellset_insert(cand[ci].cells, step->first);
        expanded = true;
        if (can_merge_with_any(ci)) {
          start_merging = true;
          break;
        }
      }
      expanded_last_round = expanded;
      if (!expanded) break;
    }
    return expanded_last_round;
  };

  std::uint64_t guard = static_cast<std::uint64_t>(g.n_cells + 1) *
                        std::max<std::uint64_t>(1, seeds.size());
  std::uint64_t iterations = 0;
  while (true) {
    bool merged = merging_pass();
    bool expanded = expansion_pass();
    if (!merged && !expanded) break;
    if (++iterations > guard)
      throw error("domain identification failed to terminate");
  }

  std::vector<Domain> out;
  for (auto& c : cand) {
    if (!c.alive || c.cells.size() < 2) continue;
    Domain d;
    d.cells = std::move(c.cells);
    d.seeds = std::move(c.seeds);
    d.pair_sum = 0.0;
    for (std::size_t i = 0; i < d.cells.size(); ++i)
      for (std::size_t j = i + 1; j < d.cells.size(); ++j)
        d.pair_sum += sim.pair(d.cells[i], d.cells[j]);
    d.homogeneity = d.pair_sum / (static_cast<double>(d.cells.size()) *
                                  (static_cast<double>(d.cells.size()) - 1.0) /
                                  2.0);
    double best = -std::numeric_limits<double>::infinity();
    for (int cell : d.cells) {
      double h = hfield[cell];
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
  s.delta = delta;
  s.K = K;
  s.cell_to_domains.assign(g.n_cells, {});
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].id = static_cast<int>(i);
    for (int cell : out[i].cells)
      s.cell_to_domains[cell].push_back(static_cast<int>(i));
  }
  s.domains = std::move(out);
  return s;
}

}  // namespace gridnet
