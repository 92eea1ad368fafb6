#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gridnet/field.hpp"
#include "gridnet/similarity.hpp"

#include "nlohmann/json.hpp"

namespace gridnet {

struct Domain {
  int id = -1;
  CellSet cells;
  CellSet seeds;        // seed cells absorbed into this domain
  CellSet core;         // cells of maximal local homogeneity within the domain
  double homogeneity = 0.0;
  double pair_sum = 0.0;  // sum of pairwise correlations over unordered pairs
};

struct DomainSet {
  std::vector<Domain> domains;   // sorted by decreasing size, ids 0..N-1
  double delta = 0.0;
  int K = 0;
  std::vector<std::vector<int>> cell_to_domains;  // per cell, sorted ids
};

// Seeds: cells whose local homogeneity exceeds delta and is maximal within
// their own K-neighborhood (ties kept, so plateaus give adjacent seeds).
// hfield is the per-cell local homogeneity (NaN = excluded cell).
CellSet select_seeds(const GridGraph& g, std::span<const double> hfield, int K,
                     double delta);

// One growth step: the frontier cell maximizing the union homogeneity,
// provided that maximum stays above delta. Ties break to the lowest cell id.
// Cells for which valid() is false are never candidates.
std::optional<std::pair<int, double>> best_expansion(
    const SimilarityProvider& sim, const GridGraph& g, const CellSet& cells,
    double delta);

// Two candidate sets are mergeable neighbors when they share a cell or
// contain grid-adjacent cells.
bool sets_adjacent(const GridGraph& g, const CellSet& a, const CellSet& b);

struct MergeCandidate {
  int a = -1;  // indices into the candidate list, a < b
  int b = -1;
  double homogeneity = 0.0;
};

// Best merge over all adjacent candidate pairs: maximal union homogeneity,
// none when that maximum fails to exceed delta. Ties break to lowest (a, b).
std::optional<MergeCandidate> find_best_merge(const SimilarityProvider& sim,
                                              const GridGraph& g,
                                              std::span<const CellSet> sets,
                                              double delta);

// Full identification: one single-cell candidate per seed, then alternating
// merge-to-fixpoint and one-cell-per-domain expansion rounds until a whole
// pass changes nothing. A round visits domains in decreasing homogeneity
// order (singletons keyed by the seed's local homogeneity) and jumps back to
// merging as soon as an expansion enables a merge. Candidates still single
// cells at the end are dropped. Final ids are assigned by decreasing size.
DomainSet identify_domains(const SimilarityProvider& sim, const GridGraph& g,
                           int K, double delta);
DomainSet identify_domains(const Field& f, int K, double delta);

// Plain transcription of the same algorithm with no incremental caches; kept
// as the comparison baseline for tests and benchmarks.
DomainSet identify_domains_reference(const SimilarityProvider& sim,
                                     const GridGraph& g, int K, double delta);

nlohmann::json domains_to_json(const DomainSet& s);
DomainSet domains_from_json(const nlohmann::json& j);
// Per-cell table (cell id, row, col, domain ids) for map plotting.
void write_domains_csv(const DomainSet& s, const GridGraph& g,
                       const std::filesystem::path& file);

}  // namespace gridnet
