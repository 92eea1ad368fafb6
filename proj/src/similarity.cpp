#include "gridnet/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridnet/errors.hpp"
#include "gridnet/grid.hpp"

namespace gridnet {

void SimilarityProvider::pair_values(std::span<const std::pair<int, int>> pairs,
                                     std::span<double> out) const {
  for (std::size_t k = 0; k < pairs.size(); ++k)
    out[k] = pair(pairs[k].first, pairs[k].second);
}

CorrelationEngine::CorrelationEngine(const Field& f, std::size_t memo_capacity)
    : std_(kernels::standardize_rows(f)), memo_capacity_(memo_capacity) {}

namespace {
inline std::uint64_t pair_key(int i, int j) {
  if (i > j) std::swap(i, j);
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
}
}  // namespace

double CorrelationEngine::compute_pair(int i, int j) const {
  return std::clamp(kernels::dot(std_.row(i), std_.row(j)), -1.0, 1.0);
}

double CorrelationEngine::pair(int i, int j) const {
  if (i < 0 || j < 0 || i >= std_.n || j >= std_.n)
    throw config_error("cell id out of range");
  if (i == j) return 1.0;
  if (std_.degenerate[i] || std_.degenerate[j])
    throw data_error("degenerate (near-constant) series");
  std::uint64_t key = pair_key(i, j);
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  double r = compute_pair(i, j);
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    if (memo_.size() < memo_capacity_) memo_.emplace(key, r);
  }
  return r;
}

void CorrelationEngine::pair_values(std::span<const std::pair<int, int>> pairs,
                                    std::span<double> out) const {
  for (auto [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= std_.n || j >= std_.n)
      throw config_error("cell id out of range");
    if (i != j && (std_.degenerate[i] || std_.degenerate[j]))
      throw data_error("degenerate (near-constant) series");
  }
  kernels::pair_correlations(std_, pairs, out);
  std::lock_guard<std::mutex> lock(memo_mutex_);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (memo_.size() >= memo_capacity_) break;
    if (pairs[k].first != pairs[k].second)
      memo_.emplace(pair_key(pairs[k].first, pairs[k].second), out[k]);
  }
}

const std::vector<double>& CorrelationEngine::acf(int i) const {
  if (i < 0 || i >= std_.n) throw config_error("cell id out of range");
  if (std_.degenerate[i])
    throw data_error("degenerate (near-constant) series");
  std::lock_guard<std::mutex> lock(acf_mutex_);
  auto it = acf_cache_.find(i);
  if (it == acf_cache_.end())
    it = acf_cache_.emplace(i, kernels::acf(std_.row(i))).first;
  return it->second;
}

double CorrelationEngine::pair_sum_between(const CellSet& a_set,
                                           const CellSet& b_set) const {
  double s = 0.0;
  for (int a : a_set)
    for (int b : b_set) s += pair(a, b);
  return s;
}

double CorrelationEngine::pair_sum_within(const CellSet& set) const {
  double s = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = i + 1; j < set.size(); ++j) s += pair(set[i], set[j]);
  return s;
}

MatrixSimilarity::MatrixSimilarity(int n, std::vector<double> w)
    : n_(n), w_(std::move(w)) {
  if (n_ <= 0 || w_.size() != static_cast<std::size_t>(n_) * n_)
    throw config_error("similarity matrix must be n*n");
}

namespace {

double mean_pairwise(const SimilarityProvider& sim, const CellSet& members) {
  double s = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      s += sim.pair(members[i], members[j]);
  double n = static_cast<double>(members.size());
  return s / (n * (n - 1.0) / 2.0);
}

}  // namespace

double local_homogeneity(const SimilarityProvider& sim, const GridGraph& g,
                         int i, int K) {
  CellSet nb = k_neighborhood(g, i, K);
  for (int c : nb)
    if (!sim.valid(c))
      throw data_error("degenerate series at cell " + std::to_string(c));
  if (nb.size() < 2)
    throw data_error("neighborhood of cell " + std::to_string(i) +
                     " has fewer than 2 cells");
  return mean_pairwise(sim, nb);
}

double local_homogeneity(const Field& f, const GridGraph& g, int i, int K) {
  CorrelationEngine eng(f);
  return local_homogeneity(eng, g, i, K);
}

double set_homogeneity(const SimilarityProvider& sim, const CellSet& a) {
  if (a.size() < 2)
    throw config_error("set homogeneity needs at least 2 cells");
  return mean_pairwise(sim, a);
}

double set_homogeneity(const Field& f, const CellSet& a) {
  CorrelationEngine eng(f);
  return set_homogeneity(eng, a);
}

namespace {

double tolerant_cell_homogeneity(const SimilarityProvider& sim,
                                 const GridGraph& g, int K, int i) {
  if (!sim.valid(i)) return std::numeric_limits<double>::quiet_NaN();
  CellSet nb = k_neighborhood(g, i, K);
  CellSet kept;
  kept.reserve(nb.size());
  for (int c : nb)
    if (sim.valid(c)) kept.push_back(c);
  if (kept.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return mean_pairwise(sim, kept);
}

}  // namespace

std::vector<double> homogeneity_field(const SimilarityProvider& sim,
                                      const GridGraph& g, int K) {
  std::vector<double> out(g.n_cells);
#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < g.n_cells; ++i)
    out[i] = tolerant_cell_homogeneity(sim, g, K, i);
  return out;
}

std::vector<double> homogeneity_field_serial(const SimilarityProvider& sim,
                                             const GridGraph& g, int K) {
  std::vector<double> out(g.n_cells);
  for (int i = 0; i < g.n_cells; ++i)
    out[i] = tolerant_cell_homogeneity(sim, g, K, i);
  return out;
}

double PairSumCache::homogeneity() const {
  if (cells_.size() < 2)
    throw config_error("set homogeneity needs at least 2 cells");
  double n = static_cast<double>(cells_.size());
  return sum_ / (n * (n - 1.0) / 2.0);
}

void PairSumCache::add_cell(int m) {
  if (cellset_contains(cells_, m))
    throw config_error("cell already in the cached set");
  undo_.emplace_back(cells_, sum_);
  for (int c : cells_) sum_ += sim_->pair(c, m);
  cellset_insert(cells_, m);
}

void PairSumCache::add_cells(const CellSet& m) {
  undo_.emplace_back(cells_, sum_);
  for (int c : m) {
    if (cellset_contains(cells_, c)) continue;
    for (int existing : cells_) sum_ += sim_->pair(existing, c);
    cellset_insert(cells_, c);
  }
}

void PairSumCache::rollback() {
  if (undo_.empty()) throw config_error("nothing to roll back");
  cells_ = std::move(undo_.back().first);
  sum_ = undo_.back().second;
  undo_.pop_back();
}

}  // namespace gridnet
