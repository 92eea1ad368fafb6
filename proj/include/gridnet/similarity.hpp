#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gridnet/field.hpp"
#include "gridnet/kernels.hpp"
#include "gridnet/stats.hpp"

namespace gridnet {

// Abstract source of pairwise similarities between cells. The domain
// identification machinery is written against this interface so tests can
// inject arbitrary weight matrices.
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual int size() const = 0;
  virtual bool valid(int i) const = 0;
  virtual double pair(int i, int j) const = 0;
  // Batch evaluation; default loops pair(). Implementations may parallelize
  // but must fill out[k] deterministically.
  virtual void pair_values(std::span<const std::pair<int, int>> pairs,
                           std::span<double> out) const;
};

// Field-backed provider: Pearson correlations over standardized rows with a
// bounded memo keyed by unordered pair (no full n^2 matrix).
class CorrelationEngine final : public SimilarityProvider {
 public:
  explicit CorrelationEngine(const Field& f,
                             std::size_t memo_capacity = (1u << 23));

  int size() const override { return std_.n; }
  bool valid(int i) const override { return !std_.degenerate[i]; }
  double pair(int i, int j) const override;
  void pair_values(std::span<const std::pair<int, int>> pairs,
                   std::span<double> out) const override;

  int T() const { return std_.T; }
  double mu(int i) const { return std_.mu[i]; }
  double sigma(int i) const { return std_.sigma[i]; }
  std::span<const double> standardized(int i) const { return std_.row(i); }

  // Full autocorrelation of cell i, cached.
  const std::vector<double>& acf(int i) const;

  // sum over ordered pairs (a in a_set, b in b_set) of r(a, b); the two sets
  // must be disjoint. Accumulation order is fixed (a-major ascending).
  double pair_sum_between(const CellSet& a_set, const CellSet& b_set) const;
  // sum over unordered pairs within the set.
  double pair_sum_within(const CellSet& s) const;

 private:
  double compute_pair(int i, int j) const;

  kernels::Standardized std_;
  std::size_t memo_capacity_;
  mutable std::unordered_map<std::uint64_t, double> memo_;
  mutable std::mutex memo_mutex_;
  mutable std::map<int, std::vector<double>> acf_cache_;
  mutable std::mutex acf_mutex_;
};

// Dense test provider.
class MatrixSimilarity final : public SimilarityProvider {
 public:
  MatrixSimilarity(int n, std::vector<double> w);  // n*n, symmetric
  int size() const override { return n_; }
  bool valid(int) const override { return true; }
  double pair(int i, int j) const override {
    return w_[static_cast<std::size_t>(i) * n_ + j];
  }

 private:
  int n_;
  std::vector<double> w_;
};

// Mean pairwise similarity over the K-neighborhood of i (the neighborhood
// includes i; K(K+1)/2 unordered pairs). Throws data_error if any member is
// degenerate, carrying the offending cell id.
double local_homogeneity(const SimilarityProvider& sim, const GridGraph& g,
                         int i, int K);
double local_homogeneity(const Field& f, const GridGraph& g, int i, int K);

// Mean pairwise similarity over a set (|a| >= 2).
double set_homogeneity(const SimilarityProvider& sim, const CellSet& a);
double set_homogeneity(const Field& f, const CellSet& a);

// Local homogeneity of every cell. Tolerant flavor used for seeding: invalid
// cells get NaN, invalid neighborhood members are skipped, and cells whose
// neighborhood keeps fewer than 2 valid members get NaN.
std::vector<double> homogeneity_field(const SimilarityProvider& sim,
                                      const GridGraph& g, int K);
std::vector<double> homogeneity_field_serial(const SimilarityProvider& sim,
                                             const GridGraph& g, int K);

// Incrementally maintained pair sum S_A = sum over unordered pairs of A.
// add_cell pushes the previous sum so rollback() restores it bit-exactly.
class PairSumCache {
 public:
  explicit PairSumCache(const SimilarityProvider& sim) : sim_(&sim) {}

  const CellSet& cells() const { return cells_; }
  double sum() const { return sum_; }
  double homogeneity() const;     // sum / C(|A|, 2)
  void add_cell(int m);           // m must not be a member
  void add_cells(const CellSet& m);  // set union (overlap allowed)
  void rollback();                // undo the most recent add

 private:
  const SimilarityProvider* sim_;
  CellSet cells_;
  double sum_ = 0.0;
  std::vector<std::pair<CellSet, double>> undo_;
};

}  // namespace gridnet
