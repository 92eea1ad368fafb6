#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gridnet/field.hpp"

namespace gridnet::kernels {

// Hot loops, each in an OpenMP flavor (default entry point) and a plain
// serial reference flavor kept for testing and benchmarking. Both produce
// bit-identical results for any worker count: parallel iterations write to
// disjoint slots and every floating-point sum has a fixed order.

double dot(std::span<const double> a, std::span<const double> b);

// Rows scaled to zero mean and unit L2 norm: z = (x - mu) / (sigma * sqrt(T)),
// so pair correlations become plain dot products. Degenerate rows are zeroed
// and flagged.
struct Standardized {
  int n = 0, T = 0;
  std::vector<double> z;        // n * T
  std::vector<char> degenerate;
  std::vector<double> mu, sigma;

  std::span<const double> row(int i) const {
    return {z.data() + static_cast<std::size_t>(i) * T,
            static_cast<std::size_t>(T)};
  }
};

Standardized standardize_rows(const Field& f);
Standardized standardize_rows_serial(const Field& f);

// Correlations for an explicit pair list, out[k] = r(pairs[k]).
void pair_correlations(const Standardized& s,
                       std::span<const std::pair<int, int>> pairs,
                       std::span<double> out);
void pair_correlations_serial(const Standardized& s,
                              std::span<const std::pair<int, int>> pairs,
                              std::span<double> out);

// Full autocorrelation of a standardized row (lag 0..T-1).
std::vector<double> acf(std::span<const double> z_row);
std::vector<double> acf_serial(std::span<const double> z_row);

}  // namespace gridnet::kernels
