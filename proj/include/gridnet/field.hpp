#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gridnet/grid.hpp"

namespace gridnet {

// A gridded multivariate time series: one length-T row per grid cell,
// stored cell-major.
struct Field {
  std::shared_ptr<const GridGraph> grid;
  int T = 0;
  std::vector<double> data;  // n_cells * T
  std::string time_step_label = "step";
  std::vector<std::string> preprocessing_log;

  Field() = default;
  Field(std::shared_ptr<const GridGraph> g, int T_);

  int n_cells() const { return grid ? grid->n_cells : 0; }

  std::span<const double> series(int cell) const {
    return {data.data() + static_cast<std::size_t>(cell) * T,
            static_cast<std::size_t>(T)};
  }
  std::span<double> series(int cell) {
    return {data.data() + static_cast<std::size_t>(cell) * T,
            static_cast<std::size_t>(T)};
  }
};

}  // namespace gridnet
