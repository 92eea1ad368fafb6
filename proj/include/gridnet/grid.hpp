#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace gridnet {

// Sorted, duplicate-free list of cell ids.
using CellSet = std::vector<int>;

bool cellset_contains(const CellSet& s, int cell);
void cellset_insert(CellSet& s, int cell);
CellSet cellset_union(const CellSet& a, const CellSet& b);
CellSet cellset_intersection(const CellSet& a, const CellSet& b);
CellSet cellset_difference(const CellSet& a, const CellSet& b);

// Spatial topology of the unmasked cells of a gridded field, or of an
// explicit mesh. Masked cells are removed entirely: cell ids are dense
// 0..n_cells-1 in row-major scan order of the surviving lattice cells.
struct GridGraph {
  int n_cells = 0;
  std::vector<std::vector<int>> adjacency;  // sorted neighbor lists
  bool wrap_longitude = false;
  int connectivity = 4;  // 4 or 8 for lattices, 0 for meshes

  // lattice bookkeeping (empty for mesh input)
  int rows = 0, cols = 0;
  std::vector<int> cell_row, cell_col;
  std::vector<int> lattice_to_cell;  // rows*cols entries, -1 where masked

  // optional per-cell coordinates in degrees
  std::vector<double> lat, lon;

  std::vector<double> cell_weight;  // cos(latitude) or 1.0; always > 0

  bool is_lattice() const { return rows > 0; }
  bool has_latlon() const { return !lat.empty(); }

  // Geodesic distance on the unit sphere when lat/lon are present, else
  // Euclidean distance in grid units (honoring longitude wrap). Only
  // meaningful for lattices or lat/lon meshes.
  double distance(int a, int b) const;
};

// Build the graph of a rows x cols lattice. `mask` is empty (all cells
// valid) or rows*cols bytes with nonzero = keep. Optional per-lattice-cell
// latitude/longitude arrays (rows*cols each, degrees). 4- or 8-connectivity;
// wrap_longitude links the first and last columns.
GridGraph build_grid(int rows, int cols, const std::vector<std::uint8_t>& mask,
                     const std::vector<double>& lat_deg,
                     const std::vector<double>& lon_deg, bool wrap_longitude,
                     int connectivity = 4);

// Explicit mesh input: adjacency lists (validated symmetric, no self loops).
GridGraph grid_from_adjacency(std::vector<std::vector<int>> adjacency,
                              std::vector<double> lat_deg = {},
                              std::vector<double> lon_deg = {});

// Cell i plus its K nearest cells under the grid metric, kept spatially
// contiguous by greedy frontier growth; ties break on (distance, id). For
// meshes without coordinates the metric is hop distance. May return fewer
// than K+1 cells if i's connected component is smaller.
CellSet k_neighborhood(const GridGraph& g, int i, int K);

// True when the induced subgraph of `a` is connected. `a` must be nonempty.
bool is_contiguous(const GridGraph& g, const CellSet& a);

// All cells adjacent to `a` but not in it.
CellSet frontier_cells(const GridGraph& g, const CellSet& a);

}  // namespace gridnet
