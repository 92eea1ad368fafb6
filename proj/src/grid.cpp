#include "gridnet/grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>
#include <unordered_set>

#include "gridnet/errors.hpp"

namespace gridnet {

bool cellset_contains(const CellSet& s, int cell) {
  return std::binary_search(s.begin(), s.end(), cell);
}

void cellset_insert(CellSet& s, int cell) {
  auto it = std::lower_bound(s.begin(), s.end(), cell);
  if (it == s.end() || *it != cell) s.insert(it, cell);
}

CellSet cellset_union(const CellSet& a, const CellSet& b) {
  CellSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

CellSet cellset_intersection(const CellSet& a, const CellSet& b) {
  CellSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

CellSet cellset_difference(const CellSet& a, const CellSet& b) {
  CellSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double haversine_unit(double lat1, double lon1, double lat2, double lon2) {
  double p1 = lat1 * kPi / 180.0, p2 = lat2 * kPi / 180.0;
  double dp = p2 - p1;
  double dl = (lon2 - lon1) * kPi / 180.0;
  double s1 = std::sin(dp / 2.0), s2 = std::sin(dl / 2.0);
  double h = s1 * s1 + std::cos(p1) * std::cos(p2) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * std::asin(std::sqrt(h));
}

}  // namespace

double GridGraph::distance(int a, int b) const {
  if (has_latlon()) return haversine_unit(lat[a], lon[a], lat[b], lon[b]);
  if (!is_lattice())
    throw config_error("distance undefined: mesh grid without coordinates");
  double dr = std::abs(cell_row[a] - cell_row[b]);
  double dc = std::abs(cell_col[a] - cell_col[b]);
  if (wrap_longitude) dc = std::min(dc, static_cast<double>(cols) - dc);
  return std::hypot(dr, dc);
}

GridGraph build_grid(int rows, int cols, const std::vector<std::uint8_t>& mask,
                     const std::vector<double>& lat_deg,
                     const std::vector<double>& lon_deg, bool wrap_longitude,
                     int connectivity) {
  if (rows <= 0 || cols <= 0) throw config_error("grid must have rows*cols > 0");
  std::size_t nlat = static_cast<std::size_t>(rows) * cols;
  if (!mask.empty() && mask.size() != nlat)
    throw data_error("mask length must equal rows*cols");
  if (connectivity != 4 && connectivity != 8)
    throw config_error("connectivity must be 4 or 8");
  bool coords = !lat_deg.empty() || !lon_deg.empty();
  if (coords && (lat_deg.size() != nlat || lon_deg.size() != nlat))
    throw data_error("lat/lon arrays must each have rows*cols entries");

  GridGraph g;
  g.rows = rows;
  g.cols = cols;
  g.wrap_longitude = wrap_longitude;
  g.connectivity = connectivity;
  g.lattice_to_cell.assign(nlat, -1);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::size_t li = static_cast<std::size_t>(r) * cols + c;
      if (!mask.empty() && mask[li] == 0) continue;
      g.lattice_to_cell[li] = g.n_cells++;
      g.cell_row.push_back(r);
      g.cell_col.push_back(c);
      if (coords) {
        g.lat.push_back(lat_deg[li]);
        g.lon.push_back(lon_deg[li]);
      }
    }
  }
  if (g.n_cells == 0) throw data_error("all grid cells are masked out");

  g.cell_weight.resize(g.n_cells, 1.0);
  if (coords) {
    for (int i = 0; i < g.n_cells; ++i) {
      double w = std::cos(g.lat[i] * kPi / 180.0);
      if (!(w > 0.0))
        throw data_error("cell latitude at or beyond the pole gives a "
                         "non-positive area weight");
      g.cell_weight[i] = w;
    }
  }

  auto at = [&](int r, int c) -> int {
    if (r < 0 || r >= rows) return -1;
    if (c < 0 || c >= cols) {
      if (!wrap_longitude) return -1;
      c = (c % cols + cols) % cols;
    }
    return g.lattice_to_cell[static_cast<std::size_t>(r) * cols + c];
  };

  g.adjacency.resize(g.n_cells);
  for (int i = 0; i < g.n_cells; ++i) {
    int r = g.cell_row[i], c = g.cell_col[i];
    int cand[8];
    int n = 0;
    cand[n++] = at(r - 1, c);
    cand[n++] = at(r + 1, c);
    cand[n++] = at(r, c - 1);
    cand[n++] = at(r, c + 1);
    if (connectivity == 8) {
      cand[n++] = at(r - 1, c - 1);
      cand[n++] = at(r - 1, c + 1);
      cand[n++] = at(r + 1, c - 1);
      cand[n++] = at(r + 1, c + 1);
    }
    auto& adj = g.adjacency[i];
    for (int k = 0; k < n; ++k)
      if (cand[k] >= 0 && cand[k] != i) adj.push_back(cand[k]);
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

GridGraph grid_from_adjacency(std::vector<std::vector<int>> adjacency,
                              std::vector<double> lat_deg,
                              std::vector<double> lon_deg) {
  GridGraph g;
  g.n_cells = static_cast<int>(adjacency.size());
  if (g.n_cells == 0) throw data_error("mesh has no cells");
  g.connectivity = 0;
  for (auto& adj : adjacency) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  for (int i = 0; i < g.n_cells; ++i) {
    for (int j : adjacency[i]) {
      if (j < 0 || j >= g.n_cells) throw data_error("adjacency id out of range");
      if (j == i) throw data_error("adjacency contains a self loop");
      if (!std::binary_search(adjacency[j].begin(), adjacency[j].end(), i))
        throw data_error("adjacency is not symmetric");
    }
  }
  g.adjacency = std::move(adjacency);
  if (!lat_deg.empty() || !lon_deg.empty()) {
    if (static_cast<int>(lat_deg.size()) != g.n_cells ||
        static_cast<int>(lon_deg.size()) != g.n_cells)
      throw data_error("lat/lon arrays must have one entry per cell");
    g.lat = std::move(lat_deg);
    g.lon = std::move(lon_deg);
  }
  g.cell_weight.resize(g.n_cells, 1.0);
  if (g.has_latlon()) {
    for (int i = 0; i < g.n_cells; ++i) {
      double w = std::cos(g.lat[i] * kPi / 180.0);
      if (!(w > 0.0))
        throw data_error("cell latitude at or beyond the pole gives a "
                         "non-positive area weight");
      g.cell_weight[i] = w;
    }
  }
  return g;
}

CellSet k_neighborhood(const GridGraph& g, int i, int K) {
  if (K < 1) throw config_error("neighborhood size K must be >= 1");
  if (i < 0 || i >= g.n_cells) throw config_error("cell id out of range");
  if (K > g.n_cells - 1)
    throw config_error("neighborhood size K exceeds the number of other cells");

  bool metric = g.has_latlon() || g.is_lattice();
  std::vector<int> hop;  // BFS distance from i, meshes only
  if (!metric) {
    hop.assign(g.n_cells, -1);
    std::queue<int> q;
    hop[i] = 0;
    q.push(i);
    while (!q.empty()) {
      int c = q.front();
      q.pop();
      for (int nb : g.adjacency[c])
        if (hop[nb] < 0) {
          hop[nb] = hop[c] + 1;
          q.push(nb);
        }
    }
  }
  auto key = [&](int m) {
    return metric ? g.distance(i, m) : static_cast<double>(hop[m]);
  };

  // Greedy contiguous growth: repeatedly take the frontier cell nearest to i
  // (ties to the lowest id). The result stays connected by construction.
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  std::unordered_set<int> seen;
  CellSet out;
  out.push_back(i);
  seen.insert(i);
  auto push_neighbors = [&](int c) {
    for (int nb : g.adjacency[c]) {
      if (seen.count(nb)) continue;
      seen.insert(nb);
      heap.emplace(key(nb), nb);
    }
  };
  push_neighbors(i);
  while (static_cast<int>(out.size()) < K + 1 && !heap.empty()) {
    auto [d, c] = heap.top();
    heap.pop();
    out.push_back(c);
    push_neighbors(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_contiguous(const GridGraph& g, const CellSet& a) {
  if (a.empty()) throw config_error("contiguity of an empty set is undefined");
  std::unordered_set<int> members(a.begin(), a.end());
  std::vector<int> stack = {a[0]};
  std::unordered_set<int> seen = {a[0]};
  while (!stack.empty()) {
    int c = stack.back();
    stack.pop_back();
    for (int nb : g.adjacency[c]) {
      if (members.count(nb) && !seen.count(nb)) {
        seen.insert(nb);
        stack.push_back(nb);
      }
    }
  }
  return seen.size() == a.size();
}

CellSet frontier_cells(const GridGraph& g, const CellSet& a) {
  if (a.empty()) throw config_error("frontier of an empty set is undefined");
  CellSet out;
  for (int c : a)
    for (int nb : g.adjacency[c])
      if (!cellset_contains(a, nb)) out.push_back(nb);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace gridnet
