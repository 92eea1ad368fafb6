#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gridnet/errors.hpp"
#include "gridnet/grid.hpp"

using namespace gridnet;

TEST_CASE("cellset operations keep sets sorted and duplicate-free") {
  CellSet s = {1, 4, 9};
  CHECK(cellset_contains(s, 4));
  CHECK_FALSE(cellset_contains(s, 5));
  cellset_insert(s, 5);
  CHECK(s == CellSet{1, 4, 5, 9});
  cellset_insert(s, 5);
  CHECK(s == CellSet{1, 4, 5, 9});
  CHECK(cellset_union({1, 3}, {2, 3, 8}) == CellSet{1, 2, 3, 8});
  CHECK(cellset_intersection({1, 3, 5}, {3, 4, 5}) == CellSet{3, 5});
  CHECK(cellset_difference({1, 3, 5}, {3}) == CellSet{1, 5});
  CHECK(cellset_intersection({1, 2}, {3}) == CellSet{});
}

TEST_CASE("unmasked lattice uses row-major ids and 4-neighborhoods") {
  GridGraph g = build_grid(2, 3, {}, {}, {}, false, 4);
  CHECK(g.n_cells == 6);
  CHECK(g.is_lattice());
  CHECK(g.rows == 2);
  CHECK(g.cols == 3);
  // layout: 0 1 2 / 3 4 5
  CHECK(g.cell_row[4] == 1);
  CHECK(g.cell_col[4] == 1);
  CHECK(g.adjacency[0] == std::vector<int>{1, 3});
  CHECK(g.adjacency[4] == std::vector<int>{1, 3, 5});
  CHECK(g.adjacency[2] == std::vector<int>{1, 5});
  for (double w : g.cell_weight) CHECK(w == 1.0);
}

TEST_CASE("8-connectivity adds the diagonals") {
  GridGraph g = build_grid(2, 2, {}, {}, {}, false, 8);
  CHECK(g.adjacency[0] == std::vector<int>{1, 2, 3});
  CHECK(g.adjacency[3] == std::vector<int>{0, 1, 2});
}

TEST_CASE("masked cells disappear and ids stay dense") {
  // mask out the center of a 3x3 grid
  std::vector<std::uint8_t> mask(9, 1);
  mask[4] = 0;
  GridGraph g = build_grid(3, 3, mask, {}, {}, false, 4);
  CHECK(g.n_cells == 8);
  CHECK(g.lattice_to_cell[4] == -1);
  CHECK(g.lattice_to_cell[5] == 4);  // shifted down by one
  // former cell 5 (now id 4) lost its left neighbor, keeps up/down
  CHECK(g.adjacency[4] == std::vector<int>{2, 7});
  CHECK_THROWS_AS(build_grid(2, 2, std::vector<std::uint8_t>(4, 0), {}, {},
                             false, 4),
                  data_error);
  CHECK_THROWS_AS(build_grid(2, 2, std::vector<std::uint8_t>(3, 1), {}, {},
                             false, 4),
                  data_error);
}

TEST_CASE("longitude wrap links the first and last columns") {
  GridGraph flat = build_grid(1, 4, {}, {}, {}, false, 4);
  CHECK(flat.adjacency[0] == std::vector<int>{1});
  GridGraph wrap = build_grid(1, 4, {}, {}, {}, true, 4);
  CHECK(wrap.adjacency[0] == std::vector<int>{1, 3});
  CHECK(wrap.adjacency[3] == std::vector<int>{0, 2});
}

TEST_CASE("grid rejects bad parameters") {
  CHECK_THROWS_AS(build_grid(0, 3, {}, {}, {}, false, 4), config_error);
  CHECK_THROWS_AS(build_grid(2, 2, {}, {}, {}, false, 5), config_error);
  std::vector<double> lat(3, 0.0);
  CHECK_THROWS_AS(build_grid(2, 2, {}, lat, lat, false, 4), data_error);
}

TEST_CASE("latitude weights follow the cosine of latitude") {
  std::vector<double> lat = {0.0, 60.0};
  std::vector<double> lon = {10.0, 10.0};
  GridGraph g = build_grid(2, 1, {}, lat, lon, false, 4);
  CHECK(g.has_latlon());
  CHECK(g.cell_weight[0] == doctest::Approx(1.0));
  CHECK(g.cell_weight[1] == doctest::Approx(0.5));
  // exactly 90 degrees still rounds to a positive weight; beyond it the
  // cosine goes negative and must be rejected
  CHECK(build_grid(1, 1, {}, {90.0}, {0.0}, false, 4).cell_weight[0] > 0.0);
  CHECK_THROWS_AS(build_grid(1, 1, {}, {91.0}, {0.0}, false, 4), data_error);
}

TEST_CASE("lattice distance is Euclidean in grid units") {
  GridGraph g = build_grid(3, 3, {}, {}, {}, false, 4);
  CHECK(g.distance(0, 0) == 0.0);
  CHECK(g.distance(0, 2) == doctest::Approx(2.0));
  CHECK(g.distance(0, 4) == doctest::Approx(std::sqrt(2.0)));
  CHECK(g.distance(0, 4) == g.distance(4, 0));
}

TEST_CASE("wrapped lattice distance takes the short way around") {
  GridGraph g = build_grid(1, 10, {}, {}, {}, true, 4);
  CHECK(g.distance(0, 9) == doctest::Approx(1.0));
  CHECK(g.distance(0, 5) == doctest::Approx(5.0));
}

TEST_CASE("geodesic distance on a lat/lon grid") {
  // quarter turn along the equator
  std::vector<double> lat = {0.0, 0.0};
  std::vector<double> lon = {0.0, 90.0};
  GridGraph g = build_grid(1, 2, {}, lat, lon, false, 4);
  CHECK(g.distance(0, 1) == doctest::Approx(M_PI / 2.0).epsilon(1e-9));
}

TEST_CASE("mesh input validates its adjacency") {
  GridGraph g = grid_from_adjacency({{1}, {0, 2}, {1}});
  CHECK(g.n_cells == 3);
  CHECK_FALSE(g.is_lattice());
  CHECK(g.connectivity == 0);
  CHECK_THROWS_AS(grid_from_adjacency({{1}, {}}), data_error);     // asymmetric
  CHECK_THROWS_AS(grid_from_adjacency({{0}}), data_error);         // self loop
  CHECK_THROWS_AS(grid_from_adjacency({{5}, {0}}), data_error);    // range
  CHECK_THROWS_AS(grid_from_adjacency({}), data_error);
}

TEST_CASE("k-neighborhood grows contiguously by distance") {
  GridGraph g = build_grid(2, 2, {}, {}, {}, false, 4);
  CHECK(k_neighborhood(g, 0, 3) == CellSet{0, 1, 2, 3});
  CHECK(k_neighborhood(g, 0, 1) == CellSet{0, 1});  // distance tie breaks to id

  GridGraph line = build_grid(1, 5, {}, {}, {}, false, 4);
  CHECK(k_neighborhood(line, 2, 2) == CellSet{1, 2, 3});
  CHECK(k_neighborhood(line, 0, 2) == CellSet{0, 1, 2});

  CHECK_THROWS_AS(k_neighborhood(g, 0, 0), config_error);
  CHECK_THROWS_AS(k_neighborhood(g, 0, 4), config_error);
  CHECK_THROWS_AS(k_neighborhood(g, 7, 1), config_error);
}

TEST_CASE("k-neighborhood prefers near cells over hop count") {
  GridGraph g = build_grid(3, 3, {}, {}, {}, false, 4);
  // around the center the four rook neighbors sit at distance 1, corners at
  // sqrt(2); K=4 must pick exactly the rook neighbors
  CellSet n4 = k_neighborhood(g, 4, 4);
  CHECK(n4 == CellSet{1, 3, 4, 5, 7});
}

TEST_CASE("k-neighborhood stops at a component boundary") {
  // two cells joined to nothing: component smaller than K+1
  std::vector<std::uint8_t> mask = {1, 0, 1};
  GridGraph g = build_grid(1, 3, mask, {}, {}, false, 4);
  CHECK(g.n_cells == 2);
  CHECK(k_neighborhood(g, 0, 1) == CellSet{0});
}

TEST_CASE("contiguity and frontier") {
  GridGraph g = build_grid(2, 3, {}, {}, {}, false, 4);
  CHECK(is_contiguous(g, {0, 1, 4}));
  CHECK_FALSE(is_contiguous(g, {0, 2}));
  CHECK(is_contiguous(g, {3}));
  CHECK_THROWS_AS(is_contiguous(g, {}), config_error);

  CHECK(frontier_cells(g, {0}) == CellSet{1, 3});
  CHECK(frontier_cells(g, {0, 1, 2, 3, 4, 5}) == CellSet{});
  CHECK(frontier_cells(g, {1, 4}) == CellSet{0, 2, 3, 5});
  CHECK_THROWS_AS(frontier_cells(g, {}), config_error);
}
