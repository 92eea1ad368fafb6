#include "gridnet/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "gridnet/errors.hpp"

namespace gridnet {

static_assert(std::endian::native == std::endian::little,
              "field serialization assumes a little-endian host");

namespace {

void write_bytes(const std::filesystem::path& file, const void* data,
                 std::size_t n) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw data_error("cannot open for writing: " + file.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw data_error("write failed: " + file.string());
}

std::vector<char> read_bytes(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary | std::ios::ate);
  if (!in) throw data_error("cannot open: " + file.string());
  std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<char> buf(static_cast<std::size_t>(size));
  if (size > 0) in.read(buf.data(), size);
  if (!in) throw data_error("read failed: " + file.string());
  return buf;
}

std::vector<double> read_doubles(const std::filesystem::path& file,
                                 std::size_t expected) {
  auto bytes = read_bytes(file);
  if (bytes.size() != expected * sizeof(double)) {
    throw data_error(file.string() + ": expected " +
                     std::to_string(expected * sizeof(double)) +
                     " bytes, found " + std::to_string(bytes.size()));
  }
  std::vector<double> out(expected);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

// Scatter a per-cell array back onto the full lattice (masked entries 0).
std::vector<double> to_lattice(const GridGraph& g,
                               const std::vector<double>& per_cell) {
  std::vector<double> out(static_cast<std::size_t>(g.rows) * g.cols, 0.0);
  for (int i = 0; i < g.n_cells; ++i) {
    std::size_t li = static_cast<std::size_t>(g.cell_row[i]) * g.cols +
                     g.cell_col[i];
    out[li] = per_cell[i];
  }
  return out;
}

}  // namespace

void write_field(const Field& f, const std::filesystem::path& dir) {
  const GridGraph& g = *f.grid;
  if (!g.is_lattice())
    throw config_error("only lattice fields can be serialized");
  std::filesystem::create_directories(dir);

  bool masked = g.n_cells != g.rows * g.cols;
  nlohmann::json header = {
      {"format", "gridnet-field"},
      {"version", 1},
      {"rows", g.rows},
      {"cols", g.cols},
      {"T", f.T},
      {"n_cells", g.n_cells},
      {"wrap_longitude", g.wrap_longitude},
      {"connectivity", g.connectivity},
      {"has_coords", g.has_latlon()},
      {"mask_encoding", masked ? "u8" : "none"},
      {"layout", "cell_major_f64le"},
      {"time_step_label", f.time_step_label},
      {"data_file", "field.f64"},
      {"preprocessing", f.preprocessing_log},
  };
  if (masked) header["mask_file"] = "mask.u8";
  if (g.has_latlon()) {
    header["lat_file"] = "lat.f64";
    header["lon_file"] = "lon.f64";
  }
  write_json(header, dir / "header.json");
  write_bytes(dir / "field.f64", f.data.data(), f.data.size() * sizeof(double));
  if (masked) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.rows) * g.cols,
                                   0);
    for (std::size_t li = 0; li < mask.size(); ++li)
      if (g.lattice_to_cell[li] >= 0) mask[li] = 1;
    write_bytes(dir / "mask.u8", mask.data(), mask.size());
  }
  if (g.has_latlon()) {
    auto lat = to_lattice(g, g.lat);
    auto lon = to_lattice(g, g.lon);
    write_bytes(dir / "lat.f64", lat.data(), lat.size() * sizeof(double));
    write_bytes(dir / "lon.f64", lon.data(), lon.size() * sizeof(double));
  }
}

Field read_field(const std::filesystem::path& dir) {
  nlohmann::json h = read_json(dir / "header.json");
  int rows = h.at("rows").get<int>();
  int cols = h.at("cols").get<int>();
  int T = h.at("T").get<int>();
  if (rows <= 0 || cols <= 0 || T <= 0)
    throw data_error("header has non-positive dimensions");
  std::size_t nlat = static_cast<std::size_t>(rows) * cols;

  std::vector<std::uint8_t> mask;
  if (h.value("mask_encoding", std::string("none")) == "u8") {
    auto bytes = read_bytes(dir / h.value("mask_file", std::string("mask.u8")));
    if (bytes.size() != nlat)
      throw data_error("mask size mismatch: expected " + std::to_string(nlat) +
                       " bytes, found " + std::to_string(bytes.size()));
    mask.assign(bytes.begin(), bytes.end());
  }
  std::vector<double> lat, lon;
  if (h.value("has_coords", false)) {
    lat = read_doubles(dir / h.value("lat_file", std::string("lat.f64")), nlat);
    lon = read_doubles(dir / h.value("lon_file", std::string("lon.f64")), nlat);
  }
  auto grid = std::make_shared<GridGraph>(
      build_grid(rows, cols, mask, lat, lon, h.value("wrap_longitude", false),
                 h.value("connectivity", 4)));
  if (h.contains("n_cells") && h["n_cells"].get<int>() != grid->n_cells)
    throw data_error("header n_cells disagrees with the mask");

  Field f(grid, T);
  f.data = read_doubles(dir / h.value("data_file", std::string("field.f64")),
                        static_cast<std::size_t>(grid->n_cells) * T);
  for (double v : f.data)
    if (std::isnan(v)) throw data_error("field contains NaN in unmasked cells");
  f.time_step_label = h.value("time_step_label", std::string("step"));
  if (h.contains("preprocessing"))
    f.preprocessing_log = h["preprocessing"].get<std::vector<std::string>>();
  return f;
}

void write_field_csv(const Field& f, const std::filesystem::path& file) {
  const GridGraph& g = *f.grid;
  if (!g.is_lattice())
    throw config_error("only lattice fields can be serialized");
  std::ofstream out(file);
  if (!out) throw data_error("cannot open for writing: " + file.string());
  bool coords = g.has_latlon();
  out << "row,col";
  if (coords) out << ",lat,lon";
  for (int t = 0; t < f.T; ++t) out << ",t" << t;
  out << "\n";
  char buf[32];
  for (int i = 0; i < g.n_cells; ++i) {
    out << g.cell_row[i] << ',' << g.cell_col[i];
    if (coords) {
      std::snprintf(buf, sizeof buf, "%.17g", g.lat[i]);
      out << ',' << buf;
      std::snprintf(buf, sizeof buf, "%.17g", g.lon[i]);
      out << ',' << buf;
    }
    auto x = f.series(i);
    for (int t = 0; t < f.T; ++t) {
      std::snprintf(buf, sizeof buf, "%.17g", x[t]);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw data_error("write failed: " + file.string());
}

Field read_field_csv(const std::filesystem::path& file, bool wrap_longitude,
                     int connectivity) {
  std::ifstream in(file);
  if (!in) throw data_error("cannot open: " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty CSV: " + file.string());
  std::stringstream hs(line);
  std::string col;
  std::vector<std::string> names;
  while (std::getline(hs, col, ',')) names.push_back(col);
  bool coords = names.size() > 2 && names[2] == "lat";
  std::size_t lead = coords ? 4 : 2;
  if (names.size() <= lead)
    throw data_error("CSV has no time columns: " + file.string());
  int T = static_cast<int>(names.size() - lead);

  struct Row {
    int r, c;
    double lat, lon;
    std::vector<double> x;
  };
  std::vector<Row> cells;
  int max_r = -1, max_c = -1;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ls(line);
    Row row;
    std::string tok;
    auto next = [&]() -> double {
      if (!std::getline(ls, tok, ','))
        throw data_error(file.string() + ":" + std::to_string(lineno) +
                         ": short row");
      return std::stod(tok);
    };
    row.r = static_cast<int>(next());
    row.c = static_cast<int>(next());
    if (coords) {
      row.lat = next();
      row.lon = next();
    }
    row.x.resize(T);
    for (int t = 0; t < T; ++t) row.x[t] = next();
    if (std::getline(ls, tok, ','))
      throw data_error(file.string() + ":" + std::to_string(lineno) +
                       ": too many columns");
    if (row.r < 0 || row.c < 0)
      throw data_error(file.string() + ":" + std::to_string(lineno) +
                       ": negative coordinates");
    max_r = std::max(max_r, row.r);
    max_c = std::max(max_c, row.c);
    cells.push_back(std::move(row));
  }
  if (cells.empty()) throw data_error("CSV has no cells: " + file.string());
  int rows = max_r + 1, cols = max_c + 1;
  std::size_t nlat = static_cast<std::size_t>(rows) * cols;
  std::vector<std::uint8_t> mask(nlat, 0);
  std::vector<double> lat(coords ? nlat : 0), lon(coords ? nlat : 0);
  std::vector<const Row*> slot(nlat, nullptr);
  for (const Row& row : cells) {
    std::size_t li = static_cast<std::size_t>(row.r) * cols + row.c;
    if (slot[li])
      throw data_error(file.string() + ": duplicate cell (" +
                       std::to_string(row.r) + "," + std::to_string(row.c) +
                       ")");
    slot[li] = &row;
    mask[li] = 1;
    if (coords) {
      lat[li] = row.lat;
      lon[li] = row.lon;
    }
  }
  bool full = cells.size() == nlat;
  auto grid = std::make_shared<GridGraph>(
      build_grid(rows, cols, full ? std::vector<std::uint8_t>{} : mask, lat,
                 lon, wrap_longitude, connectivity));
  Field f(grid, T);
  for (std::size_t li = 0; li < nlat; ++li) {
    int cell = grid->lattice_to_cell[li];
    if (cell < 0) continue;
    auto dst = f.series(cell);
    std::copy(slot[li]->x.begin(), slot[li]->x.end(), dst.begin());
  }
  return f;
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string file_hash_hex(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw data_error("cannot open: " + file.string());
  std::uint64_t h = 14695981039346656037ull;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof buf);
    std::streamsize got = in.gcount();
    if (got > 0) h = fnv1a64(buf, static_cast<std::size_t>(got), h);
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

nlohmann::json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw data_error("cannot open: " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(file.string() + ": " + e.what());
  }
}

void write_json(const nlohmann::json& j, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw data_error("cannot open for writing: " + file.string());
  out << j.dump(2) << "\n";
  if (!out) throw data_error("write failed: " + file.string());
}

}  // namespace gridnet
