#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gridnet/field.hpp"

#include "nlohmann/json.hpp"

namespace gridnet {

// A field on disk is a directory:
//   header.json   metadata (dimensions, layout, file names)
//   field.f64     n_valid_cells x T float64 little-endian, cell-major,
//                 cells in row-major scan order of the unmasked lattice
//   mask.u8       rows*cols bytes, 1 = valid (only when masked)
//   lat.f64/lon.f64  per-valid-cell coordinates (only when present)
void write_field(const Field& f, const std::filesystem::path& dir);
Field read_field(const std::filesystem::path& dir);

// CSV fallback: one row per valid cell, columns
//   row,col,lat,lon,t0,t1,...   (lat/lon columns optional)
// Wrap/connectivity metadata cannot ride along, so callers pass it.
Field read_field_csv(const std::filesystem::path& file, bool wrap_longitude,
                     int connectivity);
void write_field_csv(const Field& f, const std::filesystem::path& file);

// FNV-1a 64-bit over a file's bytes, rendered as 16 hex digits. Used for the
// run manifest so reruns can be compared byte for byte.
std::uint64_t fnv1a64(const void* data, std::size_t n,
                      std::uint64_t seed = 14695981039346656037ull);
std::string file_hash_hex(const std::filesystem::path& file);

nlohmann::json read_json(const std::filesystem::path& file);
void write_json(const nlohmann::json& j, const std::filesystem::path& file);

}  // namespace gridnet
