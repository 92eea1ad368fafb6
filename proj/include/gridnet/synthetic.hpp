#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gridnet/field.hpp"

#include "nlohmann/json.hpp"

namespace gridnet {

struct MixTerm {
  int mother = 0;      // index into the mother series list
  double coeff = 1.0;
  int shift = 0;       // term uses y(t + shift)
};

struct SyntheticDomainSpec {
  double center_row = 0.0;
  double center_col = 0.0;
  double r_core = 1.0;     // full-signal radius
  double r_peri = 2.0;     // outer radius, amplitude reaches 0 here
  double variance = 1.0;   // target variance of the domain signal
  std::vector<MixTerm> mixing;
};

struct SyntheticSpec {
  int rows = 50;
  int cols = 70;
  int T = 1200;
  int n_mothers = 5;
  double phi = 0.3;             // AR(1) coefficient of the mother series
  // Optional per-mother AR(1) coefficients; overrides phi when non-empty
  // (size must then equal n_mothers). Lets a scene mix slowly-decorrelating
  // carriers with nearly white ones.
  std::vector<double> phi_per_mother;
  double noise_variance = 1.0;  // white noise added everywhere
  int decorrelate_lags = 20;    // enforce |r| < 0.05 between mothers here
  std::uint64_t rng_seed = 1;
  std::vector<SyntheticDomainSpec> domains;
};

// The stock five-domain scene: three strong domains in a row with the outer
// two overlapping the middle one, plus two weaker overlapping domains above;
// one lagged negative coupling and two zero-lag positive ones.
SyntheticSpec default_synthetic_spec();

struct IntendedEdge {
  int a = 0;      // a < b
  int b = 0;
  int sign = 0;   // sign of the induced correlation
  int lag = 0;    // lag maximizing r between signals a and b (a leads if > 0)
};

struct GroundTruth {
  std::vector<CellSet> extent;      // cells with distance <= r_peri
  std::vector<CellSet> core;        // cells with distance <= r_core
  std::vector<IntendedEdge> edges;  // couplings implied by the mixing table
  std::vector<std::vector<double>> signals;  // per-domain series, noise-free
};

// Standardized AR(1) mother series, pairwise decorrelated so that every
// cross-correlation at |tau| <= check_lags stays below 0.05 in magnitude.
std::vector<std::vector<double>> generate_mothers(int n, int T, double phi,
                                                  int check_lags,
                                                  std::uint64_t rng_seed);

// Same, with one AR(1) coefficient per mother.
std::vector<std::vector<double>> generate_mothers(
    int n, int T, const std::vector<double>& phi, int check_lags,
    std::uint64_t rng_seed);

// Apply each domain's mixing table (shifts are circular), standardize, then
// scale to the requested variance.
std::vector<std::vector<double>> mix_signals(
    const std::vector<std::vector<double>>& mothers, const SyntheticSpec& spec);

// Amplitude factor at distance d from a domain center: 1 inside the core,
// then the square root of (r_peri - d)/(r_peri - r_core), 0 outside.
double attenuation(const SyntheticDomainSpec& d, double dist);

// Render the full scene: attenuated signals summed where domains overlap,
// plus white Gaussian noise on every cell. Deterministic in rng_seed and
// independent of worker count (per-cell noise streams).
std::pair<Field, GroundTruth> render_field(const SyntheticSpec& spec);

nlohmann::json spec_to_json(const SyntheticSpec& s);
SyntheticSpec spec_from_json(const nlohmann::json& j);
nlohmann::json ground_truth_to_json(const GroundTruth& gt);

}  // namespace gridnet
