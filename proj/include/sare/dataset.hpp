#ifndef SARE_DATASET_HPP_
#define SARE_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sare/core.hpp"

namespace sare {

struct SynthConfig {
  int n_places = 100;
  int views_per_place = 10;
  int queries_per_place = 3;
  int d_in = 64;
  double view_noise_sigma = 0.1;
  double map_extent_m = 1000.0;
  std::uint64_t seed = 0;
};

// Distinct places are kept at least this far apart so the 25 m
// localization rule is unambiguous on synthetic maps.
inline constexpr double kMinPlaceSeparationM = 60.0;
inline constexpr double kViewPositionJitterM = 5.0;

struct DatasetMeta {
  SynthConfig synth;
  std::string format = "sare-dataset-v1";
};

// Geo-tagged descriptor collection with a database and disjoint
// train/val/test query splits (split 70/15/15 by place).
struct PlaceDataset {
  std::vector<Descriptor> database;
  std::vector<Descriptor> queries_train;
  std::vector<Descriptor> queries_val;
  std::vector<Descriptor> queries_test;
  DatasetMeta meta;
};

/// Synthetic stand-in for a geo-tagged image collection: place centers
/// sampled uniformly with minimum pairwise separation, one latent unit
/// descriptor per place, views and queries as noisy copies with position
/// jitter. Deterministic given the seed.
PlaceDataset synth_generate(const SynthConfig& config);

/// Checks all invariants: unique image ids, disjoint splits, consistent
/// dimensions, finite features, every query's place visible in the
/// database. Throws std::invalid_argument on violation.
void validate_dataset(const PlaceDataset& dataset);

/// Writes database.csv, queries_{train,val,test}.csv and meta.json into
/// `dir`. Floats are written with 17 significant digits so that
/// save -> load -> save round-trips byte-identically.
void save_dataset(const PlaceDataset& dataset,
                  const std::filesystem::path& dir);

/// Parses and validates a dataset directory. Throws std::runtime_error
/// naming file and line for malformed rows.
PlaceDataset load_dataset(const std::filesystem::path& dir);

}  // namespace sare

#endif  // SARE_DATASET_HPP_
