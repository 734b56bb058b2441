#ifndef SARE_MINING_HPP_
#define SARE_MINING_HPP_

#include <vector>

#include "sare/core.hpp"
#include "sare/dataset.hpp"

namespace sare {

struct EmbedderModel;

struct MiningConfig {
  double r_pos = 10.0;   // potential-positive radius, meters
  double r_neg = 25.0;   // minimum negative geo-distance, meters
  int n_neg = 10;        // hard negatives per tuple
  int remine_every = 1;  // epochs between re-mining

  void validate() const;
};

/// Builds one tuple per training query: the positive is the database view
/// within r_pos geo-distance that is closest in the current embedding
/// space; the negatives are the n_neg embedding-closest views beyond
/// r_neg (hard negatives). Ties break on the lowest image id. The whole
/// database is re-embedded with the given model on every call.
///
/// Queries without a candidate positive are skipped with a warning on
/// stderr; a query with fewer than n_neg far views is a precondition
/// violation and throws. Returns tuples sorted by query image id; throws
/// std::runtime_error when no query is minable.
std::vector<TrainingTuple> mine_tuples(const PlaceDataset& dataset,
                                       const EmbedderModel& model,
                                       const MiningConfig& config);

}  // namespace sare

#endif  // SARE_MINING_HPP_
