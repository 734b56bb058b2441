#ifndef SARE_EVAL_HPP_
#define SARE_EVAL_HPP_

#include <vector>

#include "sare/core.hpp"

namespace sare {

// Embeddings with aligned ids and planar positions, as consumed by the
// retrieval metrics. Immutable once built; safe to share across threads.
struct EmbeddedSet {
  std::vector<int> image_ids;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<Vec> embeddings;

  std::size_t size() const { return image_ids.size(); }
};

struct RecallCurve {
  std::vector<int> n_values;
  std::vector<double> recalls;
  double distance_threshold_m = 25.0;
};

/// Exact brute-force retrieval: ranks the database by squared embedding
/// distance (ties by lowest image id). A query counts for N when any of
/// its top-N items lies within threshold_m geo-distance.
RecallCurve recall_at_n(const EmbeddedSet& database, const EmbeddedSet& queries,
                        const std::vector<int>& n_values, double threshold_m);

/// Top-k database image ids per query, ranked as in recall_at_n.
std::vector<std::vector<int>> rank_top_k(const EmbeddedSet& database,
                                         const EmbeddedSet& queries, int k);

/// Uninterpolated average precision: mean over relevant items of the
/// precision at their rank (items absent from a ranking contribute 0).
/// Queries with an empty relevance set are excluded with a warning on
/// stderr; throws std::invalid_argument if that leaves no queries.
double mean_average_precision(
    const std::vector<std::vector<int>>& rankings,
    const std::vector<std::vector<int>>& relevant_ids);

// Mean-centering projection onto the leading principal components.
// Rows of `components` are orthonormal.
struct PcaProjection {
  Vec mean;
  Mat components;  // target_dim x D
};

/// Fits the projection on the database. Throws std::invalid_argument when
/// the covariance rank is below target_dim (the message reports the
/// achievable rank).
PcaProjection pca_fit(const std::vector<Vec>& db_embeddings, int target_dim);

/// Projects and re-normalizes one embedding.
Vec pca_apply(const PcaProjection& projection, const Vec& x);

/// Projects a whole set (ids/positions preserved).
EmbeddedSet pca_apply_all(const PcaProjection& projection,
                          const EmbeddedSet& set);

}  // namespace sare

#endif  // SARE_EVAL_HPP_
