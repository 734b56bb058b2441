#include "sare/eval.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace sare {

namespace {

void check_sets(const EmbeddedSet& database, const EmbeddedSet& queries) {
  if (database.size() == 0 || queries.size() == 0) {
    throw std::invalid_argument("eval: empty database or query set");
  }
  const Eigen::Index dim = database.embeddings[0].size();
  for (const Vec& e : database.embeddings) {
    if (e.size() != dim) throw std::invalid_argument("eval: dimension mismatch");
  }
  for (const Vec& e : queries.embeddings) {
    if (e.size() != dim) throw std::invalid_argument("eval: dimension mismatch");
  }
}

// Database indices ordered by (squared distance, image id).
std::vector<int> ranked_indices(const EmbeddedSet& database, const Vec& query,
                                std::size_t top_k) {
  const std::size_t n = database.size();
  std::vector<std::pair<double, int>> keyed(n);
  for (std::size_t j = 0; j < n; ++j) {
    keyed[j] = {(database.embeddings[j] - query).squaredNorm(),
                static_cast<int>(j)};
  }
  auto cmp = [&](const std::pair<double, int>& a,
                 const std::pair<double, int>& b) {
    if (a.first != b.first) return a.first < b.first;
    return database.image_ids[a.second] < database.image_ids[b.second];
  };
  const std::size_t k = std::min(top_k, n);
  std::partial_sort(keyed.begin(), keyed.begin() + k, keyed.end(), cmp);
  std::vector<int> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = keyed[j].second;
  return out;
}

}  // namespace

RecallCurve recall_at_n(const EmbeddedSet& database, const EmbeddedSet& queries,
                        const std::vector<int>& n_values, double threshold_m) {
  check_sets(database, queries);
  if (n_values.empty()) {
    throw std::invalid_argument("recall_at_n: n_values must be nonempty");
  }
  for (int n : n_values) {
    if (n < 1) throw std::invalid_argument("recall_at_n: N must be >= 1");
  }
  const int max_n = *std::max_element(n_values.begin(), n_values.end());

  RecallCurve curve;
  curve.n_values = n_values;
  curve.distance_threshold_m = threshold_m;
  std::vector<int> hits(n_values.size(), 0);
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const std::vector<int> top =
        ranked_indices(database, queries.embeddings[qi], max_n);
    // Rank (1-based) of the first geographically correct retrieval.
    int first_correct = 0;
    for (std::size_t r = 0; r < top.size(); ++r) {
      const int j = top[r];
      const double geo = std::hypot(database.xs[j] - queries.xs[qi],
                                    database.ys[j] - queries.ys[qi]);
      if (geo <= threshold_m) {
        first_correct = static_cast<int>(r) + 1;
        break;
      }
    }
    if (first_correct > 0) {
      for (std::size_t k = 0; k < n_values.size(); ++k) {
        if (first_correct <= n_values[k]) ++hits[k];
      }
    }
  }
  curve.recalls.resize(n_values.size());
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    curve.recalls[k] =
        static_cast<double>(hits[k]) / static_cast<double>(queries.size());
  }
  return curve;
}

std::vector<std::vector<int>> rank_top_k(const EmbeddedSet& database,
                                         const EmbeddedSet& queries, int k) {
  check_sets(database, queries);
  if (k < 1) throw std::invalid_argument("rank_top_k: k must be >= 1");
  std::vector<std::vector<int>> out(queries.size());
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const std::vector<int> top =
        ranked_indices(database, queries.embeddings[qi], k);
    out[qi].reserve(top.size());
    for (int j : top) out[qi].push_back(database.image_ids[j]);
  }
  return out;
}

double mean_average_precision(
    const std::vector<std::vector<int>>& rankings,
    const std::vector<std::vector<int>>& relevant_ids) {
  if (rankings.size() != relevant_ids.size()) {
    throw std::invalid_argument("mean_average_precision: size mismatch");
  }
  double ap_sum = 0.0;
  int counted = 0;
  for (std::size_t qi = 0; qi < rankings.size(); ++qi) {
    const std::vector<int>& relevant = relevant_ids[qi];
    if (relevant.empty()) {
      std::cerr << "warning: query " << qi
                << " has an empty relevance set, excluded from mAP\n";
      continue;
    }
    std::unordered_set<int> relevant_set(relevant.begin(), relevant.end());
    // Ranks (1-based) at which relevant items appear.
    std::vector<int> found_ranks;
    int seen_relevant = 0;
    double ap = 0.0;
    for (std::size_t r = 0; r < rankings[qi].size(); ++r) {
      if (relevant_set.count(rankings[qi][r])) {
        ++seen_relevant;
        ap += static_cast<double>(seen_relevant) / static_cast<double>(r + 1);
      }
    }
    // Relevant items missing from the ranking contribute precision 0.
    ap /= static_cast<double>(relevant_set.size());
    ap_sum += ap;
    ++counted;
  }
  if (counted == 0) {
    throw std::invalid_argument(
        "mean_average_precision: no query has a nonempty relevance set");
  }
  return ap_sum / static_cast<double>(counted);
}

PcaProjection pca_fit(const std::vector<Vec>& db_embeddings, int target_dim) {
  if (db_embeddings.empty()) {
    throw std::invalid_argument("pca_fit: empty input");
  }
  const Eigen::Index dim = db_embeddings[0].size();
  const Eigen::Index n = static_cast<Eigen::Index>(db_embeddings.size());
  if (target_dim < 1 || target_dim > dim) {
    throw std::invalid_argument("pca_fit: target_dim out of range");
  }
  if (n <= target_dim) {
    throw std::invalid_argument("pca_fit: need more samples than target_dim");
  }
  Mat data(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (db_embeddings[i].size() != dim) {
      throw std::invalid_argument("pca_fit: dimension mismatch");
    }
    data.row(i) = db_embeddings[i].transpose();
  }
  const Vec mean = data.colwise().mean().transpose();
  data.rowwise() -= mean.transpose();
  const Mat covariance =
      data.transpose() * data / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Mat> solver(covariance);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("pca_fit: eigendecomposition failed");
  }
  // Eigenvalues come out ascending; principal components are the last ones.
  const Vec eigenvalues = solver.eigenvalues();
  const double lambda_max = std::max(eigenvalues[dim - 1], 0.0);
  const double rank_tol = lambda_max * 1e-10;
  int rank = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (eigenvalues[i] > rank_tol) ++rank;
  }
  if (rank < target_dim) {
    throw std::invalid_argument(
        "pca_fit: covariance rank " + std::to_string(rank) +
        " is below target_dim " + std::to_string(target_dim));
  }
  PcaProjection projection;
  projection.mean = mean;
  projection.components.resize(target_dim, dim);
  for (int c = 0; c < target_dim; ++c) {
    projection.components.row(c) =
        solver.eigenvectors().col(dim - 1 - c).transpose();
  }
  return projection;
}

Vec pca_apply(const PcaProjection& projection, const Vec& x) {
  if (x.size() != projection.mean.size()) {
    throw std::invalid_argument("pca_apply: dimension mismatch");
  }
  return l2_normalize(projection.components * (x - projection.mean));
}

EmbeddedSet pca_apply_all(const PcaProjection& projection,
                          const EmbeddedSet& set) {
  EmbeddedSet out;
  out.image_ids = set.image_ids;
  out.xs = set.xs;
  out.ys = set.ys;
  out.embeddings.reserve(set.embeddings.size());
  for (const Vec& e : set.embeddings) {
    out.embeddings.push_back(pca_apply(projection, e));
  }
  return out;
}

}  // namespace sare
