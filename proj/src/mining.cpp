#include "sare/mining.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "sare/embedder.hpp"

namespace sare {

void MiningConfig::validate() const {
  if (!(r_pos > 0.0) || !(r_neg > r_pos)) {
    throw std::invalid_argument("mining: need 0 < r_pos < r_neg");
  }
  if (n_neg < 1) {
    throw std::invalid_argument("mining: n_neg must be >= 1");
  }
  if (remine_every < 1) {
    throw std::invalid_argument("mining: remine_every must be >= 1");
  }
}

std::vector<TrainingTuple> mine_tuples(const PlaceDataset& dataset,
                                       const EmbedderModel& model,
                                       const MiningConfig& config) {
  config.validate();
  if (dataset.database.empty() || dataset.queries_train.empty()) {
    throw std::invalid_argument("mining: empty database or training queries");
  }

  // Fresh embeddings of the whole database each call; no stale cache.
  std::vector<Vec> db_embedded(dataset.database.size());
  for (std::size_t j = 0; j < dataset.database.size(); ++j) {
    db_embedded[j] = embed(model, dataset.database[j].features).values;
  }

  std::vector<TrainingTuple> tuples;
  std::vector<std::size_t> query_order(dataset.queries_train.size());
  for (std::size_t i = 0; i < query_order.size(); ++i) query_order[i] = i;
  std::sort(query_order.begin(), query_order.end(),
            [&](std::size_t a, std::size_t b) {
              return dataset.queries_train[a].image_id <
                     dataset.queries_train[b].image_id;
            });

  for (std::size_t qi : query_order) {
    const Descriptor& query = dataset.queries_train[qi];
    const Vec q_emb = embed(model, query.features).values;

    int best_positive = -1;
    double best_positive_d2 = std::numeric_limits<double>::infinity();
    // (embedding d2, image id, database index) of far views.
    std::vector<std::tuple<double, int, std::size_t>> far;
    for (std::size_t j = 0; j < dataset.database.size(); ++j) {
      const Descriptor& item = dataset.database[j];
      const double geo = geo_distance(query, item);
      if (geo <= config.r_pos) {
        const double d2 = (db_embedded[j] - q_emb).squaredNorm();
        if (d2 < best_positive_d2 ||
            (d2 == best_positive_d2 && best_positive >= 0 &&
             item.image_id < dataset.database[best_positive].image_id)) {
          best_positive_d2 = d2;
          best_positive = static_cast<int>(j);
        }
      } else if (geo > config.r_neg) {
        far.emplace_back((db_embedded[j] - q_emb).squaredNorm(), item.image_id,
                         j);
      }
    }
    if (best_positive < 0) {
      std::cerr << "warning: query " << query.image_id
                << " has no database view within " << config.r_pos
                << " m, skipped\n";
      continue;
    }
    if (static_cast<int>(far.size()) < config.n_neg) {
      throw std::invalid_argument(
          "mining: query " + std::to_string(query.image_id) + " has only " +
          std::to_string(far.size()) + " views beyond r_neg, need " +
          std::to_string(config.n_neg));
    }
    std::partial_sort(far.begin(), far.begin() + config.n_neg, far.end());

    TrainingTuple t;
    t.query = query;
    t.positive = dataset.database[best_positive];
    t.negatives.reserve(config.n_neg);
    for (int k = 0; k < config.n_neg; ++k) {
      t.negatives.push_back(dataset.database[std::get<2>(far[k])]);
    }
    validate_tuple(t, config.r_pos, config.r_neg);
    tuples.push_back(std::move(t));
  }
  if (tuples.empty()) {
    throw std::runtime_error("mining: no minable query in the training split");
  }
  return tuples;
}

}  // namespace sare
