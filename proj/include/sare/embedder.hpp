#ifndef SARE_EMBEDDER_HPP_
#define SARE_EMBEDDER_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sare/core.hpp"
#include "sare/dataset.hpp"
#include "sare/eval.hpp"
#include "sare/mining.hpp"

namespace sare {

enum class Architecture { kLinear, kOneHidden };

const char* to_string(Architecture a);

// The trainable embedding function: an affine map (or one tanh hidden
// layer) followed by L2 normalization.
struct EmbedderModel {
  Architecture architecture = Architecture::kLinear;
  int input_dim = 0;
  int output_dim = 0;
  int hidden_dim = 0;  // kOneHidden only
  Mat w1;              // kLinear: out x in; kOneHidden: hidden x in
  Vec b1;
  Mat w2;              // kOneHidden: out x hidden
  Vec b2;
  int epoch = 0;       // snapshot epoch, recorded in checkpoints

  /// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], seeded.
  static EmbedderModel linear(int input_dim, int output_dim,
                              std::uint64_t seed);
  static EmbedderModel one_hidden(int input_dim, int hidden_dim,
                                  int output_dim, std::uint64_t seed);

  std::size_t parameter_count() const;
};

/// Forward pass ending in l2_normalize. Throws std::domain_error when the
/// pre-normalization activation is degenerate.
Embedding embed(const EmbedderModel& model, const Vec& descriptor);

/// Embeds a descriptor list into an EmbeddedSet for the eval module.
EmbeddedSet embed_set(const EmbedderModel& model,
                      const std::vector<Descriptor>& descriptors);

// Parameter-shaped gradients / momentum buffers.
struct ParamGrads {
  Mat w1;
  Vec b1;
  Mat w2;
  Vec b2;

  static ParamGrads zero_like(const EmbedderModel& model);
  ParamGrads& operator+=(const ParamGrads& other);
  ParamGrads& operator*=(double factor);
  bool all_finite() const;
};

/// Chain rule through the model for one tuple, including the
/// normalization-layer Jacobian (I - u u^T)/|z| per embedding.
ParamGrads backprop(const EmbedderModel& model, const TrainingTuple& tuple,
                    const LossGrad& loss_grads);

struct OptimizerState {
  ParamGrads velocity;
  int epoch = 0;
  double learning_rate = 0.0;

  static OptimizerState initial(const EmbedderModel& model, double lr0);
};

struct TrainConfig {
  LossSpec loss = LossSpec::sare(KernelKind::kGaussian, NegativeMode::kJoint);
  double lr0 = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.001;  // applied to weights only, not biases
  int lr_halving_period = 5;    // epochs
  int batch_tuples = 4;
  int max_epochs = 30;
  std::uint64_t seed = 0;
  MiningConfig mining;  // negatives per tuple come from mining.n_neg

  void validate() const;
};

/// lr0 / 2^floor(epoch / period), exactly.
double learning_rate_for_epoch(const TrainConfig& config, int epoch);

/// v <- momentum*v - lr*(grad + weight_decay*weights); params += v.
/// Throws std::runtime_error with diagnostics on non-finite gradients.
void sgd_step(EmbedderModel& model, const ParamGrads& grads,
              OptimizerState& state, const TrainConfig& config);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_recall5 = 0.0;
};

struct TrainResult {
  EmbedderModel best_model;
  int best_epoch = -1;  // -1 when max_epochs == 0
  double best_val_recall5 = 0.0;
  std::vector<EpochStats> history;
};

/// The training loop: tuples re-mined each epoch with the current model,
/// gradients averaged over each batch, SGD with momentum/weight decay and
/// the halving schedule. Returns the snapshot with the best validation
/// recall@5 (ties to the earliest epoch). Deterministic given the seed.
TrainResult train(const EmbedderModel& initial, const PlaceDataset& dataset,
                  const TrainConfig& config);

/// Checkpoint: one-line JSON header, then parameters in row-major order,
/// one per line with 17 significant digits.
void save_model(const EmbedderModel& model, const std::filesystem::path& path);
EmbedderModel load_model(const std::filesystem::path& path);

}  // namespace sare

#endif  // SARE_EMBEDDER_HPP_
