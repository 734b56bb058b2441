#ifndef SARE_CORE_HPP_
#define SARE_CORE_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace sare {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Below this L2 norm a vector is treated as degenerate and cannot be
// normalized; silent rescaling of a near-zero vector produces garbage
// directions, so we error out instead.
inline constexpr double kNormEpsilon = 1e-12;

/// Squared L2 distance. Throws std::invalid_argument on dimension mismatch
/// or non-finite entries.
double l2_distance_squared(const Vec& a, const Vec& b);

/// Returns x / |x|. Throws std::domain_error when |x| <= kNormEpsilon.
Vec l2_normalize(const Vec& x);

bool is_finite(const Vec& v);

// A feature embedding. Vectors produced by l2_normalize / embed carry
// normalized == true and satisfy | |values| - 1 | <= 1e-9.
struct Embedding {
  Vec values;
  bool normalized = false;
};

/// Checks dimension >= 2, finite entries and (when flagged) unit norm.
/// Throws std::invalid_argument on violation.
void validate_embedding(const Embedding& e);

enum class LossFamily { kTripletRanking, kContrastive, kSare };
enum class KernelKind { kGaussian, kCauchy, kExponential };
enum class NegativeMode { kIndependent, kJoint };

const char* to_string(LossFamily family);
const char* to_string(KernelKind kernel);
const char* to_string(NegativeMode mode);

// Which objective to evaluate. kernel / negative_mode are meaningful for
// the SARE family only and must be left at their defaults otherwise.
struct LossSpec {
  LossFamily family = LossFamily::kSare;
  KernelKind kernel = KernelKind::kGaussian;
  NegativeMode negative_mode = NegativeMode::kJoint;
  double margin_m = 0.1;    // triplet ranking margin
  double margin_tau = 0.7;  // contrastive margin

  static LossSpec triplet(double m = 0.1);
  static LossSpec contrastive(double tau = 0.7);
  static LossSpec sare(KernelKind kernel, NegativeMode mode);

  /// Throws std::invalid_argument when margins are not positive.
  void validate() const;

  /// Short identifier, e.g. "triplet" or "sare-gaussian-joint".
  std::string name() const;
};

// Match probabilities over one tuple. Slot 0 is the positive, slots
// 1..N the negatives. prior_h is the one-hot ground-truth distribution,
// learned_c the kernel-derived one (entries in (0,1), summing to 1).
struct MatchDistribution {
  std::vector<double> prior_h;
  std::vector<double> learned_c;
};

// Loss value plus gradients with respect to every embedding of a tuple.
// All objectives here depend on pairwise differences only, so
// d_query == -d_positive - sum(d_negatives) up to rounding.
struct LossGrad {
  double loss = 0.0;
  Vec d_query;
  Vec d_positive;
  std::vector<Vec> d_negatives;
};

// One geo-tagged input descriptor. place_id is synthetic ground truth
// (-1 when unknown); positions are planar coordinates in meters.
struct Descriptor {
  int image_id = -1;
  int place_id = -1;
  double x = 0.0;
  double y = 0.0;
  Vec features;
};

double geo_distance(const Descriptor& a, const Descriptor& b);

// One mined training tuple: a query, its chosen positive and n_neg hard
// negatives, all sharing the input dimension.
struct TrainingTuple {
  Descriptor query;
  Descriptor positive;
  std::vector<Descriptor> negatives;
};

/// Checks N >= 1 and consistent feature dimensions; when geo radii are
/// given also checks geo(q,p) <= r_pos and geo(q,n) > r_neg.
void validate_tuple(const TrainingTuple& t, double r_pos = -1.0,
                    double r_neg = -1.0);

}  // namespace sare

#endif  // SARE_CORE_HPP_
