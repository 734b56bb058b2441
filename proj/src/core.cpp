#include "sare/core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sare {

bool is_finite(const Vec& v) { return v.allFinite(); }

double l2_distance_squared(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << "l2_distance_squared: dimension mismatch (" << a.size() << " vs "
        << b.size() << ")";
    throw std::invalid_argument(msg.str());
  }
  if (!is_finite(a) || !is_finite(b)) {
    throw std::invalid_argument("l2_distance_squared: non-finite input");
  }
  return (a - b).squaredNorm();
}

Vec l2_normalize(const Vec& x) {
  if (!is_finite(x)) {
    throw std::invalid_argument("l2_normalize: non-finite input");
  }
  const double norm = x.norm();
  if (norm <= kNormEpsilon) {
    std::ostringstream msg;
    msg << "l2_normalize: degenerate input, norm " << norm << " <= "
        << kNormEpsilon;
    throw std::domain_error(msg.str());
  }
  return x / norm;
}

void validate_embedding(const Embedding& e) {
  if (e.values.size() < 2) {
    throw std::invalid_argument("embedding: dimension must be >= 2");
  }
  if (!is_finite(e.values)) {
    throw std::invalid_argument("embedding: non-finite entries");
  }
  if (e.normalized && std::abs(e.values.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("embedding: flagged normalized but |v| != 1");
  }
}

const char* to_string(LossFamily family) {
  switch (family) {
    case LossFamily::kTripletRanking: return "triplet";
    case LossFamily::kContrastive: return "contrastive";
    case LossFamily::kSare: return "sare";
  }
  return "?";
}

const char* to_string(KernelKind kernel) {
  switch (kernel) {
    case KernelKind::kGaussian: return "gaussian";
    case KernelKind::kCauchy: return "cauchy";
    case KernelKind::kExponential: return "exponential";
  }
  return "?";
}

const char* to_string(NegativeMode mode) {
  switch (mode) {
    case NegativeMode::kIndependent: return "independent";
    case NegativeMode::kJoint: return "joint";
  }
  return "?";
}

LossSpec LossSpec::triplet(double m) {
  LossSpec s;
  s.family = LossFamily::kTripletRanking;
  s.margin_m = m;
  s.validate();
  return s;
}

LossSpec LossSpec::contrastive(double tau) {
  LossSpec s;
  s.family = LossFamily::kContrastive;
  s.margin_tau = tau;
  s.validate();
  return s;
}

LossSpec LossSpec::sare(KernelKind kernel, NegativeMode mode) {
  LossSpec s;
  s.family = LossFamily::kSare;
  s.kernel = kernel;
  s.negative_mode = mode;
  s.validate();
  return s;
}

void LossSpec::validate() const {
  if (!(margin_m > 0.0)) {
    throw std::invalid_argument("loss spec: margin_m must be > 0");
  }
  if (!(margin_tau > 0.0)) {
    throw std::invalid_argument("loss spec: margin_tau must be > 0");
  }
}

std::string LossSpec::name() const {
  if (family != LossFamily::kSare) return to_string(family);
  std::string s = "sare-";
  s += to_string(kernel);
  s += "-";
  s += to_string(negative_mode);
  return s;
}

double geo_distance(const Descriptor& a, const Descriptor& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void validate_tuple(const TrainingTuple& t, double r_pos, double r_neg) {
  if (t.negatives.empty()) {
    throw std::invalid_argument("tuple: needs at least one negative");
  }
  const Eigen::Index dim = t.query.features.size();
  if (t.positive.features.size() != dim) {
    throw std::invalid_argument("tuple: positive dimension mismatch");
  }
  for (const Descriptor& n : t.negatives) {
    if (n.features.size() != dim) {
      throw std::invalid_argument("tuple: negative dimension mismatch");
    }
  }
  if (r_pos >= 0.0 && geo_distance(t.query, t.positive) > r_pos) {
    throw std::invalid_argument("tuple: positive outside the positive radius");
  }
  if (r_neg >= 0.0) {
    for (const Descriptor& n : t.negatives) {
      if (geo_distance(t.query, n) <= r_neg) {
        throw std::invalid_argument("tuple: negative inside the negative radius");
      }
    }
  }
}

}  // namespace sare
