#include "sare/gradcheck.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sare/losses.hpp"

namespace sare {

namespace {

void check_eps(double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw std::invalid_argument("gradcheck: eps must be in [1e-7, 1e-3]");
  }
}

// True when the tuple is at least `guard` away from every hinge boundary
// of the spec (and, for the exponential kernel, not near d = 0 where the
// 1/d factors blow up the finite-difference truncation error).
bool away_from_kinks(const LossSpec& spec, const Vec& q, const Vec& p,
                     const std::vector<Vec>& negatives, double guard) {
  const double d2p = l2_distance_squared(q, p);
  for (const Vec& n : negatives) {
    const double d2n = l2_distance_squared(q, n);
    switch (spec.family) {
      case LossFamily::kTripletRanking:
        if (std::abs(spec.margin_m + d2p - d2n) < guard) return false;
        break;
      case LossFamily::kContrastive:
        if (std::abs(std::sqrt(d2n) - spec.margin_tau) < guard) return false;
        break;
      case LossFamily::kSare:
        if (spec.kernel == KernelKind::kExponential &&
            (std::sqrt(d2p) < 0.3 || std::sqrt(d2n) < 0.3)) {
          return false;
        }
        break;
    }
  }
  return true;
}

double min_nonzero_abs(const Vec& v) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a != 0.0 && a < m) m = a;
  }
  return m;
}

Vec random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  return l2_normalize(v);
}

}  // namespace

LossGrad finite_difference_gradients(const LossSpec& spec, const Vec& q,
                                     const Vec& p,
                                     const std::vector<Vec>& negatives,
                                     double eps) {
  check_eps(eps);
  Vec qc = q;
  Vec pc = p;
  std::vector<Vec> nc = negatives;

  auto loss_at = [&](const char* tensor, Eigen::Index index) {
    const double value = evaluate_tuple(spec, qc, pc, nc).loss;
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg << "finite_difference_gradients: non-finite loss while probing "
          << tensor << "[" << index << "]";
      throw std::runtime_error(msg.str());
    }
    return value;
  };
  auto differentiate = [&](Vec& tensor, const char* name) {
    Vec grad(tensor.size());
    for (Eigen::Index i = 0; i < tensor.size(); ++i) {
      const double original = tensor[i];
      tensor[i] = original + eps;
      const double plus = loss_at(name, i);
      tensor[i] = original - eps;
      const double minus = loss_at(name, i);
      tensor[i] = original;
      grad[i] = (plus - minus) / (2.0 * eps);
    }
    return grad;
  };

  LossGrad g;
  g.loss = loss_at("q", -1);
  g.d_query = differentiate(qc, "q");
  g.d_positive = differentiate(pc, "p");
  g.d_negatives.reserve(nc.size());
  for (std::size_t i = 0; i < nc.size(); ++i) {
    g.d_negatives.push_back(differentiate(nc[i], "n"));
  }
  return g;
}

GradCheckReport compare(const LossGrad& analytic, const LossGrad& numeric) {
  if (analytic.d_query.size() != numeric.d_query.size() ||
      analytic.d_positive.size() != numeric.d_positive.size() ||
      analytic.d_negatives.size() != numeric.d_negatives.size()) {
    throw std::invalid_argument("compare: shape mismatch");
  }
  GradCheckReport report;
  report.trials = 1;
  auto scan = [&report](const std::string& name, const Vec& a, const Vec& n) {
    if (a.size() != n.size()) {
      throw std::invalid_argument("compare: shape mismatch in " + name);
    }
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double denom =
          std::max({1e-8, std::abs(a[i]), std::abs(n[i])});
      const double rel = std::abs(a[i] - n[i]) / denom;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_tensor = name;
        report.worst_index = static_cast<int>(i);
      }
    }
  };
  scan("q", analytic.d_query, numeric.d_query);
  scan("p", analytic.d_positive, numeric.d_positive);
  for (std::size_t k = 0; k < analytic.d_negatives.size(); ++k) {
    scan("n" + std::to_string(k), analytic.d_negatives[k],
         numeric.d_negatives[k]);
  }
  return report;
}

void sample_probe_tuple(const LossSpec& spec, const GradCheckConfig& config,
                        std::mt19937_64& rng, Vec& q, Vec& p,
                        std::vector<Vec>& negatives) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double log_lo = std::log(0.35);
  const double log_hi = std::log(2.5);
  const int max_attempts = 10000;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    q = random_unit(rng, config.dim);
    auto near_q = [&]() {
      const double scale = std::exp(log_lo + (log_hi - log_lo) * uni(rng));
      Vec offset(config.dim);
      for (int i = 0; i < config.dim; ++i) offset[i] = gauss(rng);
      return l2_normalize(q + scale * offset);
    };
    p = near_q();
    negatives.clear();
    for (int i = 0; i < config.n_negatives; ++i) negatives.push_back(near_q());

    if (!away_from_kinks(spec, q, p, negatives, 10.0 * config.eps)) continue;
    const LossGrad analytic = evaluate_tuple(spec, q, p, negatives);
    double smallest = min_nonzero_abs(analytic.d_query);
    smallest = std::min(smallest, min_nonzero_abs(analytic.d_positive));
    for (const Vec& dn : analytic.d_negatives) {
      smallest = std::min(smallest, min_nonzero_abs(dn));
    }
    if (smallest < config.coordinate_floor) continue;
    return;
  }
  throw std::runtime_error(
      "sample_probe_tuple: no acceptable tuple after " +
      std::to_string(max_attempts) + " attempts");
}

GradCheckReport run_random_trials(const LossSpec& spec,
                                  const GradCheckConfig& config) {
  check_eps(config.eps);
  if (config.trials < 1) {
    throw std::invalid_argument("gradcheck: trials must be >= 1");
  }
  std::mt19937_64 rng(config.seed);
  GradCheckReport worst;
  worst.trials = config.trials;
  worst.eps = config.eps;
  Vec q, p;
  std::vector<Vec> negatives;
  for (int trial = 0; trial < config.trials; ++trial) {
    sample_probe_tuple(spec, config, rng, q, p, negatives);
    const LossGrad analytic = evaluate_tuple(spec, q, p, negatives);
    const LossGrad numeric =
        finite_difference_gradients(spec, q, p, negatives, config.eps);
    GradCheckReport r = compare(analytic, numeric);
    if (r.max_relative_error > worst.max_relative_error) {
      worst.max_relative_error = r.max_relative_error;
      worst.worst_tensor = r.worst_tensor;
      worst.worst_index = r.worst_index;
    }
  }
  return worst;
}

}  // namespace sare
