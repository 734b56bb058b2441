#include "sare/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sare {

namespace {

// log(1 + exp(s)) without overflow for large |s|.
double log1p_exp(double s) {
  if (s > 0.0) return s + std::log1p(std::exp(-s));
  return std::log1p(std::exp(s));
}

// 1 / (1 + exp(-s)) without overflow for large |s|.
double logistic(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double log_kernel(KernelKind kernel, double d2) {
  switch (kernel) {
    case KernelKind::kGaussian: return -d2;
    case KernelKind::kCauchy: return -std::log1p(d2);
    case KernelKind::kExponential: return -std::sqrt(d2);
  }
  throw std::logic_error("unknown kernel");
}

void require_negatives(const std::vector<Vec>& negatives) {
  if (negatives.empty()) {
    throw std::invalid_argument("sare: negatives must be nonempty");
  }
}

LossGrad zero_grad(const Vec& q, std::size_t n_negatives) {
  LossGrad g;
  g.d_query = Vec::Zero(q.size());
  g.d_positive = Vec::Zero(q.size());
  g.d_negatives.assign(n_negatives, Vec::Zero(q.size()));
  return g;
}

// Single-negative SARE per the gradient table. omc = 1 - c_{p|q}.
LossGrad sare_single(const Vec& q, const Vec& p, const Vec& n,
                     KernelKind kernel) {
  LossGrad g = zero_grad(q, 1);
  const double d2p = l2_distance_squared(q, p);
  const double d2n = l2_distance_squared(q, n);
  switch (kernel) {
    case KernelKind::kGaussian: {
      const double s = d2p - d2n;
      const double omc = logistic(s);
      g.loss = log1p_exp(s);
      g.d_positive = 2.0 * omc * (p - q);
      g.d_negatives[0] = 2.0 * omc * (q - n);
      g.d_query = 2.0 * omc * (q - p) - 2.0 * omc * (q - n);
      return g;
    }
    case KernelKind::kCauchy: {
      const double r = (1.0 + d2p) / (1.0 + d2n);
      const double omc = r / (1.0 + r);
      g.loss = std::log1p(r);
      g.d_positive = 2.0 * omc / (1.0 + d2p) * (p - q);
      g.d_negatives[0] = 2.0 * omc / (1.0 + d2n) * (q - n);
      g.d_query = 2.0 * omc *
                  ((q - p) / (1.0 + d2p) - (q - n) / (1.0 + d2n));
      return g;
    }
    case KernelKind::kExponential: {
      const double dp = std::sqrt(d2p);
      const double dn = std::sqrt(d2n);
      if (dp == 0.0 || dn == 0.0) {
        throw std::domain_error(
            "sare: exponential kernel gradient undefined at distance 0");
      }
      const double s = dp - dn;
      const double omc = logistic(s);
      g.loss = log1p_exp(s);
      g.d_positive = omc * (p - q) / dp;
      g.d_negatives[0] = omc * (q - n) / dn;
      g.d_query = omc * ((q - p) / dp - (q - n) / dn);
      return g;
    }
  }
  throw std::logic_error("unknown kernel");
}

LossGrad sare_joint(const Vec& q, const Vec& p, const std::vector<Vec>& negs,
                    KernelKind kernel) {
  const std::size_t n_neg = negs.size();
  LossGrad g = zero_grad(q, n_neg);
  const double d2p = l2_distance_squared(q, p);
  std::vector<double> d2n(n_neg);
  for (std::size_t i = 0; i < n_neg; ++i) {
    d2n[i] = l2_distance_squared(q, negs[i]);
  }

  if (kernel == KernelKind::kCauchy) {
    // eta = 1 + sum_i (1+d2p)/(1+d2n_i); no exponentials, evaluate directly.
    double ratio_sum = 0.0;
    double inv_sum = 0.0;
    for (std::size_t i = 0; i < n_neg; ++i) {
      ratio_sum += (1.0 + d2p) / (1.0 + d2n[i]);
      inv_sum += 1.0 / (1.0 + d2n[i]);
    }
    const double eta = 1.0 + ratio_sum;
    g.loss = std::log1p(ratio_sum);
    g.d_positive = 2.0 / eta * inv_sum * (p - q);
    g.d_query = 2.0 / eta * inv_sum * (q - p);
    for (std::size_t i = 0; i < n_neg; ++i) {
      const double coef =
          2.0 * (1.0 + d2p) / (eta * (1.0 + d2n[i]) * (1.0 + d2n[i]));
      g.d_negatives[i] = coef * (q - negs[i]);
      g.d_query -= coef * (q - negs[i]);
    }
    return g;
  }

  // Gaussian / Exponential: loss = log(1 + sum_i exp(s_i)) with
  // s_i = logK(d_n_i) - logK(d_p); shift by the max exponent for stability.
  const bool exponential = kernel == KernelKind::kExponential;
  const double dp = std::sqrt(d2p);
  std::vector<double> dn(n_neg);
  std::vector<double> s(n_neg);
  for (std::size_t i = 0; i < n_neg; ++i) {
    dn[i] = std::sqrt(d2n[i]);
    s[i] = exponential ? dp - dn[i] : d2p - d2n[i];
  }
  if (exponential) {
    if (dp == 0.0 ||
        std::any_of(dn.begin(), dn.end(), [](double d) { return d == 0.0; })) {
      throw std::domain_error(
          "sare: exponential kernel gradient undefined at distance 0");
    }
  }
  const double shift = std::max(0.0, *std::max_element(s.begin(), s.end()));
  double t_sum = 0.0;
  std::vector<double> t(n_neg);
  for (std::size_t i = 0; i < n_neg; ++i) {
    t[i] = std::exp(s[i] - shift);
    t_sum += t[i];
  }
  const double total = std::exp(-shift) + t_sum;
  g.loss = shift + std::log(total);
  const double coef_sum = t_sum / total;
  if (exponential) {
    g.d_positive = coef_sum * (p - q) / dp;
    g.d_query = coef_sum * (q - p) / dp;
    for (std::size_t i = 0; i < n_neg; ++i) {
      const double coef = t[i] / total;
      g.d_negatives[i] = coef * (q - negs[i]) / dn[i];
      g.d_query -= coef * (q - negs[i]) / dn[i];
    }
  } else {
    g.d_positive = 2.0 * coef_sum * (p - q);
    g.d_query = 2.0 * coef_sum * (q - p);
    for (std::size_t i = 0; i < n_neg; ++i) {
      const double coef = t[i] / total;
      g.d_negatives[i] = 2.0 * coef * (q - negs[i]);
      g.d_query -= 2.0 * coef * (q - negs[i]);
    }
  }
  return g;
}

}  // namespace

MatchDistribution match_probability(const Vec& q, const Vec& p,
                                    const std::vector<Vec>& negatives,
                                    KernelKind kernel) {
  require_negatives(negatives);
  std::vector<double> log_k;
  log_k.reserve(negatives.size() + 1);
  log_k.push_back(log_kernel(kernel, l2_distance_squared(q, p)));
  for (const Vec& n : negatives) {
    log_k.push_back(log_kernel(kernel, l2_distance_squared(q, n)));
  }
  const double shift = *std::max_element(log_k.begin(), log_k.end());
  double denom = 0.0;
  std::vector<double> w(log_k.size());
  for (std::size_t i = 0; i < log_k.size(); ++i) {
    w[i] = std::exp(log_k[i] - shift);
    denom += w[i];
  }
  MatchDistribution dist;
  dist.prior_h.assign(log_k.size(), 0.0);
  dist.prior_h[0] = 1.0;
  dist.learned_c.resize(log_k.size());
  for (std::size_t i = 0; i < log_k.size(); ++i) {
    dist.learned_c[i] = w[i] / denom;
  }
  return dist;
}

LossGrad triplet_ranking(const Vec& q, const Vec& p, const Vec& n,
                         double margin_m) {
  if (!(margin_m > 0.0)) {
    throw std::invalid_argument("triplet_ranking: margin must be > 0");
  }
  LossGrad g = zero_grad(q, 1);
  const double hinge =
      margin_m + l2_distance_squared(q, p) - l2_distance_squared(q, n);
  if (hinge > 0.0) {
    g.loss = hinge;
    g.d_positive = 2.0 * (p - q);
    g.d_negatives[0] = 2.0 * (q - n);
    g.d_query = 2.0 * (q - p) - 2.0 * (q - n);
  }
  return g;
}

LossGrad contrastive(const Vec& a, const Vec& b, bool is_positive,
                     double margin_tau) {
  if (!(margin_tau > 0.0)) {
    throw std::invalid_argument("contrastive: margin must be > 0");
  }
  const double d2 = l2_distance_squared(a, b);
  LossGrad g = zero_grad(a, is_positive ? 0 : 1);
  if (is_positive) {
    g.loss = 0.5 * d2;
    g.d_positive = b - a;
    g.d_query = a - b;
    return g;
  }
  const double d = std::sqrt(d2);
  if (d == 0.0) {
    throw std::domain_error(
        "contrastive: negative pair at distance 0, gradient direction "
        "undefined");
  }
  if (d < margin_tau) {
    g.loss = 0.5 * (margin_tau - d) * (margin_tau - d);
    const double coef = (margin_tau - d) / d;
    g.d_negatives[0] = coef * (a - b);
    g.d_query = -coef * (a - b);
  }
  return g;
}

LossGrad sare(const Vec& q, const Vec& p, const std::vector<Vec>& negatives,
              KernelKind kernel, NegativeMode mode) {
  require_negatives(negatives);
  if (mode == NegativeMode::kJoint) {
    return sare_joint(q, p, negatives, kernel);
  }
  // Independent: averaged over the N single-negative triplets so the loss
  // scale stays comparable with joint mode.
  const double inv_n = 1.0 / static_cast<double>(negatives.size());
  LossGrad total = zero_grad(q, negatives.size());
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    LossGrad single = sare_single(q, p, negatives[i], kernel);
    total.loss += inv_n * single.loss;
    total.d_positive += inv_n * single.d_positive;
    total.d_query += inv_n * single.d_query;
    total.d_negatives[i] = inv_n * single.d_negatives[0];
  }
  return total;
}

LossGrad evaluate_tuple(const LossSpec& spec, const Vec& q, const Vec& p,
                        const std::vector<Vec>& negatives) {
  spec.validate();
  require_negatives(negatives);
  switch (spec.family) {
    case LossFamily::kSare:
      return sare(q, p, negatives, spec.kernel, spec.negative_mode);
    case LossFamily::kTripletRanking: {
      const double inv_n = 1.0 / static_cast<double>(negatives.size());
      LossGrad total = zero_grad(q, negatives.size());
      for (std::size_t i = 0; i < negatives.size(); ++i) {
        LossGrad single = triplet_ranking(q, p, negatives[i], spec.margin_m);
        total.loss += inv_n * single.loss;
        total.d_positive += inv_n * single.d_positive;
        total.d_query += inv_n * single.d_query;
        total.d_negatives[i] = inv_n * single.d_negatives[0];
      }
      return total;
    }
    case LossFamily::kContrastive: {
      // The tuple decomposes into one positive pair and N negative pairs;
      // each pair contributes its own loss.
      LossGrad total = zero_grad(q, negatives.size());
      LossGrad pos = contrastive(q, p, /*is_positive=*/true, spec.margin_tau);
      total.loss = pos.loss;
      total.d_positive = pos.d_positive;
      total.d_query = pos.d_query;
      for (std::size_t i = 0; i < negatives.size(); ++i) {
        LossGrad neg =
            contrastive(q, negatives[i], /*is_positive=*/false,
                        spec.margin_tau);
        total.loss += neg.loss;
        total.d_negatives[i] = neg.d_negatives[0];
        total.d_query += neg.d_query;
      }
      return total;
    }
  }
  throw std::logic_error("unknown loss family");
}

}  // namespace sare
