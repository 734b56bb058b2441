#ifndef SARE_LOSSES_HPP_
#define SARE_LOSSES_HPP_

#include <vector>

#include "sare/core.hpp"

namespace sare {

// Losses operate on arbitrary finite vectors; unit norm is a caller-side
// invariant (the finite-difference oracle perturbs off the sphere).
// Summation over negatives is fixed left-to-right, so results are
// bit-deterministic for identical inputs.

/// Kernel-derived match probabilities c_{p|q}, c_{n|q} over a tuple.
/// Gaussian kernel exp(-d^2), Cauchy 1/(1+d^2), Exponential exp(-d).
MatchDistribution match_probability(const Vec& q, const Vec& p,
                                    const std::vector<Vec>& negatives,
                                    KernelKind kernel);

/// Hinge on squared distances: max(0, m + d2(q,p) - d2(q,n)). The zero
/// branch (including the exact boundary) produces zero gradients.
LossGrad triplet_ranking(const Vec& q, const Vec& p, const Vec& n,
                         double margin_m);

/// Pairwise contrastive loss. Positive pair: 0.5*d2. Negative pair:
/// 0.5*max(0, tau - d)^2; gradient direction is undefined at d == 0
/// exactly, which throws std::domain_error. For a positive pair the
/// gradient w.r.t. b lands in d_positive, for a negative pair in
/// d_negatives[0].
LossGrad contrastive(const Vec& a, const Vec& b, bool is_positive,
                     double margin_tau);

/// KL-divergence attraction-repulsion loss, -log c_{p|q}.
/// Independent mode averages the N single-negative losses/gradients;
/// Joint mode uses the multi-negative match probability. The Exponential
/// kernel throws std::domain_error when d(q,p) or any d(q,n) is exactly 0
/// (its gradients carry a 1/d factor).
LossGrad sare(const Vec& q, const Vec& p, const std::vector<Vec>& negatives,
              KernelKind kernel, NegativeMode mode);

/// Tuple-level evaluation of any LossSpec. Triplet ranking averages the
/// per-negative triplets; contrastive sums the positive pair and every
/// negative pair of the tuple.
LossGrad evaluate_tuple(const LossSpec& spec, const Vec& q, const Vec& p,
                        const std::vector<Vec>& negatives);

}  // namespace sare

#endif  // SARE_LOSSES_HPP_
