#ifndef SARE_GRADCHECK_HPP_
#define SARE_GRADCHECK_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sare/core.hpp"

namespace sare {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_tensor;  // "q", "p" or "n<i>"
  int worst_index = -1;
  int trials = 0;
  double eps = 0.0;
};

/// Central differences (L(x+eps*e_i) - L(x-eps*e_i)) / (2*eps) of the
/// tuple-level loss, per coordinate of q, p and every negative.
/// eps must lie in [1e-7, 1e-3]. Throws std::runtime_error naming the
/// offending coordinate if the loss turns non-finite while probing.
LossGrad finite_difference_gradients(const LossSpec& spec, const Vec& q,
                                     const Vec& p,
                                     const std::vector<Vec>& negatives,
                                     double eps = 1e-5);

/// Per-coordinate relative error |a-n| / max(1e-8, |a|, |n|); reports the
/// max and where it occurred. Throws std::invalid_argument on shape
/// mismatch.
GradCheckReport compare(const LossGrad& analytic, const LossGrad& numeric);

struct GradCheckConfig {
  int trials = 100;
  int dim = 32;
  int n_negatives = 10;
  double eps = 1e-5;
  std::uint64_t seed = 20240915;
  // Tuples are resampled until no nonzero analytic gradient coordinate is
  // smaller than this. Central differencing in double precision carries an
  // absolute noise floor around 1e-11; below ~1e-4 the per-coordinate
  // relative error is dominated by that noise rather than by the formula
  // under test, so such probe points certify nothing.
  double coordinate_floor = 1e-4;
};

/// Samples random normalized tuples away from hinge kinks (margin
/// boundaries, exponential kernel near d = 0) and ill-conditioned probe
/// points, then compares analytic against finite-difference gradients.
GradCheckReport run_random_trials(const LossSpec& spec,
                                  const GradCheckConfig& config);

/// One random probe tuple: q uniform on the sphere, p and the negatives
/// at log-uniform distance scales from q, rejected while too close to a
/// kink or carrying a gradient coordinate below the floor.
void sample_probe_tuple(const LossSpec& spec, const GradCheckConfig& config,
                        std::mt19937_64& rng, Vec& q, Vec& p,
                        std::vector<Vec>& negatives);

}  // namespace sare

#endif  // SARE_GRADCHECK_HPP_
