#pragma once

#include <cstddef>

#include "seqthresh/distributions.hpp"

namespace seqthresh {

/// Reliability boundaries for one (family, n, s, m, epsilon). For the
/// Gaussian model the boundaries are values of theta1; for the Gamma and
/// Poisson models they are values of theta0. In every family a smaller
/// parameter is harder, so the sequential method is strictly more sensitive
/// whenever seq_reliable_beyond < ns_unreliable_below.
struct BoundaryReport {
  Family family = Family::GaussianUnitVar;
  std::size_t n = 0;
  std::size_t s = 0;
  int m = 1;
  double epsilon = 0.1;
  double passes = 0.0;  // K = (1 + epsilon) log2 n, not rounded
  /// Non-sequential testing is unreliable below this value.
  double ns_unreliable_below = 0.0;
  /// Sequential thresholding is reliable beyond this value (proof form, with K s).
  double seq_reliable_beyond = 0.0;
  /// Simplified form, with s log2 n in place of K s (and m in
  /// place of m - 1 for the Gamma model).
  double seq_reliable_beyond_as_stated = 0.0;
  double error_target = 0.1;
  /// (1/2m) log(s / error_target).
  double sprt_necessary_divergence = 0.0;

  bool sequential_gap() const { return seq_reliable_beyond < ns_unreliable_below; }
};

/// (1 + epsilon) log2 n.
double theory_passes(std::size_t n, double epsilon);

BoundaryReport gaussian_boundaries(std::size_t n, std::size_t s, int m, double epsilon,
                                   double error_target = 0.1);
BoundaryReport gamma_boundaries(std::size_t n, std::size_t s, int m, double epsilon,
                                double error_target = 0.1);
BoundaryReport poisson_boundaries(std::size_t n, std::size_t s, int m, double epsilon,
                                  double error_target = 0.1);
BoundaryReport boundaries(Family family, std::size_t n, std::size_t s, int m, double epsilon,
                          double error_target = 0.1);

/// (1/2m) log(s / error_target): the divergence any component-wise sequential
/// test needs to stay within a 2mn budget. Holds up to constant factors.
double sprt_necessary_divergence(std::size_t n, std::size_t s, int m, double error_target);

/// D0 = D(f(.|theta0) || f(.|theta1)) per observation, closed form.
double kl_null_to_alt(const ObservationModel& model);
/// D1 = D(f(.|theta1) || f(.|theta0)) per observation, closed form.
double kl_alt_to_null(const ObservationModel& model);

/// Means of the per-observation log-likelihood ratio under null and
/// alternative: mu0 = -D0, mu1 = D1.
struct LlrDrifts {
  double mu0 = 0.0;
  double mu1 = 0.0;
};

LlrDrifts llr_drifts(const ObservationModel& model);

struct WaldStops {
  double under_null = 0.0;
  double under_alternative = 0.0;
};

/// Wald's approximations to the expected SPRT stopping time under each
/// hypothesis. Requires mu0 < 0 < mu1.
WaldStops wald_expected_stops(double mu0, double mu1, double alpha, double beta);

/// 1 - exp(-1/(2m)!): the large-n limit of P(min null T_{i,2m} <= theta0 (n-s)^{-1/2m})
/// in the Gamma model.
double gamma_min_limit(int m);

/// The same probability at finite n, exactly.
double gamma_min_probability(std::size_t n, std::size_t s, int m);

/// 1 - (1 - e^{-2 m theta0})^{n-s}: probability that the smallest of n - s
/// null Poisson(2 m theta0) statistics is zero.
double poisson_min_zero_prob(std::size_t n, std::size_t s, int m, double theta0);

/// Chernoff bound exp(-rate - gamma (log(gamma/rate) - 1)) on P(Poisson(rate) >= gamma).
double poisson_chernoff_tail(double gamma, double rate);

/// 2m(n - s) + m s K: the expected-measurement bound for sequential thresholding.
double sequential_budget_bound(std::size_t n, std::size_t s, int m, int passes);

/// Exact expected measurements of sequential thresholding with null survival
/// probability q_null and alternative survival probability q_alt per pass.
double sequential_expected_measurements(std::size_t n, std::size_t s, int m, int passes,
                                        double q_null, double q_alt);

/// (n - s) / 2^K: union bound on the false-positive probability.
double sequential_false_positive_bound(std::size_t n, std::size_t s, int passes);

}  // namespace seqthresh
