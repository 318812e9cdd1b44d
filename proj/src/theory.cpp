#include "seqthresh/theory.hpp"

#include <cmath>

#include "seqthresh/error.hpp"

namespace seqthresh {

namespace {

void check_problem(std::size_t n, std::size_t s, int m, double epsilon) {
  if (s < 2 || s >= n) fail(ErrorKind::Parameter, "boundaries: requires 2 <= s < n");
  if (m < 1) fail(ErrorKind::Parameter, "boundaries: requires m >= 1");
  if (!(epsilon >= 0.0)) fail(ErrorKind::Parameter, "boundaries: requires epsilon >= 0");
}

BoundaryReport base_report(Family family, std::size_t n, std::size_t s, int m, double epsilon,
                           double error_target) {
  check_problem(n, s, m, epsilon);
  BoundaryReport r;
  r.family = family;
  r.n = n;
  r.s = s;
  r.m = m;
  r.epsilon = epsilon;
  r.passes = theory_passes(n, epsilon);
  r.error_target = error_target;
  r.sprt_necessary_divergence = sprt_necessary_divergence(n, s, m, error_target);
  return r;
}

}  // namespace

double theory_passes(std::size_t n, double epsilon) {
  return (1.0 + epsilon) * std::log2(static_cast<double>(n));
}

BoundaryReport gaussian_boundaries(std::size_t n, std::size_t s, int m, double epsilon,
                                   double error_target) {
  auto r = base_report(Family::GaussianUnitVar, n, s, m, epsilon, error_target);
  const double ds = static_cast<double>(s);
  r.ns_unreliable_below = std::sqrt(std::log(static_cast<double>(n - s)) / m);
  r.seq_reliable_beyond = std::sqrt(2.0 / m * std::log(r.passes * ds));
  r.seq_reliable_beyond_as_stated =
      std::sqrt(2.0 / m * std::log(ds * std::log2(static_cast<double>(n))));
  return r;
}

BoundaryReport gamma_boundaries(std::size_t n, std::size_t s, int m, double epsilon,
                                double error_target) {
  if (m < 2) {
    fail(ErrorKind::DegenerateBoundary,
         "gamma boundaries are degenerate at m = 1 (2(m-1) = 0); use m >= 2");
  }
  auto r = base_report(Family::GammaEnergy, n, s, m, epsilon, error_target);
  const double ds = static_cast<double>(s);
  r.ns_unreliable_below =
      2.0 * (m - 1) * std::pow(static_cast<double>(n - s), 1.0 / (2.0 * m));
  r.seq_reliable_beyond = std::log(r.passes * ds) / (m - 1);
  r.seq_reliable_beyond_as_stated = std::log(ds * std::log2(static_cast<double>(n))) / m;
  return r;
}

BoundaryReport poisson_boundaries(std::size_t n, std::size_t s, int m, double epsilon,
                                  double error_target) {
  auto r = base_report(Family::PoissonCount, n, s, m, epsilon, error_target);
  const double ds = static_cast<double>(s);
  r.ns_unreliable_below = std::log(static_cast<double>(n - s)) / (2.0 * m);
  r.seq_reliable_beyond = (std::log(r.passes * ds) + 1.0) / m;
  r.seq_reliable_beyond_as_stated =
      (std::log(ds * std::log2(static_cast<double>(n))) + 1.0) / m;
  return r;
}

BoundaryReport boundaries(Family family, std::size_t n, std::size_t s, int m, double epsilon,
                          double error_target) {
  switch (family) {
    case Family::GaussianUnitVar: return gaussian_boundaries(n, s, m, epsilon, error_target);
    case Family::GammaEnergy: return gamma_boundaries(n, s, m, epsilon, error_target);
    case Family::PoissonCount: return poisson_boundaries(n, s, m, epsilon, error_target);
  }
  return {};
}

double sprt_necessary_divergence(std::size_t /*n*/, std::size_t s, int m,
                                 double error_target) {
  if (!(error_target > 0.0 && error_target < 1.0)) {
    fail(ErrorKind::Parameter, "sprt_necessary_divergence: error target must lie in (0, 1)");
  }
  if (m < 1) fail(ErrorKind::Parameter, "sprt_necessary_divergence: m must be >= 1");
  return std::log(static_cast<double>(s) / error_target) / (2.0 * m);
}

double kl_null_to_alt(const ObservationModel& model) {
  model.validate();
  const double t0 = model.theta0;
  const double t1 = model.theta1;
  switch (model.family) {
    case Family::GaussianUnitVar: return 0.5 * (t1 - t0) * (t1 - t0);
    // Exponential with mean theta.
    case Family::GammaEnergy: return std::log(t1 / t0) + t0 / t1 - 1.0;
    case Family::PoissonCount: return t0 * std::log(t0 / t1) - t0 + t1;
  }
  return 0.0;
}

double kl_alt_to_null(const ObservationModel& model) {
  model.validate();
  const double t0 = model.theta0;
  const double t1 = model.theta1;
  switch (model.family) {
    case Family::GaussianUnitVar: return 0.5 * (t1 - t0) * (t1 - t0);
    case Family::GammaEnergy: return std::log(t0 / t1) + t1 / t0 - 1.0;
    case Family::PoissonCount: return t1 * std::log(t1 / t0) - t1 + t0;
  }
  return 0.0;
}

LlrDrifts llr_drifts(const ObservationModel& model) {
  return {-kl_null_to_alt(model), kl_alt_to_null(model)};
}

WaldStops wald_expected_stops(double mu0, double mu1, double alpha, double beta) {
  if (!(mu0 < 0.0) || !(mu1 > 0.0)) {
    fail(ErrorKind::DriftSign, "wald_expected_stops: requires mu0 < 0 < mu1");
  }
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
    fail(ErrorKind::Parameter, "wald_expected_stops: alpha, beta must lie in (0, 1)");
  }
  const double log_b = std::log((1.0 - beta) / alpha);
  const double log_a = std::log(beta / (1.0 - alpha));
  return {(alpha * log_b + (1.0 - alpha) * log_a) / mu0,
          ((1.0 - beta) * log_b + beta * log_a) / mu1};
}

double gamma_min_limit(int m) {
  if (m < 1) fail(ErrorKind::Parameter, "gamma_min_limit: m must be >= 1");
  // 1/(2m)! via lgamma so large m underflows cleanly to 0.
  return -std::expm1(-std::exp(-std::lgamma(2.0 * m + 1.0)));
}

double gamma_min_probability(std::size_t n, std::size_t s, int m) {
  if (s >= n) fail(ErrorKind::Parameter, "gamma_min_probability: requires s < n");
  const double nulls = static_cast<double>(n - s);
  // Scale-free: P(T <= theta0 x) with T ~ Gamma(2m, theta0).
  const GammaLaw law{2 * m, 1.0};
  const double p = cdf(law, std::pow(nulls, -1.0 / (2.0 * m)));
  return -std::expm1(nulls * std::log1p(-p));
}

double poisson_min_zero_prob(std::size_t n, std::size_t s, int m, double theta0) {
  if (!(theta0 > 0.0)) fail(ErrorKind::Parameter, "poisson_min_zero_prob: theta0 must be > 0");
  if (s >= n) fail(ErrorKind::Parameter, "poisson_min_zero_prob: requires s < n");
  const double zero = std::exp(-2.0 * m * theta0);
  return -std::expm1(static_cast<double>(n - s) * std::log1p(-zero));
}

double poisson_chernoff_tail(double gamma, double rate) {
  if (!(rate > 0.0) || !(gamma > rate)) {
    fail(ErrorKind::BoundInapplicable,
         "poisson_chernoff_tail: requires gamma > rate > 0");
  }
  return std::exp(-rate - gamma * (std::log(gamma / rate) - 1.0));
}

double sequential_budget_bound(std::size_t n, std::size_t s, int m, int passes) {
  return 2.0 * m * static_cast<double>(n - s) +
         static_cast<double>(m) * static_cast<double>(s) * passes;
}

double sequential_expected_measurements(std::size_t n, std::size_t s, int m, int passes,
                                        double q_null, double q_alt) {
  double total = 0.0;
  double null_alive = static_cast<double>(n - s);
  double alt_alive = static_cast<double>(s);
  for (int k = 0; k < passes; ++k) {
    total += m * (null_alive + alt_alive);
    null_alive *= q_null;
    alt_alive *= q_alt;
  }
  return total;
}

double sequential_false_positive_bound(std::size_t n, std::size_t s, int passes) {
  return static_cast<double>(n - s) * std::ldexp(1.0, -passes);
}

}  // namespace seqthresh
