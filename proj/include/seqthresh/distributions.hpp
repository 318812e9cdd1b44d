#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "seqthresh/rng.hpp"

namespace seqthresh {

enum class Family { GaussianUnitVar, GammaEnergy, PoissonCount };

/// Which side of the threshold looks like the alternative.
enum class Direction { AlternativeAbove, AlternativeBelow };

const char* to_string(Family family);
const char* to_string(Direction direction);
Family parse_family(const std::string& name);

/// Per-observation law f(.|theta) with a simple null theta0 and simple
/// alternative theta1.
///
///   GaussianUnitVar  N(theta, 1),           theta1 > theta0, alternative above
///   GammaEnergy      |CN(0, theta)|^2,      theta0 > theta1 = 1, alternative below
///   PoissonCount     Poisson(theta),        theta0 > theta1 > 0, alternative below
///
/// theta1 == theta0 is accepted as a degenerate (indistinguishable) model.
struct ObservationModel {
  Family family = Family::GaussianUnitVar;
  double theta0 = 0.0;
  double theta1 = 1.0;
  Direction direction = Direction::AlternativeAbove;

  static ObservationModel gaussian(double theta0, double theta1);
  static ObservationModel gamma_energy(double theta0, double theta1 = 1.0);
  static ObservationModel poisson(double theta0, double theta1);

  double theta(bool under_alternative) const {
    return under_alternative ? theta1 : theta0;
  }

  bool continuous() const { return family != Family::PoissonCount; }

  /// Throws Error(Parameter) if the family invariants do not hold.
  void validate() const;
};

struct NormalLaw {
  double mean = 0.0;
  double variance = 1.0;
};

/// Integer shape only: statistics are sums of m exponentials.
struct GammaLaw {
  int shape = 1;
  double scale = 1.0;
};

struct PoissonLaw {
  double rate = 1.0;
};

/// Law of a test statistic.
using StatDistribution = std::variant<NormalLaw, GammaLaw, PoissonLaw>;

double mean(const StatDistribution& dist);
double stddev(const StatDistribution& dist);

/// Fill `out` with independent draws from f(.|theta1) or f(.|theta0).
void sample_into(const ObservationModel& model, bool under_alternative,
                 std::span<double> out, Stream& rng);

std::vector<double> sample(const ObservationModel& model, bool under_alternative,
                           std::size_t count, Stream& rng);

/// log f(y|theta1) - log f(y|theta0).
double log_likelihood_ratio(const ObservationModel& model, double y);

/// Exact law of the sufficient statistic built from m observations:
/// sample mean (Gaussian), sum of energies (Gamma), sum of counts (Poisson).
StatDistribution statistic_distribution(const ObservationModel& model,
                                        bool under_alternative, int m);

/// P(T <= x).
double cdf(const StatDistribution& dist, double x);

/// P(T > x), computed without cancellation in the upper tail.
double survival(const StatDistribution& dist, double x);

/// P(X >= k) for X ~ Poisson(rate), summed directly over the tail.
double poisson_tail_at_least(double k, double rate);

double poisson_pmf(std::int64_t k, double rate);

/// Continuous laws: the x with cdf(x) = p (bisection to 1e-14 relative).
/// Poisson: smallest integer x with cdf(x) >= p.
double quantile(const StatDistribution& dist, double p);

/// Median of the null statistic from m observations: the sequential
/// threshold gamma0.
double null_median(const ObservationModel& model, int m);

}  // namespace seqthresh
