#include "seqthresh/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "seqthresh/error.hpp"

namespace seqthresh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string describe(const ObservationModel& model) {
  std::ostringstream os;
  os << to_string(model.family) << "(theta0=" << model.theta0
     << ", theta1=" << model.theta1 << ")";
  return os.str();
}

// e^{-x} x^l / l! in log space.
double log_poisson_term(double x, double l) {
  if (x == 0.0) return l == 0.0 ? 0.0 : -kInf;
  return -x + l * std::log(x) - std::lgamma(l + 1.0);
}

// Lower regularized gamma P(k, x) for integer k, x < k:
// e^{-x} sum_{l >= k} x^l / l!; terms shrink monotonically past l = k.
double gamma_lower_series(int k, double x) {
  double term = std::exp(log_poisson_term(x, k));
  double sum = 0.0;
  for (int l = k; term > 0.0; ++l) {
    sum += term;
    if (term < sum * 1e-17) break;
    term *= x / (l + 1);
  }
  return std::min(sum, 1.0);
}

// Upper regularized gamma Q(k, x) = e^{-x} sum_{l < k} x^l / l!, the finite
// closed form. Summed from the largest term down.
double gamma_upper_finite(int k, double x) {
  double term = std::exp(log_poisson_term(x, k - 1));
  double sum = 0.0;
  for (int l = k - 1; l >= 0 && term > 0.0; --l) {
    sum += term;
    if (term < sum * 1e-17) break;
    term *= l / x;
  }
  return std::min(sum, 1.0);
}

double normal_cdf(const NormalLaw& law, double x) {
  return 0.5 * std::erfc(-(x - law.mean) / std::sqrt(2.0 * law.variance));
}

double normal_survival(const NormalLaw& law, double x) {
  return 0.5 * std::erfc((x - law.mean) / std::sqrt(2.0 * law.variance));
}

double gamma_cdf(const GammaLaw& law, double x) {
  if (!(x > 0.0)) return 0.0;
  if (x == kInf) return 1.0;
  const double z = x / law.scale;
  if (z < law.shape) return gamma_lower_series(law.shape, z);
  return 1.0 - gamma_upper_finite(law.shape, z);
}

double gamma_survival(const GammaLaw& law, double x) {
  if (!(x > 0.0)) return 1.0;
  if (x == kInf) return 0.0;
  const double z = x / law.scale;
  if (z < law.shape) return 1.0 - gamma_lower_series(law.shape, z);
  return gamma_upper_finite(law.shape, z);
}

// P(X <= k) for k below the mean: sum pmf from k downwards.
double poisson_lower_sum(double k, double rate) {
  double term = std::exp(log_poisson_term(rate, k));
  double sum = 0.0;
  for (double j = k; j >= 0.0 && term > 0.0; j -= 1.0) {
    sum += term;
    if (term < sum * 1e-17) break;
    term *= j / rate;
  }
  return std::min(sum, 1.0);
}

double poisson_cdf(const PoissonLaw& law, double x) {
  if (x < 0.0) return 0.0;
  if (x == kInf) return 1.0;
  const double k = std::floor(x);
  if (k >= law.rate) return 1.0 - poisson_tail_at_least(k + 1.0, law.rate);
  return poisson_lower_sum(k, law.rate);
}

template <class Cdf>
double bisect(Cdf&& cdf_at, double p, double lo, double hi) {
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double c = cdf_at(mid);
    if (c == p) return mid;
    if (c < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

const char* to_string(Family family) {
  switch (family) {
    case Family::GaussianUnitVar: return "gaussian";
    case Family::GammaEnergy: return "gamma";
    case Family::PoissonCount: return "poisson";
  }
  return "unknown";
}

const char* to_string(Direction direction) {
  return direction == Direction::AlternativeAbove ? "above" : "below";
}

Family parse_family(const std::string& name) {
  if (name == "gaussian") return Family::GaussianUnitVar;
  if (name == "gamma") return Family::GammaEnergy;
  if (name == "poisson") return Family::PoissonCount;
  fail(ErrorKind::Parameter,
       "unknown model family '" + name + "' (expected gaussian, gamma or poisson)");
}

ObservationModel ObservationModel::gaussian(double theta0, double theta1) {
  ObservationModel model{Family::GaussianUnitVar, theta0, theta1,
                         Direction::AlternativeAbove};
  model.validate();
  return model;
}

ObservationModel ObservationModel::gamma_energy(double theta0, double theta1) {
  ObservationModel model{Family::GammaEnergy, theta0, theta1,
                         Direction::AlternativeBelow};
  model.validate();
  return model;
}

ObservationModel ObservationModel::poisson(double theta0, double theta1) {
  ObservationModel model{Family::PoissonCount, theta0, theta1,
                         Direction::AlternativeBelow};
  model.validate();
  return model;
}

void ObservationModel::validate() const {
  if (!std::isfinite(theta0) || !std::isfinite(theta1)) {
    fail(ErrorKind::Parameter, describe(*this) + ": parameters must be finite");
  }
  switch (family) {
    case Family::GaussianUnitVar:
      if (direction != Direction::AlternativeAbove) {
        fail(ErrorKind::Parameter,
             describe(*this) + ": gaussian model requires direction=above");
      }
      if (theta1 < theta0) {
        fail(ErrorKind::Parameter,
             describe(*this) + ": gaussian model requires theta1 >= theta0");
      }
      break;
    case Family::GammaEnergy:
      if (direction != Direction::AlternativeBelow) {
        fail(ErrorKind::Parameter,
             describe(*this) + ": gamma model requires direction=below");
      }
      if (theta1 != 1.0) {
        fail(ErrorKind::Parameter,
             describe(*this) + ": gamma model requires theta1 = 1");
      }
      if (theta0 < theta1) {
        fail(ErrorKind::Parameter,
             describe(*this) + ": gamma model requires theta0 >= theta1");
      }
      break;
    case Family::PoissonCount:
      if (direction != Direction::AlternativeBelow) {
        fail(ErrorKind::Parameter,
             describe(*this) + ": poisson model requires direction=below");
      }
      if (!(theta1 > 0.0)) {
        fail(ErrorKind::Parameter,
             describe(*this) + ": poisson model requires theta1 > 0");
      }
      if (theta0 < theta1) {
        fail(ErrorKind::Parameter,
             describe(*this) + ": poisson model requires theta0 >= theta1");
      }
      break;
  }
}

double mean(const StatDistribution& dist) {
  return std::visit(
      Overloaded{[](const NormalLaw& d) { return d.mean; },
                 [](const GammaLaw& d) { return d.shape * d.scale; },
                 [](const PoissonLaw& d) { return d.rate; }},
      dist);
}

double stddev(const StatDistribution& dist) {
  return std::visit(
      Overloaded{[](const NormalLaw& d) { return std::sqrt(d.variance); },
                 [](const GammaLaw& d) { return std::sqrt(double(d.shape)) * d.scale; },
                 [](const PoissonLaw& d) { return std::sqrt(d.rate); }},
      dist);
}

void sample_into(const ObservationModel& model, bool under_alternative,
                 std::span<double> out, Stream& rng) {
  const double theta = model.theta(under_alternative);
  switch (model.family) {
    case Family::GaussianUnitVar: {
      std::normal_distribution<double> normal(theta, 1.0);
      for (double& y : out) y = normal(rng);
      break;
    }
    case Family::GammaEnergy: {
      // |CN(0, theta)|^2 is exponential with mean theta.
      std::exponential_distribution<double> energy(1.0 / theta);
      for (double& y : out) y = energy(rng);
      break;
    }
    case Family::PoissonCount: {
      std::poisson_distribution<std::int64_t> counts(theta);
      for (double& y : out) y = static_cast<double>(counts(rng));
      break;
    }
  }
}

std::vector<double> sample(const ObservationModel& model, bool under_alternative,
                           std::size_t count, Stream& rng) {
  model.validate();
  if (count == 0) fail(ErrorKind::Domain, "sample: count must be >= 1");
  std::vector<double> out(count);
  sample_into(model, under_alternative, out, rng);
  return out;
}

double log_likelihood_ratio(const ObservationModel& model, double y) {
  const double t0 = model.theta0;
  const double t1 = model.theta1;
  switch (model.family) {
    case Family::GaussianUnitVar:
      return (t1 - t0) * y - 0.5 * (t1 * t1 - t0 * t0);
    case Family::GammaEnergy:
      if (!(y >= 0.0)) fail(ErrorKind::Domain, "gamma observation must be >= 0");
      return std::log(t0 / t1) + y * (1.0 / t0 - 1.0 / t1);
    case Family::PoissonCount:
      if (!(y >= 0.0) || y != std::floor(y)) {
        fail(ErrorKind::Domain, "poisson observation must be a nonnegative integer");
      }
      return y * std::log(t1 / t0) - (t1 - t0);
  }
  return 0.0;
}

StatDistribution statistic_distribution(const ObservationModel& model,
                                        bool under_alternative, int m) {
  model.validate();
  if (m < 1) fail(ErrorKind::Domain, "statistic_distribution: m must be >= 1");
  const double theta = model.theta(under_alternative);
  switch (model.family) {
    case Family::GaussianUnitVar: return NormalLaw{theta, 1.0 / m};
    case Family::GammaEnergy: return GammaLaw{m, theta};
    case Family::PoissonCount: return PoissonLaw{m * theta};
  }
  return NormalLaw{};
}

double cdf(const StatDistribution& dist, double x) {
  if (std::isnan(x)) return x;
  return std::visit(
      Overloaded{[x](const NormalLaw& d) { return normal_cdf(d, x); },
                 [x](const GammaLaw& d) { return gamma_cdf(d, x); },
                 [x](const PoissonLaw& d) { return poisson_cdf(d, x); }},
      dist);
}

double survival(const StatDistribution& dist, double x) {
  if (std::isnan(x)) return x;
  return std::visit(
      Overloaded{[x](const NormalLaw& d) { return normal_survival(d, x); },
                 [x](const GammaLaw& d) { return gamma_survival(d, x); },
                 [x](const PoissonLaw& d) {
                   if (x < 0.0) return 1.0;
                   return poisson_tail_at_least(std::floor(x) + 1.0, d.rate);
                 }},
      dist);
}

double poisson_pmf(std::int64_t k, double rate) {
  if (k < 0) return 0.0;
  return std::exp(log_poisson_term(rate, static_cast<double>(k)));
}

double poisson_tail_at_least(double k, double rate) {
  k = std::ceil(k);
  if (k <= 0.0) return 1.0;
  if (k <= rate) return 1.0 - poisson_lower_sum(k - 1.0, rate);
  double term = std::exp(log_poisson_term(rate, k));
  double sum = 0.0;
  for (double j = k; term > 0.0; j += 1.0) {
    sum += term;
    if (term < sum * 1e-17) break;
    term *= rate / (j + 1.0);
  }
  return std::min(sum, 1.0);
}

double quantile(const StatDistribution& dist, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorKind::Domain, "quantile: p must lie in (0, 1)");
  }
  return std::visit(
      Overloaded{
          [p](const NormalLaw& d) {
            const double sd = std::sqrt(d.variance);
            return bisect([&](double x) { return normal_cdf(d, x); }, p,
                          d.mean - 40.0 * sd, d.mean + 40.0 * sd);
          },
          [p](const GammaLaw& d) {
            const double hi = d.shape * d.scale + 40.0 * std::sqrt(double(d.shape)) * d.scale;
            return bisect([&](double x) { return gamma_cdf(d, x); }, p, 0.0, hi);
          },
          [p](const PoissonLaw& d) {
            double acc = 0.0;
            for (double k = 0.0;; k += 1.0) {
              acc += std::exp(log_poisson_term(d.rate, k));
              if (acc >= p) return k;
              // Past the bulk, switch to the tail routine to avoid drift
              // from accumulated rounding.
              if (k > d.rate + 50.0 * std::sqrt(d.rate) + 50.0) {
                while (poisson_cdf(d, k) < p) k += 1.0;
                return k;
              }
            }
          }},
      dist);
}

double null_median(const ObservationModel& model, int m) {
  return quantile(statistic_distribution(model, false, m), 0.5);
}

}  // namespace seqthresh
