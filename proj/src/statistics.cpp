#include "seqthresh/statistics.hpp"

#include <cmath>

#include "seqthresh/error.hpp"

namespace seqthresh {

double sufficient_statistic(const ObservationModel& model,
                            std::span<const double> samples) {
  double sum = 0.0;
  for (double y : samples) sum += y;
  if (model.family == Family::GaussianUnitVar) {
    return sum / static_cast<double>(samples.size());
  }
  return sum;
}

TestStatistic compute_statistic(const ObservationModel& model,
                                std::span<const double> samples,
                                std::size_t component, int pass) {
  if (samples.empty()) fail(ErrorKind::Usage, "compute_statistic: empty sample list");
  for (double y : samples) {
    if (model.family != Family::GaussianUnitVar && !(y >= 0.0)) {
      fail(ErrorKind::Domain, "compute_statistic: sample outside the model support");
    }
    if (model.family == Family::PoissonCount && y != std::floor(y)) {
      fail(ErrorKind::Domain, "compute_statistic: poisson samples must be integers");
    }
  }
  return TestStatistic{sufficient_statistic(model, samples),
                       static_cast<int>(samples.size()), component, pass};
}

double summed_llr(const ObservationModel& model, std::span<const double> samples) {
  double sum = 0.0;
  for (double y : samples) sum += log_likelihood_ratio(model, y);
  return sum;
}

}  // namespace seqthresh
