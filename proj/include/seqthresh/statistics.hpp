#pragma once

#include <cstddef>
#include <span>

#include "seqthresh/distributions.hpp"

namespace seqthresh {

/// One realized test statistic T_{i,m}^{(k)}. Stored as the model's
/// sufficient statistic, which is monotone in the summed log-likelihood
/// ratio, so thresholding either gives the same decision.
struct TestStatistic {
  double value = 0.0;
  int sample_count = 0;
  std::size_t component = 0;
  int pass = 0;  // 0 for the non-sequential test
};

/// Sample mean (Gaussian), sum of energies (Gamma) or sum of counts (Poisson).
double sufficient_statistic(const ObservationModel& model,
                            std::span<const double> samples);

TestStatistic compute_statistic(const ObservationModel& model,
                                std::span<const double> samples,
                                std::size_t component = 0, int pass = 0);

/// Sum of per-observation log-likelihood ratios.
double summed_llr(const ObservationModel& model, std::span<const double> samples);

/// Strictly on the alternative side of gamma0. A value equal to gamma0 never
/// survives.
inline bool exceeds_threshold(double value, double gamma0, Direction direction) {
  return direction == Direction::AlternativeAbove ? value > gamma0 : value < gamma0;
}

inline bool exceeds_threshold(const TestStatistic& stat, double gamma0,
                              Direction direction) {
  return exceeds_threshold(stat.value, gamma0, direction);
}

}  // namespace seqthresh
