#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqthresh/distributions.hpp"

namespace seqthresh {

/// One support-recovery problem: n components, of which those listed in
/// `support` follow the alternative. Observation streams are keyed by
/// (seed, component, pass).
struct ProblemInstance {
  std::size_t n = 0;
  std::size_t s = 0;
  int m = 1;
  std::vector<std::size_t> support;  // sorted, unique
  std::uint64_t seed = 0;

  /// Sorts the support and checks |support| = s < n, indices in [0, n).
  static ProblemInstance make(std::size_t n, int m, std::vector<std::size_t> support,
                              std::uint64_t seed);

  void validate() const;

  /// membership()[i] != 0 iff i is in the support.
  std::vector<std::uint8_t> membership() const;
};

enum class BudgetMode { Expectation, HardCap };

const char* to_string(BudgetMode mode);

struct SequentialConfig {
  double epsilon = 0.1;
  /// Number of passes K; derived as ceil((1 + epsilon) log2 n) when empty.
  std::optional<int> passes;
  /// Null quantile defining gamma0. In the alternative-above direction
  /// gamma0 = Q(q); in the alternative-below direction gamma0 = Q(1 - q).
  /// Either way a null component survives a pass with probability 1 - q.
  double threshold_quantile = 0.5;
  BudgetMode budget_mode = BudgetMode::Expectation;

  int resolve_passes(std::size_t n) const;
  void validate() const;
};

/// ceil((1 + epsilon) log2 n), at least 1.
int default_passes(std::size_t n, double epsilon);

/// The per-pass threshold gamma0 for m observations.
double sequential_threshold(const ObservationModel& model, int m, double threshold_quantile);

struct ProcedureOutcome {
  std::vector<std::size_t> estimated_support;  // sorted
  std::uint64_t measurements_used = 0;
  /// |S_k| for k = 0..K. Padded with the last value when truncated.
  std::vector<std::size_t> pass_survivors;
  /// Null components among |S_k|, same indexing.
  std::vector<std::size_t> null_pass_survivors;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  bool truncated = false;
  std::string warning;

  bool exact_recovery() const { return false_positives == 0 && false_negatives == 0; }
};

struct SprtSpec {
  double alpha = 0.01;
  double beta = 0.01;
  std::int64_t max_steps = 1'000'000;

  /// alpha = err/(n-s), beta = err/s.
  static SprtSpec from_error_target(std::size_t n, std::size_t s, double err);

  void validate() const;
  /// log B with B = (1 - beta) / alpha.
  double log_upper() const;
  /// log A with A = beta / (1 - alpha).
  double log_lower() const;
};

struct SprtOutcome {
  ProcedureOutcome outcome;
  std::vector<std::int64_t> stopping_times;
  std::size_t truncated_components = 0;
};

/// Keeps {i : T_{i,2m} > tau} (above) or {i : T_{i,2m} < tau} (below).
ProcedureOutcome run_non_sequential(const ProblemInstance& instance,
                                    const ObservationModel& model, double tau);

/// The statistics T_{i,2m} the non-sequential test uses, one per component.
std::vector<double> non_sequential_statistics(const ProblemInstance& instance,
                                              const ObservationModel& model);

/// Most alternative-like null statistic and least alternative-like support
/// statistic of one non-sequential draw. Enough to score every tau at once.
struct NonSequentialExtremes {
  double null_extreme = 0.0;
  double alt_extreme = 0.0;
};

NonSequentialExtremes non_sequential_extremes(const ProblemInstance& instance,
                                              const ObservationModel& model);

struct TauErrors {
  bool false_positive = false;
  bool false_negative = false;
};

TauErrors tau_errors(const NonSequentialExtremes& extremes, double tau,
                     Direction direction);

struct MinTauResult {
  double best_tau = 0.0;
  double min_error_rate = 1.0;
  std::vector<double> taus;
  std::vector<double> error_rates;
  double max_adjacent_difference = 0.0;
};

/// 512-point grid spanning the null 0.001 and alternative 0.999 quantiles of
/// T_{.,2m}, widened to cover the typical null extreme over n components.
std::vector<double> default_tau_grid(const ObservationModel& model, std::size_t n, int m,
                                     std::size_t points = 512);

/// Empirical P(S_tau != S) for every tau on the grid, evaluated on one shared
/// draw per instance; returns the minimizing tau.
MinTauResult estimate_min_tau_error(std::span<const ProblemInstance> instances,
                                    const ObservationModel& model,
                                    std::span<const double> tau_grid);

MinTauResult min_tau_from_extremes(std::span<const NonSequentialExtremes> extremes,
                                   Direction direction, std::span<const double> tau_grid);

/// Sequential thresholding, all survivors measured pass by pass.
ProcedureOutcome run_sequential_parallel(const ProblemInstance& instance,
                                         const ObservationModel& model,
                                         const SequentialConfig& config);

/// Sequential thresholding, one component at a time, abandoning a component
/// at its first block on the null side of gamma0.
ProcedureOutcome run_sequential_scanning(const ProblemInstance& instance,
                                         const ObservationModel& model,
                                         const SequentialConfig& config);

/// Component-wise Wald SPRT.
SprtOutcome run_sprt(const ProblemInstance& instance, const ObservationModel& model,
                     const SprtSpec& spec);

}  // namespace seqthresh
