#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace seqthresh::acceptance {

struct Options {
  std::uint64_t seed = 20240601;
  unsigned threads = 0;  // 0: hardware concurrency
  /// Test hook: shifts every sequential threshold by this many null
  /// standard deviations toward the alternative side in the median
  /// calibration check.
  double threshold_shift_sigma = 0.0;
  /// Criterion ids to run; empty runs all.
  std::vector<int> only;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;
  std::string expected;
  double runtime_seconds = 0.0;
  double runtime_limit_seconds = 0.0;
};

CriterionResult median_calibration(const Options& options);
CriterionResult false_positive_bound(const Options& options);
CriterionResult budget_bound(const Options& options);
CriterionResult gaussian_phase_gap(const Options& options);
CriterionResult gamma_min_calibration(const Options& options);
CriterionResult poisson_min_zero(const Options& options);
CriterionResult sprt_consistency(const Options& options);
CriterionResult parallel_scanning_equivalence(const Options& options);
CriterionResult chernoff_dominance(const Options& options);

struct Criterion {
  int id;
  const char* name;
  double runtime_limit_seconds;
  std::function<CriterionResult(const Options&)> run;
};

const std::vector<Criterion>& criteria();

/// Runs the selected criteria, invoking `report` after each one.
std::vector<CriterionResult> run_all(
    const Options& options,
    const std::function<void(const CriterionResult&)>& report = {});

/// "[PASS] 1 median-calibration: measured ... | expected ... | 0.52 s (limit 10 s)"
std::string format_line(const CriterionResult& result);

}  // namespace seqthresh::acceptance
