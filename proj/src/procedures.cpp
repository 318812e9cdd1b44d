#include "seqthresh/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "seqthresh/error.hpp"
#include "seqthresh/statistics.hpp"

namespace seqthresh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void count_errors(ProcedureOutcome& outcome, const ProblemInstance& instance,
                  const std::vector<std::uint8_t>& in_support) {
  std::size_t true_positives = 0;
  for (std::size_t i : outcome.estimated_support) true_positives += in_support[i];
  outcome.false_positives = outcome.estimated_support.size() - true_positives;
  outcome.false_negatives = instance.s - true_positives;
}

// Survivor counts per pass from per-component survival depth, plus the pass
// at which a hard cap would stop. Shared by the scanning variant.
struct DepthProfile {
  std::vector<std::size_t> survivors;
  std::vector<std::size_t> null_survivors;
};

DepthProfile profile_from_depths(const std::vector<int>& depth,
                                 const std::vector<std::uint8_t>& in_support, int passes) {
  DepthProfile profile;
  profile.survivors.assign(passes + 1, 0);
  profile.null_survivors.assign(passes + 1, 0);
  std::vector<std::size_t> at_depth(passes + 1, 0);
  std::vector<std::size_t> null_at_depth(passes + 1, 0);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    ++at_depth[depth[i]];
    if (!in_support[i]) ++null_at_depth[depth[i]];
  }
  std::size_t total = 0;
  std::size_t nulls = 0;
  for (int k = passes; k >= 0; --k) {
    total += at_depth[k];
    nulls += null_at_depth[k];
    profile.survivors[k] = total;
    profile.null_survivors[k] = nulls;
  }
  return profile;
}

}  // namespace

const char* to_string(BudgetMode mode) {
  return mode == BudgetMode::Expectation ? "expectation" : "hard_cap";
}

ProblemInstance ProblemInstance::make(std::size_t n, int m,
                                      std::vector<std::size_t> support,
                                      std::uint64_t seed) {
  std::sort(support.begin(), support.end());
  ProblemInstance instance{n, support.size(), m, std::move(support), seed};
  instance.validate();
  return instance;
}

void ProblemInstance::validate() const {
  if (n == 0) fail(ErrorKind::Parameter, "instance: n must be >= 1");
  if (m < 1) fail(ErrorKind::Parameter, "instance: m must be >= 1");
  if (support.size() != s) {
    fail(ErrorKind::Parameter, "instance: |support| must equal s");
  }
  if (s >= n) fail(ErrorKind::Parameter, "instance: requires s < n");
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k] >= n) {
      fail(ErrorKind::Parameter, "instance: support index out of range [0, n)");
    }
    if (k > 0 && support[k] <= support[k - 1]) {
      fail(ErrorKind::Parameter, "instance: support must be sorted and unique");
    }
  }
}

std::vector<std::uint8_t> ProblemInstance::membership() const {
  std::vector<std::uint8_t> mask(n, 0);
  for (std::size_t i : support) mask[i] = 1;
  return mask;
}

int default_passes(std::size_t n, double epsilon) {
  const double k = std::ceil((1.0 + epsilon) * std::log2(static_cast<double>(n)) - 1e-12);
  return std::max(1, static_cast<int>(k));
}

int SequentialConfig::resolve_passes(std::size_t n) const {
  return passes ? *passes : default_passes(n, epsilon);
}

void SequentialConfig::validate() const {
  if (!(epsilon >= 0.0)) fail(ErrorKind::Configuration, "sequential: epsilon must be >= 0");
  if (passes && *passes < 1) fail(ErrorKind::Configuration, "sequential: passes must be >= 1");
  if (!(threshold_quantile > 0.0 && threshold_quantile < 1.0)) {
    fail(ErrorKind::Configuration, "sequential: threshold_quantile must lie in (0, 1)");
  }
}

double sequential_threshold(const ObservationModel& model, int m, double threshold_quantile) {
  const double q = model.direction == Direction::AlternativeAbove ? threshold_quantile
                                                                  : 1.0 - threshold_quantile;
  return quantile(statistic_distribution(model, false, m), q);
}

SprtSpec SprtSpec::from_error_target(std::size_t n, std::size_t s, double err) {
  if (s == 0 || s >= n) fail(ErrorKind::Parameter, "sprt: requires 0 < s < n");
  SprtSpec spec{err / static_cast<double>(n - s), err / static_cast<double>(s)};
  spec.validate();
  return spec;
}

void SprtSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5) || !(beta > 0.0 && beta < 0.5)) {
    fail(ErrorKind::Parameter, "sprt: alpha and beta must lie in (0, 1/2)");
  }
  if (max_steps < 1) fail(ErrorKind::Parameter, "sprt: max_steps must be >= 1");
}

double SprtSpec::log_upper() const { return std::log((1.0 - beta) / alpha); }
double SprtSpec::log_lower() const { return std::log(beta / (1.0 - alpha)); }

std::vector<double> non_sequential_statistics(const ProblemInstance& instance,
                                              const ObservationModel& model) {
  model.validate();
  instance.validate();
  const auto in_support = instance.membership();
  std::vector<double> buffer(2 * static_cast<std::size_t>(instance.m));
  std::vector<double> stats(instance.n);
  for (std::size_t i = 0; i < instance.n; ++i) {
    Stream rng({instance.seed, i, 0});
    sample_into(model, in_support[i] != 0, buffer, rng);
    stats[i] = sufficient_statistic(model, buffer);
  }
  return stats;
}

ProcedureOutcome run_non_sequential(const ProblemInstance& instance,
                                    const ObservationModel& model, double tau) {
  const auto stats = non_sequential_statistics(instance, model);
  const auto in_support = instance.membership();
  ProcedureOutcome outcome;
  for (std::size_t i = 0; i < instance.n; ++i) {
    if (exceeds_threshold(stats[i], tau, model.direction)) {
      outcome.estimated_support.push_back(i);
    }
  }
  outcome.measurements_used = 2ULL * instance.m * instance.n;
  outcome.pass_survivors = {instance.n, outcome.estimated_support.size()};
  count_errors(outcome, instance, in_support);
  outcome.null_pass_survivors = {instance.n - instance.s, outcome.false_positives};
  return outcome;
}

NonSequentialExtremes non_sequential_extremes(const ProblemInstance& instance,
                                              const ObservationModel& model) {
  const auto stats = non_sequential_statistics(instance, model);
  const auto in_support = instance.membership();
  const bool above = model.direction == Direction::AlternativeAbove;
  NonSequentialExtremes ex{above ? -kInf : kInf, above ? kInf : -kInf};
  for (std::size_t i = 0; i < instance.n; ++i) {
    if (in_support[i]) {
      ex.alt_extreme = above ? std::min(ex.alt_extreme, stats[i])
                             : std::max(ex.alt_extreme, stats[i]);
    } else {
      ex.null_extreme = above ? std::max(ex.null_extreme, stats[i])
                              : std::min(ex.null_extreme, stats[i]);
    }
  }
  return ex;
}

TauErrors tau_errors(const NonSequentialExtremes& ex, double tau, Direction direction) {
  // A null is kept iff it exceeds tau; a support component is lost iff it
  // does not.
  return {exceeds_threshold(ex.null_extreme, tau, direction),
          !exceeds_threshold(ex.alt_extreme, tau, direction)};
}

std::vector<double> default_tau_grid(const ObservationModel& model, std::size_t n, int m,
                                     std::size_t points) {
  if (points < 2) fail(ErrorKind::Configuration, "tau grid needs at least 2 points");
  const auto null_law = statistic_distribution(model, false, 2 * m);
  const auto alt_law = statistic_distribution(model, true, 2 * m);
  const double tail = std::min(1e-3, 0.1 / static_cast<double>(std::max<std::size_t>(n, 1)));
  const double lo = std::min({quantile(null_law, 1e-3), quantile(null_law, tail),
                              quantile(alt_law, 1e-3)});
  const double hi = std::max({quantile(null_law, 0.999), quantile(null_law, 1.0 - tail),
                              quantile(alt_law, 0.999)});
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return grid;
}

MinTauResult min_tau_from_extremes(std::span<const NonSequentialExtremes> extremes,
                                   Direction direction, std::span<const double> tau_grid) {
  if (tau_grid.empty()) fail(ErrorKind::Configuration, "min-tau search: empty tau grid");
  if (extremes.empty()) fail(ErrorKind::Configuration, "min-tau search: no trials");
  MinTauResult result;
  result.taus.assign(tau_grid.begin(), tau_grid.end());
  result.error_rates.reserve(tau_grid.size());
  const double trials = static_cast<double>(extremes.size());
  for (double tau : tau_grid) {
    std::size_t errors = 0;
    for (const auto& ex : extremes) {
      const auto e = tau_errors(ex, tau, direction);
      errors += (e.false_positive || e.false_negative) ? 1 : 0;
    }
    result.error_rates.push_back(static_cast<double>(errors) / trials);
  }
  const auto best = std::min_element(result.error_rates.begin(), result.error_rates.end());
  result.min_error_rate = *best;
  result.best_tau = result.taus[static_cast<std::size_t>(best - result.error_rates.begin())];
  for (std::size_t k = 1; k < result.error_rates.size(); ++k) {
    result.max_adjacent_difference =
        std::max(result.max_adjacent_difference,
                 std::abs(result.error_rates[k] - result.error_rates[k - 1]));
  }
  return result;
}

MinTauResult estimate_min_tau_error(std::span<const ProblemInstance> instances,
                                    const ObservationModel& model,
                                    std::span<const double> tau_grid) {
  if (tau_grid.empty()) fail(ErrorKind::Configuration, "min-tau search: empty tau grid");
  std::vector<NonSequentialExtremes> extremes;
  extremes.reserve(instances.size());
  for (const auto& instance : instances) {
    extremes.push_back(non_sequential_extremes(instance, model));
  }
  return min_tau_from_extremes(extremes, model.direction, tau_grid);
}

ProcedureOutcome run_sequential_parallel(const ProblemInstance& instance,
                                         const ObservationModel& model,
                                         const SequentialConfig& config) {
  model.validate();
  instance.validate();
  config.validate();
  const int passes = config.resolve_passes(instance.n);
  const double gamma0 = sequential_threshold(model, instance.m, config.threshold_quantile);
  const std::uint64_t m = static_cast<std::uint64_t>(instance.m);
  const std::uint64_t cap = 2 * m * instance.n;
  const auto in_support = instance.membership();

  std::vector<std::size_t> survivors(instance.n);
  std::iota(survivors.begin(), survivors.end(), std::size_t{0});
  std::vector<std::size_t> next;
  std::vector<double> block(instance.m);

  ProcedureOutcome outcome;
  outcome.pass_survivors.push_back(instance.n);
  outcome.null_pass_survivors.push_back(instance.n - instance.s);
  for (int k = 1; k <= passes; ++k) {
    const std::uint64_t pass_cost = m * survivors.size();
    if (config.budget_mode == BudgetMode::HardCap &&
        outcome.measurements_used + pass_cost > cap) {
      outcome.truncated = true;
      break;
    }
    outcome.measurements_used += pass_cost;
    next.clear();
    std::size_t null_kept = 0;
    for (std::size_t i : survivors) {
      Stream rng({instance.seed, i, static_cast<std::uint64_t>(k)});
      sample_into(model, in_support[i] != 0, block, rng);
      if (exceeds_threshold(sufficient_statistic(model, block), gamma0, model.direction)) {
        next.push_back(i);
        null_kept += in_support[i] ? 0 : 1;
      }
    }
    survivors.swap(next);
    outcome.pass_survivors.push_back(survivors.size());
    outcome.null_pass_survivors.push_back(null_kept);
  }
  if (outcome.truncated) {
    outcome.warning = "hard cap reached after pass " +
                      std::to_string(outcome.pass_survivors.size() - 1);
    outcome.pass_survivors.resize(passes + 1, outcome.pass_survivors.back());
    outcome.null_pass_survivors.resize(passes + 1, outcome.null_pass_survivors.back());
  }
  outcome.estimated_support = std::move(survivors);
  count_errors(outcome, instance, in_support);
  return outcome;
}

ProcedureOutcome run_sequential_scanning(const ProblemInstance& instance,
                                         const ObservationModel& model,
                                         const SequentialConfig& config) {
  model.validate();
  instance.validate();
  config.validate();
  const int passes = config.resolve_passes(instance.n);
  const double gamma0 = sequential_threshold(model, instance.m, config.threshold_quantile);
  const std::uint64_t m = static_cast<std::uint64_t>(instance.m);
  const auto in_support = instance.membership();

  // depth[i] = number of consecutive blocks component i survived.
  std::vector<int> depth(instance.n, 0);
  std::vector<double> block(instance.m);
  for (std::size_t i = 0; i < instance.n; ++i) {
    for (int k = 1; k <= passes; ++k) {
      Stream rng({instance.seed, i, static_cast<std::uint64_t>(k)});
      sample_into(model, in_support[i] != 0, block, rng);
      if (!exceeds_threshold(sufficient_statistic(model, block), gamma0, model.direction)) {
        break;
      }
      depth[i] = k;
    }
  }

  const auto profile = profile_from_depths(depth, in_support, passes);
  int last_pass = passes;
  ProcedureOutcome outcome;
  if (config.budget_mode == BudgetMode::HardCap) {
    const std::uint64_t cap = 2 * m * instance.n;
    std::uint64_t used = 0;
    for (int k = 1; k <= passes; ++k) {
      const std::uint64_t pass_cost = m * profile.survivors[k - 1];
      if (used + pass_cost > cap) {
        last_pass = k - 1;
        outcome.truncated = true;
        break;
      }
      used += pass_cost;
    }
  }
  for (int k = 0; k <= passes; ++k) {
    const int kk = std::min(k, last_pass);
    outcome.pass_survivors.push_back(profile.survivors[kk]);
    outcome.null_pass_survivors.push_back(profile.null_survivors[kk]);
  }
  for (int k = 0; k < last_pass; ++k) outcome.measurements_used += m * profile.survivors[k];
  for (std::size_t i = 0; i < instance.n; ++i) {
    if (depth[i] >= last_pass) outcome.estimated_support.push_back(i);
  }
  if (outcome.truncated) {
    outcome.warning = "hard cap reached after pass " + std::to_string(last_pass);
  }
  count_errors(outcome, instance, in_support);
  return outcome;
}

SprtOutcome run_sprt(const ProblemInstance& instance, const ObservationModel& model,
                     const SprtSpec& spec) {
  model.validate();
  instance.validate();
  spec.validate();
  const double upper = spec.log_upper();
  const double lower = spec.log_lower();
  const auto in_support = instance.membership();
  constexpr std::size_t kBlock = 64;
  std::vector<double> block(kBlock);

  SprtOutcome result;
  result.stopping_times.resize(instance.n);
  ProcedureOutcome& outcome = result.outcome;
  for (std::size_t i = 0; i < instance.n; ++i) {
    Stream rng({instance.seed, i, kSprtPass});
    double llr = 0.0;
    std::int64_t steps = 0;
    std::size_t pos = kBlock;
    bool decided = false;
    bool alternative = false;
    while (steps < spec.max_steps) {
      if (pos == kBlock) {
        sample_into(model, in_support[i] != 0, block, rng);
        pos = 0;
      }
      llr += log_likelihood_ratio(model, block[pos++]);
      ++steps;
      if (llr >= upper) {
        decided = alternative = true;
        break;
      }
      if (llr <= lower) {
        decided = true;
        break;
      }
    }
    if (!decided) {
      ++result.truncated_components;
      alternative = llr > 0.0;
    }
    result.stopping_times[i] = steps;
    outcome.measurements_used += static_cast<std::uint64_t>(steps);
    if (alternative) outcome.estimated_support.push_back(i);
  }
  outcome.pass_survivors = {instance.n, outcome.estimated_support.size()};
  count_errors(outcome, instance, in_support);
  outcome.null_pass_survivors = {instance.n - instance.s, outcome.false_positives};
  if (result.truncated_components * 100 > instance.n) {
    outcome.truncated = true;
    std::ostringstream os;
    os << "sprt truncated at max_steps=" << spec.max_steps << " on "
       << result.truncated_components << " of " << instance.n << " components";
    outcome.warning = os.str();
  }
  return result;
}

}  // namespace seqthresh
