#include "seqthresh/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "seqthresh/error.hpp"
#include "seqthresh/rng.hpp"

namespace seqthresh {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
std::uint64_t bounded(Stream& rng, std::uint64_t bound) {
  u128 product = static_cast<u128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<u128>(rng()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

void add_into(std::vector<std::uint64_t>& sums, const std::vector<std::size_t>& values) {
  if (sums.size() < values.size()) sums.resize(values.size(), 0);
  for (std::size_t k = 0; k < values.size(); ++k) sums[k] += values[k];
}

struct TrialFailure {
  std::size_t trial = std::numeric_limits<std::size_t>::max();
  std::string message;
};

// Runs body(trial) for every trial in `order` on `threads` workers, each
// worker folding into its own accumulator; accumulators are merged at the
// end. The first failing trial (lowest position in `order`) aborts the run.
template <class Acc, class Body>
Acc for_each_trial(const std::vector<std::size_t>& order, unsigned threads, const Acc& init,
                   Body&& body) {
  if (threads == 0) threads = std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(order.size())));
  std::vector<Acc> partial(threads, init);
  std::mutex failure_mutex;
  std::size_t failed_position = std::numeric_limits<std::size_t>::max();
  TrialFailure failure;

  auto work = [&](unsigned worker) {
    for (std::size_t pos = worker; pos < order.size(); pos += threads) {
      try {
        body(partial[worker], order[pos]);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (pos < failed_position) {
          failed_position = pos;
          failure = {order[pos], e.what()};
        }
        return;
      }
    }
  };

  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  if (failed_position != std::numeric_limits<std::size_t>::max()) {
    fail(ErrorKind::TrialFailed,
         "trial " + std::to_string(failure.trial) + " failed: " + failure.message);
  }
  Acc total = init;
  for (const auto& p : partial) total.merge(p);
  return total;
}

struct ExtremesAcc {
  std::vector<std::pair<std::size_t, NonSequentialExtremes>> items;
  void merge(const ExtremesAcc& other) {
    items.insert(items.end(), other.items.begin(), other.items.end());
  }
};

AggregateResult empty_result(const ExperimentConfig& config) {
  AggregateResult r;
  r.kind = kind_of(config.procedure);
  r.n = config.n;
  r.s = config.s;
  r.m = config.m;
  return r;
}

}  // namespace

ProcedureKind kind_of(const ProcedureSpec& procedure) {
  return std::visit(Overloaded{[](const NonSequentialFixed&) { return ProcedureKind::NonSequential; },
                               [](const NonSequentialMinTau&) { return ProcedureKind::NonSequential; },
                               [](const SequentialProcedure&) { return ProcedureKind::Sequential; },
                               [](const SprtProcedure&) { return ProcedureKind::Sprt; }},
                    procedure);
}

const char* to_string(ProcedureKind kind) {
  switch (kind) {
    case ProcedureKind::NonSequential: return "non_sequential";
    case ProcedureKind::Sequential: return "sequential";
    case ProcedureKind::Sprt: return "sprt";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  model.validate();
  if (n < 2) fail(ErrorKind::Configuration, "problem.n must be >= 2");
  if (m < 1) fail(ErrorKind::Configuration, "problem.m must be >= 1");
  if (2 * s > n) fail(ErrorKind::Configuration, "problem.s must satisfy s <= n/2");
  if (trials < 1) fail(ErrorKind::Configuration, "run.trials must be >= 1");
  std::visit(Overloaded{[](const NonSequentialFixed& p) {
                          if (std::isnan(p.tau)) {
                            fail(ErrorKind::Configuration, "procedure.tau must not be NaN");
                          }
                        },
                        [](const NonSequentialMinTau& p) {
                          if (p.grid_points < 2) {
                            fail(ErrorKind::Configuration,
                                 "procedure.grid_points must be >= 2 (empty tau grid)");
                          }
                        },
                        [](const SequentialProcedure& p) { p.config.validate(); },
                        [](const SprtProcedure& p) { p.spec.validate(); }},
             procedure);
}

double binomial_se(double rate, std::size_t trials) {
  if (trials == 0) return 0.0;
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
}

void AggregateResult::add_trial(const ProcedureOutcome& outcome) {
  ++trials;
  const bool fp = outcome.false_positives > 0;
  const bool fn = outcome.false_negatives > 0;
  error_count += (fp || fn) ? 1 : 0;
  fp_event_count += fp ? 1 : 0;
  fn_event_count += fn ? 1 : 0;
  truncated_trials += outcome.truncated ? 1 : 0;
  false_positive_sum += outcome.false_positives;
  false_negative_sum += outcome.false_negatives;
  measurement_sum += outcome.measurements_used;
  measurement_sq_sum += static_cast<u128>(outcome.measurements_used) *
                        outcome.measurements_used;
  add_into(pass_survivor_sums, outcome.pass_survivors);
  add_into(null_pass_survivor_sums, outcome.null_pass_survivors);
}

void AggregateResult::merge(const AggregateResult& o) {
  trials += o.trials;
  error_count += o.error_count;
  fp_event_count += o.fp_event_count;
  fn_event_count += o.fn_event_count;
  truncated_trials += o.truncated_trials;
  false_positive_sum += o.false_positive_sum;
  false_negative_sum += o.false_negative_sum;
  measurement_sum += o.measurement_sum;
  measurement_sq_sum += o.measurement_sq_sum;
  add_into(pass_survivor_sums, o.pass_survivor_sums);
  add_into(null_pass_survivor_sums, o.null_pass_survivor_sums);
  null_stop_sum += o.null_stop_sum;
  null_stop_count += o.null_stop_count;
  alt_stop_sum += o.alt_stop_sum;
  alt_stop_count += o.alt_stop_count;
  runtime_seconds += o.runtime_seconds;
}

double AggregateResult::error_rate() const {
  return trials ? static_cast<double>(error_count) / trials : 0.0;
}
double AggregateResult::error_se() const { return binomial_se(error_rate(), trials); }
double AggregateResult::fp_event_rate() const {
  return trials ? static_cast<double>(fp_event_count) / trials : 0.0;
}
double AggregateResult::fn_event_rate() const {
  return trials ? static_cast<double>(fn_event_count) / trials : 0.0;
}
double AggregateResult::fp_event_se() const { return binomial_se(fp_event_rate(), trials); }
double AggregateResult::fn_event_se() const { return binomial_se(fn_event_rate(), trials); }

double AggregateResult::fp_component_rate() const {
  const double nulls = static_cast<double>(trials) * static_cast<double>(n - s);
  return nulls > 0 ? static_cast<double>(false_positive_sum) / nulls : 0.0;
}

double AggregateResult::fn_component_rate() const {
  const double alts = static_cast<double>(trials) * static_cast<double>(s);
  return alts > 0 ? static_cast<double>(false_negative_sum) / alts : 0.0;
}

double AggregateResult::mean_measurements() const {
  return trials ? static_cast<double>(measurement_sum) / trials : 0.0;
}

double AggregateResult::measurements_se() const {
  if (trials < 2) return 0.0;
  const double t = static_cast<double>(trials);
  const double mean = static_cast<double>(measurement_sum) / t;
  const double second = static_cast<double>(measurement_sq_sum) / t;
  const double variance = std::max(0.0, (second - mean * mean) * t / (t - 1.0));
  return std::sqrt(variance / t);
}

std::vector<double> AggregateResult::mean_pass_survivors() const {
  std::vector<double> out;
  for (auto v : pass_survivor_sums) out.push_back(trials ? double(v) / trials : 0.0);
  return out;
}

std::vector<double> AggregateResult::mean_null_pass_survivors() const {
  std::vector<double> out;
  for (auto v : null_pass_survivor_sums) out.push_back(trials ? double(v) / trials : 0.0);
  return out;
}

double AggregateResult::mean_null_stop() const {
  return null_stop_count ? double(null_stop_sum) / double(null_stop_count) : 0.0;
}

double AggregateResult::mean_alt_stop() const {
  return alt_stop_count ? double(alt_stop_sum) / double(alt_stop_count) : 0.0;
}

bool AggregateResult::same_counts(const AggregateResult& o) const {
  return kind == o.kind && n == o.n && s == o.s && m == o.m && trials == o.trials &&
         error_count == o.error_count && fp_event_count == o.fp_event_count &&
         fn_event_count == o.fn_event_count && truncated_trials == o.truncated_trials &&
         false_positive_sum == o.false_positive_sum &&
         false_negative_sum == o.false_negative_sum && measurement_sum == o.measurement_sum &&
         measurement_sq_sum == o.measurement_sq_sum &&
         pass_survivor_sums == o.pass_survivor_sums &&
         null_pass_survivor_sums == o.null_pass_survivor_sums &&
         null_stop_sum == o.null_stop_sum && null_stop_count == o.null_stop_count &&
         alt_stop_sum == o.alt_stop_sum && alt_stop_count == o.alt_stop_count &&
         best_tau == o.best_tau;
}

ProblemInstance generate_instance(const ExperimentConfig& config, std::size_t trial_index) {
  if (2 * config.s > config.n) {
    fail(ErrorKind::Configuration, "problem.s must satisfy s <= n/2");
  }
  // Floyd's algorithm: uniform s-subset of [0, n) in s draws.
  Stream rng({config.seed, trial_index, kSupportPass});
  std::vector<std::uint8_t> chosen(config.n, 0);
  std::vector<std::size_t> support;
  support.reserve(config.s);
  for (std::size_t j = config.n - config.s; j < config.n; ++j) {
    const auto t = static_cast<std::size_t>(bounded(rng, j + 1));
    const std::size_t pick = chosen[t] ? j : t;
    chosen[pick] = 1;
    support.push_back(pick);
  }
  return ProblemInstance::make(config.n, config.m, std::move(support),
                               mix_key(config.seed, trial_index));
}

AggregateResult run_experiment(const ExperimentConfig& config) {
  std::vector<std::size_t> order(config.trials);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return run_experiment_ordered(config, order);
}

AggregateResult run_experiment_ordered(const ExperimentConfig& config,
                                       const std::vector<std::size_t>& order) {
  config.validate();
  if (order.size() != config.trials) {
    fail(ErrorKind::Configuration, "trial order must list every trial exactly once");
  }
  const auto start = std::chrono::steady_clock::now();
  const AggregateResult init = empty_result(config);
  AggregateResult result;

  if (const auto* min_tau = std::get_if<NonSequentialMinTau>(&config.procedure)) {
    ExtremesAcc extremes = for_each_trial(
        order, config.threads, ExtremesAcc{}, [&](ExtremesAcc& acc, std::size_t trial) {
          const auto instance = generate_instance(config, trial);
          acc.items.emplace_back(trial, non_sequential_extremes(instance, config.model));
        });
    std::sort(extremes.items.begin(), extremes.items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<NonSequentialExtremes> values;
    for (const auto& item : extremes.items) values.push_back(item.second);
    const auto grid = default_tau_grid(config.model, config.n, config.m, min_tau->grid_points);
    const auto best = min_tau_from_extremes(values, config.model.direction, grid);
    // Second pass at the chosen tau; the streams are keyed, so these are the
    // same statistics the search saw.
    result = for_each_trial(order, config.threads, init,
                            [&](AggregateResult& acc, std::size_t trial) {
                              const auto instance = generate_instance(config, trial);
                              acc.add_trial(
                                  run_non_sequential(instance, config.model, best.best_tau));
                            });
    result.best_tau = best.best_tau;
  } else {
    result = for_each_trial(order, config.threads, init, [&](AggregateResult& acc,
                                                             std::size_t trial) {
      const auto instance = generate_instance(config, trial);
      std::visit(
          Overloaded{
              [&](const NonSequentialFixed& p) {
                acc.add_trial(run_non_sequential(instance, config.model, p.tau));
              },
              [&](const NonSequentialMinTau&) {},
              [&](const SequentialProcedure& p) {
                acc.add_trial(p.variant == SequentialVariant::Parallel
                                  ? run_sequential_parallel(instance, config.model, p.config)
                                  : run_sequential_scanning(instance, config.model, p.config));
              },
              [&](const SprtProcedure& p) {
                const auto sprt = run_sprt(instance, config.model, p.spec);
                acc.add_trial(sprt.outcome);
                const auto in_support = instance.membership();
                for (std::size_t i = 0; i < instance.n; ++i) {
                  const auto t = static_cast<std::uint64_t>(sprt.stopping_times[i]);
                  if (in_support[i]) {
                    acc.alt_stop_sum += t;
                    ++acc.alt_stop_count;
                  } else {
                    acc.null_stop_sum += t;
                    ++acc.null_stop_count;
                  }
                }
              }},
          config.procedure);
    });
  }
  result.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

const char* to_string(SweepParameter parameter) {
  switch (parameter) {
    case SweepParameter::Theta1: return "theta1";
    case SweepParameter::Theta0: return "theta0";
    case SweepParameter::N: return "n";
    case SweepParameter::S: return "s";
    case SweepParameter::M: return "m";
  }
  return "unknown";
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "theta1") return SweepParameter::Theta1;
  if (name == "theta0") return SweepParameter::Theta0;
  if (name == "n") return SweepParameter::N;
  if (name == "s") return SweepParameter::S;
  if (name == "m") return SweepParameter::M;
  fail(ErrorKind::Configuration,
       "sweep parameter '" + name + "' must be one of theta1, theta0, n, s, m");
}

ExperimentConfig apply_axis_value(const ExperimentConfig& base, SweepParameter parameter,
                                  double value) {
  ExperimentConfig config = base;
  auto as_count = [&](const char* name) {
    if (!(value >= 0.0) || value != std::floor(value)) {
      fail(ErrorKind::Configuration,
           std::string("sweep value for ") + name + " must be a nonnegative integer");
    }
    return static_cast<std::size_t>(value);
  };
  switch (parameter) {
    case SweepParameter::Theta1: config.model.theta1 = value; break;
    case SweepParameter::Theta0: config.model.theta0 = value; break;
    case SweepParameter::N: config.n = as_count("n"); break;
    case SweepParameter::S: config.s = as_count("s"); break;
    case SweepParameter::M: config.m = static_cast<int>(as_count("m")); break;
  }
  return config;
}

double boundary_epsilon(const ExperimentConfig& config) {
  if (const auto* seq = std::get_if<SequentialProcedure>(&config.procedure)) {
    return seq->config.epsilon;
  }
  return SequentialConfig{}.epsilon;
}

SweepResult run_sweep(const ExperimentConfig& base, const SweepAxis& axis) {
  if (axis.values.empty()) fail(ErrorKind::Configuration, "sweep: empty grid");
  SweepResult sweep{axis, {}};
  for (double value : axis.values) {
    SweepCell cell;
    cell.value = value;
    try {
      const auto config = apply_axis_value(base, axis.parameter, value);
      config.validate();
      try {
        cell.boundary = boundaries(config.model.family, config.n, config.s, config.m,
                                   boundary_epsilon(config));
      } catch (const Error&) {
        // No annotation where the boundary formulas do not apply.
      }
      cell.result = run_experiment(config);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::TrialFailed) throw;
      cell.skipped_reason = e.what();
    }
    sweep.cells.push_back(std::move(cell));
  }
  return sweep;
}

std::vector<EliminationRow> elimination_profile(const AggregateResult& result) {
  if (result.kind != ProcedureKind::Sequential) {
    fail(ErrorKind::Usage, "elimination_profile: requires a sequential result");
  }
  const auto survivors = result.mean_pass_survivors();
  const auto nulls = result.mean_null_pass_survivors();
  std::vector<EliminationRow> rows;
  for (std::size_t k = 1; k < survivors.size(); ++k) {
    EliminationRow row;
    row.pass = static_cast<int>(k);
    row.mean_survivors = survivors[k];
    row.mean_null_survivors = nulls[k];
    row.null_survival_ratio = nulls[k - 1] > 0 ? nulls[k] / nulls[k - 1] : 0.0;
    row.null_fraction = survivors[k] > 0 ? nulls[k] / survivors[k] : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace seqthresh
