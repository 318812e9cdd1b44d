#include "seqthresh/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "seqthresh/distributions.hpp"
#include "seqthresh/harness.hpp"
#include "seqthresh/procedures.hpp"
#include "seqthresh/rng.hpp"
#include "seqthresh/statistics.hpp"
#include "seqthresh/theory.hpp"

namespace seqthresh::acceptance {

namespace {

unsigned worker_count(const Options& options) {
  if (options.threads > 0) return options.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Sum of f(t) over t in [0, count); each worker owns a strided slice.
template <class F>
std::uint64_t parallel_sum(std::size_t count, unsigned threads, F&& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::uint64_t> partial(threads, 0);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < count; t += threads) partial[w] += f(t);
      });
    }
  }
  std::uint64_t total = 0;
  for (auto p : partial) total += p;
  return total;
}

std::string fmt(const char* pattern, double a) {
  char buffer[128];
  std::snprintf(buffer, sizeof buffer, pattern, a);
  return buffer;
}

std::string fmt(const char* pattern, double a, double b) {
  char buffer[160];
  std::snprintf(buffer, sizeof buffer, pattern, a, b);
  return buffer;
}

std::string fmt(const char* pattern, double a, double b, double c) {
  char buffer[200];
  std::snprintf(buffer, sizeof buffer, pattern, a, b, c);
  return buffer;
}

CriterionResult start(int id) {
  CriterionResult r;
  r.id = id;
  for (const auto& c : criteria()) {
    if (c.id == id) {
      r.name = c.name;
      r.runtime_limit_seconds = c.runtime_limit_seconds;
    }
  }
  return r;
}

double shifted_threshold(const ObservationModel& model, int m, double shift_sigma) {
  const double gamma0 = sequential_threshold(model, m, 0.5);
  const double sd = stddev(statistic_distribution(model, false, m));
  // Toward the alternative side makes survival harder (above) or easier
  // (below); either way calibration breaks.
  return gamma0 + shift_sigma * sd;
}

}  // namespace

CriterionResult median_calibration(const Options& options) {
  auto result = start(1);
  constexpr std::size_t kComponents = 100'000;
  struct Case {
    ObservationModel model;
    int m;
  };
  const Case cases[] = {{ObservationModel::gaussian(0.0, 1.0), 2},
                        {ObservationModel::gamma_energy(4.0), 3},
                        {ObservationModel::poisson(3.0, 1.0), 2}};
  bool ok = true;
  std::ostringstream measured;
  std::ostringstream expected;
  for (const auto& c : cases) {
    const double gamma0 = shifted_threshold(c.model, c.m, options.threshold_shift_sigma);
    const auto survived = parallel_sum(kComponents, worker_count(options), [&](std::size_t i) {
      std::vector<double> block(c.m);
      Stream rng({options.seed, i, 1});
      sample_into(c.model, false, block, rng);
      return exceeds_threshold(sufficient_statistic(c.model, block), gamma0, c.model.direction)
                 ? 1u
                 : 0u;
    });
    const double rate = static_cast<double>(survived) / kComponents;
    measured << to_string(c.model.family) << "=" << fmt("%.4f", rate) << " ";
    if (c.model.continuous()) {
      ok = ok && std::abs(rate - 0.5) <= 0.01;
      expected << to_string(c.model.family) << " in [0.49, 0.51]; ";
    } else {
      const auto law = statistic_distribution(c.model, false, c.m);
      const double atom = poisson_pmf(static_cast<std::int64_t>(gamma0), std::get<PoissonLaw>(law).rate);
      const double lo = 0.5 - atom;
      ok = ok && rate <= 0.5 + 0.01 && rate >= lo - 0.01;
      expected << to_string(c.model.family) << fmt(" in [%.4f, 0.5] (+/-0.01 MC)", lo);
    }
  }
  result.passed = ok;
  result.measured = measured.str();
  result.expected = expected.str();
  return result;
}

CriterionResult false_positive_bound(const Options& options) {
  auto result = start(2);
  ExperimentConfig config;
  config.model = ObservationModel::gaussian(0.0, 1.0);
  config.n = 4096;
  config.s = 0;
  config.m = 1;
  SequentialProcedure procedure;
  procedure.config.passes = 16;
  config.procedure = procedure;
  config.trials = 2000;
  config.seed = options.seed;
  config.threads = worker_count(options);
  const auto agg = run_experiment(config);
  const double bound = sequential_false_positive_bound(config.n, config.s, 16);
  const double limit = bound + 3.0 * binomial_se(bound, config.trials);
  result.passed = agg.fp_event_rate() <= limit;
  result.measured = fmt("P(any null survives)=%.4f (SE %.4f)", agg.fp_event_rate(),
                        agg.fp_event_se());
  result.expected = fmt("<= %.4f + 3SE = %.4f", bound, limit);
  return result;
}

CriterionResult budget_bound(const Options& options) {
  auto result = start(3);
  ExperimentConfig config;
  config.model = ObservationModel::gaussian(0.0, 2.55);
  config.n = 4096;
  config.s = 12;
  config.m = 2;
  SequentialProcedure procedure;
  procedure.config.passes = 13;
  config.procedure = procedure;
  config.trials = 1000;
  config.seed = options.seed;
  config.threads = worker_count(options);
  const auto agg = run_experiment(config);
  const double bound = sequential_budget_bound(config.n, config.s, config.m, 13);
  const double cap = agg.budget_cap() * 1.02;
  const double mean = agg.mean_measurements();
  const double se = agg.measurements_se();
  result.passed = mean <= bound + 3.0 * se && mean <= cap;
  result.measured = fmt("mean measurements=%.1f (SE %.2f)", mean, se);
  result.expected = fmt("<= %.0f (+3SE) and <= 1.02*2mn = %.1f", bound, cap);
  return result;
}

CriterionResult gaussian_phase_gap(const Options& options) {
  auto result = start(4);
  constexpr std::size_t n = 1 << 12;
  constexpr std::size_t s = 12;
  constexpr int m = 2;
  constexpr double epsilon = 0.5;
  const auto report = gaussian_boundaries(n, s, m, epsilon);

  ExperimentConfig seq;
  seq.model = ObservationModel::gaussian(0.0, 1.1 * report.seq_reliable_beyond);
  seq.n = n;
  seq.s = s;
  seq.m = m;
  SequentialProcedure procedure;
  procedure.config.epsilon = epsilon;
  seq.procedure = procedure;
  seq.trials = 500;
  seq.seed = options.seed;
  seq.threads = worker_count(options);
  const auto seq_result = run_experiment(seq);

  ExperimentConfig ns = seq;
  ns.model = ObservationModel::gaussian(0.0, 0.9 * report.ns_unreliable_below);
  ns.procedure = NonSequentialMinTau{};
  ns.seed = options.seed + 1;
  const auto ns_result = run_experiment(ns);

  const bool a = seq_result.error_rate() <= 0.10;
  const bool b = ns_result.error_rate() >= 0.40;
  result.passed = a && b;
  result.measured =
      fmt("(a) theta1=%.4f K=%.0f seq error=%.4f", seq.model.theta1,
          static_cast<double>(procedure.config.resolve_passes(n)), seq_result.error_rate()) +
      fmt("; (b) theta1=%.4f min-tau error=%.4f", ns.model.theta1, ns_result.error_rate());
  result.expected = "(a) <= 0.10; (b) >= 0.40";
  return result;
}

CriterionResult gamma_min_calibration(const Options& options) {
  auto result = start(5);
  ExperimentConfig config;
  config.model = ObservationModel::gamma_energy(50.0);
  config.n = 100'000;
  config.s = 10;
  config.m = 1;
  config.seed = options.seed;
  constexpr std::size_t kTrials = 2000;
  const double cut = config.model.theta0 *
                     std::pow(static_cast<double>(config.n - config.s), -1.0 / (2.0 * config.m));
  const auto hits = parallel_sum(kTrials, worker_count(options), [&](std::size_t trial) {
    const auto instance = generate_instance(config, trial);
    const auto ex = non_sequential_extremes(instance, config.model);
    return ex.null_extreme <= cut ? 1u : 0u;
  });
  const double rate = static_cast<double>(hits) / kTrials;
  const double limit = gamma_min_limit(config.m);
  result.passed = std::abs(rate - limit) <= 0.02;
  result.measured = fmt("P(min null T <= theta0 (n-s)^(-1/2m))=%.4f (finite-n exact %.4f)", rate,
                        gamma_min_probability(config.n, config.s, config.m));
  result.expected = fmt("%.5f +/- 0.02", limit);
  return result;
}

CriterionResult poisson_min_zero(const Options& options) {
  auto result = start(6);
  ExperimentConfig config;
  config.n = 10'000;
  config.s = 10;
  config.m = 1;
  const double theta0 = std::log(static_cast<double>(config.n - config.s)) / (2.0 * config.m);
  config.model = ObservationModel::poisson(theta0, 1.0);
  config.seed = options.seed;
  constexpr std::size_t kTrials = 4000;
  const auto hits = parallel_sum(kTrials, worker_count(options), [&](std::size_t trial) {
    const auto instance = generate_instance(config, trial);
    const auto ex = non_sequential_extremes(instance, config.model);
    return ex.null_extreme == 0.0 ? 1u : 0u;
  });
  const double rate = static_cast<double>(hits) / kTrials;
  const double exact = poisson_min_zero_prob(config.n, config.s, config.m, theta0);
  const double se = binomial_se(exact, kTrials);
  result.passed = std::abs(rate - exact) <= 3.0 * se;
  result.measured = fmt("P(min null T = 0)=%.4f", rate);
  result.expected = fmt("%.4f +/- 3SE (%.4f)", exact, 3.0 * se);
  return result;
}

CriterionResult sprt_consistency(const Options& options) {
  auto result = start(7);
  ExperimentConfig config;
  config.model = ObservationModel::gaussian(0.0, 0.25);
  config.n = 2000;
  config.s = 1000;
  config.m = 1;
  SprtProcedure procedure;
  procedure.spec.alpha = 1e-3;
  procedure.spec.beta = 1e-3;
  config.procedure = procedure;
  config.trials = 1;
  config.seed = options.seed;
  const auto agg = run_experiment(config);
  const auto drifts = llr_drifts(config.model);
  const auto wald = wald_expected_stops(drifts.mu0, drifts.mu1, 1e-3, 1e-3);
  const double fp = agg.fp_component_rate();
  const double fn = agg.fn_component_rate();
  const double fp_limit = 2e-3 + 3.0 * binomial_se(2e-3, config.n - config.s);
  const double fn_limit = 2e-3 + 3.0 * binomial_se(2e-3, config.s);
  const double null_dev = std::abs(agg.mean_null_stop() / wald.under_null - 1.0);
  const double alt_dev = std::abs(agg.mean_alt_stop() / wald.under_alternative - 1.0);
  result.passed = fp <= fp_limit && fn <= fn_limit && null_dev <= 0.15 && alt_dev <= 0.15 &&
                  agg.truncated_trials == 0;
  result.measured = fmt("FP=%.4f FN=%.4f", fp, fn) +
                    fmt(" E0[N]=%.1f E1[N]=%.1f", agg.mean_null_stop(), agg.mean_alt_stop());
  result.expected = fmt("FP,FN <= %.4f/%.4f; Wald", fp_limit, fn_limit) +
                    fmt(" E0=%.1f E1=%.1f +/-15%%", wald.under_null, wald.under_alternative);
  return result;
}

CriterionResult parallel_scanning_equivalence(const Options& options) {
  auto result = start(8);
  constexpr std::size_t kInstances = 100;
  Stream meta({options.seed, 0, 0xacce97});
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * meta.uniform(); };
  std::size_t identical = 0;
  std::size_t nonempty = 0;
  for (std::size_t r = 0; r < kInstances; ++r) {
    ExperimentConfig config;
    switch (r % 3) {
      case 0: config.model = ObservationModel::gaussian(0.0, uniform(0.5, 4.0)); break;
      case 1: config.model = ObservationModel::gamma_energy(uniform(2.0, 20.0)); break;
      default: config.model = ObservationModel::poisson(uniform(2.0, 8.0), uniform(0.2, 1.5)); break;
    }
    config.n = 64 + static_cast<std::size_t>(uniform(0.0, 1000.0));
    config.s = 1 + static_cast<std::size_t>(uniform(0.0, static_cast<double>(config.n / 10)));
    config.m = 1 + static_cast<int>(uniform(0.0, 4.0));
    config.seed = meta();
    SequentialConfig seq;
    seq.budget_mode = (r % 4 == 3) ? BudgetMode::HardCap : BudgetMode::Expectation;
    seq.threshold_quantile = (r % 5 == 4) ? 0.8 : 0.5;
    const auto instance = generate_instance(config, r);
    const auto a = run_sequential_parallel(instance, config.model, seq);
    const auto b = run_sequential_scanning(instance, config.model, seq);
    const bool same = a.estimated_support == b.estimated_support &&
                      a.measurements_used == b.measurements_used &&
                      a.pass_survivors == b.pass_survivors && a.truncated == b.truncated;
    identical += same ? 1 : 0;
    nonempty += a.estimated_support.empty() ? 0 : 1;
  }
  result.passed = identical == kInstances;
  result.measured = std::to_string(identical) + "/" + std::to_string(kInstances) +
                    " identical (" + std::to_string(nonempty) + " with non-empty estimates)";
  result.expected = "100/100 identical";
  return result;
}

CriterionResult chernoff_dominance(const Options& options) {
  auto result = start(9);
  constexpr std::size_t kPairs = 1000;
  Stream rng({options.seed, 0, 0xc4e9});
  std::size_t dominated = 0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kPairs; ++k) {
    const double rate = std::exp(std::log(0.01) + (std::log(100.0) - std::log(0.01)) * rng.uniform());
    const double gamma = rate * std::exp(1.0) * (1.0 + 1e-9 + 9.0 * rng.uniform());
    const double bound = poisson_chernoff_tail(gamma, rate);
    const double exact = poisson_tail_at_least(gamma, rate);
    if (bound >= exact) ++dominated;
    if (exact > 0.0) worst_ratio = std::min(worst_ratio, bound / exact);
  }
  result.passed = dominated == kPairs;
  result.measured = std::to_string(dominated) + "/1000 dominated, min bound/exact=" +
                    fmt("%.4g", worst_ratio);
  result.expected = "1000/1000";
  return result;
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "median-calibration", 10.0, median_calibration},
      {2, "false-positive-bound", 60.0, false_positive_bound},
      {3, "budget-bound", 60.0, budget_bound},
      {4, "gaussian-phase-gap", 300.0, gaussian_phase_gap},
      {5, "gamma-min-limit", 120.0, gamma_min_calibration},
      {6, "poisson-min-zero", 30.0, poisson_min_zero},
      {7, "sprt-consistency", 120.0, sprt_consistency},
      {8, "parallel-scanning-equivalence", 30.0, parallel_scanning_equivalence},
      {9, "chernoff-dominance", 5.0, chernoff_dominance},
  };
  return all;
}

std::vector<CriterionResult> run_all(const Options& options,
                                     const std::function<void(const CriterionResult&)>& report) {
  std::vector<CriterionResult> results;
  for (const auto& c : criteria()) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), c.id) == options.only.end()) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = c.run(options);
    } catch (const std::exception& e) {
      r = CriterionResult{c.id, c.name, false, std::string("exception: ") + e.what(), "", 0.0,
                          c.runtime_limit_seconds};
    }
    r.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.runtime_limit_seconds = c.runtime_limit_seconds;
    if (r.runtime_seconds > r.runtime_limit_seconds) {
      r.passed = false;
      r.measured += " [runtime limit exceeded]";
    }
    if (report) report(r);
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << ": measured "
     << r.measured << " | expected " << r.expected << " | "
     << fmt("%.2f s (limit %.0f s)", r.runtime_seconds, r.runtime_limit_seconds);
  return os.str();
}

}  // namespace seqthresh::acceptance
