// Runs the acceptance criteria and prints one line per criterion.
// Exit status is 0 iff every selected criterion passes.

#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "seqthresh/acceptance.hpp"

int main(int argc, char** argv) {
  namespace acc = seqthresh::acceptance;
  acc::Options options;
  CLI::App app{"acceptance suite"};
  app.add_option("--seed", options.seed, "base seed");
  app.add_option("--threads", options.threads, "worker threads (0: all cores)");
  app.add_option("--only", options.only, "criterion ids to run");
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  acc::run_all(options, [&](const acc::CriterionResult& r) {
    std::cout << acc::format_line(r) << std::endl;
    failed += r.passed ? 0 : 1;
  });
  std::cout << (failed ? "acceptance: FAILED " : "acceptance: all passed ")
            << "(" << failed << " failing)\n";
  return failed ? 1 : 0;
}
