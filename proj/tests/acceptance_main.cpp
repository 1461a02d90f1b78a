// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
//   acceptance_test [--threads N] [--inject-fault] [ID ...]
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "acceptance.hpp"

int main(int argc, char** argv) {
  cfstat::verify::AcceptanceOptions opts;
  opts.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    if (a == "--inject-fault") {
      opts.inject_fault = true;
    } else if (a == "--threads" && k + 1 < argc) {
      opts.threads = std::atoi(argv[++k]);
    } else {
      opts.only.insert(a);
    }
  }
  int failed = 0;
  const auto results = cfstat::verify::run_acceptance(opts, [&](const cfstat::verify::CriterionResult& r) {
    std::cout << cfstat::verify::format_line(r) << std::endl;
    if (!r.pass) ++failed;
  });
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
