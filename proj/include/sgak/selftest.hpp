#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgak/gak.hpp"

namespace sgak {

struct SelftestOptions {
  std::uint64_t seed = 42;
  double delta = 1.0;
  detail::DpFaults faults;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  double worst_error = 0.0;  // suite-specific; see selftest_suite_names()
  std::string detail;
};

// dp_vs_bruteforce     max relative error of the DP against enumeration
// alignment_counts     count mismatches against the Delannoy recurrence
// closed_form_sweep    max |closed form - DP| over monotone sweeps
// gram_spectra         max(0, -min eigenvalue) over random Gram matrices
// gradient_fd          max relative error of the gradient against central
//                      finite differences
std::vector<std::string> selftest_suite_names();

std::vector<SuiteResult> run_selftest(const SelftestOptions& options);

// Individual suites, shared with the acceptance tests.
SuiteResult suite_dp_vs_bruteforce(const SelftestOptions& options, std::size_t max_len = 5,
                                   std::size_t instances = 100);
SuiteResult suite_alignment_counts(std::size_t max_len = 6);
SuiteResult suite_closed_form_sweep(const SelftestOptions& options);
SuiteResult suite_gram_spectra(const SelftestOptions& options, std::size_t sets = 200,
                               std::size_t size = 8);
SuiteResult suite_gradient_fd(const SelftestOptions& options, std::size_t instances = 50);

// D(a, b) by the three-term recurrence.
std::uint64_t delannoy(std::size_t a, std::size_t b);

}  // namespace sgak
