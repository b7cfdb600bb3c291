#pragma once

#include <string>
#include <vector>

// Runtime self-checks shared by the `selftest` subcommand and the
// acceptance runner.
namespace sfd::selftest {

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

/// fft2 against the naive DFT on 20 random planes (5x7 and 31x17 among them),
/// plus the inverse roundtrip. Both must stay within 1e-4.
CheckResult check_fft();
CheckResult check_conv();
/// Finite-difference checks of conv, gradient magnitude and the spectral ops.
std::vector<CheckResult> check_gradients();
/// Metric analytic cases and oracle comparisons.
std::vector<CheckResult> check_metrics();

struct SelftestOptions {
  /// Flip the Sobel kernel sign in the backward pass while checking gradients.
  bool inject_sobel_fault = false;
};

std::vector<CheckResult> run_all(const SelftestOptions& options = {});

/// Fixed-width pass/fail table.
std::string format_table(const std::vector<CheckResult>& results);

}  // namespace sfd::selftest
