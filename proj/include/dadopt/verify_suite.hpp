// Copyright 2026 The dadopt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DADOPT_VERIFY_SUITE_HPP
#define DADOPT_VERIFY_SUITE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dadopt {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Measured quantity (residual, or observed value for bound checks).
  double value = 0.0;
  /// Tolerance or bound the value is compared against.
  double limit = 0.0;
  std::string detail;
  /// Informative checks are reported but never fail the suite.
  bool informative = false;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  /// True when every non-informative check passed.
  bool passed() const;
};

/// Randomized checks of the descent identity for the averaged iterate
/// sequence, the threshold-monotonicity property and u~ mean conservation.
SuiteReport run_lemma_suite(std::uint64_t seed = 1);

/// Per-trajectory consensus-error and drift bounds plus the (informative)
/// comparison of the averaged scaled gradient against the convergence bound.
SuiteReport run_bound_suite(std::uint64_t seed = 1);

SuiteReport run_suite(std::string_view name, std::uint64_t seed = 1);

std::string to_json(const SuiteReport& report);

}  // namespace dadopt

#endif  // DADOPT_VERIFY_SUITE_HPP
