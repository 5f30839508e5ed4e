/*
Copyright 2026 The glip Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/


#ifndef GLIP_GRAD_SUITE_HPP_
#define GLIP_GRAD_SUITE_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "glip/gradcheck.hpp"

// Finite-difference checks for every differentiable operator and the
// end-to-end pipeline, run in double precision.
namespace glip {

inline constexpr double kPointwiseTolerance = 1e-4;
inline constexpr double kOperatorTolerance = 1e-3;
inline constexpr double kSuiteEpsilon = 1e-6;

struct GradCase {
  std::string module;  // tensor-core, gle, partial-conv, attention, ...
  std::string name;
  double tolerance = kOperatorTolerance;
  std::function<GradcheckReport(std::uint64_t seed)> run;
};

std::vector<GradCase> gradient_cases();

struct GradCaseResult {
  std::string module;
  std::string name;
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  std::size_t coords = 0;
  std::size_t retried = 0;
  std::string worst;
  double seconds = 0.0;
  bool pass = false;
};

// Runs every case whose module matches `module` (all when empty) over
// seeds 1..seeds; each result holds the worst error across seeds.
std::vector<GradCaseResult> run_gradient_suite(
    const std::string& module = "", int seeds = 5,
    const std::function<void(const GradCaseResult&)>& on_result = {});

}  // namespace glip

#endif  // GLIP_GRAD_SUITE_HPP_
