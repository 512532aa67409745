// Copyright 2026 The loco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <vector>

#include "loco/nets.hpp"

// Central finite-difference oracle for gradient verification (64-bit mode,
// h = 1e-5). Checks a random subset of coordinates in every parameter block
// so large nets stay cheap to verify.

namespace loco::test {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_block;
  long worst_index = -1;
  double analytic = 0.0, numeric = 0.0;
};

/// `loss` must recompute the scalar loss from the current parameter values.
/// `analytic` holds dloss/dparam blocks aligned with `params`.
inline GradCheckResult finite_difference_check(
    const std::function<double()>& loss, const std::vector<nets::ParamBlock<double>>& params,
    const std::vector<nets::ParamBlock<double>>& analytic, Rng& rng,
    int samples_per_block = 24, double h = 1e-5) {
  GradCheckResult result;
  for (size_t bi = 0; bi < params.size(); ++bi) {
    const auto& p = params[bi];
    const auto& g = analytic[bi];
    const long n = p.size();
    const int checks = int(std::min<long>(samples_per_block, n));
    for (int k = 0; k < checks; ++k) {
      const long i = (n <= samples_per_block) ? k : long(rng.next_u64() % uint64_t(n));
      const double saved = p.data[i];
      p.data[i] = saved + h;
      const double up = loss();
      p.data[i] = saved - h;
      const double down = loss();
      p.data[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = g.data[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
      const double rel = std::abs(fd - an) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_block = p.name;
        result.worst_index = i;
        result.analytic = an;
        result.numeric = fd;
      }
    }
  }
  return result;
}

}  // namespace loco::test
