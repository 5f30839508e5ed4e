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


#include "glip/structural.hpp"

#include <algorithm>

#include "glip/ops.hpp"

namespace glip {

Tensor<float> structural_map(const Tensor<float>& image, int rounds) {
  Tensor<float> cur = image.clone();
  const Dims d = image.dims();
  for (int r = 0; r < rounds; ++r) {
    const Tensor<float> blurred = gaussian_blur3(cur);
    Tensor<float> next = cur.clone();
    auto& out = next.mutable_values();
    for (int n = 0; n < d.n; ++n) {
      for (int c = 0; c < d.c; ++c) {
        for (int y = 0; y < d.h; ++y) {
          for (int x = 0; x < d.w; ++x) {
            float lo = cur(n, c, y, x);
            float hi = lo;
            for (int yy = std::max(0, y - 1); yy <= std::min(d.h - 1, y + 1); ++yy) {
              for (int xx = std::max(0, x - 1); xx <= std::min(d.w - 1, x + 1); ++xx) {
                lo = std::min(lo, cur(n, c, yy, xx));
                hi = std::max(hi, cur(n, c, yy, xx));
              }
            }
            // A flat neighbourhood is its own blur; skipping it keeps constant
            // regions bit-exact under float rounding.
            if (hi > lo && hi - lo <= static_cast<float>(kEdgeRange)) {
              out[static_cast<Eigen::Index>(cur.offset(n, c, y, x))] =
                  blurred(n, c, y, x);
            }
          }
        }
      }
    }
    cur = next;
  }
  return cur;
}

}  // namespace glip
