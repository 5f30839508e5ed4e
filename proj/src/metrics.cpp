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


#include "glip/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace glip {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void require_same(const Tensor<float>& a, const Tensor<float>& b, const char* op) {
  if (!(a.dims() == b.dims())) {
    throw ShapeError(std::string(op) + ": dims mismatch " + a.dims().str() +
                     " vs " + b.dims().str());
  }
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

// Separable valid-mode filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& in, int h, int w,
                                 const std::array<double, kWindow>& g) {
  const int oh = h - kWindow + 1;
  const int ow = w - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * in[y * w + x + k];
      rows[y * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * rows[(y + k) * ow + x];
      out[y * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double psnr(const Tensor<float>& a, const Tensor<float>& b, double peak) {
  require_same(a, b, "psnr");
  if (a.size() == 0) throw ShapeError("psnr: empty tensors");
  const double mse = (a.values().cast<double>() - b.values().cast<double>())
                         .square()
                         .mean();
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Tensor<float>& a, const Tensor<float>& b) {
  require_same(a, b, "ssim");
  const Dims d = a.dims();
  if (d.h < kWindow || d.w < kWindow) {
    throw ShapeError("ssim: images must be at least 11x11, got " + d.str());
  }
  const auto g = gaussian_taps();
  const std::size_t plane = d.plane();
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> pa(plane), pb(plane), aa(plane), bb(plane), ab(plane);
  for (int n = 0; n < d.n; ++n) {
    for (int c = 0; c < d.c; ++c) {
      const std::size_t base = a.offset(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        pa[i] = a.data()[base + i];
        pb[i] = b.data()[base + i];
        aa[i] = pa[i] * pa[i];
        bb[i] = pb[i] * pb[i];
        ab[i] = pa[i] * pb[i];
      }
      const auto mu_a = filter_valid(pa, d.h, d.w, g);
      const auto mu_b = filter_valid(pb, d.h, d.w, g);
      const auto e_aa = filter_valid(aa, d.h, d.w, g);
      const auto e_bb = filter_valid(bb, d.h, d.w, g);
      const auto e_ab = filter_valid(ab, d.h, d.w, g);
      for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double va = e_aa[i] - mu_a[i] * mu_a[i];
        const double vb = e_bb[i] - mu_b[i] * mu_b[i];
        const double cov = e_ab[i] - mu_a[i] * mu_b[i];
        const double num = (2.0 * mu_a[i] * mu_b[i] + kC1) * (2.0 * cov + kC2);
        const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1) * (va + vb + kC2);
        total += num / den;
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

double mean_l1(const Tensor<float>& a, const Tensor<float>& b) {
  require_same(a, b, "mean_l1");
  if (a.size() == 0) throw ShapeError("mean_l1: empty tensors");
  return (a.values().cast<double>() - b.values().cast<double>()).abs().mean();
}

}  // namespace glip
