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

#include "glip/mask.hpp"

#include <algorithm>
#include <string>

namespace glip {

MaskPlane::MaskPlane(int batch, int height, int width, bool valid)
    : n_(batch), h_(height), w_(width) {
  if (batch < 0 || height < 0 || width < 0) {
    throw ShapeError("MaskPlane: negative dims");
  }
  bits_.assign(static_cast<std::size_t>(batch) * height * width,
               valid ? 1 : 0);
}

template <typename Scalar>
MaskPlane MaskPlane::from_tensor(const Tensor<Scalar>& t, double threshold) {
  if (t.c() != 1) {
    throw ShapeError("MaskPlane::from_tensor expects one channel, got " +
                     t.dims().str());
  }
  MaskPlane m(t.n(), t.h(), t.w(), false);
  for (std::size_t i = 0; i < m.bits_.size(); ++i) {
    m.bits_[i] = static_cast<double>(t.values()[static_cast<Eigen::Index>(i)]) > threshold;
  }
  return m;
}

std::size_t MaskPlane::valid_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

double MaskPlane::hole_fraction() const {
  if (bits_.empty()) return 0.0;
  return 1.0 - static_cast<double>(valid_count()) / bits_.size();
}

bool MaskPlane::all_valid() const { return valid_count() == bits_.size(); }
bool MaskPlane::all_holes() const { return valid_count() == 0; }

bool MaskPlane::covers(const MaskPlane& other) const {
  if (other.n_ != n_ || other.h_ != h_ || other.w_ != w_) {
    throw ShapeError("MaskPlane::covers: dims mismatch");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (other.bits_[i] && !bits_[i]) return false;
  }
  return true;
}

MaskPlane MaskPlane::sample(int b) const {
  if (b < 0 || b >= n_) throw ShapeError("MaskPlane::sample out of range");
  MaskPlane m(1, h_, w_, false);
  std::copy_n(bits_.begin() + static_cast<std::ptrdiff_t>(index(b, 0, 0)),
              m.bits_.size(), m.bits_.begin());
  return m;
}

MaskPlane MaskPlane::stack(const std::vector<MaskPlane>& planes) {
  if (planes.empty()) return {};
  const int h = planes.front().h_;
  const int w = planes.front().w_;
  int n = 0;
  for (const auto& p : planes) {
    if (p.h_ != h || p.w_ != w) throw ShapeError("MaskPlane::stack: dims");
    n += p.n_;
  }
  MaskPlane m(n, h, w, false);
  auto it = m.bits_.begin();
  for (const auto& p : planes) it = std::copy(p.bits_.begin(), p.bits_.end(), it);
  return m;
}

MaskPlane MaskPlane::downsample_nearest(int factor) const {
  if (factor < 1 || h_ % factor != 0 || w_ % factor != 0) {
    throw ShapeError("MaskPlane::downsample_nearest: bad factor " +
                     std::to_string(factor));
  }
  MaskPlane m(n_, h_ / factor, w_ / factor, false);
  for (int b = 0; b < n_; ++b) {
    for (int y = 0; y < m.h_; ++y) {
      for (int x = 0; x < m.w_; ++x) m.set(b, y, x, at(b, y * factor, x * factor));
    }
  }
  return m;
}

MaskPlane MaskPlane::upsample_nearest(int factor) const {
  if (factor < 1) throw ShapeError("MaskPlane::upsample_nearest: bad factor");
  MaskPlane m(n_, h_ * factor, w_ * factor, false);
  for (int b = 0; b < n_; ++b) {
    for (int y = 0; y < m.h_; ++y) {
      for (int x = 0; x < m.w_; ++x) m.set(b, y, x, at(b, y / factor, x / factor));
    }
  }
  return m;
}

MaskPlane MaskPlane::dilate_holes(int radius) const {
  MaskPlane m = *this;
  for (int b = 0; b < n_; ++b) {
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        if (at(b, y, x)) continue;
        for (int yy = std::max(0, y - radius); yy <= std::min(h_ - 1, y + radius); ++yy) {
          for (int xx = std::max(0, x - radius); xx <= std::min(w_ - 1, x + radius); ++xx) {
            m.set(b, yy, xx, false);
          }
        }
      }
    }
  }
  return m;
}

MaskPlane MaskPlane::inverted() const {
  MaskPlane m = *this;
  for (auto& v : m.bits_) v = v ? 0 : 1;
  return m;
}

template <typename Scalar>
Tensor<Scalar> MaskPlane::expand(int channels) const {
  const Dims d{n_, channels, h_, w_};
  typename Tensor<Scalar>::Array values(static_cast<Eigen::Index>(d.size()));
  const std::size_t plane = static_cast<std::size_t>(h_) * w_;
  for (int b = 0; b < n_; ++b) {
    for (int c = 0; c < channels; ++c) {
      const std::size_t dst = (static_cast<std::size_t>(b) * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        values[static_cast<Eigen::Index>(dst + i)] = Scalar(bits_[b * plane + i]);
      }
    }
  }
  return Tensor<Scalar>(d, std::move(values));
}

std::vector<int> window_valid_counts(const MaskPlane& m, int kh, int kw,
                                     int stride, int padding, int* out_h,
                                     int* out_w) {
  if (kh <= 0 || kw <= 0 || stride <= 0 || padding < 0) {
    throw ShapeError("window_valid_counts: bad geometry");
  }
  const int oh = (m.height() + 2 * padding - kh) / stride + 1;
  const int ow = (m.width() + 2 * padding - kw) / stride + 1;
  if (m.height() + 2 * padding < kh || m.width() + 2 * padding < kw ||
      oh <= 0 || ow <= 0) {
    throw ShapeError("window_valid_counts: output dims not positive");
  }
  // Summed-area table per sample.
  const int h = m.height();
  const int w = m.width();
  std::vector<int> counts(static_cast<std::size_t>(m.batch()) * oh * ow);
  std::vector<int> sat(static_cast<std::size_t>(h + 1) * (w + 1));
  for (int b = 0; b < m.batch(); ++b) {
    std::fill(sat.begin(), sat.end(), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        sat[(y + 1) * (w + 1) + x + 1] = m.at(b, y, x) + sat[y * (w + 1) + x + 1] +
                                         sat[(y + 1) * (w + 1) + x] - sat[y * (w + 1) + x];
      }
    }
    for (int oy = 0; oy < oh; ++oy) {
      const int y0 = std::clamp(oy * stride - padding, 0, h);
      const int y1 = std::clamp(oy * stride - padding + kh, 0, h);
      for (int ox = 0; ox < ow; ++ox) {
        const int x0 = std::clamp(ox * stride - padding, 0, w);
        const int x1 = std::clamp(ox * stride - padding + kw, 0, w);
        counts[(static_cast<std::size_t>(b) * oh + oy) * ow + ox] =
            sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] -
            sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0];
      }
    }
  }
  if (out_h != nullptr) *out_h = oh;
  if (out_w != nullptr) *out_w = ow;
  return counts;
}

MaskPlane update_mask(const MaskPlane& m, int kh, int kw, int stride,
                      int padding) {
  int oh = 0;
  int ow = 0;
  const std::vector<int> counts =
      window_valid_counts(m, kh, kw, stride, padding, &oh, &ow);
  MaskPlane out(m.batch(), oh, ow, false);
  for (int b = 0; b < m.batch(); ++b) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        out.set(b, y, x, counts[(static_cast<std::size_t>(b) * oh + y) * ow + x] > 0);
      }
    }
  }
  return out;
}

template MaskPlane MaskPlane::from_tensor(const Tensor<float>&, double);
template MaskPlane MaskPlane::from_tensor(const Tensor<double>&, double);
template Tensor<float> MaskPlane::expand(int) const;
template Tensor<double> MaskPlane::expand(int) const;

}  // namespace glip
