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


#include "glip/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "glip/ops.hpp"

namespace glip {

namespace {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

void require_single(const Dims& d, const char* op) {
  if (d.n != 1) {
    throw ShapeError(std::string(op) + ": expects one sample, got " + d.str());
  }
}

int reflect(int i, int size) {
  if (size == 1) return 0;
  if (i < 0) return -i;
  if (i >= size) return 2 * (size - 1) - i;
  return i;
}

}  // namespace

template <typename Scalar>
Tensor<Scalar> normalize_locations(const Tensor<Scalar>& f) {
  const Dims d = f.dims();
  const auto plane = static_cast<Eigen::Index>(d.plane());
  // Per-sample views are (c, h*w) column-major maps: column = location.
  std::vector<Scalar> norms(static_cast<std::size_t>(d.n) * plane);
  Tensor<Scalar> out(d);
  for (int b = 0; b < d.n; ++b) {
    Eigen::Map<const Matrix<Scalar>, 0, Eigen::OuterStride<>> x(
        f.data() + f.offset(b, 0, 0, 0), plane, d.c, Eigen::OuterStride<>(plane));
    Eigen::Map<Matrix<Scalar>, 0, Eigen::OuterStride<>> y(
        out.mutable_values().data() + out.offset(b, 0, 0, 0), plane, d.c,
        Eigen::OuterStride<>(plane));
    for (Eigen::Index p = 0; p < plane; ++p) {
      const Scalar n = std::max(x.row(p).norm(), Scalar(kNormFloor));
      norms[b * plane + p] = n;
      y.row(p) = x.row(p) / n;
    }
  }
  if (auto* tape = detail::recording_tape<Scalar>({&f})) {
    tape->record({&f}, out, [f, out, norms, plane]() mutable {
      const Dims d = f.dims();
      for (int b = 0; b < d.n; ++b) {
        Eigen::Map<const Matrix<Scalar>, 0, Eigen::OuterStride<>> y(
            out.data() + out.offset(b, 0, 0, 0), plane, d.c,
            Eigen::OuterStride<>(plane));
        Eigen::Map<const Matrix<Scalar>, 0, Eigen::OuterStride<>> gy(
            out.grad().data() + out.offset(b, 0, 0, 0), plane, d.c,
            Eigen::OuterStride<>(plane));
        Eigen::Map<Matrix<Scalar>, 0, Eigen::OuterStride<>> gx(
            f.mutable_grad().data() + f.offset(b, 0, 0, 0), plane, d.c,
            Eigen::OuterStride<>(plane));
        for (Eigen::Index p = 0; p < plane; ++p) {
          const Scalar n = norms[b * plane + p];
          if (n > Scalar(kNormFloor)) {
            gx.row(p) += (gy.row(p) - y.row(p) * y.row(p).dot(gy.row(p))) / n;
          } else {
            gx.row(p) += gy.row(p) / n;
          }
        }
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> location_similarity(const Tensor<Scalar>& f) {
  const Dims d = f.dims();
  require_single(d, "location_similarity");
  const auto plane = static_cast<Eigen::Index>(d.plane());
  // x is (h*w, c); s = x x^T is symmetric so storage order does not matter.
  Eigen::Map<const Matrix<Scalar>> x(f.data(), plane, d.c);
  Tensor<Scalar> out({1, static_cast<int>(plane), d.h, d.w});
  Eigen::Map<Matrix<Scalar>> s(out.mutable_values().data(), plane, plane);
  s.noalias() = x * x.transpose();
  check_finite(out, "location_similarity");
  if (auto* tape = detail::recording_tape<Scalar>({&f})) {
    tape->record({&f}, out, [f, out, plane]() mutable {
      const int c = f.c();
      Eigen::Map<const Matrix<Scalar>> x(f.data(), plane, c);
      // Row-major storage of the gradient is its transpose in this map.
      Eigen::Map<const Matrix<Scalar>> gt(out.grad().data(), plane, plane);
      Eigen::Map<Matrix<Scalar>>(f.mutable_grad().data(), plane, c).noalias() +=
          (gt + gt.transpose()) * x;
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> softmax_spatial(const Tensor<Scalar>& x) {
  const Dims d = x.dims();
  const auto plane = static_cast<Eigen::Index>(d.plane());
  const Eigen::Index planes = static_cast<Eigen::Index>(d.n) * d.c;
  Tensor<Scalar> out(d);
  Eigen::Map<const Matrix<Scalar>> in(x.data(), plane, planes);
  Eigen::Map<Matrix<Scalar>> y(out.mutable_values().data(), plane, planes);
  for (Eigen::Index k = 0; k < planes; ++k) {
    y.col(k) = (in.col(k).array() - in.col(k).maxCoeff()).exp().matrix();
    y.col(k) /= y.col(k).sum();
  }
  check_finite(out, "softmax_spatial");
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out, plane, planes]() mutable {
      Eigen::Map<const Matrix<Scalar>> y(out.data(), plane, planes);
      Eigen::Map<const Matrix<Scalar>> gy(out.grad().data(), plane, planes);
      Eigen::Map<Matrix<Scalar>> gx(x.mutable_grad().data(), plane, planes);
      for (Eigen::Index k = 0; k < planes; ++k) {
        const Scalar dot = y.col(k).dot(gy.col(k));
        gx.col(k).array() += y.col(k).array() * (gy.col(k).array() - dot);
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> transpose_locations(const Tensor<Scalar>& scores) {
  const Dims d = scores.dims();
  require_single(d, "transpose_locations");
  const auto plane = static_cast<Eigen::Index>(d.plane());
  if (d.c != plane) {
    throw ShapeError("transpose_locations: channels must equal h*w, got " +
                     d.str());
  }
  Tensor<Scalar> out(d);
  Eigen::Map<const Matrix<Scalar>> s(scores.data(), plane, plane);
  Eigen::Map<Matrix<Scalar>>(out.mutable_values().data(), plane, plane) =
      s.transpose();
  if (auto* tape = detail::recording_tape<Scalar>({&scores})) {
    tape->record({&scores}, out, [scores, out, plane]() mutable {
      Eigen::Map<const Matrix<Scalar>> g(out.grad().data(), plane, plane);
      Eigen::Map<Matrix<Scalar>>(scores.mutable_grad().data(), plane, plane) +=
          g.transpose();
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> extract_patches(const Tensor<Scalar>& f) {
  const Dims d = f.dims();
  require_single(d, "extract_patches");
  const int locations = d.h * d.w;
  const Dims od{locations, d.c, 3, 3};
  // Source index of every output element.
  std::vector<std::size_t> source(od.size());
  std::size_t k = 0;
  for (int y = 0; y < d.h; ++y) {
    for (int x = 0; x < d.w; ++x) {
      for (int c = 0; c < d.c; ++c) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            source[k++] = f.offset(0, c, reflect(y + dy, d.h), reflect(x + dx, d.w));
          }
        }
      }
    }
  }
  typename Tensor<Scalar>::Array values(static_cast<Eigen::Index>(od.size()));
  for (std::size_t i = 0; i < source.size(); ++i) {
    values[static_cast<Eigen::Index>(i)] = f.values()[static_cast<Eigen::Index>(source[i])];
  }
  Tensor<Scalar> out(od, std::move(values));
  if (auto* tape = detail::recording_tape<Scalar>({&f})) {
    tape->record({&f}, out, [f, out, source = std::move(source)]() mutable {
      auto& g = f.mutable_grad();
      const auto& go = out.grad();
      for (std::size_t i = 0; i < source.size(); ++i) {
        g[static_cast<Eigen::Index>(source[i])] += go[static_cast<Eigen::Index>(i)];
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> cosine_scores(const Tensor<Scalar>& f) {
  return location_similarity(normalize_locations(f));
}

template <typename Scalar>
AttentionScores<Scalar> attention_scores(const Tensor<Scalar>& raw) {
  const Dims d = raw.dims();
  require_single(d, "attention_scores");
  if (static_cast<std::size_t>(d.c) != d.plane()) {
    throw ShapeError("attention_scores: channels must equal h*w, got " + d.str());
  }
  return {softmax_spatial(raw)};
}

template <typename Scalar>
Tensor<Scalar> attend_reconstruct(const Tensor<Scalar>& f,
                                  const AttentionScores<Scalar>& s) {
  const Dims d = f.dims();
  require_single(d, "attend_reconstruct");
  if (!(s.scores.dims() == Dims{1, d.h * d.w, d.h, d.w})) {
    throw ShapeError("attend_reconstruct: scores " + s.scores.dims().str() +
                     " do not match features " + d.str());
  }
  const ConvSpec<Scalar> filters(extract_patches(f), Tensor<Scalar>(), 1, 1);
  const Tensor<Scalar> blended = deconv2d(transpose_locations(s.scores), filters);
  // Number of in-image patch centers overlapping each output location.
  typename Tensor<Scalar>::Array inv(static_cast<Eigen::Index>(d.size()));
  for (int c = 0; c < d.c; ++c) {
    for (int y = 0; y < d.h; ++y) {
      const int ny = std::min(y + 1, d.h - 1) - std::max(y - 1, 0) + 1;
      for (int x = 0; x < d.w; ++x) {
        const int nx = std::min(x + 1, d.w - 1) - std::max(x - 1, 0) + 1;
        inv[static_cast<Eigen::Index>(f.offset(0, c, y, x))] = Scalar(ny * nx);
      }
    }
  }
  inv = inv.inverse();
  return mul(blended, Tensor<Scalar>(d, std::move(inv)));
}

template <typename Scalar>
Tensor<Scalar> feature_attention(const Tensor<Scalar>& f) {
  std::vector<Tensor<Scalar>> out;
  out.reserve(f.n());
  for (int b = 0; b < f.n(); ++b) {
    const Tensor<Scalar> fb = f.n() == 1 ? f : slice_batch(f, b);
    out.push_back(attend_reconstruct(fb, attention_scores(cosine_scores(fb))));
  }
  if (out.size() == 1) return out.front();
  return concat_batch<Scalar>(out);
}

#define GLIP_INSTANTIATE_ATTENTION(S)                                          \
  template Tensor<S> normalize_locations(const Tensor<S>&);                    \
  template Tensor<S> location_similarity(const Tensor<S>&);                    \
  template Tensor<S> softmax_spatial(const Tensor<S>&);                        \
  template Tensor<S> transpose_locations(const Tensor<S>&);                    \
  template Tensor<S> extract_patches(const Tensor<S>&);                        \
  template Tensor<S> cosine_scores(const Tensor<S>&);                          \
  template AttentionScores<S> attention_scores(const Tensor<S>&);              \
  template Tensor<S> attend_reconstruct(const Tensor<S>&,                      \
                                        const AttentionScores<S>&);            \
  template Tensor<S> feature_attention(const Tensor<S>&);

GLIP_INSTANTIATE_ATTENTION(float)
GLIP_INSTANTIATE_ATTENTION(double)

}  // namespace glip
