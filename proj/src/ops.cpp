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

#include "glip/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace glip {

namespace {

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using ConstRowMap = Eigen::Map<const RowMatrix<Scalar>>;
template <typename Scalar>
using RowMap = Eigen::Map<RowMatrix<Scalar>>;
template <typename Scalar>
using ConstVectorMap =
    Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;

struct Geometry {
  int channels, height, width;
  int kh, kw, stride, pad;
  int out_h, out_w;

  int rows() const { return channels * kh * kw; }
  int cols() const { return out_h * out_w; }
};

// Unfolds one sample (channels, height, width) into a (c*kh*kw, oh*ow)
// row-major column buffer; out-of-range taps read zero.
template <typename Scalar>
void im2col(const Scalar* x, const Geometry& g, Scalar* col) {
  const int cols = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    const Scalar* plane = x + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        Scalar* dst = col + static_cast<std::size_t>((c * g.kh + ky) * g.kw + kx) * cols;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          Scalar* row = dst + static_cast<std::size_t>(oy) * g.out_w;
          if (iy < 0 || iy >= g.height) {
            std::fill(row, row + g.out_w, Scalar(0));
            continue;
          }
          const Scalar* src = plane + static_cast<std::size_t>(iy) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            row[ox] = (ix >= 0 && ix < g.width) ? src[ix] : Scalar(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds the column buffer back into x.
template <typename Scalar>
void col2im(const Scalar* col, const Geometry& g, Scalar* x) {
  const int cols = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    Scalar* plane = x + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        const Scalar* src = col + static_cast<std::size_t>((c * g.kh + ky) * g.kw + kx) * cols;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.height) continue;
          const Scalar* row = src + static_cast<std::size_t>(oy) * g.out_w;
          Scalar* dst = plane + static_cast<std::size_t>(iy) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.width) dst[ix] += row[ox];
          }
        }
      }
    }
  }
}

void require_same_dims(const Dims& a, const Dims& b, const char* op) {
  if (!(a == b)) {
    throw ShapeError(std::string(op) + ": dims mismatch " + a.str() + " vs " +
                     b.str());
  }
}

template <typename Scalar>
Tensor<Scalar> finish(Tensor<Scalar> out, const char* op) {
  check_finite(out, op);
  return out;
}

// Reflect index into [0, size); size 1 replicates.
int reflect_index(int i, int size) {
  if (size == 1) return 0;
  while (i < 0 || i >= size) {
    if (i < 0) i = -i;
    if (i >= size) i = 2 * (size - 1) - i;
  }
  return i;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvSpec

template <typename Scalar>
ConvSpec<Scalar>::ConvSpec(Tensor<Scalar> w, Tensor<Scalar> b, int s, int p)
    : weight(std::move(w)), bias(std::move(b)), stride(s), padding(p) {
  if (!weight.defined() || weight.n() <= 0 || weight.c() <= 0 ||
      weight.h() <= 0 || weight.w() <= 0) {
    throw ShapeError("ConvSpec: kernel dims must be positive");
  }
  if (stride <= 0 || padding < 0) {
    throw ShapeError("ConvSpec: stride must be positive, padding >= 0");
  }
  if (bias.defined() && !(bias.dims() == Dims{1, weight.n(), 1, 1})) {
    throw ShapeError("ConvSpec: bias must be (1, out, 1, 1), got " +
                     bias.dims().str());
  }
}

template <typename Scalar>
int ConvSpec<Scalar>::output_extent(int size, int k) const {
  const int span = size + 2 * padding - k;
  const int extent = span < 0 ? 0 : span / stride + 1;
  if (extent <= 0) {
    throw ShapeError("conv output extent is not positive for input " +
                     std::to_string(size) + ", kernel " + std::to_string(k));
  }
  return extent;
}

template <typename Scalar>
Dims ConvSpec<Scalar>::output_dims(const Dims& in) const {
  if (in.c != in_channels()) {
    throw ShapeError("conv2d: input has " + std::to_string(in.c) +
                     " channels, kernel expects " +
                     std::to_string(in_channels()));
  }
  return {in.n, out_channels(), output_extent(in.h, kernel_h()),
          output_extent(in.w, kernel_w())};
}

template <typename Scalar>
ConvSpec<Scalar> make_conv(int in_channels, int out_channels, int kernel,
                           int stride, int padding, std::mt19937_64& rng,
                           bool with_bias) {
  const Dims wd{out_channels, in_channels, kernel, kernel};
  std::normal_distribution<double> normal(
      0.0, std::sqrt(2.0 / (static_cast<double>(in_channels) * kernel * kernel)));
  typename Tensor<Scalar>::Array w(static_cast<Eigen::Index>(wd.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = Scalar(normal(rng));
  Tensor<Scalar> bias;
  if (with_bias) {
    bias = Tensor<Scalar>::parameter(
        {1, out_channels, 1, 1},
        Tensor<Scalar>::Array::Zero(out_channels));
  }
  return ConvSpec<Scalar>(Tensor<Scalar>::parameter(wd, std::move(w)),
                          std::move(bias), stride, padding);
}

template <typename Scalar>
BatchNormParams<Scalar> make_batchnorm(int channels) {
  using Array = typename Tensor<Scalar>::Array;
  return {Tensor<Scalar>::parameter({1, channels, 1, 1},
                                    Array::Ones(channels)),
          Tensor<Scalar>::parameter({1, channels, 1, 1},
                                    Array::Zero(channels))};
}

// ---------------------------------------------------------------------------
// Convolution

template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& x, const ConvSpec<Scalar>& spec) {
  const Dims in = x.dims();
  const Dims od = spec.output_dims(in);
  const Geometry g{in.c, in.h, in.w, spec.kernel_h(), spec.kernel_w(),
                   spec.stride, spec.padding, od.h, od.w};
  const int rows = g.rows();
  const int cols = g.cols();
  const int oc = od.c;

  Tensor<Scalar> out(od);
  std::vector<Scalar> col(static_cast<std::size_t>(rows) * cols);
  ConstRowMap<Scalar> weight(spec.weight.data(), oc, rows);
  const std::size_t in_stride = static_cast<std::size_t>(in.c) * in.h * in.w;
  const std::size_t out_stride = static_cast<std::size_t>(oc) * cols;
  for (int b = 0; b < in.n; ++b) {
    im2col(x.data() + b * in_stride, g, col.data());
    RowMap<Scalar> o(out.mutable_values().data() + b * out_stride, oc, cols);
    o.noalias() = weight * ConstRowMap<Scalar>(col.data(), rows, cols);
    if (spec.bias.defined()) {
      o.colwise() += ConstVectorMap<Scalar>(spec.bias.data(), oc);
    }
  }
  check_finite(out, "conv2d");

  if (auto* tape = detail::recording_tape<Scalar>(
          {&x, &spec.weight, &spec.bias})) {
    tape->record({&x, &spec.weight, &spec.bias}, out,
                 [x, spec, out, g, in_stride, out_stride]() mutable {
      const int rows = g.rows();
      const int cols = g.cols();
      const int oc = spec.out_channels();
      std::vector<Scalar> col(static_cast<std::size_t>(rows) * cols);
      ConstRowMap<Scalar> weight(spec.weight.data(), oc, rows);
      const bool need_w = spec.weight.requires_grad();
      const bool need_b = spec.bias.defined() && spec.bias.requires_grad();
      for (int b = 0; b < x.n(); ++b) {
        ConstRowMap<Scalar> go(out.grad().data() + b * out_stride, oc, cols);
        if (need_w) {
          im2col(x.data() + b * in_stride, g, col.data());
          RowMap<Scalar>(spec.weight.mutable_grad().data(), oc, rows)
              .noalias() +=
              go * ConstRowMap<Scalar>(col.data(), rows, cols).transpose();
        }
        if (need_b) {
          Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(
              spec.bias.mutable_grad().data(), oc) += go.rowwise().sum();
        }
        if (x.requires_grad()) {
          RowMap<Scalar>(col.data(), rows, cols).noalias() =
              weight.transpose() * go;
          col2im(col.data(), g, x.mutable_grad().data() + b * in_stride);
        }
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> deconv2d(const Tensor<Scalar>& x,
                        const ConvSpec<Scalar>& spec) {
  const Dims in = x.dims();
  if (in.c != spec.out_channels()) {
    throw ShapeError("deconv2d: input has " + std::to_string(in.c) +
                     " channels, kernel emits " +
                     std::to_string(spec.out_channels()));
  }
  const int oh = (in.h - 1) * spec.stride - 2 * spec.padding + spec.kernel_h();
  const int ow = (in.w - 1) * spec.stride - 2 * spec.padding + spec.kernel_w();
  if (oh <= 0 || ow <= 0) {
    throw ShapeError("deconv2d: output extent is not positive");
  }
  const Dims od{in.n, spec.in_channels(), oh, ow};
  // Geometry of the forward conv that this op is the adjoint of.
  const Geometry g{od.c, oh, ow, spec.kernel_h(), spec.kernel_w(),
                   spec.stride, spec.padding, in.h, in.w};
  const int rows = g.rows();
  const int cols = g.cols();
  const int kc = in.c;

  Tensor<Scalar> out(od);
  std::vector<Scalar> col(static_cast<std::size_t>(rows) * cols);
  ConstRowMap<Scalar> weight(spec.weight.data(), kc, rows);
  const std::size_t in_stride = static_cast<std::size_t>(kc) * cols;
  const std::size_t out_stride = od.size() / std::max(1, od.n);
  for (int b = 0; b < in.n; ++b) {
    RowMap<Scalar>(col.data(), rows, cols).noalias() =
        weight.transpose() *
        ConstRowMap<Scalar>(x.data() + b * in_stride, kc, cols);
    col2im(col.data(), g, out.mutable_values().data() + b * out_stride);
  }
  check_finite(out, "deconv2d");

  if (auto* tape = detail::recording_tape<Scalar>({&x, &spec.weight})) {
    tape->record({&x, &spec.weight}, out,
                 [x, spec, out, g, in_stride, out_stride]() mutable {
      const int rows = g.rows();
      const int cols = g.cols();
      const int kc = spec.out_channels();
      std::vector<Scalar> col(static_cast<std::size_t>(rows) * cols);
      ConstRowMap<Scalar> weight(spec.weight.data(), kc, rows);
      for (int b = 0; b < x.n(); ++b) {
        im2col(out.grad().data() + b * out_stride, g, col.data());
        ConstRowMap<Scalar> gcol(col.data(), rows, cols);
        if (x.requires_grad()) {
          RowMap<Scalar>(x.mutable_grad().data() + b * in_stride, kc, cols)
              .noalias() += weight * gcol;
        }
        if (spec.weight.requires_grad()) {
          RowMap<Scalar>(spec.weight.mutable_grad().data(), kc, rows)
              .noalias() +=
              ConstRowMap<Scalar>(x.data() + b * in_stride, kc, cols) *
              gcol.transpose();
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resampling and padding

template <typename Scalar>
Tensor<Scalar> upsample_nearest(const Tensor<Scalar>& x, int factor) {
  if (factor < 1) throw ShapeError("upsample_nearest: factor must be >= 1");
  const Dims in = x.dims();
  const Dims od{in.n, in.c, in.h * factor, in.w * factor};
  Tensor<Scalar> out(od);
  auto& o = out.mutable_values();
  const auto& v = x.values();
  const std::size_t planes = static_cast<std::size_t>(in.n) * in.c;
  for (std::size_t p = 0; p < planes; ++p) {
    for (int y = 0; y < od.h; ++y) {
      for (int xx = 0; xx < od.w; ++xx) {
        o[(p * od.h + y) * od.w + xx] =
            v[(p * in.h + y / factor) * in.w + xx / factor];
      }
    }
  }
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out, factor, planes, in, od]() mutable {
      auto& gx = x.mutable_grad();
      const auto& go = out.grad();
      for (std::size_t p = 0; p < planes; ++p) {
        for (int y = 0; y < od.h; ++y) {
          for (int xx = 0; xx < od.w; ++xx) {
            gx[(p * in.h + y / factor) * in.w + xx / factor] +=
                go[(p * od.h + y) * od.w + xx];
          }
        }
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> downsample_nearest(const Tensor<Scalar>& x, int factor) {
  if (factor < 1) throw ShapeError("downsample_nearest: factor must be >= 1");
  const Dims in = x.dims();
  if (in.h % factor != 0 || in.w % factor != 0) {
    throw ShapeError("downsample_nearest: dims " + in.str() +
                     " not divisible by " + std::to_string(factor));
  }
  const Dims od{in.n, in.c, in.h / factor, in.w / factor};
  Tensor<Scalar> out(od);
  auto& o = out.mutable_values();
  const auto& v = x.values();
  const std::size_t planes = static_cast<std::size_t>(in.n) * in.c;
  for (std::size_t p = 0; p < planes; ++p) {
    for (int y = 0; y < od.h; ++y) {
      for (int xx = 0; xx < od.w; ++xx) {
        o[(p * od.h + y) * od.w + xx] =
            v[(p * in.h + y * factor) * in.w + xx * factor];
      }
    }
  }
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out, factor, planes, in, od]() mutable {
      auto& gx = x.mutable_grad();
      const auto& go = out.grad();
      for (std::size_t p = 0; p < planes; ++p) {
        for (int y = 0; y < od.h; ++y) {
          for (int xx = 0; xx < od.w; ++xx) {
            gx[(p * in.h + y * factor) * in.w + xx * factor] +=
                go[(p * od.h + y) * od.w + xx];
          }
        }
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> reflect_pad(const Tensor<Scalar>& x, int top, int bottom,
                           int left, int right) {
  const Dims in = x.dims();
  if (top < 0 || bottom < 0 || left < 0 || right < 0) {
    throw ShapeError("reflect_pad: negative padding");
  }
  if ((in.h > 1 && std::max(top, bottom) >= in.h) ||
      (in.w > 1 && std::max(left, right) >= in.w)) {
    throw ShapeError("reflect_pad: padding exceeds input extent");
  }
  const Dims od{in.n, in.c, in.h + top + bottom, in.w + left + right};
  // Source offset within a plane for every output pixel of a plane.
  std::vector<int> source(od.plane());
  for (int y = 0; y < od.h; ++y) {
    const int sy = reflect_index(y - top, in.h);
    for (int xx = 0; xx < od.w; ++xx) {
      source[static_cast<std::size_t>(y) * od.w + xx] =
          sy * in.w + reflect_index(xx - left, in.w);
    }
  }
  Tensor<Scalar> out(od);
  auto& o = out.mutable_values();
  const auto& v = x.values();
  const std::size_t planes = static_cast<std::size_t>(in.n) * in.c;
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t i = 0; i < source.size(); ++i) {
      o[p * od.plane() + i] = v[p * in.plane() + source[i]];
    }
  }
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out,
                 [x, out, source = std::move(source), planes, in, od]() mutable {
      auto& gx = x.mutable_grad();
      const auto& go = out.grad();
      for (std::size_t p = 0; p < planes; ++p) {
        for (std::size_t i = 0; i < source.size(); ++i) {
          gx[p * in.plane() + source[i]] += go[p * od.plane() + i];
        }
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> crop(const Tensor<Scalar>& x, int top, int left, int height,
                    int width) {
  const Dims in = x.dims();
  if (top < 0 || left < 0 || height <= 0 || width <= 0 ||
      top + height > in.h || left + width > in.w) {
    throw ShapeError("crop: window outside input " + in.str());
  }
  const Dims od{in.n, in.c, height, width};
  Tensor<Scalar> out(od);
  auto& o = out.mutable_values();
  const auto& v = x.values();
  const std::size_t planes = static_cast<std::size_t>(in.n) * in.c;
  for (std::size_t p = 0; p < planes; ++p) {
    for (int y = 0; y < height; ++y) {
      for (int xx = 0; xx < width; ++xx) {
        o[(p * height + y) * width + xx] =
            v[(p * in.h + y + top) * in.w + xx + left];
      }
    }
  }
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out, top, left, planes, in, od]() mutable {
      auto& gx = x.mutable_grad();
      const auto& go = out.grad();
      for (std::size_t p = 0; p < planes; ++p) {
        for (int y = 0; y < od.h; ++y) {
          for (int xx = 0; xx < od.w; ++xx) {
            gx[(p * in.h + y + top) * in.w + xx + left] +=
                go[(p * od.h + y) * od.w + xx];
          }
        }
      }
    });
  }
  return out;
}

namespace {

constexpr double kGaussian3[3][3] = {{1.0 / 16, 2.0 / 16, 1.0 / 16},
                                     {2.0 / 16, 4.0 / 16, 2.0 / 16},
                                     {1.0 / 16, 2.0 / 16, 1.0 / 16}};

// Valid depthwise 3x3 correlation of padded planes (h+2, w+2) -> (h, w).
template <typename Scalar>
void blur_valid(const Scalar* in, int h, int w, Scalar* out) {
  const int pw = w + 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Scalar acc(0);
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          acc += Scalar(kGaussian3[ky][kx]) * in[(y + ky) * pw + x + kx];
        }
      }
      out[y * w + x] = acc;
    }
  }
}

template <typename Scalar>
void blur_valid_adjoint(const Scalar* gout, int h, int w, Scalar* gin) {
  const int pw = w + 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Scalar g = gout[y * w + x];
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          gin[(y + ky) * pw + x + kx] += Scalar(kGaussian3[ky][kx]) * g;
        }
      }
    }
  }
}

}  // namespace

template <typename Scalar>
Tensor<Scalar> gaussian_blur3(const Tensor<Scalar>& x) {
  const Tensor<Scalar> padded = reflect_pad(x, 1, 1, 1, 1);
  const Dims in = x.dims();
  const Dims pd = padded.dims();
  Tensor<Scalar> out(in);
  const std::size_t planes = static_cast<std::size_t>(in.n) * in.c;
  for (std::size_t p = 0; p < planes; ++p) {
    blur_valid(padded.data() + p * pd.plane(), in.h, in.w,
               out.mutable_values().data() + p * in.plane());
  }
  if (auto* tape = detail::recording_tape<Scalar>({&padded})) {
    tape->record({&padded}, out, [padded, out, planes, in, pd]() mutable {
      for (std::size_t p = 0; p < planes; ++p) {
        blur_valid_adjoint(out.grad().data() + p * in.plane(), in.h, in.w,
                           padded.mutable_grad().data() + p * pd.plane());
      }
    });
  }
  return finish(std::move(out), "gaussian_blur3");
}

// ---------------------------------------------------------------------------
// Pointwise

namespace {

// y = f(x) elementwise; backward multiplies by df(x, y).
template <typename Scalar, typename F, typename DF>
Tensor<Scalar> unary(const Tensor<Scalar>& x, F f, DF df, const char* name) {
  Tensor<Scalar> out(x.dims(), x.values().unaryExpr(f));
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out, df]() mutable {
      const auto& xv = x.values();
      const auto& yv = out.values();
      const auto& go = out.grad();
      auto& gx = x.mutable_grad();
      for (Eigen::Index i = 0; i < xv.size(); ++i) {
        gx[i] += go[i] * df(xv[i], yv[i]);
      }
    });
  }
  (void)name;
  return out;
}

}  // namespace

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& x) {
  return unary(
      x, [](Scalar v) { return v > Scalar(0) ? v : Scalar(0); },
      [](Scalar v, Scalar) { return v > Scalar(0) ? Scalar(1) : Scalar(0); },
      "relu");
}

template <typename Scalar>
Tensor<Scalar> leaky_relu(const Tensor<Scalar>& x, Scalar slope) {
  return unary(
      x, [slope](Scalar v) { return v > Scalar(0) ? v : slope * v; },
      [slope](Scalar v, Scalar) { return v > Scalar(0) ? Scalar(1) : slope; },
      "leaky_relu");
}

template <typename Scalar>
Tensor<Scalar> sigmoid(const Tensor<Scalar>& x) {
  return unary(
      x,
      [](Scalar v) {
        // Split by sign so exp never overflows.
        if (v >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-v));
        const Scalar e = std::exp(v);
        return e / (Scalar(1) + e);
      },
      [](Scalar, Scalar y) { return y * (Scalar(1) - y); }, "sigmoid");
}

template <typename Scalar>
Tensor<Scalar> tanh(const Tensor<Scalar>& x) {
  return unary(
      x, [](Scalar v) { return std::tanh(v); },
      [](Scalar, Scalar y) { return Scalar(1) - y * y; }, "tanh");
}

template <typename Scalar>
Tensor<Scalar> activate(const Tensor<Scalar>& x, Pointwise kind) {
  switch (kind) {
    case Pointwise::kRelu:
      return relu(x);
    case Pointwise::kLeakyRelu:
      return leaky_relu(x);
    case Pointwise::kSigmoid:
      return sigmoid(x);
    case Pointwise::kTanh:
      return tanh(x);
  }
  throw std::invalid_argument("activate: unknown kind");
}

template <typename Scalar>
Tensor<Scalar> abs(const Tensor<Scalar>& x) {
  return unary(
      x, [](Scalar v) { return std::abs(v); },
      [](Scalar v, Scalar) {
        return v > Scalar(0) ? Scalar(1) : (v < Scalar(0) ? Scalar(-1) : Scalar(0));
      },
      "abs");
}

template <typename Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& x, Scalar factor) {
  return unary(
      x, [factor](Scalar v) { return factor * v; },
      [factor](Scalar, Scalar) { return factor; }, "scale");
}

template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  require_same_dims(a.dims(), b.dims(), "add");
  Tensor<Scalar> out(a.dims(), a.values() + b.values());
  if (auto* tape = detail::recording_tape<Scalar>({&a, &b})) {
    tape->record({&a, &b}, out, [a, b, out]() mutable {
      if (a.requires_grad()) a.mutable_grad() += out.grad();
      if (b.requires_grad()) b.mutable_grad() += out.grad();
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> sub(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  require_same_dims(a.dims(), b.dims(), "sub");
  Tensor<Scalar> out(a.dims(), a.values() - b.values());
  if (auto* tape = detail::recording_tape<Scalar>({&a, &b})) {
    tape->record({&a, &b}, out, [a, b, out]() mutable {
      if (a.requires_grad()) a.mutable_grad() += out.grad();
      if (b.requires_grad()) b.mutable_grad() -= out.grad();
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> mul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  require_same_dims(a.dims(), b.dims(), "mul");
  Tensor<Scalar> out(a.dims(), a.values() * b.values());
  if (auto* tape = detail::recording_tape<Scalar>({&a, &b})) {
    tape->record({&a, &b}, out, [a, b, out]() mutable {
      if (a.requires_grad()) a.mutable_grad() += out.grad() * b.values();
      if (b.requires_grad()) b.mutable_grad() += out.grad() * a.values();
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> sum(const Tensor<Scalar>& x) {
  Tensor<Scalar> out = Tensor<Scalar>::scalar(x.values().sum());
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out]() mutable {
      x.mutable_grad() += out.grad()[0];
    });
  }
  return finish(std::move(out), "sum");
}

template <typename Scalar>
Tensor<Scalar> mean(const Tensor<Scalar>& x) {
  if (x.size() == 0) throw ShapeError("mean of an empty tensor");
  const Scalar inv = Scalar(1) / static_cast<Scalar>(x.size());
  Tensor<Scalar> out = Tensor<Scalar>::scalar(x.values().sum() * inv);
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out, inv]() mutable {
      x.mutable_grad() += out.grad()[0] * inv;
    });
  }
  return finish(std::move(out), "mean");
}

template <typename Scalar>
Tensor<Scalar> add_channel_bias(const Tensor<Scalar>& x,
                                const Tensor<Scalar>& bias) {
  const Dims d = x.dims();
  if (!(bias.dims() == Dims{1, d.c, 1, 1})) {
    throw ShapeError("add_channel_bias: bias " + bias.dims().str() +
                     " does not match channels of " + d.str());
  }
  Tensor<Scalar> out = x.clone();
  auto& o = out.mutable_values();
  for (int n = 0; n < d.n; ++n) {
    for (int c = 0; c < d.c; ++c) {
      o.segment(static_cast<Eigen::Index>(x.offset(n, c, 0, 0)), d.plane()) +=
          bias.values()[c];
    }
  }
  if (auto* tape = detail::recording_tape<Scalar>({&x, &bias})) {
    tape->record({&x, &bias}, out, [x, bias, out, d]() mutable {
      const auto& go = out.grad();
      if (x.requires_grad()) x.mutable_grad() += go;
      if (bias.requires_grad()) {
        for (int n = 0; n < d.n; ++n) {
          for (int c = 0; c < d.c; ++c) {
            bias.mutable_grad()[c] +=
                go.segment(static_cast<Eigen::Index>(x.offset(n, c, 0, 0)),
                           d.plane())
                    .sum();
          }
        }
      }
    });
  }
  return finish(std::move(out), "add_channel_bias");
}

// ---------------------------------------------------------------------------
// Normalization and pooling

template <typename Scalar>
Tensor<Scalar> batchnorm(const Tensor<Scalar>& x,
                         const BatchNormParams<Scalar>& params, bool frozen,
                         Scalar epsilon) {
  const Dims d = x.dims();
  if (!(params.gamma.dims() == Dims{1, d.c, 1, 1}) ||
      !(params.beta.dims() == Dims{1, d.c, 1, 1})) {
    throw ShapeError("batchnorm: gamma/beta must be (1, c, 1, 1) for " +
                     d.str());
  }
  const std::size_t count = static_cast<std::size_t>(d.n) * d.plane();
  if (count == 0) throw ShapeError("batchnorm: empty input");
  typename Tensor<Scalar>::Array xhat(x.size());
  std::vector<Scalar> inv_std(d.c);
  Tensor<Scalar> out(d);
  auto& o = out.mutable_values();
  const auto& v = x.values();
  for (int c = 0; c < d.c; ++c) {
    Scalar mu(0);
    for (int n = 0; n < d.n; ++n) {
      mu += v.segment(static_cast<Eigen::Index>(x.offset(n, c, 0, 0)), d.plane()).sum();
    }
    mu /= static_cast<Scalar>(count);
    Scalar var(0);
    for (int n = 0; n < d.n; ++n) {
      var += (v.segment(static_cast<Eigen::Index>(x.offset(n, c, 0, 0)), d.plane()) - mu)
                 .square()
                 .sum();
    }
    var /= static_cast<Scalar>(count);
    inv_std[c] = Scalar(1) / std::sqrt(var + epsilon);
    const Scalar g = params.gamma.values()[c];
    const Scalar b = params.beta.values()[c];
    for (int n = 0; n < d.n; ++n) {
      const auto off = static_cast<Eigen::Index>(x.offset(n, c, 0, 0));
      xhat.segment(off, d.plane()) = (v.segment(off, d.plane()) - mu) * inv_std[c];
      o.segment(off, d.plane()) = g * xhat.segment(off, d.plane()) + b;
    }
  }
  check_finite(out, "batchnorm");

  const Tensor<Scalar> gamma = params.gamma;
  const Tensor<Scalar> beta = params.beta;
  const bool learn = !frozen;
  auto* tape = learn ? detail::recording_tape<Scalar>({&x, &gamma, &beta})
                     : detail::recording_tape<Scalar>({&x});
  if (tape != nullptr) {
    tape->record({&x, &gamma, &beta}, out,
                 [x, gamma, beta, out, xhat = std::move(xhat),
                  inv_std = std::move(inv_std), d, count, learn]() mutable {
      const auto& go = out.grad();
      for (int c = 0; c < d.c; ++c) {
        Scalar sum_g(0);
        Scalar sum_gx(0);
        for (int n = 0; n < d.n; ++n) {
          const auto off = static_cast<Eigen::Index>(x.offset(n, c, 0, 0));
          sum_g += go.segment(off, d.plane()).sum();
          sum_gx += (go.segment(off, d.plane()) * xhat.segment(off, d.plane())).sum();
        }
        if (learn && gamma.requires_grad()) gamma.mutable_grad()[c] += sum_gx;
        if (learn && beta.requires_grad()) beta.mutable_grad()[c] += sum_g;
        if (!x.requires_grad()) continue;
        const Scalar k = gamma.values()[c] * inv_std[c] / static_cast<Scalar>(count);
        const Scalar m = static_cast<Scalar>(count);
        for (int n = 0; n < d.n; ++n) {
          const auto off = static_cast<Eigen::Index>(x.offset(n, c, 0, 0));
          x.mutable_grad().segment(off, d.plane()) +=
              k * (m * go.segment(off, d.plane()) - sum_g -
                   xhat.segment(off, d.plane()) * sum_gx);
        }
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> max_pool2(const Tensor<Scalar>& x) {
  const Dims in = x.dims();
  const Dims od{in.n, in.c, in.h / 2, in.w / 2};
  if (od.h == 0 || od.w == 0) throw ShapeError("max_pool2: input too small");
  Tensor<Scalar> out(od);
  std::vector<std::size_t> argmax(od.size());
  auto& o = out.mutable_values();
  const auto& v = x.values();
  const std::size_t planes = static_cast<std::size_t>(in.n) * in.c;
  for (std::size_t p = 0; p < planes; ++p) {
    for (int y = 0; y < od.h; ++y) {
      for (int xx = 0; xx < od.w; ++xx) {
        std::size_t best = (p * in.h + 2 * y) * in.w + 2 * xx;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const std::size_t i = (p * in.h + 2 * y + dy) * in.w + 2 * xx + dx;
            if (v[i] > v[best]) best = i;
          }
        }
        const std::size_t oi = (p * od.h + y) * od.w + xx;
        o[oi] = v[best];
        argmax[oi] = best;
      }
    }
  }
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out, argmax = std::move(argmax)]() mutable {
      auto& gx = x.mutable_grad();
      const auto& go = out.grad();
      for (std::size_t i = 0; i < argmax.size(); ++i) gx[argmax[i]] += go[i];
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> gram(const Tensor<Scalar>& x) {
  const Dims d = x.dims();
  const int hw = static_cast<int>(d.plane());
  const Scalar norm = Scalar(1) / static_cast<Scalar>(d.plane() * d.c);
  Tensor<Scalar> out({d.n, 1, d.c, d.c});
  const std::size_t in_stride = static_cast<std::size_t>(d.c) * hw;
  const std::size_t out_stride = static_cast<std::size_t>(d.c) * d.c;
  for (int n = 0; n < d.n; ++n) {
    ConstRowMap<Scalar> phi(x.data() + n * in_stride, d.c, hw);
    RowMap<Scalar>(out.mutable_values().data() + n * out_stride, d.c, d.c)
        .noalias() = norm * (phi * phi.transpose());
  }
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out, d, hw, norm, in_stride, out_stride]() mutable {
      for (int n = 0; n < d.n; ++n) {
        ConstRowMap<Scalar> phi(x.data() + n * in_stride, d.c, hw);
        ConstRowMap<Scalar> g(out.grad().data() + n * out_stride, d.c, d.c);
        RowMap<Scalar>(x.mutable_grad().data() + n * in_stride, d.c, hw)
            .noalias() += norm * ((g + g.transpose()) * phi);
      }
    });
  }
  return finish(std::move(out), "gram");
}

// ---------------------------------------------------------------------------
// Structural

template <typename Scalar>
Tensor<Scalar> concat_channels(std::span<const Tensor<Scalar>> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  const Dims first = parts.front().dims();
  int channels = 0;
  for (const auto& p : parts) {
    const Dims d = p.dims();
    if (d.n != first.n || d.h != first.h || d.w != first.w) {
      throw ShapeError("concat_channels: " + d.str() + " vs " + first.str());
    }
    channels += d.c;
  }
  const Dims od{first.n, channels, first.h, first.w};
  Tensor<Scalar> out(od);
  std::vector<int> offsets;
  int c0 = 0;
  for (const auto& p : parts) {
    offsets.push_back(c0);
    for (int n = 0; n < od.n; ++n) {
      const auto len = static_cast<Eigen::Index>(p.c() * od.plane());
      out.mutable_values().segment(static_cast<Eigen::Index>(out.offset(n, c0, 0, 0)), len) =
          p.values().segment(static_cast<Eigen::Index>(p.offset(n, 0, 0, 0)), len);
    }
    c0 += p.c();
  }
  Tape<Scalar>* tape = Tape<Scalar>::active();
  bool any = false;
  for (const auto& p : parts) any = any || p.requires_grad();
  if (tape != nullptr && any) {
    std::vector<Tensor<Scalar>> inputs(parts.begin(), parts.end());
    tape->record(inputs, out, [inputs, offsets, out, od]() mutable {
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        auto& p = inputs[i];
        if (!p.requires_grad()) continue;
        for (int n = 0; n < od.n; ++n) {
          const auto len = static_cast<Eigen::Index>(p.c() * od.plane());
          p.mutable_grad().segment(static_cast<Eigen::Index>(p.offset(n, 0, 0, 0)), len) +=
              out.grad().segment(static_cast<Eigen::Index>(out.offset(n, offsets[i], 0, 0)), len);
        }
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> slice_channels(const Tensor<Scalar>& x, int begin, int count) {
  const Dims in = x.dims();
  if (begin < 0 || count <= 0 || begin + count > in.c) {
    throw ShapeError("slice_channels: range outside " + in.str());
  }
  const Dims od{in.n, count, in.h, in.w};
  Tensor<Scalar> out(od);
  const auto len = static_cast<Eigen::Index>(count * in.plane());
  for (int n = 0; n < in.n; ++n) {
    out.mutable_values().segment(static_cast<Eigen::Index>(out.offset(n, 0, 0, 0)), len) =
        x.values().segment(static_cast<Eigen::Index>(x.offset(n, begin, 0, 0)), len);
  }
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out, begin, len]() mutable {
      for (int n = 0; n < x.n(); ++n) {
        x.mutable_grad().segment(static_cast<Eigen::Index>(x.offset(n, begin, 0, 0)), len) +=
            out.grad().segment(static_cast<Eigen::Index>(out.offset(n, 0, 0, 0)), len);
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> concat_batch(std::span<const Tensor<Scalar>> parts) {
  if (parts.empty()) throw ShapeError("concat_batch: no inputs");
  const Dims first = parts.front().dims();
  int count = 0;
  for (const auto& p : parts) {
    const Dims d = p.dims();
    if (d.c != first.c || d.h != first.h || d.w != first.w) {
      throw ShapeError("concat_batch: " + d.str() + " vs " + first.str());
    }
    count += d.n;
  }
  const Dims od{count, first.c, first.h, first.w};
  typename Tensor<Scalar>::Array values(static_cast<Eigen::Index>(od.size()));
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    values.segment(at, p.values().size()) = p.values();
    at += p.values().size();
  }
  Tensor<Scalar> out(od, std::move(values));
  Tape<Scalar>* tape = Tape<Scalar>::active();
  bool any = false;
  for (const auto& p : parts) any = any || p.requires_grad();
  if (tape != nullptr && any) {
    std::vector<Tensor<Scalar>> inputs(parts.begin(), parts.end());
    tape->record(inputs, out, [inputs, out]() mutable {
      Eigen::Index at = 0;
      for (auto& p : inputs) {
        if (p.requires_grad()) {
          p.mutable_grad() += out.grad().segment(at, p.values().size());
        }
        at += p.values().size();
      }
    });
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> slice_batch(const Tensor<Scalar>& x, int index) {
  const Dims in = x.dims();
  if (index < 0 || index >= in.n) {
    throw ShapeError("slice_batch: index outside " + in.str());
  }
  const Dims od{1, in.c, in.h, in.w};
  const auto len = static_cast<Eigen::Index>(od.size());
  const auto off = static_cast<Eigen::Index>(x.offset(index, 0, 0, 0));
  Tensor<Scalar> out(od, x.values().segment(off, len));
  if (auto* tape = detail::recording_tape<Scalar>({&x})) {
    tape->record({&x}, out, [x, out, off, len]() mutable {
      x.mutable_grad().segment(off, len) += out.grad();
    });
  }
  return out;
}

#define GLIP_INSTANTIATE_OPS(S)                                                \
  template struct ConvSpec<S>;                                                 \
  template ConvSpec<S> make_conv(int, int, int, int, int, std::mt19937_64&,   \
                                 bool);                                        \
  template BatchNormParams<S> make_batchnorm(int);                             \
  template Tensor<S> conv2d(const Tensor<S>&, const ConvSpec<S>&);             \
  template Tensor<S> deconv2d(const Tensor<S>&, const ConvSpec<S>&);           \
  template Tensor<S> upsample_nearest(const Tensor<S>&, int);                  \
  template Tensor<S> downsample_nearest(const Tensor<S>&, int);                \
  template Tensor<S> reflect_pad(const Tensor<S>&, int, int, int, int);        \
  template Tensor<S> crop(const Tensor<S>&, int, int, int, int);               \
  template Tensor<S> gaussian_blur3(const Tensor<S>&);                         \
  template Tensor<S> relu(const Tensor<S>&);                                   \
  template Tensor<S> leaky_relu(const Tensor<S>&, S);                          \
  template Tensor<S> sigmoid(const Tensor<S>&);                                \
  template Tensor<S> tanh(const Tensor<S>&);                                   \
  template Tensor<S> activate(const Tensor<S>&, Pointwise);                    \
  template Tensor<S> add(const Tensor<S>&, const Tensor<S>&);                  \
  template Tensor<S> sub(const Tensor<S>&, const Tensor<S>&);                  \
  template Tensor<S> mul(const Tensor<S>&, const Tensor<S>&);                  \
  template Tensor<S> scale(const Tensor<S>&, S);                               \
  template Tensor<S> abs(const Tensor<S>&);                                    \
  template Tensor<S> sum(const Tensor<S>&);                                    \
  template Tensor<S> mean(const Tensor<S>&);                                   \
  template Tensor<S> add_channel_bias(const Tensor<S>&, const Tensor<S>&);     \
  template Tensor<S> batchnorm(const Tensor<S>&, const BatchNormParams<S>&,    \
                               bool, S);                                       \
  template Tensor<S> max_pool2(const Tensor<S>&);                              \
  template Tensor<S> gram(const Tensor<S>&);                                   \
  template Tensor<S> concat_channels(std::span<const Tensor<S>>);              \
  template Tensor<S> slice_channels(const Tensor<S>&, int, int);               \
  template Tensor<S> concat_batch(std::span<const Tensor<S>>);                 \
  template Tensor<S> slice_batch(const Tensor<S>&, int);

GLIP_INSTANTIATE_OPS(float)
GLIP_INSTANTIATE_OPS(double)

}  // namespace glip
