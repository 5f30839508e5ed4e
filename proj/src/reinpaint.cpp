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


#include "glip/reinpaint.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "glip/iterative.hpp"

namespace glip {

namespace {

template <typename Scalar>
Tensor<Scalar> conv_stack(const Tensor<Scalar>& x,
                          const std::array<ConvSpec<Scalar>, 3>& convs) {
  Tensor<Scalar> y = x;
  for (const auto& c : convs) y = relu(conv2d(y, c));
  return y;
}

template <typename Scalar>
std::array<ConvSpec<Scalar>, 3> make_stack(int in, int width,
                                           std::mt19937_64& rng) {
  return {make_conv<Scalar>(in, width, 3, 1, 1, rng),
          make_conv<Scalar>(width, width, 3, 1, 1, rng),
          make_conv<Scalar>(width, width, 3, 1, 1, rng)};
}

}  // namespace

template <typename Scalar>
ReinpaintWeights<Scalar> make_reinpaint_weights(int width,
                                                std::mt19937_64& rng) {
  ReinpaintWeights<Scalar> w;
  w.branch1 = make_stack<Scalar>(3 * width, width, rng);
  w.branch2 = make_stack<Scalar>(2 * width, width, rng);
  return w;
}

template <typename Scalar>
Tensor<Scalar> reinpaint_step(const Tensor<Scalar>& f_int,
                              const std::vector<MaskPlane>& mask_history,
                              int tau, int width,
                              const ReinpaintWeights<Scalar>& w) {
  const int iterations = static_cast<int>(mask_history.size()) - 1;
  if (width <= 0 || f_int.c() != iterations * width) {
    throw ShapeError("reinpaint_step: F_int " + f_int.dims().str() +
                     " does not hold " + std::to_string(iterations) +
                     " sub-volumes of width " + std::to_string(width));
  }
  if (tau < 1 || tau > iterations) {
    throw std::out_of_range("reinpaint_step: tau " + std::to_string(tau) +
                            " outside 1.." + std::to_string(iterations));
  }
  const Tensor<Scalar> cur = sub_volume(f_int, tau, width);
  if (tau == iterations) return cur;

  const Tensor<Scalar> next = sub_volume(f_int, tau + 1, width);
  const Tensor<Scalar> prev =
      tau == 1 ? Tensor<Scalar>::zeros(cur.dims()) : sub_volume(f_int, tau - 1, width);
  const std::vector<Tensor<Scalar>> triple{prev, cur, next};
  const std::vector<Tensor<Scalar>> pair{cur, next};

  const Tensor<Scalar> before = mask_history[tau - 1].template expand<Scalar>(width);
  const Tensor<Scalar> after = mask_history[tau].template expand<Scalar>(width);
  const Tensor<Scalar> front(before.dims(), after.values() - before.values());

  const Tensor<Scalar> b1 =
      mul(conv_stack(concat_channels<Scalar>(triple), w.branch1), before);
  const Tensor<Scalar> b2 =
      mul(conv_stack(concat_channels<Scalar>(pair), w.branch2), front);
  return add(add(b1, b2), cur);
}

template <typename Scalar>
Tensor<Scalar> feature_merge(const std::vector<Tensor<Scalar>>& volumes,
                             const std::vector<MaskPlane>& mask_history) {
  const std::size_t iterations = volumes.size();
  if (iterations == 0 || mask_history.size() != iterations + 1) {
    throw std::invalid_argument(
        "feature_merge: need T volumes and T+1 masks, got " +
        std::to_string(iterations) + " and " +
        std::to_string(mask_history.size()));
  }
  const Dims d = volumes.back().dims();
  using Array = typename Tensor<Scalar>::Array;
  Array total = Array::Zero(static_cast<Eigen::Index>(d.size()));
  std::vector<Tensor<Scalar>> weights;
  for (std::size_t t = 0; t < iterations; ++t) {
    if (!(volumes[t].dims() == d)) {
      throw ShapeError("feature_merge: volume " + volumes[t].dims().str() +
                       " vs " + d.str());
    }
    weights.push_back(mask_history[t + 1].template expand<Scalar>(d.c));
    total += weights.back().values();
  }
  const Array inv =
      (total > Scalar(0)).select(total.inverse(), Array::Zero(total.size()));
  const Array empty = (total > Scalar(0)).select(Array::Zero(total.size()),
                                                 Array::Ones(total.size()));
  Tensor<Scalar> merged =
      mul(volumes.back(), Tensor<Scalar>(d, empty));
  for (std::size_t t = 0; t < iterations; ++t) {
    merged = add(merged, mul(volumes[t], Tensor<Scalar>(d, weights[t].values() * inv)));
  }
  return merged;
}

template <typename Scalar>
ReconstructWeights<Scalar> make_reconstruct_weights(int in_channels,
                                                    const ReconstructWidths& widths,
                                                    std::mt19937_64& rng) {
  ReconstructWeights<Scalar> w;
  int c = in_channels;
  for (int i = 0; i < 3; ++i) {
    w.up[i] = make_conv<Scalar>(c, widths.up[i], 3, 1, 1, rng);
    w.up_bn[i] = make_batchnorm<Scalar>(widths.up[i]);
    c = widths.up[i];
  }
  for (auto& r : w.residual) {
    r.conv1 = make_conv<Scalar>(c, c, 3, 1, 1, rng);
    r.bn1 = make_batchnorm<Scalar>(c);
    r.conv2 = make_conv<Scalar>(c, c, 3, 1, 1, rng);
    r.bn2 = make_batchnorm<Scalar>(c);
  }
  const int h1 = std::max(1, c / 2);
  const int h2 = std::max(1, c / 4);
  w.head[0] = make_conv<Scalar>(c, h1, 3, 1, 1, rng);
  w.head[1] = make_conv<Scalar>(h1, h2, 3, 1, 1, rng);
  w.head[2] = make_conv<Scalar>(h2, 3, 1, 1, 0, rng);
  return w;
}

template <typename Scalar>
Tensor<Scalar> reconstruct(const Tensor<Scalar>& merged, const MaskPlane& mask,
                           const ReconstructWeights<Scalar>& w,
                           bool freeze_bn) {
  Tensor<Scalar> x = merged;
  MaskPlane m = mask;
  for (int i = 0; i < 3; ++i) {
    x = upsample_nearest(x, 2);
    m = m.upsample_nearest(2);
    PartialConvResult<Scalar> r = partial_conv_update(x, m, w.up[i]);
    x = leaky_relu(batchnorm(r.features, w.up_bn[i], freeze_bn));
    m = std::move(r.mask);
  }
  for (const auto& r : w.residual) {
    const Tensor<Scalar> h = relu(batchnorm(conv2d(x, r.conv1), r.bn1, freeze_bn));
    x = add(x, batchnorm(conv2d(h, r.conv2), r.bn2, freeze_bn));
  }
  x = relu(conv2d(x, w.head[0]));
  x = relu(conv2d(x, w.head[1]));
  return sigmoid(conv2d(x, w.head[2]));
}

template <typename Scalar>
Tensor<Scalar> composite(const Tensor<Scalar>& output,
                         const Tensor<Scalar>& image, const MaskPlane& mask) {
  if (!(output.dims() == image.dims())) {
    throw ShapeError("composite: output " + output.dims().str() + " vs image " +
                     image.dims().str());
  }
  const Tensor<Scalar> keep = mask.template expand<Scalar>(image.c());
  const Tensor<Scalar> fill(keep.dims(), Scalar(1) - keep.values());
  return add(mul(keep, image), mul(fill, output));
}

#define GLIP_INSTANTIATE_REINPAINT(S)                                          \
  template ReinpaintWeights<S> make_reinpaint_weights(int, std::mt19937_64&);  \
  template Tensor<S> reinpaint_step(const Tensor<S>&,                          \
                                    const std::vector<MaskPlane>&, int, int,   \
                                    const ReinpaintWeights<S>&);               \
  template Tensor<S> feature_merge(const std::vector<Tensor<S>>&,              \
                                   const std::vector<MaskPlane>&);             \
  template ReconstructWeights<S> make_reconstruct_weights(                     \
      int, const ReconstructWidths&, std::mt19937_64&);                        \
  template Tensor<S> reconstruct(const Tensor<S>&, const MaskPlane&,           \
                                 const ReconstructWeights<S>&, bool);          \
  template Tensor<S> composite(const Tensor<S>&, const Tensor<S>&,             \
                               const MaskPlane&);

GLIP_INSTANTIATE_REINPAINT(float)
GLIP_INSTANTIATE_REINPAINT(double)

}  // namespace glip
