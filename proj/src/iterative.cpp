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


#include "glip/iterative.hpp"

#include <string>

#include "glip/attention.hpp"

namespace glip {

template <typename Scalar>
BranchWeights<Scalar> make_branch_weights(int channels, std::mt19937_64& rng) {
  BranchWeights<Scalar> w;
  w.pconv1 = make_conv<Scalar>(channels, channels, 3, 1, 1, rng);
  w.bn1 = make_batchnorm<Scalar>(channels);
  w.pconv2 = make_conv<Scalar>(channels, channels, 3, 1, 1, rng);
  w.bn2 = make_batchnorm<Scalar>(channels);
  return w;
}

template <typename Scalar>
Tensor<Scalar> branch_forward(const Tensor<Scalar>& x, const MaskPlane& mask,
                              const BranchWeights<Scalar>& w, bool freeze_bn,
                              MaskPlane* mask_out) {
  PartialConvResult<Scalar> a = partial_conv_update(x, mask, w.pconv1);
  const Tensor<Scalar> h = leaky_relu(batchnorm(a.features, w.bn1, freeze_bn));
  PartialConvResult<Scalar> b = partial_conv_update(h, a.mask, w.pconv2);
  const Tensor<Scalar> y = leaky_relu(batchnorm(b.features, w.bn2, freeze_bn));
  if (mask_out != nullptr) *mask_out = std::move(b.mask);
  return feature_attention(y);
}

template <typename Scalar>
IterState<Scalar> iterate_once(const IterState<Scalar>& s,
                               const BranchWeights<Scalar>& low,
                               const BranchWeights<Scalar>& high,
                               bool freeze_bn) {
  if (!(s.low.dims() == s.high.dims())) {
    throw ShapeError("iterate_once: low " + s.low.dims().str() + " vs high " +
                     s.high.dims().str());
  }
  IterState<Scalar> next;
  MaskPlane high_mask;
  next.low = branch_forward(s.low, s.mask, low, freeze_bn, &next.mask);
  next.high = branch_forward(s.high, s.mask, high, freeze_bn, &high_mask);
  if (!(high_mask == next.mask)) {
    throw ShapeError("iterate_once: branch kernel geometries disagree");
  }
  next.tau = s.tau + 1;
  return next;
}

template <typename Scalar>
IterationResult<Scalar> run_iterations(const Tensor<Scalar>& low0,
                                       const Tensor<Scalar>& high0,
                                       const MaskPlane& h0, int iterations,
                                       const BranchWeights<Scalar>& low,
                                       const BranchWeights<Scalar>& high,
                                       bool freeze_bn) {
  if (iterations < 2) {
    throw std::invalid_argument("run_iterations: need at least 2 iterations, got " +
                                std::to_string(iterations));
  }
  IterationResult<Scalar> r;
  std::vector<Tensor<Scalar>> parts;
  IterState<Scalar> s{low0, high0, h0, 0};
  r.mask_history.push_back(h0);
  for (int t = 0; t < iterations; ++t) {
    s = iterate_once(s, low, high, freeze_bn);
    parts.push_back(s.low);
    parts.push_back(s.high);
    r.mask_history.push_back(s.mask);
  }
  r.cat = concat_channels<Scalar>(parts);
  return r;
}

template <typename Scalar>
Tensor<Scalar> fuse(const Tensor<Scalar>& cat, const ConvSpec<Scalar>& w) {
  if (w.out_channels() != cat.c()) {
    throw ShapeError("fuse: conv must preserve the " + std::to_string(cat.c()) +
                     " channels of F_cat");
  }
  return leaky_relu(conv2d(cat, w));
}

template <typename Scalar>
Tensor<Scalar> sub_volume(const Tensor<Scalar>& f_int, int tau, int width) {
  if (tau < 1 || width <= 0 || tau * width > f_int.c()) {
    throw std::out_of_range("sub_volume: tau " + std::to_string(tau) +
                            " outside " + f_int.dims().str());
  }
  return slice_channels(f_int, (tau - 1) * width, width);
}

#define GLIP_INSTANTIATE_ITERATIVE(S)                                          \
  template BranchWeights<S> make_branch_weights(int, std::mt19937_64&);        \
  template Tensor<S> branch_forward(const Tensor<S>&, const MaskPlane&,        \
                                    const BranchWeights<S>&, bool,             \
                                    MaskPlane*);                               \
  template IterState<S> iterate_once(const IterState<S>&,                      \
                                     const BranchWeights<S>&,                  \
                                     const BranchWeights<S>&, bool);           \
  template IterationResult<S> run_iterations(                                  \
      const Tensor<S>&, const Tensor<S>&, const MaskPlane&, int,               \
      const BranchWeights<S>&, const BranchWeights<S>&, bool);                 \
  template Tensor<S> fuse(const Tensor<S>&, const ConvSpec<S>&);               \
  template Tensor<S> sub_volume(const Tensor<S>&, int, int);

GLIP_INSTANTIATE_ITERATIVE(float)
GLIP_INSTANTIATE_ITERATIVE(double)

}  // namespace glip
