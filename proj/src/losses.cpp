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


#include "glip/losses.hpp"

#include <random>
#include <stdexcept>

#include "glip/checkpoint.hpp"

namespace glip {

template <typename Scalar>
FeatureExtractor<Scalar>::FeatureExtractor(std::vector<ConvSpec<Scalar>> stages)
    : stages_(std::move(stages)) {
  if (stages_.empty()) {
    throw std::invalid_argument("FeatureExtractor: needs at least one stage");
  }
  for (std::size_t i = 1; i < stages_.size(); ++i) {
    if (stages_[i].in_channels() != stages_[i - 1].out_channels()) {
      throw ShapeError("FeatureExtractor: stage " + std::to_string(i) +
                       " channel mismatch");
    }
  }
}

template <typename Scalar>
FeatureExtractor<Scalar> FeatureExtractor<Scalar>::make_default(
    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ConvSpec<Scalar>> stages;
  int in = 3;
  for (int out : {16, 32, 64}) {
    stages.push_back(make_conv<Scalar>(in, out, 3, 1, 1, rng));
    in = out;
  }
  return FeatureExtractor(std::move(stages));
}

template <typename Scalar>
FeatureExtractor<Scalar> FeatureExtractor<Scalar>::load(const std::string& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  std::vector<ConvSpec<Scalar>> stages;
  for (int i = 0;; ++i) {
    const std::string p = "stage." + std::to_string(i);
    const Tensor<float>* w = ckpt.find(p + ".weight");
    if (w == nullptr) break;
    const Tensor<float>* b = ckpt.find(p + ".bias");
    stages.emplace_back(w->cast<Scalar>(),
                        b != nullptr ? b->cast<Scalar>() : Tensor<Scalar>(),
                        1, w->h() / 2);
  }
  if (stages.empty()) {
    throw FormatError("FeatureExtractor::load: no stage.0.weight in " + path);
  }
  return FeatureExtractor(std::move(stages));
}

template <typename Scalar>
std::vector<Tensor<Scalar>> FeatureExtractor<Scalar>::features(
    const Tensor<Scalar>& image) const {
  std::vector<Tensor<Scalar>> out;
  Tensor<Scalar> x = image;
  for (const auto& s : stages_) {
    x = max_pool2(relu(conv2d(x, s)));
    out.push_back(x);
  }
  return out;
}

template <typename Scalar>
template <typename Other>
FeatureExtractor<Other> FeatureExtractor<Scalar>::cast() const {
  std::vector<ConvSpec<Other>> stages;
  for (const auto& s : stages_) {
    stages.emplace_back(s.weight.template cast<Other>(),
                        s.bias.defined() ? s.bias.template cast<Other>()
                                         : Tensor<Other>(),
                        s.stride, s.padding);
  }
  return FeatureExtractor<Other>(std::move(stages));
}

template <typename Scalar>
Tensor<Scalar> perceptual_loss(const Tensor<Scalar>& output,
                               const Tensor<Scalar>& target,
                               const FeatureExtractor<Scalar>& fx) {
  const auto a = fx.features(target);
  const auto b = fx.features(output);
  Tensor<Scalar> total = mean(abs(sub(a[0], b[0])));
  for (std::size_t i = 1; i < a.size(); ++i) {
    total = add(total, mean(abs(sub(a[i], b[i]))));
  }
  return total;
}

template <typename Scalar>
Tensor<Scalar> style_loss(const Tensor<Scalar>& output,
                          const Tensor<Scalar>& target,
                          const FeatureExtractor<Scalar>& fx) {
  const auto a = fx.features(target);
  const auto b = fx.features(output);
  Tensor<Scalar> total;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Scalar c = static_cast<Scalar>(a[i].c());
    const Scalar norm = Scalar(1) / (c * c * static_cast<Scalar>(a[i].n()));
    Tensor<Scalar> term = scale(sum(abs(sub(gram(a[i]), gram(b[i])))), norm);
    total = total.defined() ? add(total, term) : term;
  }
  return total;
}

template <typename Scalar>
Tensor<Scalar> tv_loss(const Tensor<Scalar>& output, const MaskPlane& region) {
  const Dims d = output.dims();
  if (region.batch() != d.n || region.height() != d.h || region.width() != d.w) {
    throw ShapeError("tv_loss: region dims differ from " + d.str());
  }
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(d.size());
  Tensor<Scalar> total = Tensor<Scalar>::scalar(Scalar(0));
  // Pair (y, x)-(y + dy, x + dx) counts when both ends lie in the region.
  auto pairs = [&](int dy, int dx) {
    const int h = d.h - dy;
    const int w = d.w - dx;
    if (h <= 0 || w <= 0) return;
    typename Tensor<Scalar>::Array inside(static_cast<Eigen::Index>(
        static_cast<std::size_t>(d.n) * d.c * h * w));
    Eigen::Index k = 0;
    for (int b = 0; b < d.n; ++b) {
      for (int c = 0; c < d.c; ++c) {
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            inside[k++] = (region.at(b, y, x) && region.at(b, y + dy, x + dx))
                              ? Scalar(1) : Scalar(0);
          }
        }
      }
    }
    const Tensor<Scalar> diff =
        sub(crop(output, dy, dx, h, w), crop(output, 0, 0, h, w));
    total = add(total, sum(mul(abs(diff), Tensor<Scalar>({d.n, d.c, h, w},
                                                          std::move(inside)))));
  };
  pairs(0, 1);
  pairs(1, 0);
  return scale(total, inv_n);
}

template <typename Scalar>
Tensor<Scalar> valid_loss(const Tensor<Scalar>& output,
                          const Tensor<Scalar>& target, const MaskPlane& mask) {
  return mean(abs(mul(sub(output, target), mask.expand<Scalar>(output.c()))));
}

template <typename Scalar>
Tensor<Scalar> hole_loss(const Tensor<Scalar>& output,
                         const Tensor<Scalar>& target, const MaskPlane& mask) {
  return mean(abs(mul(sub(output, target),
                      mask.inverted().expand<Scalar>(output.c()))));
}

template <typename Scalar>
Tensor<Scalar> composite_loss(const LossTerms<Scalar>& t,
                              const LossWeights& lambda) {
  Tensor<Scalar> total = scale(t.valid, static_cast<Scalar>(lambda.valid));
  total = add(total, scale(t.hole, static_cast<Scalar>(lambda.hole)));
  total = add(total, scale(t.perceptual, static_cast<Scalar>(lambda.perceptual)));
  total = add(total, scale(t.style, static_cast<Scalar>(lambda.style)));
  total = add(total, scale(t.tv, static_cast<Scalar>(lambda.tv)));
  return total;
}

template <typename Scalar>
LossTerms<Scalar> compute_losses(const Tensor<Scalar>& output,
                                 const Tensor<Scalar>& target,
                                 const MaskPlane& mask,
                                 const FeatureExtractor<Scalar>& fx) {
  return {valid_loss(output, target, mask), hole_loss(output, target, mask),
          perceptual_loss(output, target, fx), style_loss(output, target, fx),
          tv_loss(output, mask.dilate_holes(1).inverted())};
}

#define GLIP_INSTANTIATE_LOSSES(S)                                             \
  template class FeatureExtractor<S>;                                          \
  template Tensor<S> perceptual_loss(const Tensor<S>&, const Tensor<S>&,       \
                                     const FeatureExtractor<S>&);              \
  template Tensor<S> style_loss(const Tensor<S>&, const Tensor<S>&,            \
                                const FeatureExtractor<S>&);                   \
  template Tensor<S> tv_loss(const Tensor<S>&, const MaskPlane&);              \
  template Tensor<S> valid_loss(const Tensor<S>&, const Tensor<S>&,            \
                                const MaskPlane&);                             \
  template Tensor<S> hole_loss(const Tensor<S>&, const Tensor<S>&,             \
                               const MaskPlane&);                              \
  template Tensor<S> composite_loss(const LossTerms<S>&, const LossWeights&);  \
  template LossTerms<S> compute_losses(const Tensor<S>&, const Tensor<S>&,     \
                                       const MaskPlane&,                       \
                                       const FeatureExtractor<S>&);

GLIP_INSTANTIATE_LOSSES(float)
GLIP_INSTANTIATE_LOSSES(double)
template FeatureExtractor<double> FeatureExtractor<float>::cast() const;
template FeatureExtractor<float> FeatureExtractor<double>::cast() const;

}  // namespace glip
