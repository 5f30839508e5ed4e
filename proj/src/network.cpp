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


#include "glip/network.hpp"

#include <random>
#include <stdexcept>

namespace glip {

namespace {

template <typename Scalar>
using Named = std::vector<std::pair<std::string, Tensor<Scalar>>>;

template <typename Scalar>
void add_conv(Named<Scalar>& out, const std::string& prefix,
              const ConvSpec<Scalar>& c) {
  out.emplace_back(prefix + ".weight", c.weight);
  if (c.bias.defined()) out.emplace_back(prefix + ".bias", c.bias);
}

template <typename Scalar>
void add_bn(Named<Scalar>& out, const std::string& prefix,
            const BatchNormParams<Scalar>& b) {
  out.emplace_back(prefix + ".gamma", b.gamma);
  out.emplace_back(prefix + ".beta", b.beta);
}

template <typename Scalar>
void add_branch(Named<Scalar>& out, const std::string& prefix,
                const BranchWeights<Scalar>& b) {
  add_conv(out, prefix + ".pconv1", b.pconv1);
  add_bn(out, prefix + ".bn1", b.bn1);
  add_conv(out, prefix + ".pconv2", b.pconv2);
  add_bn(out, prefix + ".bn2", b.bn2);
}

}  // namespace

void NetworkConfig::validate() const {
  if (stem_channels <= 0 || proj_channels <= 0) {
    throw std::invalid_argument("NetworkConfig: widths must be positive");
  }
  for (int c : reconstruct.up) {
    if (c <= 0) throw std::invalid_argument("NetworkConfig: reconstruct widths must be positive");
  }
  if (iterations < 2) {
    throw std::invalid_argument("NetworkConfig: iterations must be >= 2");
  }
}

NetworkConfig desk_config() {
  NetworkConfig c;
  c.stem_channels = 4;
  c.proj_channels = 4;
  c.iterations = 3;
  c.reconstruct.up = {16, 8, 8};
  return c;
}

template <typename Scalar>
NetworkWeights<Scalar> make_network_weights(const NetworkConfig& config,
                                            std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  NetworkWeights<Scalar> w;
  w.pyramid = make_pyramid_weights<Scalar>(config.stem_channels, rng);
  w.projection = make_projection_weights<Scalar>(config.stem_channels,
                                                 config.proj_channels, rng);
  w.low = make_branch_weights<Scalar>(config.branch_channels(), rng);
  w.high = make_branch_weights<Scalar>(config.branch_channels(), rng);
  w.fuse = make_conv<Scalar>(config.cat_channels(), config.cat_channels(), 3,
                             1, 1, rng);
  w.reinpaint =
      make_reinpaint_weights<Scalar>(config.sub_volume_channels(), rng);
  w.reconstruct = make_reconstruct_weights<Scalar>(
      config.sub_volume_channels(), config.reconstruct, rng);
  return w;
}

template <typename Scalar>
std::vector<std::pair<std::string, Tensor<Scalar>>> named_parameters(
    const NetworkWeights<Scalar>& w) {
  Named<Scalar> out;
  add_conv(out, "gle.stem", w.pyramid.stem);
  for (int i = 0; i < kGleModules; ++i) {
    const std::string p = "gle." + std::to_string(i);
    add_conv(out, p + ".conv_gs", w.pyramid.modules[i].conv_gs);
    add_conv(out, p + ".conv_up", w.pyramid.modules[i].conv_up);
  }
  for (int i = 0; i < kPyramidLevels; ++i) {
    add_conv(out, "proj." + std::to_string(i), w.projection[i]);
  }
  add_branch(out, "iter.low", w.low);
  add_branch(out, "iter.high", w.high);
  add_conv(out, "fuse", w.fuse);
  for (int i = 0; i < 3; ++i) {
    add_conv(out, "reinpaint.b1." + std::to_string(i), w.reinpaint.branch1[i]);
  }
  for (int i = 0; i < 3; ++i) {
    add_conv(out, "reinpaint.b2." + std::to_string(i), w.reinpaint.branch2[i]);
  }
  for (int i = 0; i < 3; ++i) {
    const std::string p = "recon.up." + std::to_string(i);
    add_conv(out, p + ".pconv", w.reconstruct.up[i]);
    add_bn(out, p + ".bn", w.reconstruct.up_bn[i]);
  }
  for (int i = 0; i < 3; ++i) {
    const std::string p = "recon.res." + std::to_string(i);
    add_conv(out, p + ".conv1", w.reconstruct.residual[i].conv1);
    add_bn(out, p + ".bn1", w.reconstruct.residual[i].bn1);
    add_conv(out, p + ".conv2", w.reconstruct.residual[i].conv2);
    add_bn(out, p + ".bn2", w.reconstruct.residual[i].bn2);
  }
  for (int i = 0; i < 3; ++i) {
    add_conv(out, "recon.head." + std::to_string(i), w.reconstruct.head[i]);
  }
  return out;
}

bool is_batchnorm_parameter(const std::string& name) {
  auto ends_with = [&](const std::string& s) {
    return name.size() >= s.size() &&
           name.compare(name.size() - s.size(), s.size(), s) == 0;
  };
  return ends_with(".gamma") || ends_with(".beta");
}

template <typename Scalar>
void set_requires_grad(const NetworkWeights<Scalar>& w, bool on) {
  for (auto& [name, t] : named_parameters(w)) t.set_requires_grad(on);
}

template <typename To, typename From>
NetworkWeights<To> cast_weights(const NetworkWeights<From>& w,
                                const NetworkConfig& config) {
  NetworkWeights<To> out = make_network_weights<To>(config, 0);
  const auto src = named_parameters(w);
  auto dst = named_parameters(out);
  if (src.size() != dst.size()) {
    throw ShapeError("cast_weights: config does not match the weights");
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!(src[i].second.dims() == dst[i].second.dims())) {
      throw ShapeError("cast_weights: " + src[i].first + " has dims " +
                       src[i].second.dims().str());
    }
    dst[i].second.mutable_values() =
        src[i].second.values().template cast<To>();
  }
  return out;
}

template <typename Scalar>
ForwardResult<Scalar> forward(const NetworkWeights<Scalar>& w,
                              const NetworkConfig& config,
                              const Tensor<Scalar>& image,
                              const Tensor<Scalar>& structure,
                              const MaskPlane& mask, bool freeze_bn) {
  config.validate();
  const FeaturePyramid<Scalar> pyramid =
      extract_pyramid(image, structure, mask, w.pyramid, config.gle);
  const SplitFeatures<Scalar> split = split_pyramid(pyramid, w.projection);
  IterationResult<Scalar> it =
      run_iterations(split.low, split.high, split.mask, config.iterations,
                     w.low, w.high, freeze_bn);
  const Tensor<Scalar> f_int = fuse(it.cat, w.fuse);

  const int width = config.sub_volume_channels();
  std::vector<Tensor<Scalar>> volumes;
  for (int tau = 1; tau <= config.iterations; ++tau) {
    volumes.push_back(config.reinpaint
                          ? reinpaint_step(f_int, it.mask_history, tau, width,
                                           w.reinpaint)
                          : sub_volume(f_int, tau, width));
  }
  const Tensor<Scalar> merged = feature_merge(volumes, it.mask_history);
  return {reconstruct(merged, it.mask_history.back(), w.reconstruct, freeze_bn),
          std::move(it.mask_history)};
}

#define GLIP_INSTANTIATE_NETWORK(S)                                            \
  template NetworkWeights<S> make_network_weights(const NetworkConfig&,        \
                                                  std::uint64_t);              \
  template std::vector<std::pair<std::string, Tensor<S>>> named_parameters(    \
      const NetworkWeights<S>&);                                               \
  template void set_requires_grad(const NetworkWeights<S>&, bool);             \
  template ForwardResult<S> forward(const NetworkWeights<S>&,                  \
                                    const NetworkConfig&, const Tensor<S>&,    \
                                    const Tensor<S>&, const MaskPlane&, bool);

GLIP_INSTANTIATE_NETWORK(float)
GLIP_INSTANTIATE_NETWORK(double)
template NetworkWeights<double> cast_weights(const NetworkWeights<float>&,
                                             const NetworkConfig&);
template NetworkWeights<float> cast_weights(const NetworkWeights<double>&,
                                            const NetworkConfig&);
template NetworkWeights<float> cast_weights(const NetworkWeights<float>&,
                                            const NetworkConfig&);

}  // namespace glip
