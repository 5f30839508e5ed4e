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


#ifndef GLIP_NETWORK_HPP_
#define GLIP_NETWORK_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "glip/iterative.hpp"
#include "glip/pyramid.hpp"
#include "glip/reinpaint.hpp"

namespace glip {

struct NetworkConfig {
  int stem_channels = 64;  // F1 width; each GLE module doubles it
  int proj_channels = 64;  // per-level projection; C_in = 3 * proj_channels
  int iterations = 6;      // T
  ReconstructWidths reconstruct;
  bool gle = true;         // false strips blur and upsample/subtract
  bool reinpaint = true;   // false passes F_int sub-volumes through

  int branch_channels() const { return 3 * proj_channels; }
  int sub_volume_channels() const { return 2 * branch_channels(); }
  int cat_channels() const { return iterations * sub_volume_channels(); }
  // Throws std::invalid_argument on non-positive widths or T < 2.
  void validate() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

// Small widths for CPU experiments and tests.
NetworkConfig desk_config();

template <typename Scalar>
struct NetworkWeights {
  PyramidWeights<Scalar> pyramid;
  ProjectionWeights<Scalar> projection;
  BranchWeights<Scalar> low;
  BranchWeights<Scalar> high;
  ConvSpec<Scalar> fuse;
  ReinpaintWeights<Scalar> reinpaint;
  ReconstructWeights<Scalar> reconstruct;
};

template <typename Scalar>
NetworkWeights<Scalar> make_network_weights(const NetworkConfig& config,
                                            std::uint64_t seed);

// Every learnable tensor under a stable, unique name. The tensors alias the
// weights, so writes through them update the network.
template <typename Scalar>
std::vector<std::pair<std::string, Tensor<Scalar>>> named_parameters(
    const NetworkWeights<Scalar>& w);

bool is_batchnorm_parameter(const std::string& name);

template <typename Scalar>
void set_requires_grad(const NetworkWeights<Scalar>& w, bool on);

template <typename To, typename From>
NetworkWeights<To> cast_weights(const NetworkWeights<From>& w,
                                const NetworkConfig& config);

template <typename Scalar>
struct ForwardResult {
  Tensor<Scalar> output;                // I_out in (0, 1)
  std::vector<MaskPlane> mask_history;  // working-resolution H(0)..H(T)
};

// Full pipeline from masked image and structure map to the reconstructed
// image. The caller supplies the structure map for the masked image.
template <typename Scalar>
ForwardResult<Scalar> forward(const NetworkWeights<Scalar>& w,
                              const NetworkConfig& config,
                              const Tensor<Scalar>& image,
                              const Tensor<Scalar>& structure,
                              const MaskPlane& mask, bool freeze_bn = false);

}  // namespace glip

#endif  // GLIP_NETWORK_HPP_
