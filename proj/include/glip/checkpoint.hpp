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


#ifndef GLIP_CHECKPOINT_HPP_
#define GLIP_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "glip/adam.hpp"
#include "glip/network.hpp"
#include "glip/t4f.hpp"

// Checkpoint layout, all integers little-endian:
//   "GLIP", u32 version, u32 count, count x entry
//   u32 count, count x entry            (optimizer state)
//   u32 length, length bytes            (config JSON, UTF-8)
// entry = u16 name length, name bytes, T4F block.
namespace glip {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NamedTensors<float> parameters;
  NamedTensors<float> optimizer;
  std::string config_json;

  const Tensor<float>* find(const std::string& name) const;
};

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Optimizer state as entries "adam.step", "adam.m/<name>", "adam.v/<name>".
NamedTensors<float> pack_adam(const AdamState<float>& state);
AdamState<float> unpack_adam(const NamedTensors<float>& entries);

// Copies checkpoint parameters into `w`, which must have exactly the same
// names and dims.
void load_parameters(const Checkpoint& ckpt, const NetworkWeights<float>& w);
NamedTensors<float> snapshot_parameters(const NetworkWeights<float>& w);

}  // namespace glip

#endif  // GLIP_CHECKPOINT_HPP_
