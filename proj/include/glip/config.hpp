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


#ifndef GLIP_CONFIG_HPP_
#define GLIP_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "glip/losses.hpp"
#include "glip/mask_gen.hpp"
#include "glip/network.hpp"

namespace glip {

// Training settings. JSON keys mirror the field names; "T" and
// "ablation": {"gle", "reinpaint"} address the network config, and
// "network": {"stem_channels", "proj_channels", "reconstruct_channels"}
// its widths. Unknown keys are rejected.
struct TrainConfig {
  double lr_train = 1e-4;
  double lr_finetune = 1e-5;
  int batch_size = 1;
  int epochs_train = 4;
  int epochs_finetune = 2;
  int max_steps = 0;  // stop after this many steps in total; 0 = no cap
  NetworkConfig network;
  LossWeights lambda;
  std::uint64_t seed = 0;
  std::string train_manifest;
  std::string val_manifest;
  RatioClass mask_class{10, 20};  // for items without a mask file
  double grad_clip = 5.0;
  std::string checkpoint = "glip.ckpt";
  std::string extractor;  // optional feature-extractor checkpoint
  int log_every = 10;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

TrainConfig parse_train_config(const std::string& json);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string to_json(const TrainConfig& config);

}  // namespace glip

#endif  // GLIP_CONFIG_HPP_
