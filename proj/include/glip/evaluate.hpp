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


#ifndef GLIP_EVALUATE_HPP_
#define GLIP_EVALUATE_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "glip/mask_gen.hpp"
#include "glip/trainer.hpp"

namespace glip {

// Maps a ground-truth image and its mask to the completed image.
using Inpainter =
    std::function<Tensor<float>(const Tensor<float>& image, const MaskPlane& mask)>;

Inpainter model_inpainter(const Model& model);
// Returns the ground truth: the ceiling every metric can reach.
Inpainter oracle_inpainter();
// Leaves holes at zero.
Inpainter copy_input_inpainter();

struct EvalRow {
  RatioClass ratio;
  int count = 0;
  double psnr = 0.0;  // +inf when every image was reproduced exactly
  double ssim = 0.0;
  double l1 = 0.0;
};

struct EvalTable {
  std::vector<EvalRow> rows;

  std::string text() const;
  std::string json() const;
};

// Per-class means over `images`; image i in class k gets a generated mask
// seeded by derive_seed(seed, k, i).
EvalTable evaluate(const Inpainter& inpaint, const std::vector<Tensor<float>>& images,
                   const std::vector<RatioClass>& classes, std::uint64_t seed);

struct AblationRun {
  bool gle = true;
  bool reinpaint = true;
  double mean_l1 = 0.0;
  double psnr = 0.0;
  bool aborted = false;

  std::string label() const;
};

// Trains one model per (gle, reinpaint) variant from `base` on `set` and
// evaluates each on the set's images with masks of `eval_class`.
std::vector<AblationRun> run_ablation(
    const TrainConfig& base, const TrainingSet& set,
    const std::vector<std::pair<bool, bool>>& variants, RatioClass eval_class,
    const FeatureExtractor<float>& extractor,
    const std::function<void(const AblationRun&)>& on_done = {});

// Orderings full <= single ablations <= double ablation violated by more
// than `tolerance` (relative), one line each. Empty when consistent.
std::vector<std::string> ablation_inversions(const std::vector<AblationRun>& runs,
                                             double tolerance = 0.05);

}  // namespace glip

#endif  // GLIP_EVALUATE_HPP_
