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


#ifndef GLIP_TRAINER_HPP_
#define GLIP_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "glip/adam.hpp"
#include "glip/checkpoint.hpp"
#include "glip/config.hpp"
#include "glip/losses.hpp"
#include "glip/manifest.hpp"
#include "glip/network.hpp"

namespace glip {

struct TrainingItem {
  Tensor<float> image;             // (1, 3, h, w) in [0, 1]
  std::optional<MaskPlane> mask;   // fixed mask; generated per epoch if absent
  std::optional<Tensor<float>> structure;
};

using TrainingSet = std::vector<TrainingItem>;

TrainingSet load_training_set(const DatasetManifest& manifest);

struct Sample {
  Tensor<float> image;
  MaskPlane mask;
  Tensor<float> structure;
};

// Batch `batch` of `epoch`. Data order and generated masks depend only on
// (seed, epoch, position), so any step can be rebuilt independently.
Sample make_batch(const TrainingSet& set, const TrainConfig& config, int epoch,
                  int batch);

int steps_per_epoch(const TrainingSet& set, const TrainConfig& config);

// Structure map of the masked image, per sample.
Tensor<float> masked_structure(const Tensor<float>& image, const MaskPlane& mask);

struct StepLog {
  std::int64_t step = 0;  // 1-based global step
  int epoch = 0;
  int phase = 1;          // 1 = train, 2 = fine-tune with frozen BN
  double loss = 0.0;
  double grad_norm = 0.0;
};

struct EpochLog {
  int epoch = 0;
  int phase = 1;
  int steps = 0;
  double mean_loss = 0.0;
};

struct TrainResult {
  std::vector<double> step_losses;
  std::vector<EpochLog> epochs;
  Checkpoint checkpoint;  // final, or last good state when aborted
  bool aborted = false;
  std::string abort_reason;
};

struct TrainOptions {
  const Checkpoint* resume = nullptr;
  std::function<void(const StepLog&)> on_step;
  std::function<void(const EpochLog&)> on_epoch;
};

// Two-phase Adam training: epochs_train at lr_train, then epochs_finetune
// at lr_finetune with batchnorm gamma/beta frozen. Gradients are clipped to
// a global norm of grad_clip. A non-finite loss or gradient stops training
// with the pre-step weights.
TrainResult train(const TrainConfig& config, const TrainingSet& set,
                  const FeatureExtractor<float>& extractor,
                  const TrainOptions& options = {});

Checkpoint make_checkpoint(const NetworkWeights<float>& weights,
                           const AdamState<float>& adam,
                           const TrainConfig& config);

struct Model {
  TrainConfig config;
  NetworkWeights<float> weights;
};

Model load_model(const Checkpoint& ckpt);
Model load_model(const std::filesystem::path& path);

// Network output composited over the valid pixels; an all-valid mask
// returns the input unchanged.
Tensor<float> infer(const Model& model, const Tensor<float>& image,
                    const MaskPlane& mask);

FeatureExtractor<float> extractor_for(const TrainConfig& config);

}  // namespace glip

#endif  // GLIP_TRAINER_HPP_
