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


#include "glip/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "glip/image_io.hpp"
#include "glip/mask_gen.hpp"
#include "glip/reinpaint.hpp"
#include "glip/structural.hpp"

namespace glip {

namespace {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(epoch), ~0ULL));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

TrainingSet load_training_set(const DatasetManifest& manifest) {
  TrainingSet set;
  for (const auto& item : manifest.items) {
    TrainingItem t;
    t.image = load_image(item.image, manifest.resolution);
    if (item.mask) t.mask = load_mask(*item.mask, manifest.resolution);
    if (item.structure) t.structure = load_image(*item.structure, manifest.resolution);
    set.push_back(std::move(t));
  }
  return set;
}

Tensor<float> masked_structure(const Tensor<float>& image, const MaskPlane& mask) {
  return structural_map(mul(image, mask.expand<float>(image.c())));
}

int steps_per_epoch(const TrainingSet& set, const TrainConfig& config) {
  const int n = static_cast<int>(set.size());
  return (n + config.batch_size - 1) / config.batch_size;
}

Sample make_batch(const TrainingSet& set, const TrainConfig& config, int epoch,
                  int batch) {
  if (set.empty()) throw std::invalid_argument("make_batch: empty training set");
  const auto order = epoch_order(set.size(), config.seed, epoch);
  const std::size_t begin = static_cast<std::size_t>(batch) * config.batch_size;
  const std::size_t end = std::min(order.size(), begin + config.batch_size);
  if (begin >= end) throw std::out_of_range("make_batch: batch index past epoch end");
  std::vector<Tensor<float>> images;
  std::vector<Tensor<float>> structures;
  std::vector<MaskPlane> masks;
  for (std::size_t k = begin; k < end; ++k) {
    const TrainingItem& item = set[order[k]];
    MaskPlane m = item.mask ? *item.mask
                            : generate_mask({config.mask_class, false,
                                             derive_seed(config.seed, static_cast<std::uint64_t>(epoch),
                                                 order[k])},
                                            item.image.h(), item.image.w());
    structures.push_back(item.structure ? mul(*item.structure, m.expand<float>(3))
                                        : masked_structure(item.image, m));
    images.push_back(item.image);
    masks.push_back(std::move(m));
  }
  if (images.size() == 1) return {images[0], masks[0], structures[0]};
  return {concat_batch<float>(images), MaskPlane::stack(masks),
          concat_batch<float>(structures)};
}

Checkpoint make_checkpoint(const NetworkWeights<float>& weights,
                           const AdamState<float>& adam,
                           const TrainConfig& config) {
  return {snapshot_parameters(weights), pack_adam(adam), to_json(config)};
}

FeatureExtractor<float> extractor_for(const TrainConfig& config) {
  return config.extractor.empty() ? FeatureExtractor<float>::make_default()
                                  : FeatureExtractor<float>::load(config.extractor);
}

TrainResult train(const TrainConfig& config, const TrainingSet& set,
                  const FeatureExtractor<float>& extractor,
                  const TrainOptions& options) {
  config.validate();
  if (set.empty()) throw std::invalid_argument("train: empty training set");
  NetworkWeights<float> weights =
      make_network_weights<float>(config.network, config.seed);
  AdamState<float> adam;
  if (options.resume != nullptr) {
    load_parameters(*options.resume, weights);
    adam = unpack_adam(options.resume->optimizer);
  }
  set_requires_grad(weights, true);
  const auto params = named_parameters(weights);
  NamedTensors<float> unfrozen;
  for (const auto& p : params) {
    if (!is_batchnorm_parameter(p.first)) unfrozen.push_back(p);
  }

  const int spe = steps_per_epoch(set, config);
  std::int64_t total =
      static_cast<std::int64_t>(config.epochs_train + config.epochs_finetune) * spe;
  if (config.max_steps > 0) total = std::min<std::int64_t>(total, config.max_steps);

  TrainResult result;
  EpochLog epoch_log;
  epoch_log.epoch = -1;
  auto close_epoch = [&]() {
    if (epoch_log.steps == 0) return;
    epoch_log.mean_loss /= epoch_log.steps;
    result.epochs.push_back(epoch_log);
    if (options.on_epoch) options.on_epoch(epoch_log);
  };

  for (std::int64_t step = adam.step; step < total; ++step) {
    const int epoch = static_cast<int>(step / spe);
    const int batch = static_cast<int>(step % spe);
    const int phase = epoch < config.epochs_train ? 1 : 2;
    if (epoch != epoch_log.epoch) {
      close_epoch();
      epoch_log = {epoch, phase, 0, 0.0};
    }
    const Sample s = make_batch(set, config, epoch, batch);
    for (const auto& p : params) {
      Tensor<float> t = p.second;
      t.zero_grad();
    }
    double loss_value = 0.0;
    double norm = 0.0;
    try {
      Tape<float> tape;
      TapeScope<float> scope(tape);
      const ForwardResult<float> out =
          forward(weights, config.network, s.image, s.structure, s.mask, phase == 2);
      const Tensor<float> loss = composite_loss(
          compute_losses(out.output, s.image, s.mask, extractor), config.lambda);
      loss_value = loss.item();
      tape.backward(loss);
      const NamedTensors<float>& trainable = phase == 2 ? unfrozen : params;
      norm = clip_grad_norm(trainable, config.grad_clip);
      adam_step(trainable, adam, phase == 1 ? config.lr_train : config.lr_finetune);
    } catch (const NumericError& e) {
      result.aborted = true;
      result.abort_reason = "step " + std::to_string(step + 1) + ": " + e.what();
      break;
    }
    result.step_losses.push_back(loss_value);
    epoch_log.steps += 1;
    epoch_log.mean_loss += loss_value;
    if (options.on_step) options.on_step({step + 1, epoch, phase, loss_value, norm});
  }
  close_epoch();
  set_requires_grad(weights, false);
  result.checkpoint = make_checkpoint(weights, adam, config);
  return result;
}

Model load_model(const Checkpoint& ckpt) {
  Model m{parse_train_config(ckpt.config_json), {}};
  m.weights = make_network_weights<float>(m.config.network, 0);
  load_parameters(ckpt, m.weights);
  return m;
}

Model load_model(const std::filesystem::path& path) {
  return load_model(load_checkpoint(path));
}

Tensor<float> infer(const Model& model, const Tensor<float>& image,
                    const MaskPlane& mask) {
  if (mask.height() != image.h() || mask.width() != image.w() ||
      mask.batch() != image.n()) {
    throw ShapeError("infer: mask dims differ from image " + image.dims().str());
  }
  if (mask.all_valid()) return image.clone();
  const Tensor<float> structure = masked_structure(image, mask);
  const ForwardResult<float> out =
      forward(model.weights, model.config.network, image, structure, mask);
  return composite(out.output, image, mask);
}

}  // namespace glip
