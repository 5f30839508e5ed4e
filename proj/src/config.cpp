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


#include "glip/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace glip {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw std::invalid_argument("unknown " + where + " key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr_train > 0) || !(lr_finetune > 0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (epochs_train < 0 || epochs_finetune < 0 || max_steps < 0) {
    throw std::invalid_argument("epochs and max_steps must be non-negative");
  }
  if (lambda.valid < 0 || lambda.hole < 0 || lambda.perceptual < 0 ||
      lambda.style < 0 || lambda.tv < 0) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
  if (!(grad_clip > 0)) throw std::invalid_argument("grad_clip must be positive");
  network.validate();
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig c;
  try {
    const json j = json::parse(text);
    reject_unknown(j,
                   {"lr_train", "lr_finetune", "batch_size", "epochs_train",
                    "epochs_finetune", "max_steps", "T", "lambda", "seed",
                    "train_manifest", "val_manifest", "mask_class", "ablation",
                    "network", "grad_clip", "checkpoint", "extractor",
                    "log_every"},
                   "config");
    read(j, "lr_train", c.lr_train);
    read(j, "lr_finetune", c.lr_finetune);
    read(j, "batch_size", c.batch_size);
    read(j, "epochs_train", c.epochs_train);
    read(j, "epochs_finetune", c.epochs_finetune);
    read(j, "max_steps", c.max_steps);
    read(j, "T", c.network.iterations);
    read(j, "seed", c.seed);
    read(j, "train_manifest", c.train_manifest);
    read(j, "val_manifest", c.val_manifest);
    read(j, "grad_clip", c.grad_clip);
    read(j, "checkpoint", c.checkpoint);
    read(j, "extractor", c.extractor);
    read(j, "log_every", c.log_every);
    if (j.contains("mask_class")) {
      c.mask_class = RatioClass::parse(j.at("mask_class").get<std::string>());
    }
    if (j.contains("lambda")) {
      const json& l = j.at("lambda");
      reject_unknown(l, {"valid", "hole", "perc", "style", "tv"}, "lambda");
      read(l, "valid", c.lambda.valid);
      read(l, "hole", c.lambda.hole);
      read(l, "perc", c.lambda.perceptual);
      read(l, "style", c.lambda.style);
      read(l, "tv", c.lambda.tv);
    }
    if (j.contains("ablation")) {
      const json& a = j.at("ablation");
      reject_unknown(a, {"gle", "reinpaint"}, "ablation");
      read(a, "gle", c.network.gle);
      read(a, "reinpaint", c.network.reinpaint);
    }
    if (j.contains("network")) {
      const json& n = j.at("network");
      reject_unknown(n, {"stem_channels", "proj_channels", "reconstruct_channels"},
                     "network");
      read(n, "stem_channels", c.network.stem_channels);
      read(n, "proj_channels", c.network.proj_channels);
      read(n, "reconstruct_channels", c.network.reconstruct.up);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_train_config(ss.str());
}

std::string to_json(const TrainConfig& c) {
  json j;
  j["lr_train"] = c.lr_train;
  j["lr_finetune"] = c.lr_finetune;
  j["batch_size"] = c.batch_size;
  j["epochs_train"] = c.epochs_train;
  j["epochs_finetune"] = c.epochs_finetune;
  j["max_steps"] = c.max_steps;
  j["T"] = c.network.iterations;
  j["lambda"] = {{"valid", c.lambda.valid},
                 {"hole", c.lambda.hole},
                 {"perc", c.lambda.perceptual},
                 {"style", c.lambda.style},
                 {"tv", c.lambda.tv}};
  j["seed"] = c.seed;
  j["train_manifest"] = c.train_manifest;
  j["val_manifest"] = c.val_manifest;
  j["mask_class"] = c.mask_class.str();
  j["ablation"] = {{"gle", c.network.gle}, {"reinpaint", c.network.reinpaint}};
  j["network"] = {{"stem_channels", c.network.stem_channels},
                  {"proj_channels", c.network.proj_channels},
                  {"reconstruct_channels", c.network.reconstruct.up}};
  j["grad_clip"] = c.grad_clip;
  j["checkpoint"] = c.checkpoint;
  j["extractor"] = c.extractor;
  j["log_every"] = c.log_every;
  return j.dump(2);
}

}  // namespace glip
