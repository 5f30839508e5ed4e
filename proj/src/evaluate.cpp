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


#include "glip/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "glip/metrics.hpp"
#include "glip/ops.hpp"

namespace glip {

namespace {

std::string format_metric(double v, int precision) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

nlohmann::json metric_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

const AblationRun* find_run(const std::vector<AblationRun>& runs, bool gle,
                            bool reinpaint) {
  for (const auto& r : runs) {
    if (r.gle == gle && r.reinpaint == reinpaint) return &r;
  }
  return nullptr;
}

}  // namespace

Inpainter model_inpainter(const Model& model) {
  return [&model](const Tensor<float>& image, const MaskPlane& mask) {
    return infer(model, image, mask);
  };
}

Inpainter oracle_inpainter() {
  return [](const Tensor<float>& image, const MaskPlane&) { return image.clone(); };
}

Inpainter copy_input_inpainter() {
  return [](const Tensor<float>& image, const MaskPlane& mask) {
    return mul(image, mask.expand<float>(image.c()));
  };
}

std::string EvalTable::text() const {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof line, "%-8s %6s %10s %8s %8s\n", "class", "count",
                "PSNR", "SSIM", "L1");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-8s %6d %10s %8s %8s\n",
                  r.ratio.str().c_str(), r.count, format_metric(r.psnr, 4).c_str(),
                  format_metric(r.ssim, 4).c_str(), format_metric(r.l1, 4).c_str());
    os << line;
  }
  return os.str();
}

std::string EvalTable::json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"class", r.ratio.str()},
                 {"count", r.count},
                 {"psnr", metric_json(r.psnr)},
                 {"ssim", metric_json(r.ssim)},
                 {"l1", metric_json(r.l1)}});
  }
  return j.dump(2);
}

EvalTable evaluate(const Inpainter& inpaint, const std::vector<Tensor<float>>& images,
                   const std::vector<RatioClass>& classes, std::uint64_t seed) {
  if (images.empty()) throw std::invalid_argument("evaluate: no images");
  EvalTable table;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    EvalRow row{classes[k], 0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < images.size(); ++i) {
      const Tensor<float>& gt = images[i];
      const MaskPlane mask = generate_mask(
          {classes[k], false, derive_seed(seed, k, i)}, gt.h(), gt.w());
      const Tensor<float> out = inpaint(gt, mask);
      row.psnr += psnr(out, gt);
      row.ssim += ssim(out, gt);
      row.l1 += mean_l1(out, gt);
      ++row.count;
    }
    row.psnr /= row.count;
    row.ssim /= row.count;
    row.l1 /= row.count;
    table.rows.push_back(row);
  }
  return table;
}

std::string AblationRun::label() const {
  return std::string("gle=") + (gle ? "on" : "off") +
         " reinpaint=" + (reinpaint ? "on" : "off");
}

std::vector<AblationRun> run_ablation(
    const TrainConfig& base, const TrainingSet& set,
    const std::vector<std::pair<bool, bool>>& variants, RatioClass eval_class,
    const FeatureExtractor<float>& extractor,
    const std::function<void(const AblationRun&)>& on_done) {
  std::vector<Tensor<float>> images;
  for (const auto& item : set) images.push_back(item.image);
  std::vector<AblationRun> runs;
  for (const auto& [gle, reinpaint] : variants) {
    TrainConfig cfg = base;
    cfg.network.gle = gle;
    cfg.network.reinpaint = reinpaint;
    const TrainResult tr = train(cfg, set, extractor);
    const Model model = load_model(tr.checkpoint);
    const EvalTable t = evaluate(model_inpainter(model), images, {eval_class},
                                 derive_seed(base.seed, 0xe7a1, 0));
    AblationRun run{gle, reinpaint, t.rows[0].l1, t.rows[0].psnr, tr.aborted};
    runs.push_back(run);
    if (on_done) on_done(run);
  }
  return runs;
}

std::vector<std::string> ablation_inversions(const std::vector<AblationRun>& runs,
                                             double tolerance) {
  std::vector<std::string> out;
  auto check = [&](const AblationRun* better, const AblationRun* worse) {
    if (better == nullptr || worse == nullptr) return;
    if (better->mean_l1 > worse->mean_l1 * (1.0 + tolerance)) {
      out.push_back(better->label() + " L1 " + format_metric(better->mean_l1, 5) +
                    " exceeds " + worse->label() + " L1 " +
                    format_metric(worse->mean_l1, 5));
    }
  };
  const AblationRun* full = find_run(runs, true, true);
  const AblationRun* no_gle = find_run(runs, false, true);
  const AblationRun* no_reinpaint = find_run(runs, true, false);
  const AblationRun* neither = find_run(runs, false, false);
  check(full, no_gle);
  check(full, no_reinpaint);
  check(no_gle, neither);
  check(no_reinpaint, neither);
  return out;
}

}  // namespace glip
