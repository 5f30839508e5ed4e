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


// Command-line front end: train, infer, eval, mask-gen, gradcheck, ablate.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "glip/evaluate.hpp"
#include "glip/grad_suite.hpp"
#include "glip/image_io.hpp"
#include "glip/mask_gen.hpp"
#include "glip/trainer.hpp"

namespace fs = std::filesystem;
using namespace glip;

namespace {

// Manifest paths in a config are relative to the config file.
std::string resolve(const fs::path& config_path, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (config_path.parent_path() / p).string();
}

TrainConfig read_config(const fs::path& path) {
  TrainConfig c = load_train_config(path);
  c.train_manifest = resolve(path, c.train_manifest);
  c.val_manifest = resolve(path, c.val_manifest);
  c.extractor = resolve(path, c.extractor);
  return c;
}

TrainingSet training_set(const TrainConfig& config, const std::string& manifest) {
  const std::string path = manifest.empty() ? config.train_manifest : manifest;
  if (path.empty()) throw std::invalid_argument("no training manifest given");
  return load_training_set(load_manifest(path));
}

int cmd_train(const std::string& config_path, const std::string& resume_path,
              const std::string& out) {
  TrainConfig config = read_config(config_path);
  if (!out.empty()) config.checkpoint = out;
  const TrainingSet set = training_set(config, "");
  const FeatureExtractor<float> fx = extractor_for(config);
  std::optional<Checkpoint> resume;
  if (!resume_path.empty()) resume = load_checkpoint(resume_path);

  TrainOptions opts;
  if (resume) opts.resume = &*resume;
  opts.on_step = [&](const StepLog& s) {
    if (config.log_every > 0 && s.step % config.log_every == 0) {
      std::printf("step %lld phase %d epoch %d loss %.6f grad_norm %.4f\n",
                  static_cast<long long>(s.step), s.phase, s.epoch, s.loss, s.grad_norm);
      std::fflush(stdout);
    }
  };
  opts.on_epoch = [](const EpochLog& e) {
    std::printf("epoch %d phase %d steps %d mean_loss %.6f\n", e.epoch, e.phase,
                e.steps, e.mean_loss);
    std::fflush(stdout);
  };
  const TrainResult r = train(config, set, fx, opts);
  save_checkpoint(config.checkpoint, r.checkpoint);
  if (r.aborted) {
    std::fprintf(stderr, "training aborted: %s (last good state saved to %s)\n",
                 r.abort_reason.c_str(), config.checkpoint.c_str());
    return 2;
  }
  std::printf("saved %s\n", config.checkpoint.c_str());
  return 0;
}

int cmd_infer(const std::string& ckpt, const std::string& image_path,
              const std::string& mask_path, const std::string& out,
              std::optional<int> iterations) {
  const Model model = load_model(ckpt);
  if (iterations && *iterations != model.config.network.iterations) {
    throw std::invalid_argument("--T " + std::to_string(*iterations) +
                                " does not match checkpoint T " +
                                std::to_string(model.config.network.iterations));
  }
  const Tensor<float> image = load_image(image_path);
  const MaskPlane mask = load_mask(mask_path);
  if (mask.height() != image.h() || mask.width() != image.w()) {
    throw std::invalid_argument("mask and image sizes differ");
  }
  save_image(infer(model, image, mask), out);
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& manifest_path,
             const std::string& classes, std::uint64_t seed,
             const std::string& json_out) {
  const Model model = load_model(ckpt);
  const DatasetManifest manifest = load_manifest(manifest_path);
  const TrainingSet set = load_training_set(manifest);
  std::vector<Tensor<float>> images;
  for (const auto& item : set) images.push_back(item.image);
  const EvalTable table =
      evaluate(model_inpainter(model), images, parse_ratio_classes(classes), seed);
  std::cout << table.text();
  if (!json_out.empty()) {
    std::ofstream os(json_out);
    os << table.json() << "\n";
    if (!os) throw std::runtime_error("cannot write " + json_out);
  }
  return 0;
}

int cmd_mask_gen(const std::string& cls, int n, std::uint64_t seed,
                 const std::string& out, int size, bool border) {
  const RatioClass ratio = RatioClass::parse(cls);
  fs::create_directories(out);
  for (int i = 0; i < n; ++i) {
    const MaskSpec spec{ratio, border, derive_seed(seed, 0, static_cast<std::uint64_t>(i))};
    char name[32];
    std::snprintf(name, sizeof(name), "mask_%05d.png", i);
    save_mask(generate_mask(spec, size, size), fs::path(out) / name);
  }
  std::printf("wrote %d masks of class %s to %s\n", n, ratio.str().c_str(), out.c_str());
  return 0;
}

int cmd_gradcheck(const std::string& module, int seeds) {
  bool ok = true;
  double total = 0.0;
  run_gradient_suite(module, seeds, [&](const GradCaseResult& r) {
    std::printf("%-4s %-22s %-36s max_rel %.3e (tol %.0e) %5zu coords (%zu retried) %.2fs\n",
                r.pass ? "ok" : "FAIL", r.module.c_str(), r.name.c_str(),
                r.max_rel_error, r.tolerance, r.coords, r.retried, r.seconds);
    if (!r.pass) std::printf("     worst: %s\n", r.worst.c_str());
    std::fflush(stdout);
    ok = ok && r.pass;
    total += r.seconds;
  });
  std::printf("%s in %.1fs\n", ok ? "all gradient checks passed" : "gradient checks FAILED",
              total);
  return ok ? 0 : 1;
}

std::optional<bool> on_off(const std::string& v, const char* flag) {
  if (v.empty()) return std::nullopt;
  if (v == "on") return true;
  if (v == "off") return false;
  throw std::invalid_argument(std::string(flag) + " expects on or off");
}

int cmd_ablate(const std::string& config_path, const std::string& manifest,
               const std::string& gle, const std::string& reinpaint,
               const std::string& eval_class) {
  const TrainConfig base = read_config(config_path);
  const TrainingSet set = training_set(base, manifest);
  const auto g = on_off(gle, "--gle");
  const auto r = on_off(reinpaint, "--reinpaint");
  std::vector<std::pair<bool, bool>> variants;
  for (bool gv : {true, false}) {
    if (g && *g != gv) continue;
    for (bool rv : {true, false}) {
      if (r && *r != rv) continue;
      variants.emplace_back(gv, rv);
    }
  }
  const RatioClass cls = eval_class.empty() ? base.mask_class : RatioClass::parse(eval_class);
  const auto runs = run_ablation(base, set, variants, cls, extractor_for(base),
                                 [](const AblationRun& run) {
                                   std::printf("%-28s mean_l1 %.5f psnr %.3f%s\n",
                                               run.label().c_str(), run.mean_l1, run.psnr,
                                               run.aborted ? " (aborted)" : "");
                                   std::fflush(stdout);
                                 });
  if (runs.size() == 4) {
    const auto inv = ablation_inversions(runs);
    if (inv.empty()) std::printf("ordering consistent\n");
    for (const auto& line : inv) std::printf("finding: %s\n", line.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glip: iterative Laplacian-pyramid image inpainting"};
  app.require_subcommand(1);

  std::string config, resume, out, ckpt, image, mask, manifest, classes = "10-20,30-40,40-50";
  std::string json_out, cls, module, gle, reinpaint, eval_class;
  std::uint64_t seed = 0;
  int n = 1, size = 256, seeds = 5;
  bool border = false;
  std::optional<int> iterations;

  auto* train = app.add_subcommand("train", "train a model from a JSON config");
  train->add_option("--config", config, "training config")->required()->check(CLI::ExistingFile);
  train->add_option("--resume", resume, "checkpoint to resume from")->check(CLI::ExistingFile);
  train->add_option("--out", out, "checkpoint path (overrides config)");

  auto* inf = app.add_subcommand("infer", "inpaint one image");
  inf->add_option("--ckpt", ckpt)->required()->check(CLI::ExistingFile);
  inf->add_option("--image", image)->required()->check(CLI::ExistingFile);
  inf->add_option("--mask", mask, "white = valid, black = hole")->required()->check(CLI::ExistingFile);
  inf->add_option("--out", out)->required();
  inf->add_option("--T", iterations, "expected iteration count");

  auto* ev = app.add_subcommand("eval", "per-ratio-class PSNR/SSIM/L1");
  ev->add_option("--ckpt", ckpt)->required()->check(CLI::ExistingFile);
  ev->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  ev->add_option("--classes", classes, "e.g. 10-20,30-40")->capture_default_str();
  ev->add_option("--seed", seed, "mask seed")->capture_default_str();
  ev->add_option("--json", json_out, "also write the table as JSON");

  auto* mg = app.add_subcommand("mask-gen", "generate free-form masks");
  mg->add_option("--class", cls, "hole ratio class, e.g. 30-40")->required();
  mg->add_option("--n", n)->capture_default_str()->check(CLI::PositiveNumber);
  mg->add_option("--seed", seed)->capture_default_str();
  mg->add_option("--out", out, "output directory")->required();
  mg->add_option("--size", size, "mask side length")->capture_default_str()->check(CLI::PositiveNumber);
  mg->add_flag("--border", border, "keep holes away from the image border");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gc->add_option("--module", module, "restrict to one module");
  gc->add_option("--seeds", seeds)->capture_default_str()->check(CLI::PositiveNumber);

  auto* ab = app.add_subcommand("ablate", "train and compare GLE/reinpainting ablations");
  ab->add_option("--config", config)->required()->check(CLI::ExistingFile);
  ab->add_option("--manifest", manifest, "overrides the config's train manifest");
  ab->add_option("--gle", gle, "on|off; both when omitted");
  ab->add_option("--reinpaint", reinpaint, "on|off; both when omitted");
  ab->add_option("--class", eval_class, "evaluation mask class");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config, resume, out);
    if (*inf) return cmd_infer(ckpt, image, mask, out, iterations);
    if (*ev) return cmd_eval(ckpt, manifest, classes, seed, json_out);
    if (*mg) return cmd_mask_gen(cls, n, seed, out, size, border);
    if (*gc) return cmd_gradcheck(module, seeds);
    if (*ab) return cmd_ablate(config, manifest, gle, reinpaint, eval_class);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
