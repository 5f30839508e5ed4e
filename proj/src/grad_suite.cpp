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


#include "glip/grad_suite.hpp"

#include <chrono>
#include <random>
#include <stdexcept>

#include "glip/attention.hpp"
#include "glip/iterative.hpp"
#include "glip/losses.hpp"
#include "glip/network.hpp"
#include "glip/ops.hpp"
#include "glip/partial_conv.hpp"
#include "glip/pyramid.hpp"
#include "glip/reinpaint.hpp"

namespace glip {

namespace {

using T = Tensor<double>;
using Fn = std::function<T()>;

T random_tensor(const Dims& d, std::mt19937_64& rng, double lo = -1.0,
                double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  T::Array v(static_cast<Eigen::Index>(d.size()));
  for (auto& x : v) x = u(rng);
  T t(d, std::move(v));
  t.set_requires_grad(true);
  return t;
}

ConvSpec<double> random_conv(int in, int out, int k, int stride, int pad,
                             std::mt19937_64& rng, bool bias = true) {
  ConvSpec<double> s = make_conv<double>(in, out, k, stride, pad, rng, bias);
  s.weight.set_requires_grad(true);
  if (bias) {
    // Nonzero bias so its gradient path is exercised.
    s.bias = random_tensor(s.bias.dims(), rng, -0.5, 0.5);
  }
  return s;
}

MaskPlane random_mask(int n, int h, int w, double valid, std::mt19937_64& rng) {
  std::bernoulli_distribution b(valid);
  MaskPlane m(n, h, w, false);
  for (int k = 0; k < n; ++k) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) m.set(k, y, x, b(rng));
    }
  }
  return m;
}

GradcheckReport check(const Fn& fn, std::vector<T> wrt, std::uint64_t seed,
                      std::size_t max_coords = 0) {
  GradcheckOptions o;
  o.epsilon = kSuiteEpsilon;
  o.max_coords = max_coords;
  o.seed = seed;
  o.retry_epsilons = {1e-7, 1e-8};
  o.retry_above = kPointwiseTolerance;
  return gradcheck<double>(fn, std::move(wrt), o);
}

GradCase pointwise(const std::string& name,
                   std::function<T(const T&, const T&)> op) {
  return {"tensor-core", name, kPointwiseTolerance, [op](std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            const T a = random_tensor({2, 3, 4, 4}, rng, -2.0, 2.0);
            const T b = random_tensor({2, 3, 4, 4}, rng, -2.0, 2.0);
            return check([=] { return op(a, b); }, {a, b}, seed);
          }};
}

GradCase unary(const std::string& module, const std::string& name, Dims d,
               std::function<T(const T&)> op) {
  return {module, name, kOperatorTolerance, [=](std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            const T a = random_tensor(d, rng);
            return check([=] { return op(a); }, {a}, seed);
          }};
}

std::vector<GradCase> tensor_core_cases() {
  std::vector<GradCase> c;
  c.push_back(pointwise("relu", [](const T& a, const T&) { return relu(a); }));
  c.push_back(pointwise("leaky_relu", [](const T& a, const T&) { return leaky_relu(a); }));
  c.push_back(pointwise("sigmoid", [](const T& a, const T&) { return sigmoid(a); }));
  c.push_back(pointwise("tanh", [](const T& a, const T&) { return tanh(a); }));
  c.push_back(pointwise("abs", [](const T& a, const T&) { return abs(a); }));
  c.push_back(pointwise("scale", [](const T& a, const T&) { return scale(a, 0.7); }));
  c.push_back(pointwise("add", [](const T& a, const T& b) { return add(a, b); }));
  c.push_back(pointwise("sub", [](const T& a, const T& b) { return sub(a, b); }));
  c.push_back(pointwise("mul", [](const T& a, const T& b) { return mul(a, b); }));
  c.push_back(pointwise("sigmoid_chain", [](const T& a, const T& b) {
    return sigmoid(mul(sigmoid(a), tanh(b)));
  }));
  c.push_back({"tensor-core", "conv2d", kOperatorTolerance, [](std::uint64_t seed) {
                 std::mt19937_64 rng(seed);
                 const T x = random_tensor({2, 3, 5, 5}, rng);
                 const auto s = random_conv(3, 4, 3, 1, 1, rng);
                 return check([=] { return conv2d(x, s); }, {x, s.weight, s.bias}, seed);
               }});
  c.push_back({"tensor-core", "conv2d_stride2", kOperatorTolerance, [](std::uint64_t seed) {
                 std::mt19937_64 rng(seed);
                 const T x = random_tensor({1, 2, 8, 8}, rng);
                 const auto s = random_conv(2, 3, 7, 2, 3, rng);
                 return check([=] { return conv2d(x, s); }, {x, s.weight, s.bias}, seed);
               }});
  c.push_back({"tensor-core", "deconv2d", kOperatorTolerance, [](std::uint64_t seed) {
                 std::mt19937_64 rng(seed);
                 const T x = random_tensor({1, 3, 4, 4}, rng);
                 const auto s = random_conv(2, 3, 3, 2, 1, rng, false);
                 return check([=] { return deconv2d(x, s); }, {x, s.weight}, seed);
               }});
  c.push_back(unary("tensor-core", "upsample_nearest", {1, 2, 3, 3},
                    [](const T& a) { return upsample_nearest(a, 2); }));
  c.push_back(unary("tensor-core", "downsample_nearest", {1, 2, 4, 4},
                    [](const T& a) { return downsample_nearest(a, 2); }));
  c.push_back(unary("tensor-core", "reflect_pad", {1, 2, 4, 5},
                    [](const T& a) { return reflect_pad(a, 1, 2, 2, 1); }));
  c.push_back(unary("tensor-core", "crop", {1, 2, 5, 5},
                    [](const T& a) { return crop(a, 1, 2, 3, 2); }));
  c.push_back(unary("tensor-core", "gaussian_blur3", {1, 2, 5, 4},
                    [](const T& a) { return gaussian_blur3(a); }));
  c.push_back(unary("tensor-core", "max_pool2", {1, 2, 4, 6},
                    [](const T& a) { return max_pool2(a); }));
  c.push_back(unary("tensor-core", "gram", {2, 3, 3, 4},
                    [](const T& a) { return gram(a); }));
  c.push_back(unary("tensor-core", "sum_mean", {1, 2, 3, 3},
                    [](const T& a) { return add(sum(a), mean(mul(a, a))); }));
  c.push_back(unary("tensor-core", "slice_concat", {2, 4, 3, 3}, [](const T& a) {
    const std::vector<T> parts{slice_channels(a, 2, 2), slice_channels(a, 0, 3)};
    const T cc = concat_channels<double>(parts);
    const std::vector<T> rows{slice_batch(cc, 1), slice_batch(cc, 0)};
    return concat_batch<double>(rows);
  }));
  c.push_back({"tensor-core", "add_channel_bias", kOperatorTolerance, [](std::uint64_t seed) {
                 std::mt19937_64 rng(seed);
                 const T x = random_tensor({2, 3, 2, 2}, rng);
                 const T b = random_tensor({1, 3, 1, 1}, rng);
                 return check([=] { return add_channel_bias(x, b); }, {x, b}, seed);
               }});
  for (bool frozen : {false, true}) {
    c.push_back({"tensor-core", frozen ? "batchnorm_frozen" : "batchnorm",
                 kOperatorTolerance, [frozen](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   const T x = random_tensor({2, 3, 3, 3}, rng);
                   BatchNormParams<double> p{random_tensor({1, 3, 1, 1}, rng, 0.5, 1.5),
                                             random_tensor({1, 3, 1, 1}, rng)};
                   std::vector<T> wrt{x};
                   if (!frozen) {
                     wrt.push_back(p.gamma);
                     wrt.push_back(p.beta);
                   }
                   return check([=] { return batchnorm(x, p, frozen); }, wrt, seed);
                 }});
  }
  return c;
}

std::vector<GradCase> module_cases() {
  std::vector<GradCase> c;
  c.push_back(unary("gle", "gaussian_level", {1, 2, 6, 5},
                    [](const T& a) { return gaussian_level(a); }));
  c.push_back(unary("gle", "laplacian_level", {1, 2, 6, 6},
                    [](const T& a) { return laplacian_level(a, gaussian_level(a)); }));
  for (bool laplacian : {true, false}) {
    c.push_back({"gle", laplacian ? "gle_forward" : "gle_forward_direct",
                 kOperatorTolerance, [laplacian](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   const T x = random_tensor({1, 2, 8, 8}, rng);
                   GLEWeights<double> w{random_conv(2, 4, 7, 2, 3, rng),
                                        random_conv(4, 2, 7, 1, 3, rng)};
                   return check(
                       [=] {
                         const auto o = gle_forward(x, w, laplacian);
                         return add(sum(mul(o.residual, o.residual)),
                                    sum(mul(o.next, o.next)));
                       },
                       {x, w.conv_gs.weight, w.conv_gs.bias, w.conv_up.weight,
                        w.conv_up.bias},
                       seed);
                 }});
  }
  c.push_back({"partial-conv", "partial_conv", kOperatorTolerance, [](std::uint64_t seed) {
                 std::mt19937_64 rng(seed);
                 const T x = random_tensor({2, 3, 5, 5}, rng);
                 const auto s = random_conv(3, 4, 3, 1, 1, rng);
                 const MaskPlane m = random_mask(2, 5, 5, 0.4, rng);
                 return check([=] { return partial_conv(x, m, s); },
                              {x, s.weight, s.bias}, seed);
               }});
  c.push_back(unary("attention", "normalize_locations", {1, 3, 3, 3},
                    [](const T& a) { return normalize_locations(a); }));
  c.push_back(unary("attention", "location_similarity", {1, 3, 3, 2},
                    [](const T& a) { return location_similarity(a); }));
  c.push_back(unary("attention", "softmax_spatial", {1, 4, 3, 3},
                    [](const T& a) { return softmax_spatial(scale(a, 3.0)); }));
  c.push_back(unary("attention", "transpose_locations", {1, 6, 2, 3},
                    [](const T& a) { return transpose_locations(a); }));
  c.push_back(unary("attention", "extract_patches", {1, 2, 3, 4},
                    [](const T& a) { return extract_patches(a); }));
  c.push_back(unary("attention", "attention_chain", {1, 4, 4, 4}, [](const T& a) {
    return attend_reconstruct(a, attention_scores(cosine_scores(a)));
  }));
  c.push_back({"iterative", "branch_and_fuse", kOperatorTolerance, [](std::uint64_t seed) {
                 std::mt19937_64 rng(seed);
                 const T low = random_tensor({1, 3, 4, 4}, rng);
                 const T high = random_tensor({1, 3, 4, 4}, rng);
                 const MaskPlane m = random_mask(1, 4, 4, 0.5, rng);
                 auto bw = [&rng]() {
                   BranchWeights<double> w{random_conv(3, 3, 3, 1, 1, rng),
                                           {random_tensor({1, 3, 1, 1}, rng, 0.5, 1.5),
                                            random_tensor({1, 3, 1, 1}, rng)},
                                           random_conv(3, 3, 3, 1, 1, rng),
                                           {random_tensor({1, 3, 1, 1}, rng, 0.5, 1.5),
                                            random_tensor({1, 3, 1, 1}, rng)}};
                   return w;
                 };
                 const BranchWeights<double> wl = bw();
                 const BranchWeights<double> wh = bw();
                 const auto f = random_conv(12, 12, 3, 1, 1, rng);
                 return check(
                     [=] {
                       return fuse(run_iterations(low, high, m, 2, wl, wh).cat, f);
                     },
                     // Biases feeding batchnorm have an identically zero
                     // gradient; they are covered by the partial_conv case.
                     {low, high, wl.pconv1.weight, wl.bn1.gamma, wl.bn2.beta,
                      wh.pconv2.weight, wh.bn2.gamma, f.weight},
                     seed);
               }});
  c.push_back({"reinpaint-reconstruct", "reinpaint_merge", kOperatorTolerance,
               [](std::uint64_t seed) {
                 std::mt19937_64 rng(seed);
                 const int width = 2;
                 const T f_int = random_tensor({1, 3 * width, 4, 4}, rng);
                 std::vector<MaskPlane> history{random_mask(1, 4, 4, 0.3, rng)};
                 for (int t = 0; t < 3; ++t) history.push_back(update_mask(history.back(), 3, 3, 1, 1));
                 ReinpaintWeights<double> w{
                     {random_conv(3 * width, width, 3, 1, 1, rng),
                      random_conv(width, width, 3, 1, 1, rng),
                      random_conv(width, width, 3, 1, 1, rng)},
                     {random_conv(2 * width, width, 3, 1, 1, rng),
                      random_conv(width, width, 3, 1, 1, rng),
                      random_conv(width, width, 3, 1, 1, rng)}};
                 return check(
                     [=] {
                       std::vector<T> vols;
                       for (int tau = 1; tau <= 3; ++tau) {
                         vols.push_back(reinpaint_step(f_int, history, tau, width, w));
                       }
                       return feature_merge(vols, history);
                     },
                     {f_int, w.branch1[0].weight, w.branch1[2].bias,
                      w.branch2[0].weight, w.branch2[1].bias},
                     seed);
               }});
  c.push_back({"reinpaint-reconstruct", "reconstruct", kOperatorTolerance,
               [](std::uint64_t seed) {
                 std::mt19937_64 rng(seed);
                 const T x = random_tensor({1, 4, 2, 2}, rng);
                 const MaskPlane m = random_mask(1, 2, 2, 0.5, rng);
                 ReconstructWidths widths;
                 widths.up = {4, 4, 4};
                 ReconstructWeights<double> w = make_reconstruct_weights<double>(4, widths, rng);
                 std::vector<T> wrt{x};
                 for (auto& u : w.up) {
                   u.weight.set_requires_grad(true);
                   wrt.push_back(u.weight);
                 }
                 for (auto& h : w.head) {
                   h.weight.set_requires_grad(true);
                   wrt.push_back(h.weight);
                 }
                 w.residual[0].bn2.gamma.set_requires_grad(true);
                 wrt.push_back(w.residual[0].bn2.gamma);
                 return check([=] { return reconstruct(x, m, w); }, wrt, seed, 24);
               }});
  c.push_back({"reinpaint-reconstruct", "composite", kOperatorTolerance,
               [](std::uint64_t seed) {
                 std::mt19937_64 rng(seed);
                 const T out = random_tensor({1, 3, 4, 4}, rng);
                 const T img = random_tensor({1, 3, 4, 4}, rng);
                 const MaskPlane m = random_mask(1, 4, 4, 0.5, rng);
                 return check([=] { return composite(out, img, m); }, {out, img}, seed);
               }});
  return c;
}

std::vector<GradCase> loss_cases() {
  std::vector<GradCase> c;
  const auto fx = FeatureExtractor<float>::make_default().cast<double>();
  auto loss_case = [&](const std::string& name,
                       std::function<T(const T&, const T&, const MaskPlane&)> f) {
    return GradCase{"losses", name, kOperatorTolerance, [f](std::uint64_t seed) {
                      std::mt19937_64 rng(seed);
                      const T out = random_tensor({1, 3, 8, 8}, rng, 0.0, 1.0);
                      const T gt = random_tensor({1, 3, 8, 8}, rng, 0.0, 1.0);
                      const MaskPlane m = random_mask(1, 8, 8, 0.6, rng);
                      return check([=] { return f(out, gt, m); }, {out}, seed);
                    }};
  };
  c.push_back(loss_case("valid", [](const T& o, const T& g, const MaskPlane& m) {
    return valid_loss(o, g, m);
  }));
  c.push_back(loss_case("hole", [](const T& o, const T& g, const MaskPlane& m) {
    return hole_loss(o, g, m);
  }));
  c.push_back(loss_case("tv", [](const T& o, const T&, const MaskPlane& m) {
    return tv_loss(o, m.dilate_holes(1).inverted());
  }));
  c.push_back(loss_case("perceptual", [fx](const T& o, const T& g, const MaskPlane&) {
    return perceptual_loss(o, g, fx);
  }));
  c.push_back(loss_case("style", [fx](const T& o, const T& g, const MaskPlane&) {
    return style_loss(o, g, fx);
  }));
  c.push_back(loss_case("composite", [fx](const T& o, const T& g, const MaskPlane& m) {
    return composite_loss(compute_losses(o, g, m, fx), LossWeights{});
  }));
  return c;
}

// Zero-initialized biases put the stem ReLU exactly on its kink inside the
// holes (all inputs there are zero), so the check runs at a generic point.
void jitter_biases(const NetworkWeights<double>& w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto& [name, t] : named_parameters(w)) {
    if (name.size() < 5 || name.compare(name.size() - 5, 5, ".bias") != 0) continue;
    Tensor<double> h = t;
    for (auto& v : h.mutable_values()) v = u(rng);
  }
}

GradCase end_to_end_case(bool gle, bool reinpaint) {
  const std::string name = std::string("network_32x32_T3") +
                           (gle ? "" : "_nogle") + (reinpaint ? "" : "_noreinpaint");
  return {"end-to-end", name, kOperatorTolerance, [gle, reinpaint](std::uint64_t seed) {
            NetworkConfig config = desk_config();
            config.stem_channels = 2;
            config.proj_channels = 2;
            config.reconstruct.up = {4, 4, 4};
            config.iterations = 3;
            config.gle = gle;
            config.reinpaint = reinpaint;
            const NetworkWeights<double> w = make_network_weights<double>(config, seed);
            std::mt19937_64 rng(seed);
            jitter_biases(w, rng);
            const T image = random_tensor({1, 3, 32, 32}, rng, 0.0, 1.0);
            const T structure = random_tensor({1, 3, 32, 32}, rng, 0.0, 1.0);
            MaskPlane mask(32, 32, true);
            for (int y = 10; y < 22; ++y) {
              for (int x = 8; x < 20; ++x) mask.set(y, x, false);
            }
            const auto fx = FeatureExtractor<float>::make_default().cast<double>();
            std::vector<T> wrt{image};
            for (auto& [pname, t] : named_parameters(w)) wrt.push_back(t);
            return check(
                [=] {
                  const auto out = forward(w, config, image, structure, mask);
                  return composite_loss(compute_losses(out.output, image, mask, fx),
                                        LossWeights{});
                },
                wrt, seed, 2);
          }};
}

}  // namespace

std::vector<GradCase> gradient_cases() {
  std::vector<GradCase> all = tensor_core_cases();
  for (auto& c : module_cases()) all.push_back(std::move(c));
  for (auto& c : loss_cases()) all.push_back(std::move(c));
  all.push_back(end_to_end_case(true, true));
  all.push_back(end_to_end_case(false, false));
  return all;
}

std::vector<GradCaseResult> run_gradient_suite(
    const std::string& module, int seeds,
    const std::function<void(const GradCaseResult&)>& on_result) {
  std::vector<GradCaseResult> results;
  bool matched = false;
  for (const GradCase& c : gradient_cases()) {
    if (!module.empty() && c.module != module) continue;
    matched = true;
    GradCaseResult r;
    r.module = c.module;
    r.name = c.name;
    r.tolerance = c.tolerance;
    const auto start = std::chrono::steady_clock::now();
    for (int s = 1; s <= seeds; ++s) {
      const GradcheckReport rep = c.run(static_cast<std::uint64_t>(s));
      r.coords += rep.coords;
      r.retried += rep.retried;
      if (rep.max_rel_error >= r.max_rel_error) {
        r.max_rel_error = rep.max_rel_error;
        r.worst = "seed " + std::to_string(s) + " " + rep.worst;
      }
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.pass = r.max_rel_error < r.tolerance;
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  if (!matched) throw std::invalid_argument("no gradient checks for module '" + module + "'");
  return results;
}

}  // namespace glip
