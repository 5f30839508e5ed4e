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

#include "glip/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "glip/ops.hpp"

namespace glip {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-6, std::abs(analytic) + std::abs(numeric));
}

template <typename Scalar>
GradcheckReport gradcheck(const std::function<Tensor<Scalar>()>& fn,
                          std::vector<Tensor<Scalar>> wrt,
                          const GradcheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  const Tensor<Scalar> probe = fn();
  std::normal_distribution<double> normal(0.0, 1.0);
  typename Tensor<Scalar>::Array weights(probe.values().size());
  for (Eigen::Index i = 0; i < weights.size(); ++i) weights[i] = Scalar(normal(rng));
  const Tensor<Scalar> projection(probe.dims(), weights);

  for (auto& t : wrt) {
    if (!t.is_leaf()) throw TapeError("gradcheck: wrt tensors must be leaves");
    t.set_requires_grad(true);
    t.zero_grad();
  }
  {
    Tape<Scalar> tape;
    TapeScope<Scalar> scope(tape);
    const Tensor<Scalar> loss = sum(mul(fn(), projection));
    backward(loss, tape);
  }

  const auto evaluate = [&]() -> double {
    const Tensor<Scalar> y = fn();
    if (!(y.dims() == probe.dims())) {
      throw ShapeError("gradcheck: output dims changed between evaluations");
    }
    return static_cast<double>((y.values() * projection.values()).sum());
  };

  GradcheckReport report;
  for (std::size_t i = 0; i < wrt.size(); ++i) {
    auto& t = wrt[i];
    std::vector<Eigen::Index> coords(static_cast<std::size_t>(t.size()));
    std::iota(coords.begin(), coords.end(), Eigen::Index{0});
    if (options.max_coords != 0 && coords.size() > options.max_coords) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords);
    }
    for (const Eigen::Index k : coords) {
      const Scalar original = t.values()[k];
      const auto central = [&](double eps) {
        t.mutable_values()[k] = original + Scalar(eps);
        const double plus = evaluate();
        t.mutable_values()[k] = original - Scalar(eps);
        const double minus = evaluate();
        t.mutable_values()[k] = original;
        return (plus - minus) / (2.0 * eps);
      };
      const double analytic = static_cast<double>(t.grad()[k]);
      double numeric = central(options.epsilon);
      double err = relative_error(analytic, numeric);
      if (err > options.retry_above && !options.retry_epsilons.empty()) {
        ++report.retried;
        for (const double eps : options.retry_epsilons) {
          const double n = central(eps);
          const double e = relative_error(analytic, n);
          if (e < err) {
            err = e;
            numeric = n;
          }
        }
      }
      ++report.coords;
      if (!std::isfinite(err)) {
        throw NumericError("gradcheck: non-finite difference");
      }
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        std::ostringstream os;
        os << "input[" << i << "][" << k << "]: analytic=" << analytic
           << " numeric=" << numeric;
        report.worst = os.str();
      }
    }
  }
  return report;
}

template GradcheckReport gradcheck(const std::function<Tensor<float>()>&,
                                   std::vector<Tensor<float>>,
                                   const GradcheckOptions&);
template GradcheckReport gradcheck(const std::function<Tensor<double>()>&,
                                   std::vector<Tensor<double>>,
                                   const GradcheckOptions&);

}  // namespace glip
