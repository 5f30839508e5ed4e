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


#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "glip/gradcheck.hpp"
#include "glip/ops.hpp"
#include "glip/t4f.hpp"
#include "test_util.hpp"

using namespace glip;
using glip::testing::uniform;

TEST_CASE("tensor construction enforces length and finiteness") {
  CHECK_THROWS_AS(Tensor<float>({1, 1, 2, 2}, Tensor<float>::Array::Zero(3)), ShapeError);
  CHECK_THROWS_AS(Tensor<float>({-1, 1, 1, 1}), ShapeError);
  Tensor<float>::Array v = Tensor<float>::Array::Zero(4);
  v[2] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(Tensor<float>({1, 1, 2, 2}, v), NumericError);
  CHECK_THROWS_AS(Tensor<float>::constant({1, 1, 1, 1}, INFINITY), NumericError);
  const Tensor<float> z({2, 3, 4, 5});
  CHECK(z.size() == 120);
  CHECK(z.values().isZero());
  CHECK_FALSE(z.requires_grad());
  CHECK(z.grad().size() == 0);
}

TEST_CASE("grad buffer exists iff requires_grad") {
  Tensor<float> t({1, 2, 3, 3});
  t.set_requires_grad(true);
  CHECK(t.grad().size() == t.size());
  t.set_requires_grad(false);
  CHECK(t.grad().size() == 0);
}

TEST_CASE("copies alias storage, clone detaches") {
  Tensor<float> a = Tensor<float>::constant({1, 1, 1, 2}, 1.0f);
  Tensor<float> b = a;
  b.mutable_values()[0] = 3.0f;
  CHECK(a(0, 0, 0, 0) == 3.0f);
  Tensor<float> c = a.clone();
  c.mutable_values()[0] = 7.0f;
  CHECK(a(0, 0, 0, 0) == 3.0f);
  CHECK(a.same(b));
  CHECK_FALSE(a.same(c));
}

TEST_CASE("backward of sum gives ones, of sum(x*x) gives 2x") {
  std::mt19937_64 rng(1);
  Tensor<double> x = uniform<double>({2, 3, 2, 2}, rng);
  x.set_requires_grad(true);
  {
    Tape<double> tape;
    TapeScope<double> scope(tape);
    backward(sum(x), tape);
  }
  CHECK(x.grad().isOnes());
  x.zero_grad();
  {
    Tape<double> tape;
    TapeScope<double> scope(tape);
    backward(sum(mul(x, x)), tape);
  }
  CHECK((x.grad() - 2.0 * x.values()).abs().maxCoeff() == 0.0);
}

TEST_CASE("fan-out accumulates gradients additively") {
  Tensor<double> x = Tensor<double>::parameter({1, 1, 1, 3}, Tensor<double>::Array::Constant(3, 2.0));
  Tape<double> tape;
  TapeScope<double> scope(tape);
  const auto y = add(scale(x, 3.0), mul(x, x));  // 3x + x^2
  backward(sum(y), tape);
  for (int i = 0; i < 3; ++i) CHECK(x.grad()[i] == doctest::Approx(3.0 + 4.0));
}

TEST_CASE("a consumed tape refuses a second backward and new records") {
  Tensor<float> x = Tensor<float>::parameter({1, 1, 1, 1}, Tensor<float>::Array::Ones(1));
  Tape<float> tape;
  TapeScope<float> scope(tape);
  const auto loss = sum(mul(x, x));
  backward(loss, tape);
  CHECK(tape.consumed());
  CHECK_THROWS_AS(backward(loss, tape), TapeError);
  CHECK_THROWS_AS(mul(x, x), TapeError);
  tape.reset();
  backward(sum(mul(x, x)), tape);
  CHECK(x.grad()[0] == doctest::Approx(4.0f));
}

TEST_CASE("backward rejects non-scalar or gradient-free losses") {
  Tensor<float> x = Tensor<float>::parameter({1, 1, 1, 2}, Tensor<float>::Array::Ones(2));
  Tape<float> tape;
  TapeScope<float> scope(tape);
  CHECK_THROWS_AS(backward(mul(x, x), tape), ShapeError);
  Tape<float> other;
  CHECK_THROWS_AS(backward(sum(Tensor<float>({1, 1, 1, 2})), other), TapeError);
}

TEST_CASE("inputs recorded on another tape are rejected") {
  Tensor<float> x = Tensor<float>::parameter({1, 1, 1, 1}, Tensor<float>::Array::Ones(1));
  Tape<float> first;
  Tensor<float> y;
  {
    TapeScope<float> scope(first);
    y = mul(x, x);
  }
  Tape<float> second;
  TapeScope<float> scope(second);
  CHECK_THROWS_AS(add(y, x), TapeError);
}

TEST_CASE("ops record nothing without a tape or grad-requiring input") {
  Tape<float> tape;
  TapeScope<float> scope(tape);
  const Tensor<float> a = Tensor<float>::constant({1, 1, 2, 2}, 1.0f);
  const auto b = add(a, a);
  CHECK(tape.size() == 0);
  CHECK_FALSE(b.requires_grad());
}

TEST_CASE("gradcheck on conv2d and pointwise chains") {
  std::mt19937_64 rng(3);
  Tensor<double> x = uniform<double>({2, 3, 5, 5}, rng);
  auto spec = make_conv<double>(3, 2, 3, 1, 1, rng);
  spec.bias = uniform<double>({1, 2, 1, 1}, rng);
  const auto rep = gradcheck<double>([&] { return conv2d(x, spec); },
                                     {x, spec.weight, spec.bias}, {1e-6, 0, 9});
  CHECK(rep.max_rel_error < 1e-3);
  CHECK(rep.coords == x.size() + spec.weight.size() + 2);

  Tensor<double> y = uniform<double>({1, 2, 3, 3}, rng);
  const auto rep2 = gradcheck<double>([&] { return sigmoid(sigmoid(mul(y, y))); }, {y},
                                      {1e-6, 0, 4});
  CHECK(rep2.max_rel_error < 1e-4);
}

TEST_CASE("float gradcheck at eps 1e-3 on conv2d") {
  std::mt19937_64 rng(8);
  Tensor<float> x = uniform<float>({1, 2, 4, 4}, rng);
  auto spec = make_conv<float>(2, 2, 3, 1, 1, rng);
  const auto rep = gradcheck<float>([&] { return sum(conv2d(x, spec)); },
                                    {x, spec.weight}, {1e-3, 0, 1});
  CHECK(rep.max_rel_error < 1e-2);
}

TEST_CASE("gradcheck requires leaves") {
  Tensor<double> x = Tensor<double>::parameter({1, 1, 1, 1}, Tensor<double>::Array::Ones(1));
  Tape<double> tape;
  Tensor<double> y;
  {
    TapeScope<double> scope(tape);
    y = mul(x, x);
  }
  CHECK_THROWS_AS(gradcheck<double>([&] { return y; }, {y}, {}), TapeError);
}

TEST_CASE("relative error definition") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(1.0, 3.0) == doctest::Approx(0.5));
  CHECK(relative_error(1e-9, 0.0) == doctest::Approx(1e-3));
}

TEST_CASE("T4F round trip is byte-exact and little-endian") {
  std::mt19937_64 rng(5);
  const Tensor<float> t = uniform<float>({2, 3, 4, 5}, rng);
  std::stringstream ss;
  write_t4f(ss, t);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 4 + 16 + 4 * t.size());
  CHECK(bytes.substr(0, 4) == "T4F1");
  CHECK(static_cast<unsigned char>(bytes[4]) == 2);
  CHECK(bytes[5] == 0);
  CHECK(static_cast<unsigned char>(bytes[16]) == 5);
  const Tensor<float> back = read_t4f(ss);
  CHECK(back.dims() == t.dims());
  CHECK((back.values() == t.values()).all());
  std::stringstream again;
  write_t4f(again, back);
  CHECK(again.str() == bytes);
}

TEST_CASE("T4F rejects bad magic and truncation") {
  std::stringstream bad("XXXX");
  CHECK_THROWS_AS(read_t4f(bad), FormatError);
  std::stringstream ss;
  write_t4f(ss, Tensor<float>::constant({1, 1, 2, 2}, 1.0f));
  std::string s = ss.str();
  std::stringstream cut(s.substr(0, s.size() - 3));
  CHECK_THROWS_AS(read_t4f(cut), FormatError);
}
