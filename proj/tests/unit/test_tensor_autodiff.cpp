/*
 * Copyright 2026 The pairdis Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pairdis/autodiff.hpp"
#include "pairdis/error.hpp"
#include "pairdis/tensor.hpp"
#include "pairdis/tensor_io.hpp"
#include "test_util.hpp"

namespace pairdis {
namespace {

using testing::max_fd_rel_error;
using testing::random_tensor;

TEST(Tensor, ShapeAndData) {
  const Tensor t({2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(Tensor::scalar(4.0).item(), 4.0);
  EXPECT_EQ(Tensor().size(), 1u);
  EXPECT_EQ(Tensor::matrix({{1, 2}, {3, 4}}).at(1, 0), 3.0);
  EXPECT_EQ(shape_string({2, 3}), "[2,3]");
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0}), DimensionError);
  EXPECT_THROW(Tensor::matrix({{1, 2}, {3}}), DimensionError);
  EXPECT_THROW(t.reshaped({4}), DimensionError);
  EXPECT_THROW(t.item(), DimensionError);
}

TEST(Tensor, Finiteness) {
  Tensor t = Tensor::zeros({3});
  EXPECT_TRUE(t.all_finite());
  t[1] = std::nan("");
  EXPECT_FALSE(t.all_finite());
}

TEST(Primitives, AnalyticValues) {
  ad::Tape tape;
  EXPECT_EQ(ad::sigmoid(tape.constant(Tensor::scalar(0.0))).value().item(), 0.5);
  EXPECT_NEAR(ad::softplus(tape.constant(Tensor::scalar(0.0))).value().item(), std::log(2.0), 1e-15);
  std::mt19937_64 rng(3);
  const Tensor a = random_tensor({3, 3}, rng);
  EXPECT_EQ(ad::matmul(tape.constant(Tensor::identity(3)), tape.constant(a)).value(), a);
}

TEST(Primitives, StableKernelsAtExtremes) {
  EXPECT_EQ(ad::stable_sigmoid(-800.0), std::exp(-800.0));
  EXPECT_EQ(ad::stable_sigmoid(800.0), 1.0);
  EXPECT_EQ(ad::stable_softplus(800.0), 800.0);
  EXPECT_NEAR(ad::stable_softplus(-40.0), std::exp(-40.0), 1e-30);
  // log(1 + e^x) against a long double reference at moderate x.
  for (double x : {-30.0, -3.0, -0.5, 0.0, 0.5, 3.0, 30.0}) {
    const long double ref = std::log1p(std::exp(static_cast<long double>(x)));
    EXPECT_NEAR(ad::stable_softplus(x), static_cast<double>(ref), 1e-15 * std::max(1.0, std::abs(x)));
  }
}

TEST(Primitives, ShapeMismatchIsDimensionError) {
  ad::Tape tape;
  const ad::Var a = tape.constant(Tensor({2, 3}));
  const ad::Var b = tape.constant(Tensor({3, 2}));
  EXPECT_THROW(ad::add(a, b), DimensionError);
  EXPECT_THROW(ad::mul(a, b), DimensionError);
  EXPECT_THROW(ad::matmul(a, a), DimensionError);
  EXPECT_THROW(ad::concat_last(a, tape.constant(Tensor({3, 1}))), DimensionError);
  EXPECT_THROW(ad::slice_last(a, 2, 2), DimensionError);
  EXPECT_THROW(ad::sq_dist_rows(a, b), DimensionError);
}

TEST(Primitives, DomainAndNumericErrors) {
  ad::Tape tape;
  EXPECT_THROW(ad::log(tape.constant(Tensor::vector({1.0, 0.0}))), DomainError);
  EXPECT_THROW(ad::exp(tape.constant(Tensor::scalar(1000.0))), NumericError);
  EXPECT_THROW(tape.constant(Tensor::scalar(std::nan(""))), NumericError);
}

TEST(Backward, AnalyticExamples) {
  ad::Tape tape;
  const ad::Var w = tape.variable(Tensor::vector({1, 2, 3}));
  const ad::Gradients g = tape.backward(ad::sum(ad::mul(w, w)));
  EXPECT_EQ(g.of(w), Tensor::vector({2, 4, 6}));

  ad::Tape t2;
  const ad::Var v = t2.variable(Tensor::scalar(0.0));
  EXPECT_EQ(t2.backward(ad::sigmoid(v)).of(v).item(), 0.25);
}

TEST(Backward, NonScalarRootIsContractError) {
  ad::Tape tape;
  const ad::Var w = tape.variable(Tensor::vector({1, 2}));
  EXPECT_THROW(tape.backward(ad::square(w)), ContractError);
}

TEST(Backward, UnreachedParameterGetsZeros) {
  ad::Tape tape;
  const ad::Var used = tape.variable(Tensor::vector({1, 2}));
  const ad::Var unused = tape.variable(Tensor({2, 2}));
  const ad::Gradients g = tape.backward(ad::sum(used));
  EXPECT_FALSE(g.has(unused));
  EXPECT_EQ(g.of(unused), Tensor::zeros({2, 2}));
}

TEST(Backward, ReusedNodeAccumulates) {
  ad::Tape tape;
  const ad::Var x = tape.variable(Tensor::scalar(3.0));
  // f = x*x + 2x -> f' = 2x + 2 = 8
  const ad::Var f = ad::add(ad::mul(x, x), ad::scale(x, 2.0));
  EXPECT_EQ(tape.backward(f).of(x).item(), 8.0);
}

TEST(Backward, GatherScattersAndAccumulates) {
  ad::Tape tape;
  const ad::Var a = tape.variable(Tensor::matrix({{1, 2}, {3, 4}, {5, 6}}));
  const std::vector<std::size_t> idx{2, 0, 2};
  const ad::Gradients g = tape.backward(ad::sum(ad::gather_rows(a, idx)));
  EXPECT_EQ(g.of(a), Tensor::matrix({{1, 1}, {0, 0}, {2, 2}}));
}

TEST(Backward, ClampPassesGradientInsideOnly) {
  ad::Tape tape;
  const ad::Var a = tape.variable(Tensor::vector({-20, 0.5, 20}));
  const ad::Var c = ad::clamp(a, -10, 10);
  EXPECT_EQ(c.value(), Tensor::vector({-10, 0.5, 10}));
  EXPECT_EQ(tape.backward(ad::sum(c)).of(a), Tensor::vector({0, 1, 0}));
}

TEST(Backward, IsLinear) {
  std::mt19937_64 rng(11);
  const Tensor x0 = random_tensor({3, 4}, rng);
  auto grad_of = [&](double a, double b) {
    ad::Tape tape;
    const ad::Var x = tape.variable(x0);
    const ad::Var f = ad::sum(ad::tanh(x));
    const ad::Var g = ad::sum(ad::square(ad::sigmoid(x)));
    return tape.backward(ad::add(ad::scale(f, a), ad::scale(g, b))).of(x);
  };
  const Tensor gf = grad_of(1, 0), gg = grad_of(0, 1), mix = grad_of(2.5, -1.5);
  for (std::size_t k = 0; k < mix.size(); ++k)
    EXPECT_NEAR(mix[k], 2.5 * gf[k] - 1.5 * gg[k], 1e-14);
}

// Every primitive against central differences over 100 seeds.
class PrimitiveFd : public ::testing::TestWithParam<int> {};

TEST_P(PrimitiveFd, MatchesCentralDifferences) {
  const std::uint64_t seed = static_cast<std::uint64_t>(GetParam());
  std::mt19937_64 rng(seed);
  const Tensor a = random_tensor({3, 4}, rng);
  const Tensor b = random_tensor({3, 4}, rng);
  const Tensor m = random_tensor({4, 2}, rng);
  const Tensor bias = random_tensor({4}, rng);
  const Tensor pos = random_tensor({3, 4}, rng, 0.5, 2.0);
  const Tensor w = random_tensor({3, 4}, rng);  // random projection makes the root generic
  const Tensor w2 = random_tensor({3, 2}, rng);
  const std::vector<std::size_t> idx{2, 0, 2, 1};

  auto proj = [&](ad::Tape& t, const ad::Var& v) {
    const Tensor& p = v.shape() == w.shape() ? w : w2;
    return ad::sum(ad::mul(v, t.constant(p)));
  };
  auto proj_rand = [&](ad::Tape& t, const ad::Var& v) {
    std::mt19937_64 r(seed + 99);
    return ad::sum(ad::mul(v, t.constant(random_tensor(v.shape(), r))));
  };

  constexpr double kTol = 1e-4;
  using V = std::vector<ad::Var>;
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::add(v[0], v[1])); }, {a, b}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::add(v[0], v[1])); }, {a, bias}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::sub(v[0], v[1])); }, {a, b}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::mul(v[0], v[1])); }, {a, b}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::matmul(v[0], v[1])); }, {a, m}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::scale(v[0], -1.7)); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::add_scalar(v[0], 0.3)); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::neg(v[0])); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::exp(v[0])); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::log(v[0])); }, {pos}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::sigmoid(v[0])); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::tanh(v[0])); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::softplus(v[0])); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::relu(v[0])); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::square(v[0])); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj(t, ad::clamp(v[0], -0.5, 0.5)); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape&, const V& v) { return ad::sum(ad::square(v[0])); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape&, const V& v) { return ad::mean(ad::square(v[0])); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj_rand(t, ad::sum_last(ad::square(v[0]))); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj_rand(t, ad::concat_last(v[0], v[1])); }, {a, w2}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj_rand(t, ad::slice_last(v[0], 1, 2)); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj_rand(t, ad::gather_rows(v[0], idx)); }, {a}), kTol);
  EXPECT_LT(max_fd_rel_error([&](ad::Tape& t, const V& v) { return proj_rand(t, ad::sq_dist_rows(v[0], v[1])); }, {a, b}), kTol);
}

INSTANTIATE_TEST_SUITE_P(Seeds, PrimitiveFd, ::testing::Range(0, 100));

TEST(Backward, TwoLayerMlpMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const Tensor x = random_tensor({5, 4}, rng);
    const Tensor w1 = random_tensor({4, 6}, rng), b1 = random_tensor({6}, rng);
    const Tensor w2 = random_tensor({6, 1}, rng), b2 = random_tensor({1}, rng);
    const double err = max_fd_rel_error(
        [](ad::Tape&, const std::vector<ad::Var>& v) {
          const ad::Var h = ad::tanh(ad::add(ad::matmul(v[0], v[1]), v[2]));
          return ad::mean(ad::softplus(ad::add(ad::matmul(h, v[3]), v[4])));
        },
        {x, w1, b1, w2, b2});
    EXPECT_LT(err, 1e-4) << "seed " << seed;
  }
}

TEST(TensorIo, RoundTripIsExact) {
  std::mt19937_64 rng(5);
  const Tensor t = random_tensor({2, 3, 4}, rng, -1e300, 1e300);
  std::stringstream ss;
  write_tensor(ss, t);
  EXPECT_EQ(ss.str().substr(0, 5), "PDT1\n");
  EXPECT_NE(ss.str().find("{\"dtype\":\"f64\",\"shape\":[2,3,4]}\n"), std::string::npos);
  EXPECT_EQ(read_tensor(ss), t);
}

TEST(TensorIo, MalformedInputsAreFormatErrors) {
  std::stringstream bad_magic("PDT2\n{\"dtype\":\"f64\",\"shape\":[1]}\n01234567");
  EXPECT_THROW(read_tensor(bad_magic), FormatError);
  std::stringstream bad_dtype("PDT1\n{\"dtype\":\"f32\",\"shape\":[1]}\n0123");
  EXPECT_THROW(read_tensor(bad_dtype), FormatError);
  std::stringstream truncated("PDT1\n{\"dtype\":\"f64\",\"shape\":[2]}\n01234567");
  EXPECT_THROW(read_tensor(truncated), FormatError);
  std::stringstream ss;
  write_tensor(ss, Tensor::vector({1, 2}));
  std::stringstream trailing(ss.str() + "x");
  EXPECT_THROW(read_tensor(trailing), FormatError);
}

}  // namespace
}  // namespace pairdis
