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

#include "pairdis/distributions.hpp"
#include "pairdis/error.hpp"
#include "test_util.hpp"

namespace pairdis {
namespace {

dist::DiagGaussian gaussian(ad::Tape& tape, const Tensor& mean, const Tensor& lv) {
  return dist::make_diag_gaussian(tape.variable(mean), tape.variable(lv));
}

TEST(Reparam, StandardPassThroughAndCollapse) {
  ad::Tape tape;
  std::mt19937_64 rng(1);
  const Tensor eps = dist::standard_normal({4, 3}, rng);
  const auto q = gaussian(tape, Tensor({4, 3}), Tensor({4, 3}));
  EXPECT_EQ(dist::reparam_sample(q, eps).value(), eps);

  const auto collapsed = gaussian(tape, Tensor::full({1, 2}, 1.5), Tensor::full({1, 2}, -1e6));
  const Tensor z = dist::reparam_sample(collapsed, Tensor::full({1, 2}, 1.0)).value();
  EXPECT_NEAR(z[0], 1.5, std::exp(-5.0) + 1e-15);  // log_var clamped at -10
  EXPECT_THROW(dist::reparam_sample(q, Tensor({4, 2})), DimensionError);
}

TEST(Reparam, MonteCarloMomentsWithinThreeStandardErrors) {
  constexpr std::size_t n = 100000;
  ad::Tape tape;
  std::mt19937_64 rng(2024);
  const auto q = gaussian(tape, Tensor::full({n, 1}, 1.0), Tensor::full({n, 1}, std::log(4.0)));
  const Tensor z = dist::reparam_sample(q, dist::standard_normal({n, 1}, rng)).value();
  double mean = 0.0, m2 = 0.0, m4 = 0.0;
  for (double v : z.data()) mean += v / n;
  for (double v : z.data()) {
    m2 += (v - mean) * (v - mean) / n;
    m4 += std::pow(v - mean, 4) / n;
  }
  EXPECT_LT(std::abs(mean - 1.0), 3.0 * std::sqrt(4.0 / n));
  EXPECT_LT(std::abs(m2 - 4.0), 3.0 * std::sqrt((m4 - m2 * m2) / n));
}

TEST(Reparam, GradientWrtMeanIsOne) {
  std::mt19937_64 rng(8);
  const Tensor mean = testing::random_tensor({2, 3}, rng), lv = testing::random_tensor({2, 3}, rng);
  const Tensor eps = dist::standard_normal({2, 3}, rng);
  // FD of z_k with respect to mean_k.
  for (std::size_t k = 0; k < mean.size(); ++k) {
    auto zk = [&](double shift) {
      ad::Tape tape;
      Tensor m = mean;
      m[k] += shift;
      return dist::reparam_sample(gaussian(tape, m, lv), eps).value()[k];
    };
    EXPECT_NEAR((zk(1e-5) - zk(-1e-5)) / 2e-5, 1.0, 1e-9);
  }
  ad::Tape tape;
  const ad::Var m = tape.variable(mean);
  const auto q = dist::make_diag_gaussian(m, tape.constant(lv));
  EXPECT_EQ(tape.backward(ad::sum(dist::reparam_sample(q, eps))).of(m), Tensor::full({2, 3}, 1.0));
}

TEST(Kl, AnalyticValues) {
  ad::Tape tape;
  EXPECT_EQ(dist::kl_to_standard_normal(gaussian(tape, Tensor({1, 4}), Tensor({1, 4}))).value()[0], 0.0);
  EXPECT_EQ(dist::kl_to_standard_normal(gaussian(tape, Tensor::full({1, 1}, 1.0), Tensor({1, 1}))).value()[0], 0.5);
}

TEST(Kl, NonNegativeAndZeroOnlyAtPrior) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    ad::Tape tape;
    const Tensor mean = testing::random_tensor({1, 3}, rng, -3, 3);
    const Tensor lv = testing::random_tensor({1, 3}, rng, -5, 5);
    EXPECT_GT(dist::kl_to_standard_normal(gaussian(tape, mean, lv)).value()[0], 0.0);
  }
  ad::Tape tape;
  EXPECT_LT(dist::kl_to_standard_normal(gaussian(tape, Tensor::full({1, 2}, 1e-7), Tensor({1, 2}))).value()[0], 1e-12);
}

TEST(Kl, ClosedFormMatchesMonteCarlo) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    ad::Tape tape;
    const Tensor mean = testing::random_tensor({1, 2}, rng, -2, 2);
    const Tensor lv = testing::random_tensor({1, 2}, rng, -2, 1.5);
    const double closed = dist::kl_to_standard_normal(gaussian(tape, mean, lv)).value()[0];
    constexpr int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
      double term = 0.0;
      for (std::size_t j = 0; j < 2; ++j) {
        const double e = normal(rng), z = mean[j] + std::exp(0.5 * lv[j]) * e;
        term += -0.5 * lv[j] - 0.5 * e * e + 0.5 * z * z;  // log q - log p
      }
      s += term;
      s2 += term * term;
    }
    const double mc = s / n, se = std::sqrt((s2 / n - mc * mc) / (n - 1));
    EXPECT_LT(std::abs(closed - mc), 3.0 * se) << "trial " << trial;
  }
}

TEST(Kl, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  const double err = testing::max_fd_rel_error(
      [](ad::Tape&, const std::vector<ad::Var>& v) {
        return ad::sum(dist::kl_to_standard_normal(dist::make_diag_gaussian(v[0], v[1])));
      },
      {testing::random_tensor({3, 2}, rng, -2, 2), testing::random_tensor({3, 2}, rng, -3, 3)});
  EXPECT_LT(err, 1e-6);
}

TEST(Recon, AnalyticValues) {
  ad::Tape tape;
  const double confident =
      dist::recon_log_likelihood(Tensor::full({1, 1}, 1.0), tape.constant(Tensor::full({1, 1}, 20.0))).value()[0];
  EXPECT_NEAR(confident, -2.0611536203143807032e-9, 1e-22);
  const double half =
      dist::recon_log_likelihood(Tensor::full({1, 5}, 0.5), tape.constant(Tensor({1, 5}))).value()[0];
  EXPECT_NEAR(half, -5.0 * std::log(2.0), 1e-14);
}

TEST(Recon, MatchesHighPrecisionOracle) {
  // 40-digit reference for the Bernoulli formula at these values.
  ad::Tape tape;
  const Tensor x = Tensor::matrix({{0.0, 0.25, 1.0, 0.7}});
  const ad::Var logits = tape.constant(Tensor::matrix({{-3.0, 0.4, 12.0, -0.2}}));
  EXPECT_NEAR(dist::recon_log_likelihood(x, logits).value()[0], -1.5997476175487642566, 1e-14);
}

TEST(Recon, NonPositiveAndDomainChecked) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    ad::Tape tape;
    const Tensor x = testing::random_tensor({2, 6}, rng, 0, 1);
    const ad::Var l = tape.constant(testing::random_tensor({2, 6}, rng, -30, 30));
    for (double v : dist::recon_log_likelihood(x, l).value().data()) EXPECT_LE(v, 0.0);
  }
  ad::Tape tape;
  EXPECT_THROW(dist::recon_log_likelihood(Tensor::full({1, 2}, 1.5), tape.constant(Tensor({1, 2}))), DomainError);
  EXPECT_THROW(dist::recon_log_likelihood(Tensor::full({1, 2}, -0.1), tape.constant(Tensor({1, 2}))), DomainError);
  EXPECT_THROW(dist::recon_log_likelihood(Tensor({1, 2}), tape.constant(Tensor({1, 3}))), DimensionError);
}

TEST(Recon, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  const Tensor x = testing::random_tensor({3, 4}, rng, 0, 1);
  const double err = testing::max_fd_rel_error(
      [&](ad::Tape&, const std::vector<ad::Var>& v) { return ad::sum(dist::recon_log_likelihood(x, v[0])); },
      {testing::random_tensor({3, 4}, rng, -5, 5)});
  EXPECT_LT(err, 1e-6);
}

}  // namespace
}  // namespace pairdis
