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
#include <functional>
#include <random>

#include "pairdis/error.hpp"
#include "pairdis/similarity.hpp"
#include "test_util.hpp"

namespace pairdis {
namespace {

using sim::LabelKind;

double g_between(const Tensor& a, const Tensor& b, const sim::SimilarityParams& p) {
  ad::Tape tape;
  return sim::g_similarity(tape.constant(a), tape.constant(b), p).value()[0];
}

TEST(Similarity, LogisticExamples) {
  sim::SimilarityParams p;
  const Tensor origin = Tensor::matrix({{0.0, 0.0}});
  EXPECT_NEAR(g_between(origin, origin, p), 1.0, 1e-15);
  // Squared distance exactly eta2 = 2.
  EXPECT_EQ(g_between(origin, Tensor::matrix({{1.0, 1.0}}), p), 0.5);
  p.eta1 = 1.0;
  // Squared distance 3 -> logistic(-1).
  EXPECT_NEAR(g_between(Tensor::matrix({{0.0, 0.0, 0.0}}), Tensor::matrix({{1.0, 1.0, 1.0}}), p),
              0.2689414213699951, 1e-15);
}

TEST(Similarity, ParamsAndKinds) {
  sim::SimilarityParams p;
  p.eta1 = 0.0;
  EXPECT_THROW(p.validate(), ContractError);
  p.eta1 = 1.0;
  p.eta2 = -1.0;
  EXPECT_THROW(p.validate(), ContractError);
  EXPECT_EQ(sim::parse_label_kind("real"), LabelKind::real);
  EXPECT_EQ(sim::to_string(LabelKind::binary), "binary");
  EXPECT_THROW(sim::parse_label_kind("bogus"), ContractError);
}

TEST(NormConstant, HighPrecisionValues) {
  // 40-digit references for log(tanh(u/2)/u).
  const std::vector<std::pair<double, double>> ref{
      {1e-5, -0.69314718056827864275}, {1e-3, -0.69314726389327378164},
      {0.01, -0.69315551384466787335}, {0.5, -0.71368193318734994335},
      {2.0, -0.96548864947177686283},  {20.0, -2.9957322776762982383},
      {2000.0, -7.6009024595420823615}, {-3.0, -1.1982688211845533367}};
  for (const auto& [u, v] : ref) EXPECT_NEAR(sim::log_norm_constant(u), v, 1e-15) << "u=" << u;
  EXPECT_NEAR(std::exp(sim::log_norm_constant(2.0)), 0.380797, 1e-6);
  EXPECT_EQ(std::exp(sim::log_norm_constant(0.0)), 0.5);
  EXPECT_THROW(sim::log_norm_constant(std::nan("")), DomainError);
  EXPECT_THROW(sim::log_norm_constant(INFINITY), DomainError);
}

double simpson01(const std::function<double(double)>& f, int intervals) {
  const double h = 1.0 / intervals;
  double s = f(0.0) + f(1.0);
  for (int k = 1; k < intervals; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return s * h / 3.0;
}

TEST(NormConstant, MatchesQuadratureOfUnnormalizedDensity) {
  // C(u) = integral of g^y (1-g)^(1-y) over [0,1].
  for (double u : {-30.0, -2.0, -0.1, 0.05, 2.0, 7.0, 30.0}) {
    const double lg = -ad::stable_softplus(-u), l1g = -ad::stable_softplus(u);
    const double c = simpson01([&](double y) { return std::exp(y * lg + (1 - y) * l1g); }, 20000);
    EXPECT_NEAR(std::exp(sim::log_norm_constant(u)), c, 1e-10) << "u=" << u;
  }
}

TEST(NormConstant, EvenBoundedAndContinuousAcrossBranches) {
  for (double u : {1e-7, 9.9e-5, 1e-4, 1.01e-4, 0.3, 0.99, 1.0, 1.01, 50.0, 700.0, 5000.0, 1e4}) {
    EXPECT_EQ(sim::log_norm_constant(u), sim::log_norm_constant(-u));
    EXPECT_LE(sim::log_norm_constant(u), std::log(0.5));
    EXPECT_TRUE(std::isfinite(sim::log_norm_constant(u)));
  }
  for (double edge : {1e-4, 1.0}) {
    const double below = sim::log_norm_constant(std::nextafter(edge, 0.0));
    const double above = sim::log_norm_constant(edge);
    EXPECT_NEAR(below, above, 1e-15) << "edge " << edge;
  }
}

TEST(NormConstant, GradientHighPrecisionAndFiniteDifferences) {
  const std::vector<std::pair<double, double>> ref{
      {1e-3, -0.00016666664722222427249}, {0.009, -0.0014999858251210650671},
      {0.011, -0.0018333074531079708419}, {0.5, -0.080965248665056280508},
      {5.0, -0.18652349416941091334},     {-40.0, 0.024999999999999991503}};
  for (const auto& [u, v] : ref) EXPECT_NEAR(sim::log_norm_constant_grad(u), v, 1e-14 * std::abs(v)) << u;
  EXPECT_EQ(sim::log_norm_constant_grad(0.0), 0.0);
  for (double u : {-300.0, -3.0, -0.02, 0.02, 0.7, 3.0, 300.0}) {
    const double h = 1e-5;
    const double fd = (sim::log_norm_constant(u + h) - sim::log_norm_constant(u - h)) / (2 * h);
    EXPECT_NEAR(sim::log_norm_constant_grad(u), fd, 1e-8) << u;
  }
}

TEST(PairLikelihood, Examples) {
  EXPECT_NEAR(sim::pair_log_likelihood(1.0, 0.0, LabelKind::binary), -std::log(2.0), 1e-15);
  // 40-digit references.
  EXPECT_NEAR(sim::pair_log_likelihood(0.5, 2.0, LabelKind::real), -0.16143936157119563361, 1e-14);
  EXPECT_NEAR(sim::pair_log_likelihood(0.3, -7.0, LabelKind::real), -0.15317755296184762644, 1e-14);
  EXPECT_NEAR(sim::pair_log_likelihood(1.0, 2000.0, LabelKind::binary), 0.0, 1e-300);
  EXPECT_EQ(sim::pair_log_likelihood(0.0, 2000.0, LabelKind::binary), -2000.0);
}

TEST(PairLikelihood, RealDensityIntegratesToOne) {
  for (double u : {0.0, 0.1, -0.1, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0}) {
    const double mass = simpson01(
        [u](double y) { return std::exp(sim::pair_log_likelihood(y, u, LabelKind::real)); }, 20000);
    EXPECT_NEAR(mass, 1.0, 1e-6) << "u=" << u;
  }
}

TEST(PairLikelihood, BinaryEqualsRealPlusLogC) {
  for (double u : {-50.0, -1.0, 0.0, 0.3, 8.0, 2000.0}) {
    for (double y : {0.0, 1.0}) {
      EXPECT_NEAR(sim::pair_log_likelihood(y, u, LabelKind::binary),
                  sim::pair_log_likelihood(y, u, LabelKind::real) + sim::log_norm_constant(u), 1e-12);
    }
  }
}

TEST(PairLikelihood, MonotoneInDistance) {
  sim::SimilarityParams p;
  p.eta1 = 3.0;
  for (LabelKind kind : {LabelKind::binary, LabelKind::real}) {
    p.kind = kind;
    double prev1 = INFINITY, prev0 = -INFINITY;
    for (double d2 = 0.0; d2 < 5.0; d2 += 0.05) {
      const double u = p.eta1 * (p.eta2 - d2);
      const double l1 = sim::pair_log_likelihood(1.0, u, kind);
      const double l0 = sim::pair_log_likelihood(0.0, u, kind);
      EXPECT_LE(l1, prev1 + 1e-12);
      EXPECT_GE(l0, prev0 - 1e-12);
      prev1 = l1;
      prev0 = l0;
    }
  }
}

TEST(PairLikelihood, TapedMatchesScalarAndValidatesLabels) {
  std::mt19937_64 rng(6);
  sim::SimilarityParams p;
  p.eta1 = 2.0;
  p.kind = LabelKind::real;
  ad::Tape tape;
  const Tensor a = testing::random_tensor({4, 2}, rng), b = testing::random_tensor({4, 2}, rng);
  const std::vector<double> y{0.1, 0.5, 0.9, 1.0};
  const Tensor ll = sim::pair_log_likelihood(y, tape.constant(a), tape.constant(b), p).value();
  const Tensor u = sim::similarity_logit(tape.constant(a), tape.constant(b), p).value();
  for (std::size_t k = 0; k < 4; ++k)
    EXPECT_NEAR(ll[k], sim::pair_log_likelihood(y[k], u[k], LabelKind::real), 1e-14);

  const std::vector<double> fractional{0.5, 0, 1, 1};
  p.kind = LabelKind::binary;
  EXPECT_THROW(sim::pair_log_likelihood(fractional, tape.constant(a), tape.constant(b), p), DomainError);
  EXPECT_THROW(sim::pair_log_likelihood(1.5, 0.0, LabelKind::real), DomainError);
  EXPECT_THROW(sim::pair_log_likelihood(0.5, 0.0, LabelKind::binary), DomainError);
}

TEST(PairLikelihood, GradientCheckAcrossRegimes) {
  for (LabelKind kind : {LabelKind::binary, LabelKind::real}) {
    sim::SimilarityParams p;
    p.kind = kind;
    const sim::GradientCheckReport r = sim::pair_term_gradient_check(p, 2, 50, 17);
    EXPECT_TRUE(r.passed) << r.max_rel_error;
    EXPECT_LT(r.max_rel_error, 1e-3);
    EXPECT_EQ(r.points, 150u);
  }
}

TEST(PairLikelihood, GradientFiniteAndContinuousNearZeroU) {
  sim::SimilarityParams p;
  p.eta1 = 1.0;
  p.kind = LabelKind::real;
  // Rows at squared distance eta2 +- small: u crosses 0 and both series branches.
  std::vector<double> prev;
  for (double du : {-2e-2, -1e-2, -1e-4, -1e-6, 0.0, 1e-6, 1e-4, 1e-2, 2e-2}) {
    ad::Tape tape;
    const ad::Var a = tape.variable(Tensor::matrix({{0.0}}));
    const ad::Var b = tape.variable(Tensor::matrix({{std::sqrt(p.eta2 - du)}}));
    const std::vector<double> y{0.4};
    const Tensor g = tape.backward(ad::sum(sim::pair_log_likelihood(y, a, b, p))).of(b);
    ASSERT_TRUE(g.all_finite());
    if (!prev.empty()) EXPECT_NEAR(g[0], prev[0], 0.05);
    prev = {g[0]};
  }
}

TEST(PairLikelihood, GradientDirectionSigns) {
  struct Case {
    double eta1, d2, y;
  };
  // u = 1 * (2 - 52) = -50 with y = 1; u = 50 * (2 - 1) = 50 with y = 0.
  for (const Case c : {Case{1.0, 52.0, 1.0}, Case{50.0, 1.0, 0.0}}) {
    sim::SimilarityParams p;
    p.eta1 = c.eta1;
    ad::Tape tape;
    const ad::Var zi = tape.variable(Tensor::matrix({{0.1, 0.0}}));
    const ad::Var zj = tape.variable(Tensor::matrix({{0.1 + std::sqrt(c.d2), 0.0}}));
    const std::vector<double> ys{c.y};
    const Tensor gi = tape.backward(ad::sum(sim::pair_log_likelihood(ys, zi, zj, p))).of(zi);
    const double toward_j = gi[0] * (zj.value()[0] - zi.value()[0]);
    if (c.y == 1.0) {
      EXPECT_GT(toward_j, 0.0);
    } else {
      EXPECT_LT(toward_j, 0.0);
    }
  }
}

TEST(PairBatch, Validation) {
  sim::PairBatch ok;
  ok.push_back(0, 1, 1.0);
  ok.push_back(2, 1, 0.0);
  EXPECT_NO_THROW(ok.validate(3, LabelKind::binary));
  EXPECT_THROW(ok.validate(2, LabelKind::binary), ContractError);
  sim::PairBatch self;
  self.push_back(1, 1, 1.0);
  EXPECT_THROW(self.validate(3, LabelKind::binary), ContractError);
  sim::PairBatch frac;
  frac.push_back(0, 1, 0.3);
  EXPECT_THROW(frac.validate(3, LabelKind::binary), DomainError);
  EXPECT_NO_THROW(frac.validate(3, LabelKind::real));
  sim::PairBatch out_of_range;
  out_of_range.push_back(0, 1, 1.2);
  EXPECT_THROW(out_of_range.validate(3, LabelKind::real), DomainError);
}

}  // namespace
}  // namespace pairdis
