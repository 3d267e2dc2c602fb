// tests/ctc_test.cpp

// Copyright 2026  The ctcfuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

#include "ctcfuse/ctc.hpp"
#include "ctcfuse/error.hpp"
#include "test_util.hpp"

using namespace ctcfuse;
using namespace ctcfuse::testing;

namespace {

Posteriorgram Rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.begin()->size()));
  int t = 0;
  for (const auto& r : rows) {
    int k = 0;
    for (double v : r) m(t, k++) = v;
    ++t;
  }
  return Posteriorgram(m);
}

Posteriorgram Uniform(int T, int V) {
  return Posteriorgram(Matrix::Constant(T, V, 1.0 / V));
}

bool ThrowsKind(ErrorKind kind, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

}  // namespace

TEST_CASE("collapse merges repeats then drops blanks") {
  CHECK(ctc::Collapse(std::vector<int>{0, 1, 1, 0}) == std::vector<int>{1});
  CHECK(ctc::Collapse(std::vector<int>{1, 0, 1}) == std::vector<int>{1, 1});
  CHECK(ctc::Collapse(std::vector<int>{0, 0, 0}).empty());
  CHECK(ctc::AugmentLabels(std::vector<int>{2, 3}) == std::vector<int>{0, 2, 0, 3, 0});
}

TEST_CASE("path probability") {
  CHECK(ctc::PathProbability(Rows({{0.4, 0.6}}), std::vector<int>{1}) ==
        doctest::Approx(0.6).epsilon(1e-15));
  const auto u = Uniform(3, 2);
  for (int code = 0; code < 8; ++code) {
    std::vector<int> p{code & 1, (code >> 1) & 1, (code >> 2) & 1};
    CHECK(ctc::PathProbability(u, p) == doctest::Approx(0.125).epsilon(1e-14));
  }
  CHECK(ThrowsKind(ErrorKind::kLengthMismatch,
                   [&] { ctc::PathProbability(u, std::vector<int>{0, 1}); }));

  // Exact-arithmetic oracle: entries are n/10, so a 3-frame product is an
  // integer over 1000.
  const int num[3][3] = {{2, 5, 3}, {1, 1, 8}, {6, 3, 1}};
  Matrix m(3, 3);
  for (int t = 0; t < 3; ++t)
    for (int k = 0; k < 3; ++k) m(t, k) = num[t][k] / 10.0;
  const Posteriorgram y(m);
  for (int code = 0; code < 27; ++code) {
    std::vector<int> p{code % 3, (code / 3) % 3, code / 9};
    std::int64_t numer = 1;
    for (int t = 0; t < 3; ++t) numer *= num[t][p[t]];
    CHECK(ctc::PathProbability(y, p) ==
          doctest::Approx(static_cast<double>(numer) / 1000.0).epsilon(1e-14));
  }
}

TEST_CASE("ctc loss on hand-enumerable instances") {
  auto r = ctc::CtcLoss(Rows({{0.4, 0.6}}), LabelSequence({1}));
  CHECK(std::exp(-r.loss) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(r.loss == doctest::Approx(-std::log(0.6)).epsilon(1e-14));

  // aa, ab, ba collapse to "a"; bb does not: 3/4.
  r = ctc::CtcLoss(Uniform(2, 2), LabelSequence({1}));
  CHECK(std::exp(-r.loss) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(ctc::BruteForceLikelihood(Uniform(2, 2), std::vector<int>{1}) ==
        doctest::Approx(0.75).epsilon(1e-14));

  CHECK(ThrowsKind(ErrorKind::kInfeasibleLabelSequence,
                   [] { ctc::CtcLoss(Uniform(2, 2), LabelSequence({1, 1})); }));
  CHECK_NOTHROW(ctc::CtcLoss(Uniform(3, 2), LabelSequence({1, 1})));
  CHECK(ctc::MinFrames(std::vector<int>{1, 1, 2, 2, 2}) == 8);
}

TEST_CASE("ctc loss equals brute-force enumeration") {
  std::mt19937_64 rng(1234);
  double worst = 0.0;
  for (int i = 0; i < 250; ++i) {
    auto inst = RandomFeasibleInstance(rng, 8, 3, 3);
    const double loss = ctc::CtcLoss(inst.y, inst.z).loss;
    const double brute = -std::log(ctc::BruteForceLikelihood(inst.y, inst.z.ids));
    worst = std::max(worst, std::abs(loss - brute) / std::abs(loss));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("enumeration guard") {
  CHECK(ThrowsKind(ErrorKind::kInstanceTooLarge, [] {
    ctc::BruteForceLikelihood(Uniform(12, 4), std::vector<int>{1});
  }));
}

TEST_CASE("total probability over all outputs is one") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 20; ++i) {
    const int T = 1 + static_cast<int>(rng() % 4);
    const int K = 1 + static_cast<int>(rng() % 3);
    const auto y = RandomPosteriorgram(rng, T, K + 1);
    const auto dist = ctc::BruteForceOutputDistribution(y);
    double total = 0.0;
    for (const auto& [z, p] : dist) {
      if (!z.empty()) {
        CHECK(std::exp(-ctc::CtcLoss(y, LabelSequence(z)).loss) ==
              doctest::Approx(p).epsilon(1e-10));
      }
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dist.at({}) == doctest::Approx(ctc::BruteForceLikelihood(y, {})).epsilon(1e-14));
  }
}

TEST_CASE("time-slice invariance of alpha*beta") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    auto inst = RandomFeasibleInstance(rng, 20, 5, 6);
    const Matrix lp = inst.y.probs.array().log().matrix();
    const auto r = ctc::CtcLoss(inst.y, inst.z);
    for (int t = 0; t < inst.y.num_frames(); ++t) {
      CHECK(RelErr(ctc::SliceLogLikelihood(r.table, lp, t),
                   r.table.log_likelihood) < 1e-9);
    }
  }
}

TEST_CASE("appending a certain-blank frame leaves the likelihood unchanged") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 30; ++i) {
    auto inst = RandomFeasibleInstance(rng, 7, 3, 3);
    Matrix m(inst.y.num_frames() + 1, inst.y.output_dim());
    m.topRows(inst.y.num_frames()) = inst.y.probs;
    m.row(inst.y.num_frames()).setZero();
    m(inst.y.num_frames(), 0) = 1.0;
    const double before = ctc::CtcLoss(inst.y, inst.z).loss;
    const double after = ctc::CtcLoss(Posteriorgram(m), inst.z).loss;
    CHECK(RelErr(before, after) < 1e-12);
  }
}

TEST_CASE("gradient w.r.t. logits") {
  SUBCASE("single-path closed form") {
    Matrix logits(1, 2);
    logits << std::log(0.4), std::log(0.6);
    const Matrix g = ctc::CtcGrad(logits, LabelSequence({1}));
    CHECK(g(0, 0) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(g(0, 1) == doctest::Approx(0.6 - 1.0).epsilon(1e-14));
  }
  SUBCASE("rows sum to zero and match central differences") {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
      const int T = 5, K = 3;
      const Matrix logits = RandomLogits(rng, T, K + 1);
      const LabelSequence z = RandomLabels(rng, 2, K);
      double loss = 0.0;
      const Matrix g = ctc::CtcGrad(logits, z, &loss);
      CHECK(loss == doctest::Approx(ctc::CtcLoss(Posteriorgram::FromLogits(logits), z).loss));
      for (int t = 0; t < T; ++t) CHECK(std::abs(g.row(t).sum()) < 1e-10);
      const double eps = 1e-5;
      for (int t = 0; t < T; ++t) {
        for (int k = 0; k <= K; ++k) {
          Matrix p = logits, m = logits;
          p(t, k) += eps;
          m(t, k) -= eps;
          const double fd = (ctc::CtcLossFromLogProbs(Posteriorgram::LogSoftmax(p), z).loss -
                             ctc::CtcLossFromLogProbs(Posteriorgram::LogSoftmax(m), z).loss) /
                            (2 * eps);
          const double denom = std::max({std::abs(fd), std::abs(g(t, k)), 1e-4});
          worst = std::max(worst, std::abs(fd - g(t, k)) / denom);
        }
      }
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("loss is invariant to per-frame logit shifts") {
  std::mt19937_64 rng(5);
  Matrix logits = RandomLogits(rng, 6, 4);
  const LabelSequence z({1, 3});
  double base = 0.0, shifted = 0.0;
  ctc::CtcGrad(logits, z, &base);
  logits.row(2).array() += 17.0;
  logits.row(4).array() -= 3.5;
  ctc::CtcGrad(logits, z, &shifted);
  CHECK(RelErr(base, shifted) < 1e-12);
}

TEST_CASE("unit posteriors") {
  {
    const auto y = Rows({{0.4, 0.6}});
    const LabelSequence z({1});
    const auto r = ctc::CtcLoss(y, z);
    const Matrix g = ctc::UnitPosteriors(y, z, r.table);
    CHECK(g(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g(0, 0) == 0.0);
    CHECK(g(0, 2) == 0.0);
  }
  {
    // aa, ab, ba equally likely: 2 + 1 + 1 frames of "a" over 3 paths.
    const auto y = Uniform(2, 2);
    const LabelSequence z({1});
    const auto r = ctc::CtcLoss(y, z);
    const Matrix g = ctc::UnitPosteriors(y, z, r.table);
    CHECK(g.col(1).sum() == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  }
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    auto inst = RandomFeasibleInstance(rng, 15, 4, 5);
    const auto r = ctc::CtcLoss(inst.y, inst.z);
    const Matrix g = ctc::UnitPosteriors(inst.y, inst.z, r.table);
    for (int t = 0; t < g.rows(); ++t) CHECK(std::abs(g.row(t).sum() - 1.0) < 1e-9);
  }
  const auto y = Uniform(3, 3);
  const auto r = ctc::CtcLoss(y, LabelSequence({1}));
  CHECK(ThrowsKind(ErrorKind::kCacheMismatch,
                   [&] { ctc::UnitPosteriors(y, LabelSequence({2}), r.table); }));
}
