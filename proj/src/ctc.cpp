// src/ctc.cpp

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

#include "ctcfuse/ctc.hpp"

#include <cmath>
#include <string>

#include "ctcfuse/error.hpp"

namespace ctcfuse::ctc {

std::vector<int> AugmentLabels(std::span<const int> z) {
  std::vector<int> aug(2 * z.size() + 1, kBlank);
  for (size_t u = 0; u < z.size(); ++u) aug[2 * u + 1] = z[u];
  return aug;
}

std::vector<int> Collapse(std::span<const int> path) {
  std::vector<int> out;
  int prev = -1;
  for (int p : path) {
    if (p != prev && p != kBlank) out.push_back(p);
    prev = p;
  }
  return out;
}

int MinFrames(std::span<const int> z) {
  int repeats = 0;
  for (size_t u = 1; u < z.size(); ++u)
    if (z[u] == z[u - 1]) ++repeats;
  return static_cast<int>(z.size()) + repeats;
}

double PathProbability(const Posteriorgram& y, std::span<const int> path) {
  if (static_cast<int>(path.size()) != y.num_frames())
    Fail(ErrorKind::kLengthMismatch,
         "path length " + std::to_string(path.size()) + " vs T=" +
             std::to_string(y.num_frames()));
  double logp = 0.0;
  for (size_t t = 0; t < path.size(); ++t) {
    const int k = path[t];
    if (k < 0 || k >= y.output_dim())
      Fail(ErrorKind::kInvalidArgument, "path symbol out of range");
    logp += std::log(y.probs(static_cast<Eigen::Index>(t), k));
  }
  return std::exp(logp);
}

namespace {

void CheckInstance(const Matrix& log_probs, const LabelSequence& z) {
  z.Validate(static_cast<int>(log_probs.cols()) - 1);
  const int T = static_cast<int>(log_probs.rows());
  if (!IsFeasible(z.ids, T))
    Fail(ErrorKind::kInfeasibleLabelSequence,
         "T=" + std::to_string(T) + " frames cannot emit " +
             std::to_string(z.size()) + " labels (need " +
             std::to_string(MinFrames(z.ids)) + ")");
}

}  // namespace

LossResult CtcLossFromLogProbs(const Matrix& log_probs, const LabelSequence& z) {
  CheckInstance(log_probs, z);
  const int T = static_cast<int>(log_probs.rows());
  LossResult res;
  ForwardBackwardTable& tab = res.table;
  tab.augmented = AugmentLabels(z.ids);
  const auto& l = tab.augmented;
  const int S = static_cast<int>(l.size());
  tab.log_alpha = Matrix::Constant(S, T, kLogZero);
  tab.log_beta = Matrix::Constant(S, T, kLogZero);
  auto& a = tab.log_alpha;
  auto& b = tab.log_beta;

  a(0, 0) = log_probs(0, l[0]);
  a(1, 0) = log_probs(0, l[1]);
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double acc = a(s, t - 1);
      if (s >= 1) acc = LogAdd(acc, a(s - 1, t - 1));
      if (s >= 2 && l[s] != kBlank && l[s] != l[s - 2])
        acc = LogAdd(acc, a(s - 2, t - 1));
      if (acc != kLogZero) a(s, t) = acc + log_probs(t, l[s]);
    }
  }

  b(S - 1, T - 1) = log_probs(T - 1, l[S - 1]);
  b(S - 2, T - 1) = log_probs(T - 1, l[S - 2]);
  for (int t = T - 2; t >= 0; --t) {
    for (int s = S - 1; s >= 0; --s) {
      double acc = b(s, t + 1);
      if (s + 1 < S) acc = LogAdd(acc, b(s + 1, t + 1));
      if (s + 2 < S && l[s] != kBlank && l[s] != l[s + 2])
        acc = LogAdd(acc, b(s + 2, t + 1));
      if (acc != kLogZero) b(s, t) = acc + log_probs(t, l[s]);
    }
  }

  tab.log_likelihood = LogAdd(a(S - 1, T - 1), a(S - 2, T - 1));
  res.loss = -tab.log_likelihood;
  return res;
}

LossResult CtcLoss(const Posteriorgram& y, const LabelSequence& z) {
  return CtcLossFromLogProbs(y.probs.array().log().matrix(), z);
}

double SliceLogLikelihood(const ForwardBackwardTable& table,
                          const Matrix& log_probs, int t) {
  double acc = kLogZero;
  for (int s = 0; s < table.num_positions(); ++s) {
    const double ab = table.log_alpha(s, t) + table.log_beta(s, t);
    if (ab == kLogZero) continue;
    acc = LogAdd(acc, ab - log_probs(t, table.augmented[s]));
  }
  return acc;
}

namespace {

// T x S occupation posteriors from a table and its log-probabilities.
Matrix Occupation(const ForwardBackwardTable& tab, const Matrix& log_probs) {
  const int T = tab.num_frames();
  const int S = tab.num_positions();
  Matrix gamma = Matrix::Zero(T, S);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const double ab = tab.log_alpha(s, t) + tab.log_beta(s, t);
      if (ab == kLogZero) continue;
      gamma(t, s) =
          std::exp(ab - log_probs(t, tab.augmented[s]) - tab.log_likelihood);
    }
  }
  return gamma;
}

}  // namespace

Matrix CtcGrad(const Matrix& logits, const LabelSequence& z, double* loss) {
  const Matrix log_probs = Posteriorgram::LogSoftmax(logits);
  const LossResult res = CtcLossFromLogProbs(log_probs, z);
  if (loss) *loss = res.loss;
  const Matrix gamma = Occupation(res.table, log_probs);
  Matrix grad = log_probs.array().exp().matrix();
  for (int t = 0; t < gamma.rows(); ++t)
    for (int s = 0; s < gamma.cols(); ++s)
      grad(t, res.table.augmented[s]) -= gamma(t, s);
  return grad;
}

Matrix UnitPosteriors(const Posteriorgram& y, const LabelSequence& z,
                      const ForwardBackwardTable& table) {
  if (table.num_frames() != y.num_frames() ||
      table.augmented != AugmentLabels(z.ids))
    Fail(ErrorKind::kCacheMismatch,
         "forward-backward table does not belong to this (y, z)");
  return Occupation(table, y.probs.array().log().matrix());
}

namespace {

double PathCount(const Posteriorgram& y) {
  return std::pow(static_cast<double>(y.output_dim()), y.num_frames());
}

void GuardSize(const Posteriorgram& y) {
  if (PathCount(y) > kBruteForceLimit)
    Fail(ErrorKind::kInstanceTooLarge,
         std::to_string(y.output_dim()) + "^" + std::to_string(y.num_frames()) +
             " paths exceeds the enumeration guard");
}

// Odometer over all (K+1)^T paths.
template <typename Visit>
void EnumeratePaths(const Posteriorgram& y, Visit&& visit) {
  const int T = y.num_frames();
  const int V = y.output_dim();
  Path path(T, 0);
  while (true) {
    visit(path);
    int t = T - 1;
    while (t >= 0 && ++path[t] == V) path[t--] = 0;
    if (t < 0) break;
  }
}

}  // namespace

double BruteForceLikelihood(const Posteriorgram& y, std::span<const int> z) {
  GuardSize(y);
  const std::vector<int> target(z.begin(), z.end());
  double total = 0.0;
  EnumeratePaths(y, [&](const Path& p) {
    if (Collapse(p) == target) total += PathProbability(y, p);
  });
  return total;
}

std::map<std::vector<int>, double> BruteForceOutputDistribution(
    const Posteriorgram& y) {
  GuardSize(y);
  std::map<std::vector<int>, double> dist;
  EnumeratePaths(y, [&](const Path& p) {
    dist[Collapse(p)] += PathProbability(y, p);
  });
  return dist;
}

}  // namespace ctcfuse::ctc
