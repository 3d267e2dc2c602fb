// include/ctcfuse/ctc.hpp

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

#ifndef CTCFUSE_CTC_HPP_
#define CTCFUSE_CTC_HPP_

#include <map>
#include <span>
#include <vector>

#include "ctcfuse/types.hpp"

namespace ctcfuse::ctc {

/// Frame-level paths use output indices: 0 is the blank, 1..K are units.
using Path = std::vector<int>;

/// b, z1, b, z2, ..., zU, b  (length 2U+1).
std::vector<int> AugmentLabels(std::span<const int> z);

/// Merge adjacent repeats, then delete blanks.
std::vector<int> Collapse(std::span<const int> path);

/// Minimum frame count needed to emit `z`: U plus one blank for every pair of
/// adjacent equal labels.
int MinFrames(std::span<const int> z);
inline bool IsFeasible(std::span<const int> z, int num_frames) {
  return num_frames >= MinFrames(z);
}

/// Product over t of y_t[path_t], accumulated in the log domain.
double PathProbability(const Posteriorgram& y, std::span<const int> path);

/// Forward and backward lattices over the augmented label sequence. Both
/// include the emission at time t, so alpha_t(s) + beta_t(s) counts
/// log y_t[l_s] twice; SliceLogLikelihood removes it.
struct ForwardBackwardTable {
  std::vector<int> augmented;  // 2U+1
  Matrix log_alpha;            // (2U+1) x T
  Matrix log_beta;             // (2U+1) x T
  double log_likelihood = kLogZero;

  int num_frames() const { return static_cast<int>(log_alpha.cols()); }
  int num_positions() const { return static_cast<int>(augmented.size()); }
};

struct LossResult {
  double loss = 0.0;  // -log P(z|X)
  ForwardBackwardTable table;
};

/// Negative log-likelihood of `z` under `y`. Throws
/// InfeasibleLabelSequence if T is too short for z.
LossResult CtcLoss(const Posteriorgram& y, const LabelSequence& z);
/// Same, from per-frame log-probabilities (e.g. a log-softmax).
LossResult CtcLossFromLogProbs(const Matrix& log_probs, const LabelSequence& z);

/// log sum_s exp(alpha_t(s) + beta_t(s) - log y_t[l_s]) at frame t. Equals the
/// log-likelihood for every t.
double SliceLogLikelihood(const ForwardBackwardTable& table,
                          const Matrix& log_probs, int t);

/// Gradient of -log P(z|X) w.r.t. the pre-softmax logits (T x (K+1)).
/// When `loss` is non-null it receives the loss value.
Matrix CtcGrad(const Matrix& logits, const LabelSequence& z,
               double* loss = nullptr);

/// gamma_t(s): posterior occupation of augmented position s at frame t,
/// returned as T x (2U+1). Every row sums to one.
Matrix UnitPosteriors(const Posteriorgram& y, const LabelSequence& z,
                      const ForwardBackwardTable& table);

inline constexpr double kBruteForceLimit = 1e7;

/// Sum of PathProbability over every path collapsing to `z`, by explicit
/// enumeration of all (K+1)^T paths. `z` may be empty here, which gives the
/// probability of emitting nothing. Throws InstanceTooLarge past the guard.
double BruteForceLikelihood(const Posteriorgram& y, std::span<const int> z);

/// Full distribution over collapsed outputs by enumeration.
std::map<std::vector<int>, double> BruteForceOutputDistribution(
    const Posteriorgram& y);

}  // namespace ctcfuse::ctc

#endif  // CTCFUSE_CTC_HPP_
