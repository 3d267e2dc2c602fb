// include/ctcfuse/types.hpp

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

#ifndef CTCFUSE_TYPES_HPP_
#define CTCFUSE_TYPES_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ctcfuse {

/// Row-major so that one row is one frame and row spans are contiguous.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr int kBlank = 0;

/// log(exp(a) + exp(b)) without overflow; exact for -inf arguments.
inline double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

/// Unit inventory of a recognizer. Output index 0 is the blank; unit i of
/// `units` is output index i + 1.
class LabelAlphabet {
 public:
  LabelAlphabet() = default;
  explicit LabelAlphabet(std::vector<std::string> units);

  int num_units() const { return static_cast<int>(units_.size()); }
  /// K + 1.
  int output_dim() const { return num_units() + 1; }
  const std::vector<std::string>& units() const { return units_; }
  /// Name of output index `id` ("<blk>" for 0).
  const std::string& name(int id) const;
  /// Output index of `unit`, or -1.
  int id(const std::string& unit) const;

  bool operator==(const LabelAlphabet&) const = default;

 private:
  std::vector<std::string> units_;
};

/// Target symbol sequence; every id lies in [1, K].
struct LabelSequence {
  std::vector<int> ids;

  LabelSequence() = default;
  explicit LabelSequence(std::vector<int> v) : ids(std::move(v)) {}

  int size() const { return static_cast<int>(ids.size()); }
  bool empty() const { return ids.empty(); }
  /// Throws InvalidArgument unless 1 <= U and every id is in [1, num_units].
  void Validate(int num_units) const;
  bool operator==(const LabelSequence&) const = default;
};

/// T x (K+1) per-frame output distribution.
struct Posteriorgram {
  Matrix probs;

  Posteriorgram() = default;
  explicit Posteriorgram(Matrix p) : probs(std::move(p)) {}

  int num_frames() const { return static_cast<int>(probs.rows()); }
  int output_dim() const { return static_cast<int>(probs.cols()); }

  /// Row-wise softmax of `logits` with max subtraction.
  static Posteriorgram FromLogits(const Matrix& logits);
  /// Row-wise log-softmax, used where log y must not underflow.
  static Matrix LogSoftmax(const Matrix& logits);
  /// Throws InvalidArgument unless rows sum to 1 within `tol` and entries are
  /// in [0, 1].
  void Validate(double tol = 1e-9) const;
};

}  // namespace ctcfuse

#endif  // CTCFUSE_TYPES_HPP_
