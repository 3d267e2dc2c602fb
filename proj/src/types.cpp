// src/types.cpp

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

#include "ctcfuse/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ctcfuse/error.hpp"

namespace ctcfuse {

LabelAlphabet::LabelAlphabet(std::vector<std::string> units)
    : units_(std::move(units)) {
  if (units_.empty()) Fail(ErrorKind::kInvalidArgument, "empty alphabet");
  std::set<std::string> seen;
  for (const auto& u : units_) {
    if (u.empty() || u == "<blk>")
      Fail(ErrorKind::kInvalidArgument, "reserved or empty unit name '" + u + "'");
    if (!seen.insert(u).second)
      Fail(ErrorKind::kInvalidArgument, "duplicate unit name '" + u + "'");
  }
}

const std::string& LabelAlphabet::name(int id) const {
  static const std::string blank = "<blk>";
  if (id == kBlank) return blank;
  if (id < 1 || id > num_units())
    Fail(ErrorKind::kInvalidArgument, "unit id out of range: " + std::to_string(id));
  return units_[id - 1];
}

int LabelAlphabet::id(const std::string& unit) const {
  auto it = std::find(units_.begin(), units_.end(), unit);
  return it == units_.end() ? -1 : static_cast<int>(it - units_.begin()) + 1;
}

void LabelSequence::Validate(int num_units) const {
  if (ids.empty()) Fail(ErrorKind::kInvalidArgument, "empty label sequence");
  for (int id : ids) {
    if (id < 1 || id > num_units)
      Fail(ErrorKind::kInvalidArgument,
           "label id " + std::to_string(id) + " outside [1, " +
               std::to_string(num_units) + "]");
  }
}

Matrix Posteriorgram::LogSoftmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double mx = logits.row(t).maxCoeff();
    const double lse =
        mx + std::log((logits.row(t).array() - mx).exp().sum());
    out.row(t) = logits.row(t).array() - lse;
  }
  return out;
}

Posteriorgram Posteriorgram::FromLogits(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double mx = logits.row(t).maxCoeff();
    p.row(t) = (logits.row(t).array() - mx).exp();
    p.row(t) /= p.row(t).sum();
  }
  return Posteriorgram(std::move(p));
}

void Posteriorgram::Validate(double tol) const {
  if (probs.rows() < 1 || probs.cols() < 2)
    Fail(ErrorKind::kInvalidArgument, "posteriorgram needs T>=1 and K+1>=2");
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    const double s = probs.row(t).sum();
    if (!(std::abs(s - 1.0) <= tol))
      Fail(ErrorKind::kInvalidArgument,
           "posteriorgram row " + std::to_string(t) + " sums to " + std::to_string(s));
    if ((probs.row(t).array() < 0.0).any() || (probs.row(t).array() > 1.0).any())
      Fail(ErrorKind::kInvalidArgument, "posteriorgram entry outside [0,1]");
  }
}

}  // namespace ctcfuse
