// include/ctcfuse/decode.hpp

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

#ifndef CTCFUSE_DECODE_HPP_
#define CTCFUSE_DECODE_HPP_

#include <string>
#include <vector>

#include "ctcfuse/fst.hpp"
#include "ctcfuse/lm.hpp"
#include "ctcfuse/types.hpp"

namespace ctcfuse::decode {

/// Per-frame argmax (ties to the lowest index), then CTC collapse.
std::vector<int> GreedyDecode(const Posteriorgram& y);
/// Frame-level argmax path before collapse.
std::vector<int> BestPath(const Posteriorgram& y);
/// Sum of log y_t along BestPath.
double BestPathLogProb(const Posteriorgram& y);

struct BeamOptions {
  int beam_width = 16;
  /// Scales the natural-log LM probability added at each word end.
  double lm_weight = 1.0;
  int nbest = 1;
};

/// CTC prefix beam search. Without a lexicon, hypotheses are unit strings and
/// the score is log P(prefix). With a lexicon, unit strings are constrained to
/// pronunciation sequences and words are emitted when a pronunciation
/// completes; an LM (which requires a lexicon) then adds lm_weight * ln P(w|h)
/// at each word and for </s> at the end. Ties rank lexicographically by prefix.
std::vector<Hypothesis> PrefixBeamSearch(const Posteriorgram& y,
                                         const BeamOptions& opts,
                                         const Lexicon* lexicon = nullptr,
                                         const NGramModel* lm = nullptr);

struct ErrorCounts {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int ref_length = 0;

  int errors() const { return substitutions + deletions + insertions; }
  /// (S + D + I) / N; throws EmptyReference when N == 0.
  double ErrorRate() const;
  /// 100 (N - S - D - I) / N; negative when insertions dominate.
  double Accuracy() const;
  ErrorCounts& operator+=(const ErrorCounts& o);
};

/// Unit-cost Levenshtein alignment of `hyp` against `ref`. Among alignments
/// of minimal cost, substitutions are preferred over deletion+insertion.
template <typename T>
ErrorCounts EditDistance(const std::vector<T>& ref, const std::vector<T>& hyp);

extern template ErrorCounts EditDistance(const std::vector<int>&, const std::vector<int>&);
extern template ErrorCounts EditDistance(const std::vector<std::string>&,
                                         const std::vector<std::string>&);

/// Like EditDistance but throws EmptyReference for an empty reference.
template <typename T>
ErrorCounts EditDistanceMetrics(const std::vector<T>& ref, const std::vector<T>& hyp) {
  if (ref.empty()) Fail(ErrorKind::kEmptyReference, "reference sequence is empty");
  return EditDistance(ref, hyp);
}

}  // namespace ctcfuse::decode

#endif  // CTCFUSE_DECODE_HPP_
