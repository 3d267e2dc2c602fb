// include/ctcfuse/alignment.hpp


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

#ifndef CTCFUSE_ALIGNMENT_HPP_
#define CTCFUSE_ALIGNMENT_HPP_

#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "ctcfuse/corpus.hpp"
#include "ctcfuse/types.hpp"

namespace ctcfuse::alignment {

struct PeakRecord {
  std::string utt;
  std::string modality;
  int unit = 0;            // output index, >= 1
  std::string unit_name;
  int occurrence = 0;      // 0-based count of earlier peaks of the same unit
  int peak_frame = 0;      // 1-based
  double peak_prob = 0.0;

  bool operator==(const PeakRecord&) const = default;
};

/// One record per maximal run of frames where a non-blank unit's posterior
/// exceeds `threshold`, placed at the run's first maximum. Records are
/// ordered by frame, then unit. `alphabet` (optional) fills unit_name.
std::vector<PeakRecord> ExtractPeaks(const Posteriorgram& y, double threshold = 0.5,
                                     const LabelAlphabet* alphabet = nullptr,
                                     const std::string& utt = "", const std::string& modality = "");

struct MatchedPair {
  std::string utt;
  int unit = 0;  // unit of the first list
  std::string unit_name;
  int frame_a = 0;
  int frame_b = 0;

  int offset() const { return frame_a - frame_b; }
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  int unmatched_a = 0;
  int unmatched_b = 0;
};

/// Pairs the i-th occurrence of each unit in `a` with the i-th occurrence in
/// `b` of the same unit, comparing units after mapping each side through its
/// viseme map (when given). A unit is paired only when both sides (and
/// `ref`, compared after `map_ref`, when non-empty) hold the same number of
/// occurrences; otherwise all of its occurrences count as unmatched.
MatchResult MatchOccurrences(const std::vector<PeakRecord>& a, const std::vector<PeakRecord>& b,
                             const LabelSequence& ref,
                             const corpus::VisemeMap* map_a = nullptr,
                             const corpus::VisemeMap* map_b = nullptr,
                             const corpus::VisemeMap* map_ref = nullptr);

struct OffsetStats {
  double mean = 0.0;  // frames
  double std = 0.0;   // population standard deviation, frames
  int count = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

/// Per-occurrence averages of (frame_a - frame_b - technical_delay_frames).
struct OffsetReport {
  std::map<std::string, OffsetStats> per_unit;  // keyed by unit name
  OffsetStats global;
  int unmatched = 0;
};

/// Throws NoMatchedPairs for an empty pair list.
OffsetReport MakeOffsetReport(const std::vector<MatchedPair>& pairs, double frame_ms,
                              double technical_delay_frames = 0.0);

/// `utt,unit,modality,occurrence,peak_frame,peak_prob`.
void WritePeakCsv(std::ostream& os, const std::vector<PeakRecord>& records);
/// Unit names resolve through `alphabets[modality]` when present;
/// otherwise `unit` stays 0. Throws ParseError with the line number.
std::vector<PeakRecord> ReadPeakCsv(std::istream& is, const std::string& source,
                                    const std::map<std::string, LabelAlphabet>& alphabets = {});
/// `unit,mean_offset_frames,std,count`, then a final `<all>` row.
void WriteReportCsv(std::ostream& os, const OffsetReport& report);

struct SystemPositions {
  std::string system;
  std::map<std::string, double> position_ms;  // unit name -> mean position
};

/// One row per unit, one circle per (unit, system) that has a position.
void WriteAlignmentSvg(std::ostream& os, const std::vector<SystemPositions>& systems,
                       const std::string& title);

void WriteFile(const std::string& path, const std::function<void(std::ostream&)>& body);

}  // namespace ctcfuse::alignment

#endif  // CTCFUSE_ALIGNMENT_HPP_
