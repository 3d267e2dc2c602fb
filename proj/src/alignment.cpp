// src/alignment.cpp


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

#include "ctcfuse/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/fmt/fmt.h>

#include "ctcfuse/error.hpp"

namespace ctcfuse::alignment {

std::vector<PeakRecord> ExtractPeaks(const Posteriorgram& y, double threshold,
                                     const LabelAlphabet* alphabet, const std::string& utt,
                                     const std::string& modality) {
  if (!(threshold > 0 && threshold < 1))
    Fail(ErrorKind::kInvalidArgument, "peak threshold must lie in (0, 1)");
  std::vector<PeakRecord> out;
  const int T = y.num_frames();
  for (int k = 1; k < y.output_dim(); ++k) {
    int t = 0;
    while (t < T) {
      if (!(y.probs(t, k) > threshold)) {
        ++t;
        continue;
      }
      int best = t;
      for (; t < T && y.probs(t, k) > threshold; ++t)
        if (y.probs(t, k) > y.probs(best, k)) best = t;
      PeakRecord r;
      r.utt = utt;
      r.modality = modality;
      r.unit = k;
      r.unit_name = alphabet ? alphabet->name(k) : std::to_string(k);
      r.peak_frame = best + 1;
      r.peak_prob = y.probs(best, k);
      out.push_back(std::move(r));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const PeakRecord& a, const PeakRecord& b) {
    return a.peak_frame != b.peak_frame ? a.peak_frame < b.peak_frame : a.unit < b.unit;
  });
  std::map<int, int> seen;
  for (auto& r : out) r.occurrence = seen[r.unit]++;
  return out;
}

MatchResult MatchOccurrences(const std::vector<PeakRecord>& a, const std::vector<PeakRecord>& b,
                             const LabelSequence& ref, const corpus::VisemeMap* map_a,
                             const corpus::VisemeMap* map_b, const corpus::VisemeMap* map_ref) {
  auto key = [](const corpus::VisemeMap* m, int unit) { return m ? (*m)(unit) : unit; };
  // Records in time order, grouped by common key.
  auto group = [&](const std::vector<PeakRecord>& v, const corpus::VisemeMap* m) {
    std::vector<const PeakRecord*> sorted;
    for (const auto& r : v) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* x, auto* y) {
      return x->peak_frame != y->peak_frame ? x->peak_frame < y->peak_frame : x->unit < y->unit;
    });
    std::map<int, std::vector<const PeakRecord*>> g;
    for (auto* r : sorted) g[key(m, r->unit)].push_back(r);
    return g;
  };
  const auto ga = group(a, map_a);
  const auto gb = group(b, map_b);
  std::map<int, int> ref_count;
  for (int u : ref.ids) ++ref_count[key(map_ref, u)];

  MatchResult res;
  std::set<int> keys;
  for (const auto& [k, v] : ga) keys.insert(k);
  for (const auto& [k, v] : gb) keys.insert(k);
  for (int k : keys) {
    static const std::vector<const PeakRecord*> none;
    const auto& va = ga.count(k) ? ga.at(k) : none;
    const auto& vb = gb.count(k) ? gb.at(k) : none;
    // Occurrence order is only trusted when the counts agree; otherwise the
    // whole group is dropped.
    const auto na = static_cast<int>(va.size()), nb = static_cast<int>(vb.size());
    const bool ok = na == nb && (ref.empty() || ref_count[k] == na);
    const int limit = ok ? na : 0;
    for (int i = 0; i < limit; ++i)
      res.pairs.push_back({va[i]->utt.empty() ? vb[i]->utt : va[i]->utt, va[i]->unit,
                           va[i]->unit_name, va[i]->peak_frame, vb[i]->peak_frame});
    res.unmatched_a += static_cast<int>(va.size()) - limit;
    res.unmatched_b += static_cast<int>(vb.size()) - limit;
  }
  std::stable_sort(res.pairs.begin(), res.pairs.end(),
                   [](const MatchedPair& x, const MatchedPair& y) { return x.frame_a < y.frame_a; });
  return res;
}

namespace {

OffsetStats Stats(const std::vector<double>& v, double frame_ms) {
  OffsetStats s;
  s.count = static_cast<int>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= s.count;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / s.count);
  s.mean_ms = s.mean * frame_ms;
  s.std_ms = s.std * frame_ms;
  return s;
}

}  // namespace

OffsetReport MakeOffsetReport(const std::vector<MatchedPair>& pairs, double frame_ms,
                              double technical_delay_frames) {
  if (pairs.empty()) Fail(ErrorKind::kNoMatchedPairs, "no matched peak pairs to report");
  std::map<std::string, std::vector<double>> by_unit;
  std::vector<double> all;
  for (const auto& p : pairs) {
    const double o = p.offset() - technical_delay_frames;
    by_unit[p.unit_name].push_back(o);
    all.push_back(o);
  }
  OffsetReport r;
  for (const auto& [u, v] : by_unit) r.per_unit[u] = Stats(v, frame_ms);
  r.global = Stats(all, frame_ms);
  return r;
}

void WritePeakCsv(std::ostream& os, const std::vector<PeakRecord>& records) {
  os << "utt,unit,modality,occurrence,peak_frame,peak_prob\n";
  for (const auto& r : records)
    os << fmt::format("{},{},{},{},{},{}\n", r.utt, r.unit_name, r.modality, r.occurrence,
                      r.peak_frame, r.peak_prob);
}

std::vector<PeakRecord> ReadPeakCsv(std::istream& is, const std::string& source,
                                    const std::map<std::string, LabelAlphabet>& alphabets) {
  std::string line;
  if (!std::getline(is, line) || line != "utt,unit,modality,occurrence,peak_frame,peak_prob")
    Fail(ErrorKind::kParseError, source + ":1: missing or unexpected header");
  std::vector<PeakRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
    if (f.size() != 6) Fail(ErrorKind::kParseError, fmt::format("{}:{}: expected 6 fields", source, lineno));
    PeakRecord r;
    r.utt = f[0];
    r.unit_name = f[1];
    r.modality = f[2];
    try {
      std::size_t used = 0;
      r.occurrence = std::stoi(f[3]);
      r.peak_frame = std::stoi(f[4]);
      r.peak_prob = std::stod(f[5], &used);
      if (used != f[5].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      Fail(ErrorKind::kParseError, fmt::format("{}:{}: bad number", source, lineno));
    }
    auto it = alphabets.find(r.modality);
    if (it != alphabets.end()) {
      r.unit = it->second.id(r.unit_name);
      if (r.unit < 1)
        Fail(ErrorKind::kParseError, fmt::format("{}:{}: unknown unit '{}'", source, lineno, r.unit_name));
    }
    out.push_back(std::move(r));
  }
  return out;
}

void WriteReportCsv(std::ostream& os, const OffsetReport& report) {
  os << "unit,mean_offset_frames,std,count\n";
  for (const auto& [u, s] : report.per_unit)
    os << fmt::format("{},{:.6f},{:.6f},{}\n", u, s.mean, s.std, s.count);
  os << fmt::format("<all>,{:.6f},{:.6f},{}\n", report.global.mean, report.global.std,
                    report.global.count);
}

void WriteAlignmentSvg(std::ostream& os, const std::vector<SystemPositions>& systems,
                       const std::string& title) {
  std::set<std::string> units;
  double lo = 0.0, hi = 0.0;
  for (const auto& s : systems)
    for (const auto& [u, p] : s.position_ms) {
      units.insert(u);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
  if (hi - lo < 1e-9) {
    lo -= 50;
    hi += 50;
  }
  const double pad = 0.1 * (hi - lo);
  lo -= pad;
  hi += pad;
  const int left = 90, width = 520, row = 22, top = 50;
  const int height = top + row * static_cast<int>(units.size()) + 60;
  auto x_of = [&](double v) { return left + (v - lo) / (hi - lo) * width; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  os << fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\">\n",
      left + width + 160, height);
  os << fmt::format("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
                    left, title);
  const double zero = x_of(0.0);
  os << fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#999\"/>\n",
                    zero, top - 10, height - 50);
  int i = 0;
  for (const auto& u : units) {
    const int y = top + row * i++;
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"end\">{}</text>\n",
                      left - 8, y + 4, u);
    for (std::size_t s = 0; s < systems.size(); ++s) {
      auto it = systems[s].position_ms.find(u);
      if (it == systems[s].position_ms.end()) continue;
      os << fmt::format("<circle class=\"mark\" data-system=\"{}\" data-unit=\"{}\" cx=\"{:.2f}\" "
                        "cy=\"{}\" r=\"5\" fill=\"{}\"/>\n",
                        systems[s].system, u, x_of(it->second), y, colors[s % 5]);
    }
  }
  const int axis_y = height - 40;
  os << fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", left,
                    axis_y, left + width, axis_y);
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4;
    os << fmt::format("<text x=\"{:.2f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" "
                      "text-anchor=\"middle\">{:.0f}</text>\n",
                      x_of(v), axis_y + 14, v);
  }
  os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">"
                    "mean peak position (ms)</text>\n",
                    left + width / 2 - 60, axis_y + 32);
  for (std::size_t s = 0; s < systems.size(); ++s)
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" "
                      "fill=\"{}\">{}</text>\n",
                      left + width + 20, top + 18 * static_cast<int>(s), colors[s % 5],
                      systems[s].system);
  os << "</svg>\n";
}

void WriteFile(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path);
  if (!os) Fail(ErrorKind::kIoError, "cannot write " + path);
  body(os);
  if (!os) Fail(ErrorKind::kIoError, "write failed: " + path);
}

}  // namespace ctcfuse::alignment
