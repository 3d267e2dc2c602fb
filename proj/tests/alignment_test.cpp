// tests/alignment_test.cpp


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
#include <random>
#include <regex>
#include <sstream>

#include "ctcfuse/alignment.hpp"
#include "ctcfuse/corpus.hpp"
#include "ctcfuse/error.hpp"

using namespace ctcfuse;
using namespace ctcfuse::alignment;

namespace {

template <typename F>
ErrorKind KindOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::kInvalidArgument;
}

// Blank everywhere except the given (frame, unit, prob) spikes, the remainder
// of each spiky row going to blank.
Posteriorgram Spikes(int T, int V, const std::vector<std::tuple<int, int, double>>& spikes) {
  Matrix p = Matrix::Zero(T, V);
  p.col(0).setOnes();
  for (auto [t, k, v] : spikes) {
    p(t - 1, k) = v;
    p(t - 1, 0) = 1.0 - v;
  }
  return Posteriorgram(p);
}

// Peaky posteriors from gold segments: the unit fires at its segment's first
// frame. `map` relabels phonemes (e.g. to visemes).
Posteriorgram GoldPeaky(const corpus::Corpus& c, const std::vector<corpus::Segment>& segs, int T,
                        const corpus::VisemeMap* map) {
  const int V = (map ? map->visemes() : c.phonemes).output_dim();
  std::vector<std::tuple<int, int, double>> s;
  for (const auto& seg : segs) {
    if (seg.label == corpus::kSilence) continue;
    const int k = c.phonemes.id(seg.label);
    s.emplace_back(seg.start, map ? (*map)(k) : k, 0.9);
  }
  return Spikes(T, V, s);
}

PeakRecord Rec(int unit, int frame, int occ = 0) {
  PeakRecord r;
  r.utt = "u1";
  r.modality = "audio";
  r.unit = unit;
  r.unit_name = "p" + std::to_string(unit);
  r.occurrence = occ;
  r.peak_frame = frame;
  r.peak_prob = 0.9;
  return r;
}

}  // namespace

TEST_CASE("peak extraction") {
  SUBCASE("run maximum, earliest on ties") {
    Matrix p = Matrix::Zero(20, 3);
    p.col(0).setOnes();
    p(9, 1) = 0.8, p(9, 0) = 0.2;  // frame 10
    p(10, 1) = 0.7, p(10, 0) = 0.3;
    p(14, 2) = 0.6, p(14, 0) = 0.4;  // frames 15..16 tie
    p(15, 2) = 0.6, p(15, 0) = 0.4;
    const auto r = ExtractPeaks(Posteriorgram(p));
    REQUIRE(r.size() == 2);
    CHECK(r[0].unit == 1);
    CHECK(r[0].peak_frame == 10);
    CHECK(r[0].peak_prob == doctest::Approx(0.8));
    CHECK(r[1].unit == 2);
    CHECK(r[1].peak_frame == 15);
  }
  SUBCASE("separate runs count occurrences") {
    const auto r = ExtractPeaks(Spikes(12, 3, {{2, 1, 0.9}, {5, 2, 0.9}, {8, 1, 0.9}}));
    REQUIRE(r.size() == 3);
    CHECK(r[2].unit == 1);
    CHECK(r[2].occurrence == 1);
    CHECK(r[1].occurrence == 0);
  }
  SUBCASE("all blank") { CHECK(ExtractPeaks(Spikes(10, 4, {})).empty()); }
  SUBCASE("bad threshold") {
    CHECK(KindOf([] { ExtractPeaks(Spikes(3, 2, {}), 1.0); }) == ErrorKind::kInvalidArgument);
  }
  SUBCASE("threshold invariance below every run maximum") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      Matrix p(30, 4);
      for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = std::pow(u(rng), 4.0);
      for (int t = 0; t < 30; ++t) p.row(t) /= p.row(t).sum();
      const auto hi = ExtractPeaks(Posteriorgram(p), 0.5);
      double min_max = 1.0;
      for (const auto& r : hi) min_max = std::min(min_max, r.peak_prob);
      // Lowering the threshold toward (but above) the strongest competing
      // mass must keep every peak frame when runs do not merge.
      const double lower = std::max(0.5 - 1e-3, 0.5 * min_max);
      const auto lo = ExtractPeaks(Posteriorgram(p), std::min(lower, 0.5));
      if (lo.size() != hi.size()) continue;  // runs merged or new runs appeared
      for (std::size_t i = 0; i < hi.size(); ++i) CHECK(lo[i].peak_frame == hi[i].peak_frame);
    }
  }
  SUBCASE("one-hot gold posteriors put every peak inside its segment") {
    corpus::CorpusConfig cfg;
    cfg.num_train = 30;
    cfg.num_heldout = 0;
    const auto c = corpus::GenerateCorpus(cfg);
    int inside = 0, total = 0;
    for (const auto& u : c.utterances) {
      Matrix p = Matrix::Zero(u.num_frames(), c.phonemes.output_dim());
      // Phonemes on their segment, blank elsewhere (a blank frame separates
      // repeated neighbours).
      for (const auto& s : u.audio_segments) {
        const int k = s.label == corpus::kSilence ? 0 : c.phonemes.id(s.label);
        for (int t = s.start; t <= s.end; ++t) p(t - 1, t == s.end ? 0 : k) = 1.0;
      }
      const auto recs = ExtractPeaks(Posteriorgram(p), 0.5, &c.phonemes);
      std::vector<const corpus::Segment*> segs;
      for (const auto& s : u.audio_segments)
        if (s.label != corpus::kSilence) segs.push_back(&s);
      REQUIRE(recs.size() == segs.size());
      for (std::size_t i = 0; i < recs.size(); ++i) {
        ++total;
        inside += recs[i].unit_name == segs[i]->label && recs[i].peak_frame >= segs[i]->start &&
                  recs[i].peak_frame <= segs[i]->end;
      }
    }
    CHECK(inside == total);
  }
}

TEST_CASE("occurrence matching") {
  const std::vector<PeakRecord> a{Rec(1, 4), Rec(2, 7), Rec(1, 10, 1), Rec(3, 14)};
  const LabelSequence ref({1, 2, 1, 3});
  SUBCASE("identical lists") {
    const auto m = MatchOccurrences(a, a, ref);
    CHECK(m.pairs.size() == 4);
    for (const auto& p : m.pairs) CHECK(p.offset() == 0);
  }
  SUBCASE("shifted list") {
    auto b = a;
    for (auto& r : b) r.peak_frame += 3;
    const auto m = MatchOccurrences(a, b, ref);
    CHECK(m.pairs.size() == 4);
    for (const auto& p : m.pairs) CHECK(p.offset() == -3);
    CHECK(MakeOffsetReport(m.pairs, 100.0 / 3.0).global.mean == -3.0);
  }
  SUBCASE("count mismatch drops the unit") {
    auto b = a;
    b.push_back(Rec(1, 16, 2));
    const auto m = MatchOccurrences(a, b, ref);
    CHECK(m.pairs.size() == 2);
    CHECK(m.unmatched_a == 2);
    CHECK(m.unmatched_b == 3);
    for (const auto& p : m.pairs) CHECK(p.unit != 1);
  }
  SUBCASE("antisymmetry") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> unit(1, 4), frame(1, 60), n(0, 8);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<PeakRecord> x, y;
      for (int i = n(rng); i > 0; --i) x.push_back(Rec(unit(rng), frame(rng)));
      for (int i = n(rng); i > 0; --i) y.push_back(Rec(unit(rng), frame(rng)));
      const auto xy = MatchOccurrences(x, y, {});
      const auto yx = MatchOccurrences(y, x, {});
      REQUIRE(xy.pairs.size() == yx.pairs.size());
      std::multiset<std::tuple<int, int, int>> f, g;
      for (const auto& p : xy.pairs) f.insert({p.unit, p.frame_b, p.offset()});
      for (const auto& p : yx.pairs) g.insert({p.unit, p.frame_a, -p.offset()});
      CHECK(f == g);
      CHECK(xy.unmatched_a == yx.unmatched_b);
    }
  }
  SUBCASE("phonemes against visemes follow viseme-image order") {
    // Desk table: p, b -> bilabial; f -> labial; t, s -> alveolar.
    const LabelAlphabet ph = corpus::PhonemeAlphabet(12);
    const auto map = corpus::DefaultVisemeMap(ph);
    const int p = ph.id("p"), b = ph.id("b"), f = ph.id("f"), t = ph.id("t"), s = ph.id("s");
    const int bil = map(p), lab = map(f), alv = map(t);
    REQUIRE(map(b) == bil);
    REQUIRE(map(s) == alv);
    // Phoneme peaks p b f t s; viseme peaks bil bil lab alv alv, 2 frames
    // earlier.
    std::vector<PeakRecord> pa{Rec(p, 5), Rec(b, 9), Rec(f, 13), Rec(t, 17), Rec(s, 21)};
    std::vector<PeakRecord> vb{Rec(bil, 3), Rec(bil, 7, 1), Rec(lab, 11), Rec(alv, 15), Rec(alv, 19, 1)};
    const LabelSequence ref({p, b, f, t, s});
    const auto m = MatchOccurrences(pa, vb, ref, &map, nullptr, &map);
    REQUIRE(m.pairs.size() == 5);
    const std::vector<std::pair<int, int>> expected{{5, 3}, {9, 7}, {13, 11}, {17, 15}, {21, 19}};
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(m.pairs[i].frame_a == expected[i].first);
      CHECK(m.pairs[i].frame_b == expected[i].second);
      CHECK(m.pairs[i].unit == pa[i].unit);
    }
  }
}

TEST_CASE("gold alignments with an injected lag recover it exactly") {
  for (int L : {0, 1, 3, 5}) {
    corpus::CorpusConfig cfg;
    cfg.num_train = 25;
    cfg.num_heldout = 0;
    cfg.video_lead_frames = L;
    cfg.seed = 9;
    const auto c = corpus::GenerateCorpus(cfg);
    std::vector<MatchedPair> pairs;
    for (const auto& u : c.utterances) {
      const auto ra = ExtractPeaks(GoldPeaky(c, u.audio_segments, u.num_frames(), nullptr), 0.5,
                                   &c.phonemes, u.id, "audio");
      const auto rv = ExtractPeaks(GoldPeaky(c, u.video_segments, u.num_frames(), &c.visemes), 0.5,
                                   &c.visemes.visemes(), u.id, "video");
      const auto m = MatchOccurrences(rv, ra, u.phonemes, nullptr, &c.visemes, &c.visemes);
      CHECK(m.unmatched_a == 0);
      CHECK(m.unmatched_b == 0);
      pairs.insert(pairs.end(), m.pairs.begin(), m.pairs.end());
    }
    const auto rep = MakeOffsetReport(pairs, 100.0 / 3.0);
    CHECK(rep.global.mean == -L);
    CHECK(rep.global.std == 0.0);
    for (const auto& [unit, st] : rep.per_unit) CHECK(st.mean == -L);
  }
}

TEST_CASE("offset reports") {
  SUBCASE("arithmetic") {
    const std::vector<MatchedPair> one{{"u", 1, "p", 7, 10}};
    const auto r = MakeOffsetReport(one, 100.0 / 3.0);
    CHECK(r.global.mean == -3.0);
    CHECK(r.global.mean_ms == doctest::Approx(-100.0).epsilon(1e-12));
    CHECK(r.global.count == 1);
    CHECK(r.per_unit.at("p").std == 0.0);
  }
  SUBCASE("delay correction centres the mean") {
    std::vector<MatchedPair> pairs;
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> d(-6, 1);
    for (int i = 0; i < 400; ++i) pairs.push_back({"u", 1 + i % 3, "p" + std::to_string(i % 3), 50 + d(rng), 50});
    const auto raw = MakeOffsetReport(pairs, 10.0);
    const auto fixed = MakeOffsetReport(pairs, 10.0, raw.global.mean);
    CHECK(std::abs(fixed.global.mean) <= raw.global.std / std::sqrt(400.0));
    CHECK(fixed.global.std == doctest::Approx(raw.global.std));
  }
  SUBCASE("no pairs") {
    CHECK(KindOf([] { MakeOffsetReport({}, 10.0); }) == ErrorKind::kNoMatchedPairs);
  }
}

TEST_CASE("csv and svg emission") {
  const LabelAlphabet ph = corpus::PhonemeAlphabet(12);
  const auto map = corpus::DefaultVisemeMap(ph);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> unit(1, 12), frame(1, 99);
  std::uniform_real_distribution<double> prob(0.5, 1.0);
  std::vector<PeakRecord> recs;
  for (int i = 0; i < 60; ++i) {
    PeakRecord r;
    r.utt = "dv" + std::to_string(i % 4);
    r.modality = i % 2 ? "audio" : "video";
    r.unit = i % 2 ? unit(rng) : 1 + unit(rng) % 4;
    r.unit_name = i % 2 ? ph.name(r.unit) : map.visemes().name(r.unit);
    r.occurrence = i % 3;
    r.peak_frame = frame(rng);
    r.peak_prob = prob(rng);
    recs.push_back(r);
  }
  SUBCASE("peak csv round trip") {
    std::stringstream ss;
    WritePeakCsv(ss, recs);
    const auto back = ReadPeakCsv(ss, "peaks.csv", {{"audio", ph}, {"video", map.visemes()}});
    CHECK(back == recs);
    std::stringstream again;
    WritePeakCsv(again, back);
    std::stringstream first;
    WritePeakCsv(first, recs);
    CHECK(again.str() == first.str());
  }
  SUBCASE("empty csv is the header") {
    std::stringstream ss;
    WritePeakCsv(ss, {});
    CHECK(ss.str() == "utt,unit,modality,occurrence,peak_frame,peak_prob\n");
  }
  SUBCASE("malformed csv") {
    std::stringstream ss("utt,unit,modality,occurrence,peak_frame,peak_prob\nu,p,audio,0,x,0.9\n");
    try {
      ReadPeakCsv(ss, "peaks.csv");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kParseError);
      CHECK(std::string(e.what()).find("peaks.csv:2") != std::string::npos);
    }
  }
  SUBCASE("report csv") {
    const std::vector<MatchedPair> pairs{{"u", 1, "p", 5, 8}, {"u", 2, "b", 4, 6}, {"u", 1, "p", 9, 11}};
    std::stringstream ss;
    WriteReportCsv(ss, MakeOffsetReport(pairs, 10.0));
    std::string line;
    std::getline(ss, line);
    CHECK(line == "unit,mean_offset_frames,std,count");
    std::vector<std::string> rows;
    while (std::getline(ss, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "b,-2.000000,0.000000,1");
    CHECK(rows[1] == "p,-2.500000,0.500000,2");
    CHECK(rows[2] == "<all>,-2.333333,0.471405,3");
  }
  SUBCASE("svg has one mark per unit and system") {
    std::vector<SystemPositions> sys{{"audio", {}}, {"video", {}}, {"audiovisual", {}}};
    for (int k = 1; k <= 12; ++k) {
      sys[0].position_ms[ph.name(k)] = 0.0;
      sys[1].position_ms[ph.name(k)] = -100.0 + k;
      sys[2].position_ms[ph.name(k)] = -50.0 + k;
    }
    std::stringstream ss;
    WriteAlignmentSvg(ss, sys, "test");
    const std::string svg = ss.str();
    const std::regex mark("<circle class=\"mark\"");
    CHECK(std::distance(std::sregex_iterator(svg.begin(), svg.end(), mark), std::sregex_iterator()) == 36);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
}
