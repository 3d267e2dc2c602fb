// tests/decode_test.cpp

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
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "ctcfuse/ctc.hpp"
#include "ctcfuse/decode.hpp"
#include "ctcfuse/error.hpp"
#include "ctcfuse/fst.hpp"
#include "ctcfuse/lm.hpp"
#include "decode_fixtures.hpp"
#include "test_util.hpp"

using namespace ctcfuse;
using namespace ctcfuse::decode;
using namespace ctcfuse::testing;

namespace {

Posteriorgram OneHot(const std::vector<int>& path, int V) {
  Matrix m = Matrix::Zero(static_cast<int>(path.size()), V);
  for (std::size_t t = 0; t < path.size(); ++t) m(static_cast<int>(t), path[t]) = 1.0;
  return Posteriorgram(m);
}

// Exhaustive argmax over all frame paths; the first strictly better path in
// lexicographic order wins.
std::vector<int> ExhaustiveBestPath(const Posteriorgram& y) {
  const int T = y.num_frames(), V = y.output_dim();
  std::vector<int> p(T, 0), best;
  double best_p = -1.0;
  while (true) {
    const double pr = ctc::PathProbability(y, p);
    if (pr > best_p) {
      best_p = pr;
      best = p;
    }
    int t = T - 1;
    while (t >= 0 && ++p[t] == V) p[t--] = 0;
    if (t < 0) break;
  }
  return best;
}

}  // namespace

TEST_CASE("greedy decode") {
  CHECK(GreedyDecode(OneHot({0, 1, 1, 0, 3}, 4)) == std::vector<int>{1, 3});
  CHECK(GreedyDecode(OneHot({0, 0, 0}, 4)).empty());
  // Ties go to the lowest index.
  CHECK(BestPath(Posteriorgram(Matrix::Constant(2, 3, 1.0 / 3))) == std::vector<int>{0, 0});

  std::mt19937_64 rng(3);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    const int K = 1 + static_cast<int>(rng() % 3);
    const int T = 1 + static_cast<int>(rng() % 6);
    if (std::pow(K + 1, T) > 4096) continue;
    const auto y = RandomPosteriorgram(rng, T, K + 1);
    CHECK(GreedyDecode(y) == ctc::Collapse(ExhaustiveBestPath(y)));
    ++checked;
  }
  CHECK(checked > 200);
}

TEST_CASE("prefix beam search") {
  SUBCASE("degenerate posteriors") {
    const auto hyps = PrefixBeamSearch(OneHot({0, 2, 2, 0, 1}, 3), {});
    REQUIRE(hyps.size() == 1);
    CHECK(hyps[0].units == std::vector<int>{2, 1});
    CHECK(hyps[0].score == doctest::Approx(0.0));
  }
  SUBCASE("saturated beam is the exact prefix-marginal argmax") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 150; ++i) {
      const int K = 1 + static_cast<int>(rng() % 3);
      const int T = 1 + static_cast<int>(rng() % 6);
      const auto y = RandomPosteriorgram(rng, T, K + 1);
      const auto dist = ctc::BruteForceOutputDistribution(y);
      std::vector<int> arg;
      double best = -1.0;
      for (const auto& [z, p] : dist)
        if (p > best) {
          best = p;
          arg = z;
        }
      BeamOptions opts;
      opts.beam_width = static_cast<int>(std::pow(K + 1, T));
      const auto hyps = PrefixBeamSearch(y, opts);
      REQUIRE(!hyps.empty());
      CHECK(hyps[0].units == arg);
      CHECK(RelErr(hyps[0].score, std::log(best)) < 1e-10);
    }
  }
  SUBCASE("every beam width scores a lower bound of the exact marginal") {
    // Strict monotonicity in the width does not hold for prefix beam search
    // (a wider beam can evict an ancestor a narrower beam kept), but each
    // prefix score is a partial sum of its exact marginal, and the saturated
    // beam attains the maximum.
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
      const int T = 1 + static_cast<int>(rng() % 6);
      const auto y = RandomPosteriorgram(rng, T, 4, 1.0);
      const auto dist = ctc::BruteForceOutputDistribution(y);
      BeamOptions sat;
      sat.beam_width = static_cast<int>(std::pow(4, T));
      const double top = PrefixBeamSearch(y, sat)[0].score;
      for (int w = 1; w <= 64; w *= 2) {
        BeamOptions opts;
        opts.beam_width = w;
        const auto h = PrefixBeamSearch(y, opts)[0];
        CHECK(h.score <= top + 1e-12);
        CHECK(h.score <= std::log(dist.at(h.units)) + 1e-12);
      }
    }
  }
  SUBCASE("beam never scores below the greedy path") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
      const auto y = RandomPosteriorgram(rng, 10, 4, 2.0);
      BeamOptions opts;
      opts.beam_width = 8;
      CHECK(PrefixBeamSearch(y, opts)[0].score >= BestPathLogProb(y) - 1e-12);
    }
  }
  SUBCASE("lexicon-constrained output") {
    const ToySetup toy = MakeToySetup();
    std::mt19937_64 rng(7);
    for (int i = 0; i < 30; ++i) {
      const auto y = RandomPosteriorgram(rng, 6, 4);
      BeamOptions opts;
      opts.beam_width = 32;
      for (const auto& h : PrefixBeamSearch(y, opts, &toy.lexicon, &toy.lm)) {
        std::vector<int> concat;
        // Some pronunciation sequence of the words must spell the units.
        std::function<bool(std::size_t, std::size_t)> spells = [&](std::size_t wi,
                                                                    std::size_t ui) {
          if (wi == h.words.size()) return ui == h.units.size();
          for (const auto& p : toy.lexicon.prons()) {
            if (p.word != h.words[wi]) continue;
            if (ui + p.units.size() > h.units.size()) continue;
            if (std::equal(p.units.begin(), p.units.end(), h.units.begin() + ui) &&
                spells(wi + 1, ui + p.units.size()))
              return true;
          }
          return false;
        };
        CHECK(spells(0, 0));
      }
    }
  }
}

TEST_CASE("token transducer equals collapse") {
  const int K = 3;
  const Fst tok = BuildTokenFst(K);
  tok.Validate();
  auto r = Transduce(tok, std::vector<int>{0, 1, 1, 0});
  REQUIRE(r.has_value());
  CHECK(r->olabels == std::vector<int>{1});
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const int T = 1 + static_cast<int>(rng() % 10);
    std::vector<int> s(T);
    for (auto& v : s) v = static_cast<int>(rng() % (K + 1));
    auto out = Transduce(tok, s);
    REQUIRE(out.has_value());
    CHECK(out->olabels == ctc::Collapse(s));
    CHECK(out->cost == 0.0);
  }
}

TEST_CASE("lexicon and grammar transducers") {
  LabelAlphabet alpha({"a"});
  Lexicon lex;
  lex.Add("a", {1});
  const Fst L = BuildLexiconFst(lex, 1);
  L.Validate();
  auto r = Transduce(L, std::vector<int>{1});
  REQUIRE(r.has_value());
  CHECK(r->olabels == std::vector<int>{0});
  CHECK(lex.words().Word(r->olabels[0]) == "a");

  NGramModel uni;
  uni.Set({"<s>"}, -99.0);
  uni.Set({"</s>"}, 0.0);
  uni.Set({"a"}, 0.0);
  const Fst G = BuildGrammarFst(uni, lex.words());
  G.Validate();
  bool found = false;
  for (const auto& arc : G.Arcs(G.Start()))
    if (arc.ilabel == 0) {
      found = true;
      CHECK(arc.weight == 0.0);
    }
  CHECK(found);
}

TEST_CASE("grammar scores equal an independent ARPA evaluation") {
  const ToySetup toy = MakeToySetup();
  const Fst G = BuildGrammarFst(toy.lm, toy.lexicon.words());
  G.Validate();
  std::mt19937_64 rng(9);
  const std::vector<std::string> vocab{"x", "y", "z"};
  for (int i = 0; i < 100; ++i) {
    const int n = static_cast<int>(rng() % 6);
    std::vector<std::string> sent;
    for (int k = 0; k < n; ++k) sent.push_back(vocab[rng() % 3]);
    // Linear acceptor of the sentence, composed with G.
    Fst S(WordSpace(toy.lexicon.words()), WordSpace(toy.lexicon.words()));
    int s = S.AddState();
    S.SetStart(s);
    for (const auto& w : sent) {
      const int nx = S.AddState();
      const int id = toy.lexicon.words().Find(w);
      S.AddArc(s, {id, id, 0.0, nx});
      s = nx;
    }
    S.SetFinal(s, 0.0);
    const double g_cost = ShortestPathWeight(Compose(S, G));
    const double oracle = -std::numbers::ln10 * ReferenceArpaScore(sent);
    CHECK(RelErr(g_cost, oracle) < 1e-12);
    CHECK(RelErr(toy.lm.ScoreSentence(sent), ReferenceArpaScore(sent)) < 1e-12);
  }
}

TEST_CASE("arpa parsing") {
  const ToySetup toy = MakeToySetup();
  std::ostringstream os;
  toy.lm.WriteArpa(os);
  std::istringstream is(os.str());
  const NGramModel again = NGramModel::ParseArpa(is);
  CHECK(again.order() == 3);
  for (const auto& [ids, e] : toy.lm.grams()) {
    std::vector<int> mapped;
    for (int id : ids) mapped.push_back(again.Id(toy.lm.vocab()[id]));
    const auto* f = again.Find(mapped);
    REQUIRE(f != nullptr);
    CHECK(f->log10_prob == e.log10_prob);
    CHECK(f->log10_backoff == e.log10_backoff);
  }
  std::istringstream bad("\\data\\\nngram 1=2\n\n\\1-grams:\n-1.0\t<s>\n\\end\\\n");
  CHECK_THROWS_AS(NGramModel::ParseArpa(bad), Error);
  std::istringstream truncated("\\data\\\nngram 1=1\n\n\\1-grams:\n-1.0\t<s>\n");
  CHECK_THROWS_AS(NGramModel::ParseArpa(truncated), Error);
}

TEST_CASE("composition") {
  const ToySetup toy = MakeToySetup();
  const Fst T = BuildTokenFst(3);
  const Fst L = BuildLexiconFst(toy.lexicon, 3);
  const Fst G = BuildGrammarFst(toy.lm, toy.lexicon.words());

  SUBCASE("identity acceptor preserves shortest-path weight") {
    const Fst GI = Compose(G, BuildIdentityFst(G.output_space()));
    CHECK(ShortestPathWeight(GI) == doctest::Approx(ShortestPathWeight(Compose(BuildIdentityFst(G.input_space()), G))));
    const Fst LI = Compose(L, BuildIdentityFst(L.output_space()));
    CHECK(ShortestPathWeight(LI) == ShortestPathWeight(L));
  }
  SUBCASE("alphabet mismatch") {
    try {
      Compose(T, G);
      FAIL("expected AlphabetMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kAlphabetMismatch);
    }
  }
  SUBCASE("T o L maps frame strings to words") {
    const Fst TL = Compose(T, L);
    auto r = Transduce(TL, std::vector<int>{0, 2, 2, 0, 3, 3});  // y = (2,3)
    REQUIRE(r.has_value());
    REQUIRE(r->olabels.size() == 1);
    CHECK(toy.lexicon.words().Word(r->olabels[0]) == "y");
    r = Transduce(TL, std::vector<int>{1, 0, 3});  // x z
    REQUIRE(r.has_value());
    REQUIRE(r->olabels.size() == 2);
    CHECK(toy.lexicon.words().Word(r->olabels[0]) == "x");
    CHECK(toy.lexicon.words().Word(r->olabels[1]) == "z");
    CHECK_FALSE(Transduce(TL, std::vector<int>{2}).has_value());  // no word is (2)
  }
  SUBCASE("best(a o b) >= best(a) + best(b)") {
    const Fst LG = Compose(L, G);
    CHECK(ShortestPathWeight(LG) >= ShortestPathWeight(L) + ShortestPathWeight(G) - 1e-12);
    const Fst TLG = Compose(T, LG);
    CHECK(ShortestPathWeight(TLG) >= ShortestPathWeight(T) + ShortestPathWeight(LG) - 1e-12);
  }
}

TEST_CASE("viterbi decoding") {
  const ToySetup toy = MakeToySetup();
  const Fst T = BuildTokenFst(3);
  const Fst L = BuildLexiconFst(toy.lexicon, 3);
  const Fst G = BuildGrammarFst(toy.lm, toy.lexicon.words());
  const Fst LG = Compose(L, G);
  LazyCompose<Fst, Fst> TLG(T, LG);

  SUBCASE("single word from deterministic posteriors") {
    Lexicon lex;
    lex.Add("only", {1});
    NGramModel uni;
    uni.Set({"<s>"}, -99.0);
    uni.Set({"</s>"}, 0.0);
    uni.Set({"only"}, 0.0);
    const Fst t1 = BuildTokenFst(1);
    const Fst lg1 = Compose(BuildLexiconFst(lex, 1), BuildGrammarFst(uni, lex.words()));
    const Hypothesis h = ViterbiDecode(Compose(t1, lg1), OneHot({0, 1, 1, 0}, 2));
    REQUIRE(h.words.size() == 1);
    CHECK(lex.words().Word(h.words[0]) == "only");
    CHECK(h.score == doctest::Approx(0.0));
  }
  SUBCASE("equals brute-force search over frame strings and word sequences") {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 40; ++i) {
      const int Tn = 1 + static_cast<int>(rng() % 5);
      const auto y = RandomPosteriorgram(rng, Tn, 4, 1.5);
      const double scale = 0.5 + (rng() % 4) * 0.25;
      const auto oracle = BruteForceWordSearch(toy, y, scale);
      const Hypothesis h = ViterbiDecode(TLG, y, scale);
      CHECK(RelErr(-h.score, oracle.cost) < 1e-10);
      std::vector<std::string> words;
      for (int w : h.words) words.push_back(toy.lexicon.words().Word(w));
      // The argmin is unique almost surely with random posteriors.
      CHECK(words == oracle.words);
    }
  }
  SUBCASE("per-frame scaling leaves the argmin unchanged") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
      const auto y = RandomPosteriorgram(rng, 5, 4);
      Matrix scaled = y.probs;
      for (int t = 0; t < 5; ++t) scaled.row(t) *= 0.1 + (rng() % 10) * 0.3;
      CHECK(ViterbiDecode(TLG, y).words == ViterbiDecode(TLG, Posteriorgram(scaled)).words);
    }
  }
  SUBCASE("no complete path") {
    // Only word needs (1); posteriors forbid label 1 everywhere.
    Lexicon lex;
    lex.Add("only", {1});
    NGramModel uni;
    uni.Set({"<s>"}, -99.0);
    uni.Set({"</s>"}, -99.0);
    uni.Set({"only"}, 0.0);
    Matrix m = Matrix::Zero(3, 2);
    m.col(0).setOnes();
    const Fst g = Compose(BuildTokenFst(1), Compose(BuildLexiconFst(lex, 1),
                                                    BuildGrammarFst(uni, lex.words())));
    // </s> right after <s> is allowed (-99), so the empty sentence survives.
    CHECK(ViterbiDecode(g, Posteriorgram(m)).words.empty());
    Fst g2 = BuildTokenFst(1);
    Fst acc(UnitSpace(1), UnitSpace(1));
    acc.AddState();
    acc.AddState();
    acc.SetStart(0);
    acc.SetFinal(1, 0.0);
    acc.AddArc(0, {1, 1, 0.0, 1});
    try {
      ViterbiDecode(Compose(g2, acc), Posteriorgram(m));
      FAIL("expected NoPathFound");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNoPathFound);
    }
  }
}

namespace {

// Plain recursive Levenshtein distance, memoized.
int RecursiveDistance(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<std::size_t, std::size_t>, int> memo;
  std::function<int(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> int {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const int v = std::min({go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1), go(i + 1, j) + 1,
                            go(i, j + 1) + 1});
    memo[key] = v;
    return v;
  };
  return go(0, 0);
}

}  // namespace

TEST_CASE("edit distance metrics") {
  using V = std::vector<std::string>;
  auto c = EditDistanceMetrics(V{"the", "speech"}, V{"the", "speech"});
  CHECK(c.ErrorRate() == 0.0);
  CHECK(c.Accuracy() == 100.0);
  c = EditDistanceMetrics(V{"the", "speech"}, V{"the", "peach"});
  CHECK(c.substitutions == 1);
  CHECK(c.ErrorRate() == doctest::Approx(0.5));
  c = EditDistanceMetrics(V{"a"}, V{"b", "c", "d"});
  CHECK(c.errors() == 3);
  CHECK(c.Accuracy() == doctest::Approx(-200.0));
  try {
    EditDistanceMetrics(V{}, V{"a"});
    FAIL("expected EmptyReference");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyReference);
  }

  std::mt19937_64 rng(12);
  auto rand_seq = [&] {
    std::vector<int> s(rng() % 9);
    for (auto& v : s) v = static_cast<int>(rng() % 4);
    return s;
  };
  for (int i = 0; i < 500; ++i) {
    const auto a = rand_seq(), b = rand_seq(), d = rand_seq();
    const auto ab = EditDistance(a, b);
    CHECK(ab.errors() == RecursiveDistance(a, b));
    CHECK(ab.ref_length == static_cast<int>(a.size()));
    CHECK(static_cast<int>(b.size()) == ab.ref_length - ab.deletions + ab.insertions);
    CHECK(EditDistance(b, a).errors() == ab.errors());
    CHECK(ab.errors() <= EditDistance(a, d).errors() + EditDistance(d, b).errors());
    if (a.size() == b.size() && ab.deletions == 0 && ab.insertions == 0)
      CHECK(EditDistance(b, a).substitutions == ab.substitutions);
  }
}
