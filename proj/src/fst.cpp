// src/fst.cpp

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

#include "ctcfuse/fst.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ctcfuse/log.hpp"

namespace ctcfuse::decode {

std::string SymbolSpace::ToString() const {
  return kind + "[" + std::to_string(size) + "]";
}

SymbolSpace FrameSpace(int num_units) { return {"frames", num_units + 1, 0}; }
SymbolSpace UnitSpace(int num_units) { return {"units", num_units, 0}; }

SymbolSpace WordSpace(const WordTable& words) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& w : words.words()) {
    for (unsigned char c : w) h = (h ^ c) * 1099511628211ULL;
    h = (h ^ 0xFFu) * 1099511628211ULL;
  }
  return {"words", words.size(), h};
}

namespace {

// First valid label of a space; frames and words are 0-based, units 1-based.
int FirstLabel(const SymbolSpace& s) { return s.kind == "units" ? 1 : 0; }

bool LabelInSpace(int label, const SymbolSpace& s) {
  const int lo = FirstLabel(s);
  return label >= lo && label < lo + s.size;
}

}  // namespace

int Fst::AddState() {
  arcs_.emplace_back();
  final_.push_back(kInfinity);
  return NumStates() - 1;
}

void Fst::SetStart(int s) {
  if (s < 0 || s >= NumStates()) Fail(ErrorKind::kInvalidArgument, "start state out of range");
  start_ = s;
}

void Fst::SetFinal(int s, double weight) { final_.at(s) = weight; }

void Fst::AddArc(int s, Arc arc) {
  if (arc.next < 0 || arc.next >= NumStates() || s < 0 || s >= NumStates())
    Fail(ErrorKind::kInvalidArgument, "arc endpoint out of range");
  arcs_[s].push_back(arc);
}

std::size_t Fst::NumArcs() const {
  std::size_t n = 0;
  for (const auto& a : arcs_) n += a.size();
  return n;
}

void Fst::Validate() const {
  if (start_ < 0) Fail(ErrorKind::kInvalidArgument, "transducer has no start state");
  if (std::none_of(final_.begin(), final_.end(), [](double w) { return w < kInfinity; }))
    Fail(ErrorKind::kInvalidArgument, "transducer has no final state");
  for (const auto& arcs : arcs_) {
    for (const Arc& a : arcs) {
      if (!std::isfinite(a.weight))
        Fail(ErrorKind::kInvalidArgument, "non-finite arc weight");
      if (a.ilabel != kEpsilon && a.ilabel != kPhi && !LabelInSpace(a.ilabel, in_))
        Fail(ErrorKind::kInvalidArgument, "input label outside " + in_.ToString());
      if (a.olabel != kEpsilon && !LabelInSpace(a.olabel, out_))
        Fail(ErrorKind::kInvalidArgument, "output label outside " + out_.ToString());
    }
  }
}

Fst BuildTokenFst(int num_units) {
  if (num_units < 1) Fail(ErrorKind::kInvalidArgument, "alphabet must have units");
  // State 0: nothing pending (start, or after a blank). State k: unit k was
  // the last frame label, so a repeat of k emits nothing.
  Fst f(FrameSpace(num_units), UnitSpace(num_units));
  for (int s = 0; s <= num_units; ++s) {
    f.AddState();
    f.SetFinal(s, 0.0);
  }
  f.SetStart(0);
  for (int s = 0; s <= num_units; ++s) {
    f.AddArc(s, {kBlank, kEpsilon, 0.0, 0});
    for (int k = 1; k <= num_units; ++k) {
      if (k == s)
        f.AddArc(s, {k, kEpsilon, 0.0, k});
      else
        f.AddArc(s, {k, k, 0.0, k});
    }
  }
  return f;
}

Fst BuildLexiconFst(const Lexicon& lex, int num_units) {
  lex.Validate(num_units);
  Fst f(UnitSpace(num_units), WordSpace(lex.words()));
  const int root = f.AddState();
  f.SetStart(root);
  f.SetFinal(root, 0.0);
  for (const auto& p : lex.prons()) {
    int s = root;
    for (std::size_t i = 0; i < p.units.size(); ++i) {
      const bool last = i + 1 == p.units.size();
      const int next = last ? root : f.AddState();
      f.AddArc(s, {p.units[i], i == 0 ? p.word : kEpsilon, 0.0, next});
      s = next;
    }
  }
  return f;
}

Fst BuildGrammarFst(const NGramModel& lm, const WordTable& words) {
  lm.Validate();
  const double ln10 = std::numbers::ln10;
  const int bos = lm.Id(kSentenceStart);
  const int eos = lm.Id(kSentenceEnd);

  std::vector<int> to_word(lm.vocab().size(), -1);
  for (std::size_t i = 0; i < lm.vocab().size(); ++i) {
    const int id = static_cast<int>(i);
    if (id == bos || id == eos) continue;
    to_word[i] = words.Find(lm.vocab()[i]);
    if (to_word[i] < 0)
      spdlog::warn("grammar: LM word '{}' is not in the lexicon; dropped", lm.vocab()[i]);
  }

  Fst f(WordSpace(words), WordSpace(words));
  std::map<std::vector<int>, int> state_of;
  auto ensure = [&](const std::vector<int>& h) {
    auto [it, inserted] = state_of.emplace(h, 0);
    if (inserted) it->second = f.AddState();
    return it->second;
  };
  ensure({});
  for (const auto& [ids, e] : lm.grams()) {
    if (static_cast<int>(ids.size()) < lm.order() && ids.back() != eos) ensure(ids);
  }
  auto longest_context = [&](std::vector<int> h) {
    if (static_cast<int>(h.size()) > lm.order() - 1)
      h.erase(h.begin(), h.end() - (lm.order() - 1));
    while (!state_of.count(h)) h.erase(h.begin());
    return state_of.at(h);
  };

  for (const auto& [ids, e] : lm.grams()) {
    const int w = ids.back();
    if (w == bos || w == eos || to_word[w] < 0) continue;
    const std::vector<int> hist(ids.begin(), ids.end() - 1);
    auto it = state_of.find(hist);
    if (it == state_of.end()) continue;
    f.AddArc(it->second, {to_word[w], to_word[w], -ln10 * e.log10_prob, longest_context(ids)});
  }
  for (const auto& [hist, s] : state_of) {
    if (!hist.empty()) {
      const auto* e = lm.Find(hist);
      const double bo = e ? e->log10_backoff : 0.0;
      f.AddArc(s, {kPhi, kEpsilon, -ln10 * bo,
                   longest_context(std::vector<int>(hist.begin() + 1, hist.end()))});
    }
    const double end = lm.Log10Prob(hist, eos);
    f.SetFinal(s, end == kLogZero ? kInfinity : -ln10 * end);
  }
  f.SetStart(longest_context({bos}));
  return f;
}

Fst BuildIdentityFst(const SymbolSpace& space) {
  Fst f(space, space);
  f.AddState();
  f.SetStart(0);
  f.SetFinal(0, 0.0);
  const int lo = FirstLabel(space);
  for (int l = lo; l < lo + space.size; ++l) f.AddArc(0, {l, l, 0.0, 0});
  return f;
}

Fst Compose(const Fst& a, const Fst& b) {
  LazyCompose<Fst, Fst> lazy(a, b);
  return Expand(lazy);
}

std::optional<ViterbiResult> Transduce(const Fst& g, std::span<const int> input) {
  try {
    return ViterbiSearch(g, static_cast<int>(input.size()), [&](int t, int l) {
      return l == input[t] ? 0.0 : kInfinity;
    });
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kNoPathFound) return std::nullopt;
    throw;
  }
}

double ShortestPathWeight(const Fst& g) {
  if (g.Start() < 0) return kInfinity;
  std::vector<double> dist(g.NumStates(), kInfinity);
  dist[g.Start()] = 0.0;
  for (int iter = 0; iter < g.NumStates(); ++iter) {
    bool changed = false;
    for (int s = 0; s < g.NumStates(); ++s) {
      if (dist[s] == kInfinity) continue;
      for (const Arc& a : g.Arcs(s)) {
        if (dist[s] + a.weight < dist[a.next]) {
          dist[a.next] = dist[s] + a.weight;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  double best = kInfinity;
  for (int s = 0; s < g.NumStates(); ++s) best = std::min(best, dist[s] + g.Final(s));
  return best;
}

}  // namespace ctcfuse::decode
