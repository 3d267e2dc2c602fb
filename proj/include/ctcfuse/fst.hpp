// include/ctcfuse/fst.hpp

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

// Weighted transducers over the tropical semiring (min, +) and the decoding
// graph built from them: token (frame labels -> units), lexicon (units ->
// words) and grammar (words -> words, n-gram weights).

#ifndef CTCFUSE_FST_HPP_
#define CTCFUSE_FST_HPP_

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctcfuse/error.hpp"
#include "ctcfuse/lm.hpp"
#include "ctcfuse/types.hpp"

namespace ctcfuse::decode {

inline constexpr int kEpsilon = -1;
/// Failure transition on the input side: taken only when the state has no arc
/// for the symbol being matched. Used for n-gram back-off so that the grammar
/// reproduces ARPA scores exactly.
inline constexpr int kPhi = -2;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Names the label space of one side of a transducer. Composition requires
/// a's output space to equal b's input space.
struct SymbolSpace {
  std::string kind;  // "frames", "units", "words"
  int size = 0;
  std::uint64_t digest = 0;  // word-list hash for "words"

  bool operator==(const SymbolSpace&) const = default;
  std::string ToString() const;
};

SymbolSpace FrameSpace(int num_units);
SymbolSpace UnitSpace(int num_units);
SymbolSpace WordSpace(const WordTable& words);

struct Arc {
  int ilabel = kEpsilon;
  int olabel = kEpsilon;
  double weight = 0.0;
  int next = 0;
};

/// Mutable, eagerly stored transducer.
class Fst {
 public:
  Fst() = default;
  Fst(SymbolSpace in, SymbolSpace out) : in_(std::move(in)), out_(std::move(out)) {}

  int AddState();
  void SetStart(int s);
  void SetFinal(int s, double weight);
  void AddArc(int s, Arc arc);

  int Start() const { return start_; }
  double Final(int s) const { return final_.at(s); }
  const std::vector<Arc>& Arcs(int s) const { return arcs_.at(s); }
  int NumStates() const { return static_cast<int>(arcs_.size()); }
  std::size_t NumArcs() const;
  const SymbolSpace& input_space() const { return in_; }
  const SymbolSpace& output_space() const { return out_; }

  /// Start exists, at least one final state, finite arc weights, labels
  /// within their spaces.
  void Validate() const;

 private:
  SymbolSpace in_, out_;
  int start_ = -1;
  std::vector<std::vector<Arc>> arcs_;
  std::vector<double> final_;
};

/// Accepts every frame-label string and outputs its CTC collapse.
Fst BuildTokenFst(int num_units);

/// Maps unit strings to word strings (one branch per pronunciation).
Fst BuildLexiconFst(const Lexicon& lex, int num_units);

/// N-gram acceptor over the lexicon's words with weights -ln p. Back-off is
/// encoded as kPhi arcs carrying -ln(backoff). LM words missing from `words`
/// are dropped with a warning.
Fst BuildGrammarFst(const NGramModel& lm, const WordTable& words);

/// Identity acceptor over `space` (one state, all labels, weight 0).
Fst BuildIdentityFst(const SymbolSpace& space);

/// On-demand composition with an epsilon-sequencing filter (a's output
/// epsilons before b's input epsilons) and failure transitions on b.
/// States are numbered in discovery order, so expansion is deterministic.
template <typename A, typename B>
class LazyCompose {
 public:
  LazyCompose(const A& a, const B& b) : a_(a), b_(b) {
    if (!(a.output_space() == b.input_space()))
      Fail(ErrorKind::kAlphabetMismatch, "cannot compose " +
                                             a.output_space().ToString() + " with " +
                                             b.input_space().ToString());
    start_ = a.Start() < 0 || b.Start() < 0 ? -1 : Intern({a.Start(), b.Start(), 0});
  }

  int Start() const { return start_; }
  double Final(int s) const {
    const auto& t = tuples_[s];
    return a_.Final(t[0]) + b_.Final(t[1]);
  }
  const std::vector<Arc>& Arcs(int s) const {
    while (static_cast<int>(arcs_.size()) <= s) arcs_.emplace_back(), expanded_.push_back(false);
    if (!expanded_[s]) Expand(s);
    return arcs_[s];
  }
  int NumDiscovered() const { return static_cast<int>(tuples_.size()); }
  const SymbolSpace& input_space() const { return a_.input_space(); }
  const SymbolSpace& output_space() const { return b_.output_space(); }

 private:
  using Tuple = std::array<int, 3>;

  int Intern(const Tuple& t) const {
    auto [it, inserted] = index_.emplace(t, static_cast<int>(tuples_.size()));
    if (inserted) tuples_.push_back(t);
    return it->second;
  }

  void Expand(int s) const {
    const Tuple t = tuples_[s];
    std::vector<Arc> out;
    for (const Arc& ea : a_.Arcs(t[0])) {
      if (ea.olabel == kEpsilon) {
        if (t[2] == 0) out.push_back({ea.ilabel, kEpsilon, ea.weight, Intern({ea.next, t[1], 0})});
        continue;
      }
      int q = t[1];
      double phi_weight = 0.0;
      while (true) {
        bool matched = false;
        const Arc* phi = nullptr;
        for (const Arc& eb : b_.Arcs(q)) {
          if (eb.ilabel == ea.olabel) {
            matched = true;
            out.push_back({ea.ilabel, eb.olabel, ea.weight + phi_weight + eb.weight,
                           Intern({ea.next, eb.next, 0})});
          } else if (eb.ilabel == kPhi) {
            phi = &eb;
          }
        }
        if (matched || !phi) break;
        phi_weight += phi->weight;
        q = phi->next;
      }
    }
    for (const Arc& eb : b_.Arcs(t[1])) {
      if (eb.ilabel == kEpsilon)
        out.push_back({kEpsilon, eb.olabel, eb.weight, Intern({t[0], eb.next, 1})});
    }
    // Intern may have grown tuples_ but never arcs_; safe to assign by index.
    while (static_cast<int>(arcs_.size()) <= s) arcs_.emplace_back(), expanded_.push_back(false);
    arcs_[s] = std::move(out);
    expanded_[s] = true;
  }

  const A& a_;
  const B& b_;
  int start_ = -1;
  mutable std::map<Tuple, int> index_;
  mutable std::vector<Tuple> tuples_;
  mutable std::deque<std::vector<Arc>> arcs_;
  mutable std::deque<bool> expanded_;
};

/// Materializes the part of any graph reachable from its start state.
template <typename G>
Fst Expand(const G& g) {
  Fst out(g.input_space(), g.output_space());
  if (g.Start() < 0) return out;
  std::map<int, int> ids;
  std::vector<int> queue{g.Start()};
  ids[g.Start()] = out.AddState();
  out.SetStart(0);
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const int s = queue[i];
    const int from = ids[s];
    out.SetFinal(from, g.Final(s));
    for (const Arc& arc : g.Arcs(s)) {
      auto [it, inserted] = ids.emplace(arc.next, 0);
      if (inserted) {
        it->second = out.AddState();
        queue.push_back(arc.next);
      }
      out.AddArc(from, {arc.ilabel, arc.olabel, arc.weight, it->second});
    }
  }
  return out;
}

/// Eager composition a o b, restricted to states reachable from the start.
/// Throws AlphabetMismatch when a's output space differs from b's input.
Fst Compose(const Fst& a, const Fst& b);

struct Hypothesis {
  std::vector<int> units;   // unit ids (unit-level decoders)
  std::vector<int> words;   // word ids (word-level decoders)
  double score = 0.0;       // log-domain total (higher is better)
};

/// Cost of consuming input label `label` at frame `t`; +inf forbids it.
using FrameCost = std::function<double(int t, int label)>;

struct ViterbiResult {
  std::vector<int> olabels;  // non-epsilon outputs along the best path
  double cost = kInfinity;   // total tropical weight
};

namespace internal {

struct Token {
  double cost = kInfinity;
  int trace = -1;
};

struct TraceEntry {
  int parent;
  int olabel;
};

template <typename G>
void EpsilonClosure(const G& g, std::map<int, Token>& tokens,
                    std::vector<TraceEntry>& traces) {
  std::deque<int> queue;
  std::map<int, bool> queued;
  for (const auto& [s, tok] : tokens) {
    queue.push_back(s);
    queued[s] = true;
  }
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    queued[s] = false;
    const Token tok = tokens[s];
    for (const Arc& arc : g.Arcs(s)) {
      if (arc.ilabel != kEpsilon) continue;
      const double c = tok.cost + arc.weight;
      auto& dst = tokens[arc.next];
      if (c < dst.cost) {
        int trace = tok.trace;
        if (arc.olabel != kEpsilon) {
          traces.push_back({trace, arc.olabel});
          trace = static_cast<int>(traces.size()) - 1;
        }
        dst = {c, trace};
        if (!queued[arc.next]) {
          queue.push_back(arc.next);
          queued[arc.next] = true;
        }
      }
    }
  }
}

}  // namespace internal

/// Best path through `g` consuming exactly `num_frames` non-epsilon input
/// labels, with input-epsilon arcs free to interleave. Tokens further than
/// `beam` above the frame's best are pruned (infinite beam = exact search).
/// Throws NoPathFound when no complete path exists.
template <typename G>
ViterbiResult ViterbiSearch(const G& g, int num_frames, const FrameCost& cost,
                            double beam = kInfinity) {
  using internal::Token;
  std::vector<internal::TraceEntry> traces;
  std::map<int, Token> tokens;
  if (g.Start() < 0) Fail(ErrorKind::kNoPathFound, "graph has no start state");
  tokens[g.Start()] = Token{0.0, -1};
  internal::EpsilonClosure(g, tokens, traces);
  for (int t = 0; t < num_frames; ++t) {
    std::map<int, Token> next;
    double best = kInfinity;
    for (const auto& [s, tok] : tokens) best = std::min(best, tok.cost);
    for (const auto& [s, tok] : tokens) {
      if (tok.cost == kInfinity || tok.cost > best + beam) continue;
      for (const Arc& arc : g.Arcs(s)) {
        if (arc.ilabel == kEpsilon || arc.ilabel == kPhi) continue;
        const double ac = cost(t, arc.ilabel);
        if (ac == kInfinity) continue;
        const double c = tok.cost + arc.weight + ac;
        auto& dst = next[arc.next];
        if (c < dst.cost) {
          int trace = tok.trace;
          if (arc.olabel != kEpsilon) {
            traces.push_back({trace, arc.olabel});
            trace = static_cast<int>(traces.size()) - 1;
          }
          dst = {c, trace};
        }
      }
    }
    internal::EpsilonClosure(g, next, traces);
    tokens = std::move(next);
    if (tokens.empty())
      Fail(ErrorKind::kNoPathFound, "no surviving path at frame " + std::to_string(t));
  }
  ViterbiResult res;
  int best_trace = -1;
  for (const auto& [s, tok] : tokens) {
    const double c = tok.cost + g.Final(s);
    if (c < res.cost) {
      res.cost = c;
      best_trace = tok.trace;
    }
  }
  if (res.cost == kInfinity) Fail(ErrorKind::kNoPathFound, "no path ends in a final state");
  for (int i = best_trace; i >= 0; i = traces[i].parent) res.olabels.push_back(traces[i].olabel);
  std::reverse(res.olabels.begin(), res.olabels.end());
  return res;
}

/// Viterbi decoding of a posteriorgram: consuming frame label l at frame t
/// costs -acoustic_scale * log y_t[l]. Returned score is minus the total cost;
/// `words` carries the graph's output labels.
template <typename G>
Hypothesis ViterbiDecode(const G& g, const Posteriorgram& y, double acoustic_scale = 1.0,
                         double beam = kInfinity) {
  if (!(acoustic_scale > 0.0))
    Fail(ErrorKind::kInvalidArgument, "acoustic_scale must be positive");
  if (g.input_space() != FrameSpace(y.output_dim() - 1))
    Fail(ErrorKind::kAlphabetMismatch, "graph input space " + g.input_space().ToString() +
                                           " does not match posteriorgram width");
  const Matrix logy = y.probs.array().log().matrix();
  auto res = ViterbiSearch(
      g, y.num_frames(),
      [&](int t, int l) {
        const double v = logy(t, l);
        return v == kLogZero ? kInfinity : -acoustic_scale * v;
      },
      beam);
  Hypothesis h;
  h.words = std::move(res.olabels);
  h.score = -res.cost;
  return h;
}

/// Best output string for a fixed input string, or nullopt if rejected.
std::optional<ViterbiResult> Transduce(const Fst& g, std::span<const int> input);

/// Shortest-distance weight from start to any final state (Bellman-Ford);
/// +inf if none.
double ShortestPathWeight(const Fst& g);

}  // namespace ctcfuse::decode

#endif  // CTCFUSE_FST_HPP_
