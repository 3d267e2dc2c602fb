// src/decode.cpp

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

#include "ctcfuse/decode.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "ctcfuse/ctc.hpp"

namespace ctcfuse::decode {

std::vector<int> BestPath(const Posteriorgram& y) {
  std::vector<int> path(y.num_frames());
  for (int t = 0; t < y.num_frames(); ++t) {
    int best = 0;
    for (int k = 1; k < y.output_dim(); ++k)
      if (y.probs(t, k) > y.probs(t, best)) best = k;
    path[t] = best;
  }
  return path;
}

std::vector<int> GreedyDecode(const Posteriorgram& y) {
  return ctc::Collapse(BestPath(y));
}

double BestPathLogProb(const Posteriorgram& y) {
  double s = 0.0;
  const auto path = BestPath(y);
  for (int t = 0; t < y.num_frames(); ++t) s += std::log(y.probs(t, path[t]));
  return s;
}

namespace {

struct TrieNode {
  std::map<int, int> children;
  std::vector<int> words;  // words whose pronunciation ends here
};

std::vector<TrieNode> BuildTrie(const Lexicon& lex) {
  std::vector<TrieNode> nodes(1);
  for (const auto& p : lex.prons()) {
    int n = 0;
    for (int u : p.units) {
      auto it = nodes[n].children.find(u);
      if (it == nodes[n].children.end()) {
        nodes.emplace_back();
        it = nodes[n].children.emplace(u, static_cast<int>(nodes.size()) - 1).first;
      }
      n = it->second;
    }
    if (std::find(nodes[n].words.begin(), nodes[n].words.end(), p.word) ==
        nodes[n].words.end())
      nodes[n].words.push_back(p.word);
  }
  return nodes;
}

struct BeamKey {
  std::vector<int> units;
  std::vector<int> words;
  int node = 0;

  auto operator<=>(const BeamKey&) const = default;
};

struct BeamEntry {
  double pb = kLogZero;
  double pnb = kLogZero;
  double lm = 0.0;             // weighted natural-log LM score so far
  std::vector<int> lm_history;  // LM vocabulary ids, starting with <s>

  double prefix() const { return LogAdd(pb, pnb); }
  double score() const { return prefix() + lm; }
};

using Beam = std::map<BeamKey, BeamEntry>;

void Prune(Beam& beam, int width) {
  if (static_cast<int>(beam.size()) <= width) return;
  std::vector<std::pair<double, const BeamKey*>> order;
  order.reserve(beam.size());
  for (const auto& [k, e] : beam) order.emplace_back(e.score(), &k);
  // std::map iteration is already lexicographic, so a stable sort on score
  // alone gives the lexicographic tie-break.
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  Beam kept;
  for (int i = 0; i < width; ++i) {
    auto node = beam.extract(*order[i].second);
    kept.insert(std::move(node));
  }
  beam = std::move(kept);
}

}  // namespace

std::vector<Hypothesis> PrefixBeamSearch(const Posteriorgram& y,
                                         const BeamOptions& opts,
                                         const Lexicon* lexicon,
                                         const NGramModel* lm) {
  if (opts.beam_width < 1) Fail(ErrorKind::kInvalidArgument, "beam_width must be >= 1");
  if (lm && !lexicon)
    Fail(ErrorKind::kInvalidArgument, "language model decoding needs a lexicon");
  const int K = y.output_dim() - 1;
  const double ln10 = std::numbers::ln10;
  std::vector<TrieNode> trie;
  std::vector<int> word_to_lm;
  if (lexicon) {
    lexicon->Validate(K);
    trie = BuildTrie(*lexicon);
    if (lm) {
      for (const auto& w : lexicon->words().words()) word_to_lm.push_back(lm->Id(w));
    }
  }
  const Matrix logy = y.probs.array().log().matrix();

  Beam beam;
  {
    BeamEntry init;
    init.pb = 0.0;
    if (lm) init.lm_history = {lm->Id(kSentenceStart)};
    beam.emplace(BeamKey{}, std::move(init));
  }

  for (int t = 0; t < y.num_frames(); ++t) {
    Beam next;
    auto slot = [&](const BeamKey& key, const BeamEntry& parent) -> BeamEntry& {
      auto [it, inserted] = next.try_emplace(key);
      if (inserted) {
        it->second.lm = parent.lm;
        it->second.lm_history = parent.lm_history;
      }
      return it->second;
    };
    for (const auto& [key, e] : beam) {
      const double total = e.prefix();
      BeamEntry& same = slot(key, e);
      same.pb = LogAdd(same.pb, total + logy(t, kBlank));
      const int last = key.units.empty() ? -1 : key.units.back();
      if (last > 0) same.pnb = LogAdd(same.pnb, e.pnb + logy(t, last));

      for (int c = 1; c <= K; ++c) {
        const double ext = (c == last ? e.pb : total) + logy(t, c);
        if (ext == kLogZero) continue;
        BeamKey k2 = key;
        k2.units.push_back(c);
        if (!lexicon) {
          BeamEntry& dst = slot(k2, e);
          dst.pnb = LogAdd(dst.pnb, ext);
          continue;
        }
        auto child = trie[key.node].children.find(c);
        if (child == trie[key.node].children.end()) continue;
        const TrieNode& node = trie[child->second];
        if (!node.children.empty()) {
          k2.node = child->second;
          BeamEntry& dst = slot(k2, e);
          dst.pnb = LogAdd(dst.pnb, ext);
        }
        for (int w : node.words) {
          BeamKey k3 = key;
          k3.units.push_back(c);
          k3.words.push_back(w);
          k3.node = 0;
          BeamEntry parent = e;
          if (lm) {
            const int lw = word_to_lm[w];
            const double lp = lw < 0 ? kLogZero : lm->Log10Prob(e.lm_history, lw);
            if (lp == kLogZero) continue;
            parent.lm += opts.lm_weight * ln10 * lp;
            parent.lm_history.push_back(lw);
          }
          BeamEntry& dst = slot(k3, parent);
          dst.pnb = LogAdd(dst.pnb, ext);
        }
      }
    }
    std::erase_if(next, [](const auto& kv) { return kv.second.prefix() == kLogZero; });
    beam = std::move(next);
    Prune(beam, opts.beam_width);
  }

  std::vector<std::pair<double, Hypothesis>> finals;
  for (const auto& [key, e] : beam) {
    if (lexicon && key.node != 0) continue;
    double score = e.score();
    if (lm) {
      const double lp = lm->Log10Prob(e.lm_history, lm->Id(kSentenceEnd));
      if (lp == kLogZero) continue;
      score += opts.lm_weight * ln10 * lp;
    }
    Hypothesis h;
    h.units = key.units;
    h.words = key.words;
    h.score = score;
    finals.emplace_back(score, std::move(h));
  }
  std::stable_sort(finals.begin(), finals.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Hypothesis> out;
  for (int i = 0; i < static_cast<int>(finals.size()) && i < std::max(opts.nbest, 1); ++i)
    out.push_back(std::move(finals[i].second));
  return out;
}

double ErrorCounts::ErrorRate() const {
  if (ref_length == 0) Fail(ErrorKind::kEmptyReference, "reference is empty");
  return static_cast<double>(errors()) / ref_length;
}

double ErrorCounts::Accuracy() const {
  if (ref_length == 0) Fail(ErrorKind::kEmptyReference, "reference is empty");
  return 100.0 * (ref_length - errors()) / ref_length;
}

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  ref_length += o.ref_length;
  return *this;
}

template <typename T>
ErrorCounts EditDistance(const std::vector<T>& ref, const std::vector<T>& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                          d[i - 1][j] + 1, d[i][j - 1] + 1});
  ErrorCounts c;
  c.ref_length = static_cast<int>(n);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++c.substitutions;
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

template ErrorCounts EditDistance(const std::vector<int>&, const std::vector<int>&);
template ErrorCounts EditDistance(const std::vector<std::string>&,
                                  const std::vector<std::string>&);

}  // namespace ctcfuse::decode
