// src/lm.cpp

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

#include "ctcfuse/lm.hpp"

#include <spdlog/fmt/fmt.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ctcfuse/error.hpp"

namespace ctcfuse::decode {

int WordTable::Add(const std::string& word) {
  auto [it, inserted] = index_.emplace(word, static_cast<int>(words_.size()));
  if (inserted) words_.push_back(word);
  return it->second;
}

int WordTable::Find(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? -1 : it->second;
}

void Lexicon::Add(const std::string& word, std::vector<int> units) {
  if (units.empty())
    Fail(ErrorKind::kInvalidArgument, "empty pronunciation for '" + word + "'");
  prons_.push_back({words_.Add(word), std::move(units)});
}

void Lexicon::Validate(int num_units) const {
  if (prons_.empty()) Fail(ErrorKind::kInvalidArgument, "lexicon has no entries");
  for (const auto& p : prons_)
    for (int u : p.units)
      if (u < 1 || u > num_units)
        Fail(ErrorKind::kInvalidArgument,
             "pronunciation of '" + words_.Word(p.word) + "' uses unit id " +
                 std::to_string(u));
}

Lexicon Lexicon::Parse(std::istream& is, const LabelAlphabet& alphabet,
                       const std::string& source) {
  Lexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string word, unit;
    if (!(ss >> word)) continue;
    std::vector<int> units;
    while (ss >> unit) {
      const int id = alphabet.id(unit);
      if (id < 1)
        Fail(ErrorKind::kParseError, source + ":" + std::to_string(lineno) +
                                         ": unknown unit '" + unit + "'");
      units.push_back(id);
    }
    if (units.empty())
      Fail(ErrorKind::kParseError,
           source + ":" + std::to_string(lineno) + ": word without pronunciation");
    lex.Add(word, std::move(units));
  }
  if (lex.prons_.empty()) Fail(ErrorKind::kParseError, source + ": empty lexicon");
  return lex;
}

Lexicon Lexicon::Load(const std::string& path, const LabelAlphabet& alphabet) {
  std::ifstream is(path);
  if (!is) Fail(ErrorKind::kIoError, "cannot open " + path);
  return Parse(is, alphabet, path);
}

void Lexicon::Write(std::ostream& os, const LabelAlphabet& alphabet) const {
  for (const auto& p : prons_) {
    os << words_.Word(p.word);
    for (int u : p.units) os << ' ' << alphabet.name(u);
    os << '\n';
  }
}

int NGramModel::Id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? -1 : it->second;
}

int NGramModel::Intern(const std::string& w) {
  auto [it, inserted] = index_.emplace(w, static_cast<int>(vocab_.size()));
  if (inserted) vocab_.push_back(w);
  return it->second;
}

void NGramModel::Set(const std::vector<std::string>& ngram, double log10_prob,
                     double log10_backoff) {
  if (ngram.empty()) Fail(ErrorKind::kInvalidArgument, "empty n-gram");
  std::vector<int> ids;
  ids.reserve(ngram.size());
  for (const auto& w : ngram) ids.push_back(Intern(w));
  order_ = std::max(order_, static_cast<int>(ids.size()));
  grams_[ids] = Entry{log10_prob, log10_backoff};
}

const NGramModel::Entry* NGramModel::Find(const std::vector<int>& ngram) const {
  auto it = grams_.find(ngram);
  return it == grams_.end() ? nullptr : &it->second;
}

double NGramModel::Log10Prob(std::vector<int> history, int word) const {
  if (static_cast<int>(history.size()) > order_ - 1)
    history.erase(history.begin(), history.end() - (order_ - 1));
  double acc = 0.0;
  while (true) {
    std::vector<int> key = history;
    key.push_back(word);
    if (const Entry* e = Find(key)) return acc + e->log10_prob;
    if (history.empty()) return kLogZero;
    if (const Entry* h = Find(history)) acc += h->log10_backoff;
    history.erase(history.begin());
  }
}

double NGramModel::ScoreSentence(const std::vector<std::string>& words) const {
  std::vector<int> ids{Id(kSentenceStart)};
  for (const auto& w : words) ids.push_back(Id(w));
  ids.push_back(Id(kSentenceEnd));
  double total = 0.0;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] < 0) return kLogZero;
    const std::size_t from = i >= static_cast<std::size_t>(order_) ? i - order_ + 1 : 0;
    total += Log10Prob(std::vector<int>(ids.begin() + from, ids.begin() + i), ids[i]);
  }
  return total;
}

void NGramModel::Validate() const {
  if (order_ < 1) Fail(ErrorKind::kInvalidArgument, "language model has no n-grams");
  if (Id(kSentenceStart) < 0 || Id(kSentenceEnd) < 0)
    Fail(ErrorKind::kInvalidArgument, "language model lacks <s> or </s>");
  for (const auto& [ids, e] : grams_) {
    if (!(e.log10_prob <= 0.0))
      Fail(ErrorKind::kInvalidArgument, "positive log10 probability in n-gram");
    if (ids.size() > 1) {
      const std::vector<int> hist(ids.begin(), ids.end() - 1);
      if (!Find(hist))
        Fail(ErrorKind::kInvalidArgument, "n-gram history missing as lower order entry");
    }
  }
}

namespace {

double ParseDouble(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    Fail(ErrorKind::kParseError, where + ": bad number '" + s + "'");
  return v;
}

}  // namespace

NGramModel NGramModel::ParseArpa(std::istream& is, const std::string& source) {
  NGramModel lm;
  std::map<int, long> declared;
  std::map<int, long> seen;
  std::string line;
  int lineno = 0;
  int section = -1;  // -1 before \data\, 0 in \data\, n in \n-grams:
  bool ended = false;
  auto where = [&] { return source + ":" + std::to_string(lineno); };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "\\data\\") {
      section = 0;
      continue;
    }
    if (tok[0] == "\\end\\") {
      ended = true;
      break;
    }
    if (tok[0].size() > 2 && tok[0].front() == '\\' && tok[0].ends_with("-grams:")) {
      const std::string n = tok[0].substr(1, tok[0].size() - 1 - 7);
      section = static_cast<int>(ParseDouble(n, where()));
      if (!declared.count(section))
        Fail(ErrorKind::kParseError, where() + ": undeclared section " + tok[0]);
      continue;
    }
    if (section < 0) continue;  // header text before \data\ is ignored
    if (section == 0) {
      if (tok[0] != "ngram" || tok.size() < 2)
        Fail(ErrorKind::kParseError, where() + ": expected 'ngram N=count'");
      std::string spec = tok[1];
      for (std::size_t i = 2; i < tok.size(); ++i) spec += tok[i];
      const auto eq = spec.find('=');
      if (eq == std::string::npos)
        Fail(ErrorKind::kParseError, where() + ": expected 'ngram N=count'");
      const int n = static_cast<int>(ParseDouble(spec.substr(0, eq), where()));
      declared[n] = static_cast<long>(ParseDouble(spec.substr(eq + 1), where()));
      continue;
    }
    const int n = section;
    if (static_cast<int>(tok.size()) != n + 1 && static_cast<int>(tok.size()) != n + 2)
      Fail(ErrorKind::kParseError,
           where() + ": expected " + std::to_string(n + 1) + " or " +
               std::to_string(n + 2) + " fields");
    const double prob = ParseDouble(tok[0], where());
    const double bow =
        static_cast<int>(tok.size()) == n + 2 ? ParseDouble(tok.back(), where()) : 0.0;
    std::vector<std::string> words(tok.begin() + 1, tok.begin() + 1 + n);
    lm.Set(words, prob, bow);
    ++seen[n];
  }
  if (!ended) Fail(ErrorKind::kParseError, source + ": missing \\end\\");
  for (const auto& [n, count] : declared)
    if (seen[n] != count)
      Fail(ErrorKind::kParseError,
           source + ": declared " + std::to_string(count) + " " + std::to_string(n) +
               "-grams, found " + std::to_string(seen[n]));
  try {
    lm.Validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kParseError, source + ": " + e.what());
  }
  return lm;
}

NGramModel NGramModel::LoadArpa(const std::string& path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorKind::kIoError, "cannot open " + path);
  return ParseArpa(is, path);
}

void NGramModel::WriteArpa(std::ostream& os) const {
  std::map<int, long> counts;
  for (const auto& [ids, e] : grams_) ++counts[static_cast<int>(ids.size())];
  os << "\\data\\\n";
  for (const auto& [n, c] : counts) os << "ngram " << n << "=" << c << "\n";
  for (const auto& [n, c] : counts) {
    os << "\n\\" << n << "-grams:\n";
    for (const auto& [ids, e] : grams_) {
      if (static_cast<int>(ids.size()) != n) continue;
      os << fmt::format("{}", e.log10_prob);
      for (int id : ids) os << '\t' << vocab_[id];
      if (e.log10_backoff != 0.0) os << '\t' << fmt::format("{}", e.log10_backoff);
      os << '\n';
    }
  }
  os << "\n\\end\\\n";
}

}  // namespace ctcfuse::decode
