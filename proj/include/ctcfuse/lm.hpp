// include/ctcfuse/lm.hpp

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

#ifndef CTCFUSE_LM_HPP_
#define CTCFUSE_LM_HPP_

#include <istream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctcfuse/types.hpp"

namespace ctcfuse::decode {

inline constexpr const char* kSentenceStart = "<s>";
inline constexpr const char* kSentenceEnd = "</s>";

/// Dense word ids shared by the lexicon and grammar transducers.
class WordTable {
 public:
  int Add(const std::string& word);
  /// -1 when absent.
  int Find(const std::string& word) const;
  const std::string& Word(int id) const { return words_.at(id); }
  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

struct Pronunciation {
  int word = 0;                // WordTable id
  std::vector<int> units;      // output indices in [1, K]
};

/// Word -> one or more non-empty unit sequences.
class Lexicon {
 public:
  void Add(const std::string& word, std::vector<int> units);
  const WordTable& words() const { return words_; }
  const std::vector<Pronunciation>& prons() const { return prons_; }
  /// Throws InvalidArgument unless non-empty and every unit is in [1, K].
  void Validate(int num_units) const;

  /// One line per pronunciation: `WORD unit1 unit2 ...`. Unit names are
  /// resolved through `alphabet`; unknown names raise ParseError.
  static Lexicon Parse(std::istream& is, const LabelAlphabet& alphabet,
                       const std::string& source = "<lexicon>");
  static Lexicon Load(const std::string& path, const LabelAlphabet& alphabet);
  void Write(std::ostream& os, const LabelAlphabet& alphabet) const;

 private:
  WordTable words_;
  std::vector<Pronunciation> prons_;
};

/// Back-off n-gram model with ARPA semantics (log10 probabilities).
class NGramModel {
 public:
  struct Entry {
    double log10_prob = 0.0;
    double log10_backoff = 0.0;
  };

  int order() const { return order_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  /// -1 when absent.
  int Id(const std::string& word) const;

  /// Adds or replaces an n-gram given as words (history..., word).
  void Set(const std::vector<std::string>& ngram, double log10_prob,
           double log10_backoff = 0.0);
  /// Entry of an n-gram of vocabulary ids, or nullptr.
  const Entry* Find(const std::vector<int>& ngram) const;
  /// All n-grams keyed by id tuple.
  const std::map<std::vector<int>, Entry>& grams() const { return grams_; }

  /// log10 P(word | history) with standard back-off. Only the last order-1
  /// history words are used. Words outside the unigram table give -inf.
  double Log10Prob(std::vector<int> history, int word) const;
  /// log10 P(</s> w_n ... w_1 | <s>) including the end-of-sentence term.
  double ScoreSentence(const std::vector<std::string>& words) const;

  /// Probabilities <= 0, every n-gram's history present as an (n-1)-gram,
  /// and <s>, </s> in the vocabulary.
  void Validate() const;

  static NGramModel ParseArpa(std::istream& is, const std::string& source = "<arpa>");
  static NGramModel LoadArpa(const std::string& path);
  void WriteArpa(std::ostream& os) const;

 private:
  int Intern(const std::string& w);

  int order_ = 0;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  std::map<std::vector<int>, Entry> grams_;
};

}  // namespace ctcfuse::decode

#endif  // CTCFUSE_LM_HPP_
