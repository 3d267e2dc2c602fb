// include/ctcfuse/corpus.hpp


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

#ifndef CTCFUSE_CORPUS_HPP_
#define CTCFUSE_CORPUS_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ctcfuse/lm.hpp"
#include "ctcfuse/types.hpp"

namespace ctcfuse::corpus {

inline constexpr const char* kSilence = "sil";

/// Total map from phoneme output ids (1..K) onto viseme output ids (1..V).
class VisemeMap {
 public:
  VisemeMap() = default;
  /// `pairs` lists (phoneme, viseme) names. Throws IncompleteMap unless
  /// every phoneme is mapped exactly once, and InvalidArgument for unknown
  /// phonemes.
  VisemeMap(const LabelAlphabet& phonemes, const std::vector<std::pair<std::string, std::string>>& pairs);

  const LabelAlphabet& phonemes() const { return phonemes_; }
  const LabelAlphabet& visemes() const { return visemes_; }
  int operator()(int phoneme_id) const { return table_.at(phoneme_id); }
  /// Element-wise image (no collapsing).
  LabelSequence Map(const LabelSequence& z) const;
  std::vector<std::pair<std::string, std::string>> Pairs() const;

 private:
  LabelAlphabet phonemes_;
  LabelAlphabet visemes_;
  std::vector<int> table_;  // index 0 (blank) maps to 0
};

/// Built-in 45-phoneme inventory and the 12-phoneme desk inventory.
const std::vector<std::string>& FullPhonemeSet();
const std::vector<std::string>& DeskPhonemeSet();
/// Phoneme inventory of the given size: the desk or full set, or generic
/// names for other sizes.
LabelAlphabet PhonemeAlphabet(int size);

/// The built-in grouping: 12 classes over the full set, 4 over the desk set,
/// and a proportional grouping (three phonemes per class, at most 12) for
/// generic inventories. Throws IncompleteMap if a phoneme has no entry.
VisemeMap DefaultVisemeMap(const LabelAlphabet& phonemes);

struct CorpusConfig {
  int num_phonemes = 12;
  int lexicon_size = 30;
  int min_pron_length = 2;
  int max_pron_length = 4;
  int min_words = 2;
  int max_words = 4;
  int num_train = 500;
  int num_heldout = 100;
  /// Segment length = min_duration + Geometric(continue_prob) frames.
  int min_duration = 3;
  double continue_prob = 0.6;
  int audio_dim = 16;
  int video_dim = 12;
  /// Common offset added to every audio and video dimension.
  double feature_offset = 12.0;
  double audio_mean_scale = 1.0;
  double audio_noise_std = 0.3;
  double video_mean_scale = 1.0;
  double video_detail_scale = 0.25;
  double video_noise_std = 0.3;
  int video_lead_frames = 3;
  std::vector<double> snr_db;  // conditions for augmentation
  std::vector<std::pair<std::string, std::string>> viseme_pairs;  // override
  std::uint64_t seed = 1;

  void Validate() const;
};

struct Segment {
  std::string label;  // phoneme name or "sil"
  int start = 0;      // 1-based, inclusive
  int end = 0;

  bool operator==(const Segment&) const = default;
};

struct Utterance {
  std::string id;
  std::string split;  // "train" or "heldout"
  Matrix audio;       // T x audio_dim
  Matrix video;       // T x video_dim
  LabelSequence phonemes;
  std::vector<std::string> words;
  std::vector<Segment> audio_segments;
  std::vector<Segment> video_segments;

  int num_frames() const { return static_cast<int>(audio.rows()); }
};

struct Corpus {
  CorpusConfig config;
  LabelAlphabet phonemes;
  VisemeMap visemes;
  decode::Lexicon lexicon;
  /// Class means used by the generator (rows: phoneme ids 1..K, row 0 is
  /// silence).
  Matrix audio_means;
  Matrix video_means;
  std::vector<Utterance> utterances;

  std::vector<const Utterance*> Split(const std::string& name) const;
};

/// JSON form of the config; unknown keys are rejected with ConfigError.
void to_json(nlohmann::json& j, const CorpusConfig& c);
void from_json(const nlohmann::json& j, CorpusConfig& c);

Corpus GenerateCorpus(const CorpusConfig& cfg);

/// x + Gaussian noise with variance mean(x^2) / 10^(snr_db / 10). +inf dB is
/// the identity. Throws ZeroPowerSignal for an all-zero matrix.
Matrix CorruptFeatures(const Matrix& x, double snr_db, std::uint64_t seed);

/// Per-utterance seed for noise conditions: stable in (corpus seed, index,
/// salt).
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0);

void WriteCorpus(const std::string& dir, const Corpus& c);
Corpus ReadCorpus(const std::string& dir);

}  // namespace ctcfuse::corpus

#endif  // CTCFUSE_CORPUS_HPP_
