// include/ctcfuse/experiment.hpp


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

#ifndef CTCFUSE_EXPERIMENT_HPP_
#define CTCFUSE_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctcfuse/alignment.hpp"
#include "ctcfuse/corpus.hpp"
#include "ctcfuse/decode.hpp"
#include "ctcfuse/features.hpp"
#include "ctcfuse/fst.hpp"
#include "ctcfuse/lm.hpp"
#include "ctcfuse/model.hpp"
#include "ctcfuse/train.hpp"

namespace ctcfuse::experiment {

inline constexpr double kClean = std::numeric_limits<double>::infinity();

enum class Units { kPhonemes, kVisemes };
const char* UnitsName(Units u);
Units ParseUnits(const std::string& s);

/// How corpus streams become network input: optional audio noise, then per
/// stream CMVN and shift, fusion in the listed order, context stacking and
/// PCA.
struct FeaturePipeline {
  std::vector<std::string> streams{"audio"};
  bool cmvn = true;
  int context = 0;
  std::map<std::string, int> offsets;  // stream -> frames (positive delays)
  double pca_target = 0.0;             // 0 disables PCA
  std::optional<features::PcaModel> pca;

  void Validate() const;
  int OutputDim(const corpus::CorpusConfig& c) const;
};

/// Applies `p` to one utterance. The audio stream gets feature-space noise
/// at `audio_snr_db` (kClean for none) drawn from `noise_seed`.
Matrix ExtractFeatures(const corpus::Utterance& u, const FeaturePipeline& p, double audio_snr_db,
                       std::uint64_t noise_seed);

struct SystemSpec {
  std::string name = "audio";
  FeaturePipeline features;
  Units units = Units::kPhonemes;
  int num_layers = 4;
  int hidden_size = 64;
  model::TrainConfig train;
  /// Audio conditions sampled per utterance and epoch during training;
  /// {kClean} is clean-only training.
  std::vector<double> train_snr{kClean};

  void Validate() const;
};

/// Target alphabet of a system over a corpus.
const LabelAlphabet& UnitAlphabet(const corpus::Corpus& c, Units u);
LabelSequence Targets(const corpus::Corpus& c, const corpus::Utterance& u, Units units);

/// Feature/label view of corpus utterances. With several conditions, each
/// (utterance, epoch) draws one; the draw and the noise depend only on
/// (seed, corpus index, epoch).
class CorpusSource : public model::ExampleSource {
 public:
  CorpusSource(const corpus::Corpus& c, std::vector<const corpus::Utterance*> utts,
               const FeaturePipeline& p, Units units, std::vector<double> conditions,
               std::uint64_t seed);
  int size() const override { return static_cast<int>(utts_.size()); }
  model::Example Get(int i, int epoch) const override;
  double ConditionFor(int i, int epoch) const;

 private:
  const corpus::Corpus& c_;
  std::vector<const corpus::Utterance*> utts_;
  const FeaturePipeline& p_;
  Units units_;
  std::vector<double> conditions_;
  std::uint64_t seed_;
};

/// Noise seed of utterance `index` under a fixed test condition; shared by
/// all systems so they see identical noise.
std::uint64_t TestNoiseSeed(std::uint64_t seed, int index, double snr_db);

struct TrainedSystem {
  SystemSpec spec;
  LabelAlphabet alphabet;
  model::NetworkParams params;
  std::vector<model::EpochStats> trace;
};

TrainedSystem TrainSystem(const corpus::Corpus& c, const SystemSpec& spec, int jobs,
                          std::uint64_t seed);

/// Posteriors of every utterance of `split` under a test condition.
std::vector<Posteriorgram> Posteriors(const corpus::Corpus& c, const TrainedSystem& s,
                                      const std::vector<const corpus::Utterance*>& utts,
                                      double snr_db, int jobs, std::uint64_t seed);

/// Greedy unit decoding scored against the system's targets (pooled).
decode::ErrorCounts EvaluateUnits(const corpus::Corpus& c, const TrainedSystem& s,
                                  const std::string& split, double snr_db, int jobs,
                                  std::uint64_t seed);

/// Checkpoint plus a JSON sidecar (`<path>.json`) with units, pipeline and
/// the PCA model (`<path>.pca`) when present.
void SaveSystem(const TrainedSystem& s, const std::string& path);
TrainedSystem LoadSystem(const std::string& path);

struct DecodeConfig {
  std::string mode = "greedy";  // greedy | beam | wfst
  int beam = 16;
  double lm_weight = 1.0;
  double acoustic_scale = 1.0;
  double graph_beam = 30.0;  // WFST token pruning
  std::string lexicon;  // paths; empty = corpus lexicon / none
  std::string arpa;

  void Validate() const;
};

struct DecodeOutput {
  std::vector<int> units;
  std::vector<std::string> words;
  bool word_level = false;
  bool failed = false;  // no path (recorded as an empty hypothesis)
};

/// Greedy, prefix-beam or WFST decoding. Word output needs a lexicon; for a
/// viseme system a phoneme lexicon is mapped through the viseme map.
class Decoder {
 public:
  Decoder(const DecodeConfig& cfg, const LabelAlphabet& units, const decode::Lexicon* lexicon,
          const decode::NGramModel* lm);
  DecodeOutput Decode(const Posteriorgram& y) const;
  bool word_level() const { return lexicon_ != nullptr && cfg_.mode != "greedy"; }

 private:
  DecodeConfig cfg_;
  LabelAlphabet units_;
  const decode::Lexicon* lexicon_;
  const decode::NGramModel* lm_;
  std::optional<decode::Fst> token_;
  std::optional<decode::Fst> lg_;
};

/// Lexicon re-expressed over visemes (duplicate pronunciations collapse).
decode::Lexicon MapLexicon(const decode::Lexicon& lex, const corpus::VisemeMap& map);

struct AlignmentAnalysis {
  std::vector<alignment::PeakRecord> records;
  alignment::OffsetReport video_vs_audio;  // offsets video - audio
  alignment::OffsetReport av_vs_audio;     // offsets av - audio
  std::vector<alignment::SystemPositions> positions;
  int units_between = 0;  // AV mean position between audio and video
  int units_compared = 0;
};

/// Peak alignment of three systems on `split`, per-occurrence averaging.
AlignmentAnalysis AnalyzeAlignment(const corpus::Corpus& c, const TrainedSystem& audio,
                                   const TrainedSystem& video, const TrainedSystem& av,
                                   const std::string& split, double threshold, double frame_ms,
                                   double technical_delay_frames, int jobs, std::uint64_t seed);

struct MatrixRow {
  std::string system;
  std::string train_cond;
  double test_snr = kClean;
  double wer = 0.0;
  double acc = 0.0;
};

struct MatrixSystem {
  SystemSpec spec;
  std::string train_cond;  // label, e.g. "clean" or "multi"
};

/// Trains every system once and scores it at every test condition. Unit
/// accuracy comes from greedy decoding; WER from word decoding with the
/// corpus lexicon (NaN in greedy mode). `on_row` sees rows as they finish.
std::vector<MatrixRow> RunMatrix(const corpus::Corpus& c, const std::vector<MatrixSystem>& systems,
                                 const std::vector<double>& test_snr, const DecodeConfig& dec,
                                 const decode::NGramModel* lm, int jobs, std::uint64_t seed,
                                 const std::function<void(const MatrixRow&)>& on_row = {});

void WriteMatrixCsv(std::ostream& os, const std::vector<MatrixRow>& rows);
/// Accuracy against test SNR, one polyline per (system, train_cond).
void WriteMatrixSvg(std::ostream& os, const std::vector<MatrixRow>& rows);

/// Pooled word errors of decoded utterances of a split.
decode::ErrorCounts EvaluateWords(const corpus::Corpus& c, const TrainedSystem& s,
                                  const std::string& split, double snr_db, const Decoder& dec,
                                  int jobs, std::uint64_t seed);

void to_json(nlohmann::json& j, const FeaturePipeline& p);
void from_json(const nlohmann::json& j, FeaturePipeline& p);
void to_json(nlohmann::json& j, const SystemSpec& s);
void from_json(const nlohmann::json& j, SystemSpec& s);
void to_json(nlohmann::json& j, const DecodeConfig& d);
void from_json(const nlohmann::json& j, DecodeConfig& d);

/// SNR values in JSON: numbers, or the string "clean".
double SnrFromJson(const nlohmann::json& j);
nlohmann::json SnrToJson(double snr);
std::string SnrLabel(double snr);

}  // namespace ctcfuse::experiment

#endif  // CTCFUSE_EXPERIMENT_HPP_
