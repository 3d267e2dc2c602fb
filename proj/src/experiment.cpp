// src/experiment.cpp


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

#include "ctcfuse/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "ctcfuse/error.hpp"

namespace ctcfuse::experiment {

using nlohmann::json;

const char* UnitsName(Units u) { return u == Units::kPhonemes ? "phonemes" : "visemes"; }

Units ParseUnits(const std::string& s) {
  if (s == "phonemes") return Units::kPhonemes;
  if (s == "visemes") return Units::kVisemes;
  Fail(ErrorKind::kConfigError, "units must be 'phonemes' or 'visemes', got '" + s + "'");
}

void FeaturePipeline::Validate() const {
  if (streams.empty()) Fail(ErrorKind::kConfigError, "feature pipeline needs at least one stream");
  for (const auto& s : streams)
    if (s != "audio" && s != "video") Fail(ErrorKind::kConfigError, "unknown stream '" + s + "'");
  for (const auto& [s, o] : offsets)
    if (std::find(streams.begin(), streams.end(), s) == streams.end())
      Fail(ErrorKind::kConfigError, "offset given for unused stream '" + s + "'");
  if (context < 0) Fail(ErrorKind::kConfigError, "context must be >= 0");
  if (pca_target < 0 || pca_target > 1) Fail(ErrorKind::kConfigError, "pca_target must be in [0, 1]");
}

int FeaturePipeline::OutputDim(const corpus::CorpusConfig& c) const {
  if (pca) return pca->num_components();
  int d = 0;
  for (const auto& s : streams) d += s == "audio" ? c.audio_dim : c.video_dim;
  return d * (2 * context + 1);
}

Matrix ExtractFeatures(const corpus::Utterance& u, const FeaturePipeline& p, double audio_snr_db,
                       std::uint64_t noise_seed) {
  std::vector<features::FeatureSequence> parts;
  for (const auto& s : p.streams) {
    const bool audio = s == "audio";
    Matrix m = audio ? (audio_snr_db == kClean ? u.audio
                                               : corpus::CorruptFeatures(u.audio, audio_snr_db, noise_seed))
                     : u.video;
    features::FeatureSequence fs(std::move(m), audio ? features::Modality::kAudio
                                                     : features::Modality::kVideo);
    if (p.cmvn) fs = features::Cmvn(fs);
    auto it = p.offsets.find(s);
    if (it != p.offsets.end() && it->second != 0) fs = features::ShiftModality(fs, it->second);
    parts.push_back(std::move(fs));
  }
  features::FeatureSequence x = features::Fuse(parts);
  if (p.context > 0) x = features::StackContext(x, p.context);
  if (p.pca) x = features::ApplyPca(*p.pca, x);
  return x.frames;
}

void SystemSpec::Validate() const {
  features.Validate();
  train.Validate();
  if (num_layers < 1 || hidden_size < 1) Fail(ErrorKind::kConfigError, "bad network size");
  if (train_snr.empty()) Fail(ErrorKind::kConfigError, "train_snr must list at least one condition");
}

const LabelAlphabet& UnitAlphabet(const corpus::Corpus& c, Units u) {
  return u == Units::kPhonemes ? c.phonemes : c.visemes.visemes();
}

LabelSequence Targets(const corpus::Corpus& c, const corpus::Utterance& u, Units units) {
  return units == Units::kPhonemes ? u.phonemes : c.visemes.Map(u.phonemes);
}

CorpusSource::CorpusSource(const corpus::Corpus& c, std::vector<const corpus::Utterance*> utts,
                           const FeaturePipeline& p, Units units, std::vector<double> conditions,
                           std::uint64_t seed)
    : c_(c), utts_(std::move(utts)), p_(p), units_(units), conditions_(std::move(conditions)),
      seed_(seed) {
  if (conditions_.empty()) conditions_ = {kClean};
}

double CorpusSource::ConditionFor(int i, int epoch) const {
  if (conditions_.size() == 1) return conditions_[0];
  const auto idx = static_cast<std::uint64_t>(utts_[i] - c_.utterances.data());
  std::mt19937_64 rng(corpus::DeriveSeed(seed_, idx, 0xE0000ULL + static_cast<std::uint64_t>(epoch)));
  return conditions_[rng() % conditions_.size()];
}

model::Example CorpusSource::Get(int i, int epoch) const {
  const corpus::Utterance& u = *utts_.at(i);
  const auto idx = static_cast<std::uint64_t>(&u - c_.utterances.data());
  const std::uint64_t noise = corpus::DeriveSeed(seed_, idx, 0xA0000ULL + static_cast<std::uint64_t>(epoch));
  return {u.id, ExtractFeatures(u, p_, ConditionFor(i, epoch), noise), Targets(c_, u, units_)};
}

std::uint64_t TestNoiseSeed(std::uint64_t seed, int index, double snr_db) {
  return corpus::DeriveSeed(seed, static_cast<std::uint64_t>(index),
                            0x7E57ULL ^ std::bit_cast<std::uint64_t>(snr_db));
}

TrainedSystem TrainSystem(const corpus::Corpus& c, const SystemSpec& spec_in, int jobs,
                          std::uint64_t seed) {
  spec_in.Validate();
  TrainedSystem s;
  s.spec = spec_in;
  s.spec.train.jobs = jobs;
  s.spec.train.seed = seed;
  s.alphabet = UnitAlphabet(c, s.spec.units);
  const auto train = c.Split("train");
  const auto heldout = c.Split("heldout");
  if (train.empty()) Fail(ErrorKind::kInsufficientData, "corpus has no training utterances");

  FeaturePipeline& fp = s.spec.features;
  fp.pca.reset();
  if (fp.pca_target > 0) {
    std::vector<Matrix> mats(train.size());
    model::ParallelFor(static_cast<int>(train.size()), jobs,
                       [&](int i) { mats[i] = ExtractFeatures(*train[i], fp, kClean, 0); });
    Eigen::Index rows = 0;
    for (const auto& m : mats) rows += m.rows();
    Matrix all(rows, mats[0].cols());
    rows = 0;
    for (const auto& m : mats) {
      all.middleRows(rows, m.rows()) = m;
      rows += m.rows();
    }
    fp.pca = features::FitPca(all, fp.pca_target);
    spdlog::info("{}: PCA keeps {} of {} dimensions", s.spec.name, fp.pca->num_components(), all.cols());
  }

  CorpusSource tr(c, train, fp, s.spec.units, s.spec.train_snr, seed);
  CorpusSource dv(c, heldout, fp, s.spec.units, {kClean}, seed);
  model::NetworkConfig nc;
  nc.num_layers = s.spec.num_layers;
  nc.hidden_size = s.spec.hidden_size;
  nc.input_dim = static_cast<int>(tr.Get(0, 0).features.cols());
  nc.output_dim = s.alphabet.output_dim();
  nc.seed = seed;
  auto res = model::Train(model::InitParams(nc), tr, dv, s.spec.train);
  s.params = std::move(res.params);
  s.trace = std::move(res.trace);
  return s;
}

std::vector<Posteriorgram> Posteriors(const corpus::Corpus& c, const TrainedSystem& s,
                                      const std::vector<const corpus::Utterance*>& utts,
                                      double snr_db, int jobs, std::uint64_t seed) {
  std::vector<Posteriorgram> out(utts.size());
  model::ParallelFor(static_cast<int>(utts.size()), jobs, [&](int i) {
    const int idx = static_cast<int>(utts[i] - c.utterances.data());
    const Matrix x = ExtractFeatures(*utts[i], s.spec.features, snr_db, TestNoiseSeed(seed, idx, snr_db));
    out[i] = Posteriorgram::FromLogits(model::ForwardLogits(s.params, x));
  });
  return out;
}

decode::ErrorCounts EvaluateUnits(const corpus::Corpus& c, const TrainedSystem& s,
                                  const std::string& split, double snr_db, int jobs,
                                  std::uint64_t seed) {
  const auto utts = c.Split(split);
  const auto post = Posteriors(c, s, utts, snr_db, jobs, seed);
  decode::ErrorCounts total;
  for (std::size_t i = 0; i < utts.size(); ++i)
    total += decode::EditDistance(Targets(c, *utts[i], s.spec.units).ids, decode::GreedyDecode(post[i]));
  return total;
}

decode::ErrorCounts EvaluateWords(const corpus::Corpus& c, const TrainedSystem& s,
                                  const std::string& split, double snr_db, const Decoder& dec,
                                  int jobs, std::uint64_t seed) {
  const auto utts = c.Split(split);
  const auto post = Posteriors(c, s, utts, snr_db, jobs, seed);
  std::vector<decode::ErrorCounts> per(utts.size());
  model::ParallelFor(static_cast<int>(utts.size()), jobs, [&](int i) {
    per[i] = decode::EditDistance(utts[i]->words, dec.Decode(post[i]).words);
  });
  decode::ErrorCounts total;
  for (const auto& e : per) total += e;
  return total;
}

void SaveSystem(const TrainedSystem& s, const std::string& path) {
  model::SaveCheckpoint(s.params, path);
  json j;
  j["spec"] = s.spec;
  j["units"] = s.alphabet.units();
  j["pca"] = s.spec.features.pca.has_value();
  json trace = json::array();
  for (const auto& e : s.trace)
    trace.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss},
                     {"heldout_accuracy", e.heldout_accuracy}, {"learning_rate", e.learning_rate}});
  j["trace"] = trace;
  alignment::WriteFile(path + ".json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  if (s.spec.features.pca) features::SavePca(*s.spec.features.pca, path + ".pca");
}

TrainedSystem LoadSystem(const std::string& path) {
  TrainedSystem s;
  s.params = model::LoadCheckpoint(path);
  std::ifstream is(path + ".json");
  if (!is) Fail(ErrorKind::kIoError, "missing model sidecar " + path + ".json");
  try {
    const json j = json::parse(is);
    s.spec = j.at("spec").get<SystemSpec>();
    s.alphabet = LabelAlphabet(j.at("units").get<std::vector<std::string>>());
    if (j.value("pca", false)) s.spec.features.pca = features::LoadPca(path + ".pca");
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParseError, path + ".json: " + e.what());
  }
  if (s.alphabet.output_dim() != s.params.config.output_dim)
    Fail(ErrorKind::kDimensionMismatch, path + ": sidecar units do not match the checkpoint");
  return s;
}

void DecodeConfig::Validate() const {
  if (mode != "greedy" && mode != "beam" && mode != "wfst")
    Fail(ErrorKind::kConfigError, "decode mode must be greedy, beam or wfst");
  if (beam < 1) Fail(ErrorKind::kConfigError, "beam must be >= 1");
  if (!(acoustic_scale > 0)) Fail(ErrorKind::kConfigError, "acoustic_scale must be positive");
  if (!(graph_beam > 0)) Fail(ErrorKind::kConfigError, "graph_beam must be positive");
}

namespace {

decode::Fst ScaleWeights(const decode::Fst& f, double scale) {
  decode::Fst g(f.input_space(), f.output_space());
  for (int s = 0; s < f.NumStates(); ++s) g.AddState();
  g.SetStart(f.Start());
  for (int s = 0; s < f.NumStates(); ++s) {
    g.SetFinal(s, f.Final(s) == decode::kInfinity ? decode::kInfinity : scale * f.Final(s));
    for (auto a : f.Arcs(s)) {
      a.weight *= scale;
      g.AddArc(s, a);
    }
  }
  return g;
}

}  // namespace

Decoder::Decoder(const DecodeConfig& cfg, const LabelAlphabet& units, const decode::Lexicon* lexicon,
                 const decode::NGramModel* lm)
    : cfg_(cfg), units_(units), lexicon_(lexicon), lm_(lm) {
  cfg_.Validate();
  if (lm_ && !lexicon_) Fail(ErrorKind::kConfigError, "a language model needs a lexicon");
  if (cfg_.mode == "wfst") {
    if (!lexicon_) Fail(ErrorKind::kConfigError, "wfst decoding needs a lexicon");
    token_ = decode::BuildTokenFst(units.num_units());
    const decode::Fst L = decode::BuildLexiconFst(*lexicon_, units.num_units());
    lg_ = lm_ ? decode::Compose(L, ScaleWeights(decode::BuildGrammarFst(*lm_, lexicon_->words()),
                                                cfg_.lm_weight))
              : L;
  }
}

DecodeOutput Decoder::Decode(const Posteriorgram& y) const {
  DecodeOutput out;
  out.word_level = word_level();
  if (cfg_.mode == "greedy") {
    out.units = decode::GreedyDecode(y);
    return out;
  }
  if (cfg_.mode == "beam") {
    decode::BeamOptions o;
    o.beam_width = cfg_.beam;
    o.lm_weight = cfg_.lm_weight;
    const auto hyps = decode::PrefixBeamSearch(y, o, lexicon_, lm_);
    if (hyps.empty()) {
      out.failed = true;
      return out;
    }
    out.units = hyps[0].units;
    if (lexicon_)
      for (int w : hyps[0].words) out.words.push_back(lexicon_->words().Word(w));
    return out;
  }
  try {
    decode::LazyCompose<decode::Fst, decode::Fst> graph(*token_, *lg_);
    const auto h = decode::ViterbiDecode(graph, y, cfg_.acoustic_scale, cfg_.graph_beam);
    for (int w : h.words) out.words.push_back(lexicon_->words().Word(w));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNoPathFound) throw;
    out.failed = true;
  }
  return out;
}

decode::Lexicon MapLexicon(const decode::Lexicon& lex, const corpus::VisemeMap& map) {
  decode::Lexicon out;
  std::set<std::pair<std::string, std::vector<int>>> seen;
  for (const auto& p : lex.prons()) {
    std::vector<int> v;
    for (int u : p.units) v.push_back(map(u));
    const std::string& w = lex.words().Word(p.word);
    if (seen.insert({w, v}).second) out.Add(w, v);
  }
  return out;
}

namespace {

// Pairs of (reference system, other system) records with frames ordered as
// (other, reference), so offsets read other - reference.
std::vector<alignment::MatchedPair> PairAgainst(const corpus::Corpus& c, const TrainedSystem& ref,
                                                const std::vector<alignment::PeakRecord>& rref,
                                                const TrainedSystem& other,
                                                const std::vector<alignment::PeakRecord>& rother,
                                                const corpus::Utterance& u, int* unmatched) {
  const corpus::VisemeMap* m = &c.visemes;
  const bool same = ref.spec.units == other.spec.units;
  const bool ref_ph = ref.spec.units == Units::kPhonemes;
  const bool oth_ph = other.spec.units == Units::kPhonemes;
  const bool to_vis = !same || !ref_ph;
  const auto res = alignment::MatchOccurrences(
      rref, rother, u.phonemes, !same && ref_ph ? m : nullptr, !same && oth_ph ? m : nullptr,
      to_vis ? m : nullptr);
  *unmatched += res.unmatched_a + res.unmatched_b;
  auto pairs = res.pairs;
  for (auto& p : pairs) std::swap(p.frame_a, p.frame_b);
  return pairs;
}

}  // namespace

AlignmentAnalysis AnalyzeAlignment(const corpus::Corpus& c, const TrainedSystem& audio,
                                   const TrainedSystem& video, const TrainedSystem& av,
                                   const std::string& split, double threshold, double frame_ms,
                                   double technical_delay_frames, int jobs, std::uint64_t seed) {
  const auto utts = c.Split(split);
  if (utts.empty()) Fail(ErrorKind::kInsufficientData, "no utterances in split '" + split + "'");
  const auto pa = Posteriors(c, audio, utts, kClean, jobs, seed);
  const auto pv = Posteriors(c, video, utts, kClean, jobs, seed);
  const auto pav = Posteriors(c, av, utts, kClean, jobs, seed);

  AlignmentAnalysis out;
  std::vector<alignment::MatchedPair> vpairs, avpairs;
  int unmatched_v = 0, unmatched_av = 0;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    const auto& u = *utts[i];
    const auto ra = alignment::ExtractPeaks(pa[i], threshold, &audio.alphabet, u.id, "audio");
    const auto rv = alignment::ExtractPeaks(pv[i], threshold, &video.alphabet, u.id, "video");
    const auto rav = alignment::ExtractPeaks(pav[i], threshold, &av.alphabet, u.id, "av");
    for (const auto* r : {&ra, &rv, &rav}) out.records.insert(out.records.end(), r->begin(), r->end());
    const auto v = PairAgainst(c, audio, ra, video, rv, u, &unmatched_v);
    const auto a = PairAgainst(c, audio, ra, av, rav, u, &unmatched_av);
    vpairs.insert(vpairs.end(), v.begin(), v.end());
    avpairs.insert(avpairs.end(), a.begin(), a.end());
  }
  out.video_vs_audio = alignment::MakeOffsetReport(vpairs, frame_ms, technical_delay_frames);
  out.video_vs_audio.unmatched = unmatched_v;
  out.av_vs_audio = alignment::MakeOffsetReport(avpairs, frame_ms);
  out.av_vs_audio.unmatched = unmatched_av;

  alignment::SystemPositions pos_a{"audio", {}}, pos_v{"video", {}}, pos_av{"audiovisual", {}};
  for (const auto& [u, s] : out.video_vs_audio.per_unit) {
    pos_a.position_ms[u] = 0.0;
    pos_v.position_ms[u] = s.mean_ms;
  }
  for (const auto& [u, s] : out.av_vs_audio.per_unit) {
    pos_a.position_ms[u] = 0.0;
    pos_av.position_ms[u] = s.mean_ms;
    auto it = out.video_vs_audio.per_unit.find(u);
    if (it == out.video_vs_audio.per_unit.end()) continue;
    ++out.units_compared;
    const double v = it->second.mean;
    if (s.mean >= std::min(v, 0.0) && s.mean <= std::max(v, 0.0)) ++out.units_between;
  }
  out.positions = {pos_a, pos_v, pos_av};
  return out;
}

std::vector<MatrixRow> RunMatrix(const corpus::Corpus& c, const std::vector<MatrixSystem>& systems,
                                 const std::vector<double>& test_snr, const DecodeConfig& dec,
                                 const decode::NGramModel* lm, int jobs, std::uint64_t seed,
                                 const std::function<void(const MatrixRow&)>& on_row) {
  std::vector<MatrixRow> rows;
  for (const auto& ms : systems) {
    const TrainedSystem s = TrainSystem(c, ms.spec, jobs, seed);
    std::optional<decode::Lexicon> lex;
    if (dec.mode != "greedy")
      lex = s.spec.units == Units::kPhonemes ? c.lexicon : MapLexicon(c.lexicon, c.visemes);
    const Decoder d(dec, s.alphabet, lex ? &*lex : nullptr,
                    s.spec.units == Units::kPhonemes ? lm : nullptr);
    for (double snr : test_snr) {
      MatrixRow r;
      r.system = ms.spec.name;
      r.train_cond = ms.train_cond;
      r.test_snr = snr;
      r.acc = EvaluateUnits(c, s, "heldout", snr, jobs, seed).Accuracy();
      r.wer = lex ? 100.0 * EvaluateWords(c, s, "heldout", snr, d, jobs, seed).ErrorRate()
                  : std::numeric_limits<double>::quiet_NaN();
      spdlog::info("{} [{}] @ {}: acc {:.2f} wer {:.2f}", r.system, r.train_cond, SnrLabel(snr), r.acc, r.wer);
      rows.push_back(r);
      if (on_row) on_row(r);
    }
  }
  return rows;
}

void WriteMatrixCsv(std::ostream& os, const std::vector<MatrixRow>& rows) {
  os << "system,train_cond,test_snr,wer,acc\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{:.4f},{:.4f}\n", r.system, r.train_cond, SnrLabel(r.test_snr), r.wer, r.acc);
}

void WriteMatrixSvg(std::ostream& os, const std::vector<MatrixRow>& rows) {
  // x: test conditions in first-seen order (clean first when present).
  std::vector<double> conds;
  std::vector<std::string> series;
  for (const auto& r : rows) {
    if (std::find(conds.begin(), conds.end(), r.test_snr) == conds.end()) conds.push_back(r.test_snr);
    const std::string key = r.system + " (" + r.train_cond + ")";
    if (std::find(series.begin(), series.end(), key) == series.end()) series.push_back(key);
  }
  std::sort(conds.begin(), conds.end(), std::greater<>());
  double lo = 100.0;
  for (const auto& r : rows) lo = std::min(lo, r.acc);
  lo = std::floor(std::min(lo, 90.0) / 10.0) * 10.0;
  const int left = 60, top = 30, w = 480, h = 300;
  auto xo = [&](double snr) {
    const auto i = std::find(conds.begin(), conds.end(), snr) - conds.begin();
    return left + (conds.size() > 1 ? w * static_cast<double>(i) / (conds.size() - 1) : w / 2.0);
  };
  auto yo = [&](double acc) { return top + h * (100.0 - acc) / (100.0 - lo); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  os << fmt::format("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" "
                    "version=\"1.1\" width=\"{}\" height=\"{}\">\n",
                    left + w + 220, top + h + 60);
  os << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", left, top, top + h);
  os << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", left, top + h, left + w);
  for (double a = lo; a <= 100.0 + 1e-9; a += 10.0)
    os << fmt::format("<text x=\"{}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"10\" "
                      "text-anchor=\"end\">{:.0f}</text>\n",
                      left - 6, yo(a) + 3, a);
  for (double s : conds)
    os << fmt::format("<text x=\"{:.1f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" "
                      "text-anchor=\"middle\">{}</text>\n",
                      xo(s), top + h + 16, SnrLabel(s));
  os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">test SNR (dB)</text>\n",
                    left + w / 2 - 30, top + h + 40);
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::string pts;
    for (const auto& r : rows)
      if (r.system + " (" + r.train_cond + ")" == series[k])
        pts += fmt::format("{:.1f},{:.1f} ", xo(r.test_snr), yo(r.acc));
    os << fmt::format("<polyline class=\"series\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                      colors[k % 6], pts);
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{}\">{}</text>\n",
                      left + w + 16, top + 16 * static_cast<int>(k + 1), colors[k % 6], series[k]);
  }
  os << "</svg>\n";
}

double SnrFromJson(const json& j) {
  if (j.is_string() && j.get<std::string>() == "clean") return kClean;
  if (j.is_number()) return j.get<double>();
  Fail(ErrorKind::kConfigError, "SNR must be a number or \"clean\"");
}

json SnrToJson(double snr) { return snr == kClean ? json("clean") : json(snr); }

std::string SnrLabel(double snr) { return snr == kClean ? "clean" : fmt::format("{:g}", snr); }

namespace {

template <typename T>
void Get(const json& j, const char* k, T& field) {
  if (j.contains(k)) j.at(k).get_to(field);
}

void RejectUnknown(const json& j, const json& known, const char* what) {
  if (!j.is_object()) Fail(ErrorKind::kConfigError, std::string(what) + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) Fail(ErrorKind::kConfigError, std::string("unknown ") + what + " key '" + k + "'");
}

}  // namespace

void to_json(json& j, const FeaturePipeline& p) {
  j = json{{"streams", p.streams}, {"cmvn", p.cmvn},       {"context", p.context},
           {"offsets", p.offsets}, {"pca_target", p.pca_target}};
}

void from_json(const json& j, FeaturePipeline& p) {
  RejectUnknown(j, json(FeaturePipeline{}), "feature pipeline");
  Get(j, "streams", p.streams);
  Get(j, "cmvn", p.cmvn);
  Get(j, "context", p.context);
  Get(j, "offsets", p.offsets);
  Get(j, "pca_target", p.pca_target);
}

void to_json(json& j, const SystemSpec& s) {
  json snr = json::array();
  for (double v : s.train_snr) snr.push_back(SnrToJson(v));
  j = json{{"name", s.name},
           {"features", s.features},
           {"units", UnitsName(s.units)},
           {"num_layers", s.num_layers},
           {"hidden_size", s.hidden_size},
           {"epochs", s.train.epochs},
           {"batch_size", s.train.batch_size},
           {"learning_rate", s.train.learning_rate},
           {"clip_norm", s.train.clip_norm},
           {"lr_decay", s.train.lr_decay},
           {"keep_best", s.train.keep_best},
           {"train_snr", snr}};
}

void from_json(const json& j, SystemSpec& s) {
  RejectUnknown(j, json(SystemSpec{}), "system");
  Get(j, "name", s.name);
  Get(j, "features", s.features);
  if (j.contains("units")) s.units = ParseUnits(j.at("units").get<std::string>());
  Get(j, "num_layers", s.num_layers);
  Get(j, "hidden_size", s.hidden_size);
  Get(j, "epochs", s.train.epochs);
  Get(j, "batch_size", s.train.batch_size);
  Get(j, "learning_rate", s.train.learning_rate);
  Get(j, "clip_norm", s.train.clip_norm);
  Get(j, "lr_decay", s.train.lr_decay);
  Get(j, "keep_best", s.train.keep_best);
  if (j.contains("train_snr")) {
    s.train_snr.clear();
    for (const auto& v : j.at("train_snr")) s.train_snr.push_back(SnrFromJson(v));
  }
}

void to_json(json& j, const DecodeConfig& d) {
  j = json{{"mode", d.mode},       {"beam", d.beam},   {"lm_weight", d.lm_weight},
           {"acoustic_scale", d.acoustic_scale}, {"graph_beam", d.graph_beam},
           {"lexicon", d.lexicon}, {"arpa", d.arpa}};
}

void from_json(const json& j, DecodeConfig& d) {
  RejectUnknown(j, json(DecodeConfig{}), "decode");
  Get(j, "mode", d.mode);
  Get(j, "beam", d.beam);
  Get(j, "lm_weight", d.lm_weight);
  Get(j, "acoustic_scale", d.acoustic_scale);
  Get(j, "graph_beam", d.graph_beam);
  Get(j, "lexicon", d.lexicon);
  Get(j, "arpa", d.arpa);
}

}  // namespace ctcfuse::experiment
