// tools/ctcfuse.cpp


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

// Command-line front end: corpus generation, feature extraction, training,
// decoding, scoring, condition matrices and alignment analysis.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/fmt/fmt.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctcfuse/alignment.hpp"
#include "ctcfuse/corpus.hpp"
#include "ctcfuse/decode.hpp"
#include "ctcfuse/error.hpp"
#include "ctcfuse/experiment.hpp"
#include "ctcfuse/feature_io.hpp"
#include "ctcfuse/features.hpp"
#include "ctcfuse/lm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ctcfuse;
using namespace ctcfuse::experiment;

namespace {

constexpr const char* kVersion = "0.3.0";

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  double frame_ms = 33.333;
};

// The experiment file: everything a run needs, with the seed mandatory.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  corpus::CorpusConfig corpus;
  std::string corpus_dir;
  std::vector<MatrixSystem> systems;
  DecodeConfig decode;
  std::vector<double> test_snr{kClean};
  double threshold = 0.5;
  double technical_delay_frames = 0.0;
};

std::vector<double> ParseSnrList(const json& j) {
  if (j.is_string() && j.get<std::string>() == "grid") {
    std::vector<double> v{kClean};
    for (double s : features::SnrGrid()) v.push_back(s);
    return v;
  }
  if (!j.is_array()) Fail(ErrorKind::kConfigError, "SNR lists must be arrays or \"grid\"");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(SnrFromJson(x));
  return v;
}

json SnrListJson(const std::vector<double>& v) {
  json a = json::array();
  for (double s : v) a.push_back(SnrToJson(s));
  return a;
}

json ToJson(const ExperimentConfig& c) {
  json sys = json::array();
  for (const auto& s : c.systems) {
    json j = s.spec;
    j["train_cond"] = s.train_cond;
    sys.push_back(j);
  }
  json j{{"seed", c.seed},
         {"corpus", c.corpus},
         {"systems", sys},
         {"decode", c.decode},
         {"test_snr", SnrListJson(c.test_snr)},
         {"analysis", {{"threshold", c.threshold}, {"technical_delay_frames", c.technical_delay_frames}}}};
  if (!c.corpus_dir.empty()) j["corpus_dir"] = c.corpus_dir;
  return j;
}

ExperimentConfig LoadExperiment(const Globals& g) {
  ExperimentConfig c;
  bool have_seed = false;
  if (!g.config.empty()) {
    std::ifstream is(g.config);
    if (!is) Fail(ErrorKind::kConfigError, "cannot read config " + g.config);
    json j;
    try {
      j = json::parse(is);
    } catch (const json::exception& e) {
      Fail(ErrorKind::kConfigError, g.config + ": " + e.what());
    }
    static const std::set<std::string> known{"seed", "corpus", "corpus_dir", "systems", "decode", "test_snr", "analysis"};
    if (!j.is_object()) Fail(ErrorKind::kConfigError, g.config + ": expected a JSON object");
    for (const auto& [k, v] : j.items())
      if (!known.count(k)) Fail(ErrorKind::kConfigError, g.config + ": unknown key '" + k + "'");
    try {
      if (j.contains("seed")) {
        c.seed = j.at("seed").get<std::uint64_t>();
        have_seed = true;
      }
      if (j.contains("corpus")) c.corpus = j.at("corpus").get<corpus::CorpusConfig>();
      if (j.contains("corpus_dir")) c.corpus_dir = j.at("corpus_dir").get<std::string>();
      if (j.contains("decode")) c.decode = j.at("decode").get<DecodeConfig>();
      if (j.contains("test_snr")) c.test_snr = ParseSnrList(j.at("test_snr"));
      if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        for (const auto& [k, v] : a.items())
          if (k != "threshold" && k != "technical_delay_frames")
            Fail(ErrorKind::kConfigError, "unknown analysis key '" + k + "'");
        c.threshold = a.value("threshold", c.threshold);
        c.technical_delay_frames = a.value("technical_delay_frames", c.technical_delay_frames);
      }
      if (j.contains("systems"))
        for (json s : j.at("systems")) {
          MatrixSystem m;
          m.train_cond = s.value("train_cond", std::string("clean"));
          s.erase("train_cond");
          m.spec = s.get<SystemSpec>();
          c.systems.push_back(m);
        }
    } catch (const json::exception& e) {
      Fail(ErrorKind::kConfigError, g.config + ": " + e.what());
    }
  }
  if (g.seed) {
    c.seed = *g.seed;
    have_seed = true;
  }
  if (!g.config.empty() && !have_seed)
    Fail(ErrorKind::kConfigError, "a seed is required (config \"seed\" or --seed)");
  c.corpus.seed = c.seed;
  c.corpus.Validate();
  c.decode.Validate();
  for (const auto& s : c.systems) s.spec.Validate();
  if (c.test_snr.empty()) Fail(ErrorKind::kConfigError, "test_snr is empty");
  return c;
}

void Echo(const std::string& path, const ExperimentConfig& c, const std::string& command, const json& extra = {}) {
  json j = ToJson(c);
  j["command"] = command;
  j["version"] = kVersion;
  if (!extra.is_null()) j["options"] = extra;
  alignment::WriteFile(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

corpus::Corpus GetCorpus(const ExperimentConfig& c, const std::string& dir) {
  const std::string d = !dir.empty() ? dir : c.corpus_dir;
  if (!d.empty()) {
    spdlog::info("reading corpus {}", d);
    return corpus::ReadCorpus(d);
  }
  spdlog::info("generating corpus (seed {})", c.corpus.seed);
  return corpus::GenerateCorpus(c.corpus);
}

std::string Stem(const std::string& p) { return fs::path(p).stem().string(); }

void EnsureParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

int ExitCode(ErrorKind k) {
  switch (k) {
    case ErrorKind::kConfigError:
    case ErrorKind::kInvalidArgument:
      return 2;
    case ErrorKind::kNonFiniteGradient:
    case ErrorKind::kSingularAlignment:
    case ErrorKind::kInstanceTooLarge:
      return 4;
    default:
      return 3;
  }
}

// `utt tok tok ...` per line.
std::map<std::string, std::vector<std::string>> ReadTranscripts(const std::string& path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorKind::kIoError, "cannot read " + path);
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string id, tok;
    if (!(ls >> id)) continue;
    if (out.count(id)) Fail(ErrorKind::kParseError, fmt::format("{}:{}: duplicate id '{}'", path, lineno, id));
    auto& v = out[id];
    while (ls >> tok) v.push_back(tok);
  }
  return out;
}

// --- subcommands -----------------------------------------------------------

struct GenOpts {
  std::string out;
};

int GenCorpus(const Globals& g, const GenOpts& o) {
  const ExperimentConfig c = LoadExperiment(g);
  const corpus::Corpus corp = corpus::GenerateCorpus(c.corpus);
  corpus::WriteCorpus(o.out, corp);
  Echo((fs::path(o.out) / "config.json").string(), c, "gen-corpus");
  fmt::print("wrote {} utterances to {}\n", corp.utterances.size(), o.out);
  return 0;
}

struct AugmentOpts {
  std::string in;
  std::string out_dir = ".";
  std::vector<std::string> snr;
};

int Augment(const Globals& g, const AugmentOpts& o) {
  const ExperimentConfig c = LoadExperiment(g);
  std::vector<double> levels;
  if (o.snr.empty())
    levels = features::SnrGrid();
  else
    for (const auto& s : o.snr) {
      try {
        levels.push_back(s == "clean" ? kClean : std::stod(s));
      } catch (const std::exception&) {
        Fail(ErrorKind::kConfigError, "bad SNR '" + s + "'");
      }
    }
  fs::create_directories(o.out_dir);
  const bool wav = fs::path(o.in).extension() == ".wav";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::uint64_t seed = corpus::DeriveSeed(c.seed, i, 0xA6);
    const std::string name = fmt::format("{}_snr{}", Stem(o.in), SnrLabel(levels[i]));
    if (wav) {
      const auto w = features::ReadWav(o.in);
      const auto path = (fs::path(o.out_dir) / (name + ".wav")).string();
      features::WriteWav(path, features::AddNoiseAtSnr(w, levels[i], seed));
      fmt::print("{}\n", path);
    } else {
      const Matrix x = features::ReadFeatureFile(o.in);
      const auto path = (fs::path(o.out_dir) / (name + ".fmat")).string();
      features::WriteFmat(path, corpus::CorruptFeatures(x, levels[i], seed));
      fmt::print("{}\n", path);
    }
  }
  return 0;
}

struct ExtractOpts {
  std::string wav;
  std::string landmarks;
  int anchors = 4;
  std::string type = "fbank_pitch";
  bool cmvn = false;
  int context = 0;
  std::string out;
};

int Extract(const Globals& g, const ExtractOpts& o) {
  (void)g;
  features::FrameConfig fc;
  fc.frame_shift_ms = g.frame_ms;
  features::FeatureSequence x;
  if (!o.landmarks.empty()) {
    const Matrix m = features::ReadFeatureFile(o.landmarks);
    const int pts = 2 * features::kNumLipPoints;
    if (m.cols() != pts + 2 * o.anchors)
      Fail(ErrorKind::kDimensionMismatch,
           fmt::format("{}: expected {} columns (lip points then anchors), got {}", o.landmarks, pts + 2 * o.anchors,
                       m.cols()));
    features::LandmarkTrack lm;
    lm.points = m.leftCols(pts);
    lm.anchors = m.rightCols(2 * o.anchors);
    x = features::LandmarkFeatures(lm);
    x.frame_shift_ms = g.frame_ms;
  } else {
    if (o.wav.empty()) Fail(ErrorKind::kConfigError, "extract needs --wav or --landmarks");
    const auto w = features::ReadWav(o.wav);
    if (o.type == "fbank") {
      x = features::ComputeFbank(w, fc);
    } else if (o.type == "fbank_pitch") {
      x = features::Fuse({features::ComputeFbank(w, fc), features::ComputePitchProxy(w, fc)});
    } else if (o.type == "mfcc") {
      x = features::ComputeMfcc(w, fc);
    } else {
      Fail(ErrorKind::kConfigError, "unknown feature type '" + o.type + "'");
    }
  }
  if (o.cmvn) x = features::Cmvn(x);
  if (o.context > 0) x = features::StackContext(x, o.context);
  EnsureParent(o.out);
  if (fs::path(o.out).extension() == ".csv") {
    std::ofstream os(o.out);
    if (!os) Fail(ErrorKind::kIoError, "cannot write " + o.out);
    features::WriteFeatureCsv(os, x.frames, x.dim_labels);
  } else {
    features::WriteFmat(o.out, x.frames);
  }
  fmt::print("{}: {} frames x {} dims\n", o.out, x.frames.rows(), x.frames.cols());
  return 0;
}

struct TrainOpts {
  std::string corpus;
  std::string system;
  std::string units;
  int epochs = -1;
  std::string out;
  std::string trace;
};

SystemSpec PickSystem(const ExperimentConfig& c, const std::string& name) {
  if (name.empty()) return c.systems.empty() ? SystemSpec{} : c.systems.front().spec;
  for (const auto& s : c.systems)
    if (s.spec.name == name) return s.spec;
  Fail(ErrorKind::kConfigError, "no system named '" + name + "' in the config");
}

int TrainCmd(const Globals& g, const TrainOpts& o) {
  const ExperimentConfig c = LoadExperiment(g);
  SystemSpec spec = PickSystem(c, o.system);
  if (!o.units.empty()) spec.units = ParseUnits(o.units);
  if (o.epochs >= 0) spec.train.epochs = o.epochs;
  const corpus::Corpus corp = GetCorpus(c, o.corpus);
  EnsureParent(o.out);
  const TrainedSystem s = TrainSystem(corp, spec, g.jobs, c.seed);
  SaveSystem(s, o.out);
  const std::string trace = o.trace.empty() ? o.out + ".trace.csv" : o.trace;
  alignment::WriteFile(trace, [&](std::ostream& os) { model::WriteTraceCsv(os, s.trace); });
  Echo(o.out + ".config.json", c, "train", json{{"system", nlohmann::json(spec)}});
  const double acc = EvaluateUnits(corp, s, "heldout", kClean, g.jobs, c.seed).Accuracy();
  fmt::print("{}: {} units, heldout {} accuracy {:.2f}\n", o.out, s.alphabet.num_units(), UnitsName(s.spec.units), acc);
  return 0;
}

struct DecodeOpts {
  std::string model;
  std::string corpus;
  std::string split = "heldout";
  std::string snr = "clean";
  std::string mode;
  int beam = -1;
  double lm_weight = -1;
  std::string lexicon;
  std::string arpa;
  std::string out;
  std::string ref_out;
};

double ParseSnr(const std::string& s) {
  if (s == "clean") return kClean;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    Fail(ErrorKind::kConfigError, "bad SNR '" + s + "'");
  }
}

int DecodeCmd(const Globals& g, const DecodeOpts& o) {
  ExperimentConfig c = LoadExperiment(g);
  DecodeConfig dc = c.decode;
  if (!o.mode.empty()) dc.mode = o.mode;
  if (o.beam > 0) dc.beam = o.beam;
  if (o.lm_weight >= 0) dc.lm_weight = o.lm_weight;
  if (!o.lexicon.empty()) dc.lexicon = o.lexicon;
  if (!o.arpa.empty()) dc.arpa = o.arpa;
  dc.Validate();
  const TrainedSystem s = LoadSystem(o.model);
  const corpus::Corpus corp = GetCorpus(c, o.corpus);
  if (!(s.alphabet == UnitAlphabet(corp, s.spec.units)))
    Fail(ErrorKind::kAlphabetMismatch, o.model + ": model units do not match the corpus");

  std::optional<decode::Lexicon> lex;
  std::optional<decode::NGramModel> lm;
  if (dc.mode != "greedy") {
    if (!dc.lexicon.empty())
      lex = decode::Lexicon::Load(dc.lexicon, s.alphabet);
    else
      lex = s.spec.units == Units::kPhonemes ? corp.lexicon : MapLexicon(corp.lexicon, corp.visemes);
    if (!dc.arpa.empty()) lm = decode::NGramModel::LoadArpa(dc.arpa);
  }
  const Decoder dec(dc, s.alphabet, lex ? &*lex : nullptr, lm ? &*lm : nullptr);
  const auto utts = corp.Split(o.split);
  if (utts.empty()) Fail(ErrorKind::kInsufficientData, "no utterances in split '" + o.split + "'");
  const double snr = ParseSnr(o.snr);
  const auto post = Posteriors(corp, s, utts, snr, g.jobs, c.seed);
  std::vector<DecodeOutput> outs(utts.size());
  model::ParallelFor(static_cast<int>(utts.size()), g.jobs, [&](int i) { outs[i] = dec.Decode(post[i]); });

  EnsureParent(o.out);
  int failed = 0;
  alignment::WriteFile(o.out, [&](std::ostream& os) {
    for (std::size_t i = 0; i < utts.size(); ++i) {
      os << utts[i]->id;
      if (outs[i].failed) {
        ++failed;
        spdlog::warn("{}: no path through the decoding graph", utts[i]->id);
      } else if (dec.word_level()) {
        for (const auto& w : outs[i].words) os << ' ' << w;
      } else {
        for (int u : outs[i].units) os << ' ' << s.alphabet.name(u);
      }
      os << '\n';
    }
  });
  if (failed)
    alignment::WriteFile(o.out + ".failed", [&](std::ostream& os) {
      for (std::size_t i = 0; i < utts.size(); ++i)
        if (outs[i].failed) os << utts[i]->id << '\n';
    });
  if (!o.ref_out.empty())
    alignment::WriteFile(o.ref_out, [&](std::ostream& os) {
      for (const auto* u : utts) {
        os << u->id;
        if (dec.word_level()) {
          for (const auto& w : u->words) os << ' ' << w;
        } else {
          for (int k : Targets(corp, *u, s.spec.units).ids) os << ' ' << s.alphabet.name(k);
        }
        os << '\n';
      }
    });
  Echo(o.out + ".config.json", c, "decode",
       json{{"model", o.model}, {"split", o.split}, {"snr", SnrToJson(snr)}, {"decode", dc}});
  fmt::print("{}: {} hypotheses ({} without a path)\n", o.out, utts.size(), failed);
  return 0;
}

struct EvalOpts {
  std::string hyp;
  std::string ref;
  std::string per_utt;
  std::string metric = "wer";
};

int EvalCmd(const Globals&, const EvalOpts& o) {
  const auto hyp = ReadTranscripts(o.hyp);
  const auto ref = ReadTranscripts(o.ref);
  std::vector<std::string> missing;
  for (const auto& [id, v] : ref)
    if (!hyp.count(id)) missing.push_back(id);
  for (const auto& [id, v] : hyp)
    if (!ref.count(id)) missing.push_back(id + " (not in reference)");
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 20) list += fmt::format(", ... ({} total)", missing.size());
    Fail(ErrorKind::kParseError, "utterance ids differ between hypothesis and reference: " + list);
  }
  decode::ErrorCounts total;
  std::ostringstream rows;
  rows << "utt,substitutions,deletions,insertions,ref_length\n";
  for (const auto& [id, r] : ref) {
    const auto e = decode::EditDistance(r, hyp.at(id));
    total += e;
    rows << fmt::format("{},{},{},{},{}\n", id, e.substitutions, e.deletions, e.insertions, e.ref_length);
  }
  if (!o.per_utt.empty()) alignment::WriteFile(o.per_utt, [&](std::ostream& os) { os << rows.str(); });
  const double rate = 100.0 * total.ErrorRate();
  fmt::print("S={} D={} I={} N={}\n", total.substitutions, total.deletions, total.insertions, total.ref_length);
  if (o.metric == "acc")
    fmt::print("accuracy {:.2f}%\n", total.Accuracy());
  else
    fmt::print("error rate {:.2f}% (accuracy {:.2f}%)\n", rate, total.Accuracy());
  return 0;
}

struct MatrixOpts {
  std::string corpus;
  std::string out = "matrix";
};

int MatrixCmd(const Globals& g, const MatrixOpts& o) {
  ExperimentConfig c = LoadExperiment(g);
  if (c.systems.empty()) Fail(ErrorKind::kConfigError, "the matrix needs a \"systems\" list");
  const corpus::Corpus corp = GetCorpus(c, o.corpus);
  std::optional<decode::NGramModel> lm;
  if (c.decode.mode != "greedy" && !c.decode.arpa.empty()) lm = decode::NGramModel::LoadArpa(c.decode.arpa);
  fs::create_directories(o.out);
  Echo((fs::path(o.out) / "config.json").string(), c, "matrix");
  const std::string csv = (fs::path(o.out) / "matrix.csv").string();
  std::ofstream os(csv);
  if (!os) Fail(ErrorKind::kIoError, "cannot write " + csv);
  os << "system,train_cond,test_snr,wer,acc\n" << std::flush;
  // Rows are flushed as they finish so an interrupted run keeps its results.
  const auto rows = RunMatrix(corp, c.systems, c.test_snr, c.decode, lm ? &*lm : nullptr, g.jobs, c.seed,
                              [&](const MatrixRow& r) {
                                std::ostringstream one;
                                WriteMatrixCsv(one, {r});
                                const std::string s = one.str();
                                os << s.substr(s.find('\n') + 1) << std::flush;
                              });
  alignment::WriteFile((fs::path(o.out) / "matrix.svg").string(), [&](std::ostream& s) { WriteMatrixSvg(s, rows); });
  fmt::print("{}: {} rows\n", csv, rows.size());
  return 0;
}

struct AlignOpts {
  std::string audio, video, av;
  std::string corpus;
  std::string split = "heldout";
  double threshold = -1;
  double delay = std::numeric_limits<double>::quiet_NaN();
  std::string out = "alignment";
};

int AnalyzeAlignCmd(const Globals& g, const AlignOpts& o) {
  const ExperimentConfig c = LoadExperiment(g);
  const corpus::Corpus corp = GetCorpus(c, o.corpus);
  const TrainedSystem a = LoadSystem(o.audio), v = LoadSystem(o.video), av = LoadSystem(o.av);
  const double thr = o.threshold > 0 ? o.threshold : c.threshold;
  const double delay = std::isnan(o.delay) ? c.technical_delay_frames : o.delay;
  const auto r = AnalyzeAlignment(corp, a, v, av, o.split, thr, g.frame_ms, delay, g.jobs, c.seed);
  const fs::path out(o.out);
  fs::create_directories(out);
  alignment::WriteFile((out / "peaks.csv").string(), [&](std::ostream& s) { alignment::WritePeakCsv(s, r.records); });
  alignment::WriteFile((out / "offsets_video_audio.csv").string(),
                       [&](std::ostream& s) { alignment::WriteReportCsv(s, r.video_vs_audio); });
  alignment::WriteFile((out / "offsets_av_audio.csv").string(),
                       [&](std::ostream& s) { alignment::WriteReportCsv(s, r.av_vs_audio); });
  alignment::WriteFile((out / "alignment.svg").string(), [&](std::ostream& s) {
    alignment::WriteAlignmentSvg(s, r.positions, "mean peak position relative to audio (ms, per occurrence)");
  });
  Echo((out / "config.json").string(), c, "analyze-align",
       json{{"audio", o.audio}, {"video", o.video}, {"av", o.av}, {"split", o.split}, {"threshold", thr},
            {"technical_delay_frames", delay}, {"frame_ms", g.frame_ms}, {"averaging", "per-occurrence"}});
  const auto& gv = r.video_vs_audio.global;
  fmt::print("video - audio: {:.3f} frames ({:.1f} ms), std {:.3f}, {} pairs, {} unmatched\n", gv.mean, gv.mean_ms,
             gv.std, gv.count, r.video_vs_audio.unmatched);
  fmt::print("av - audio: {:.3f} frames ({:.1f} ms)\n", r.av_vs_audio.global.mean, r.av_vs_audio.global.mean_ms);
  fmt::print("av between audio and video for {} of {} units\n", r.units_between, r.units_compared);
  return 0;
}

void SetupLogging() {
  auto logger = spdlog::stderr_color_mt("ctcfuse");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* lv = std::getenv("CTCFUSE_LOG")) spdlog::set_level(spdlog::level::from_str(lv));
}

}  // namespace

int main(int argc, char** argv) {
  SetupLogging();
  CLI::App app{"Audio-visual CTC recognizer toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "experiment JSON file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "seed (overrides the config)");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::Range(1, 256));
  app.add_option("--frame-ms", g.frame_ms, "frame shift in milliseconds")->check(CLI::PositiveNumber);

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen-corpus", "generate a synthetic audio-visual corpus");
  c_gen->add_option("--out", gen.out, "output directory")->required();

  AugmentOpts aug;
  auto* c_aug = app.add_subcommand("augment", "noisy copies of a WAV or feature file");
  c_aug->add_option("--in", aug.in, "input .wav, .fmat or .csv")->required()->check(CLI::ExistingFile);
  c_aug->add_option("--out-dir", aug.out_dir, "output directory");
  c_aug->add_option("--snr", aug.snr, "SNR levels in dB (default: 10 levels, 40 to 20)")->delimiter(',');

  ExtractOpts ext;
  auto* c_ext = app.add_subcommand("extract", "compute features from a WAV or landmark track");
  c_ext->add_option("--wav", ext.wav, "16-bit PCM input")->check(CLI::ExistingFile);
  c_ext->add_option("--landmarks", ext.landmarks, "CSV/FMAT track: 36 lip coordinates then anchors")
      ->check(CLI::ExistingFile);
  c_ext->add_option("--anchors", ext.anchors, "anchor points in the landmark track");
  c_ext->add_option("--type", ext.type, "fbank | fbank_pitch | mfcc")
      ->check(CLI::IsMember({"fbank", "fbank_pitch", "mfcc"}));
  c_ext->add_flag("--cmvn", ext.cmvn, "per-utterance mean/variance normalization");
  c_ext->add_option("--context", ext.context, "stack +-k neighbouring frames")->check(CLI::NonNegativeNumber);
  c_ext->add_option("--out", ext.out, ".fmat or .csv output")->required();

  TrainOpts tr;
  auto* c_tr = app.add_subcommand("train", "train one system");
  c_tr->add_option("--corpus", tr.corpus, "corpus directory (default: config)");
  c_tr->add_option("--system", tr.system, "system name from the config");
  c_tr->add_option("--units", tr.units, "phonemes | visemes")->check(CLI::IsMember({"phonemes", "visemes"}));
  c_tr->add_option("--epochs", tr.epochs, "override the epoch count");
  c_tr->add_option("--out", tr.out, "checkpoint path")->required();
  c_tr->add_option("--trace", tr.trace, "accuracy trace CSV (default <out>.trace.csv)");

  DecodeOpts dec;
  auto* c_dec = app.add_subcommand("decode", "decode a corpus split with a trained system");
  c_dec->add_option("--model", dec.model, "checkpoint")->required();
  c_dec->add_option("--corpus", dec.corpus, "corpus directory (default: config)");
  c_dec->add_option("--split", dec.split, "train | heldout");
  c_dec->add_option("--snr", dec.snr, "audio test condition (dB or clean)");
  c_dec->add_option("--mode", dec.mode, "greedy | beam | wfst")->check(CLI::IsMember({"greedy", "beam", "wfst"}));
  c_dec->add_option("--beam", dec.beam, "prefix beam width");
  c_dec->add_option("--lm-weight", dec.lm_weight, "language model scale");
  c_dec->add_option("--lexicon", dec.lexicon, "lexicon file (default: the corpus lexicon)");
  c_dec->add_option("--arpa", dec.arpa, "ARPA language model");
  c_dec->add_option("--out", dec.out, "hypothesis file")->required();
  c_dec->add_option("--ref-out", dec.ref_out, "also write the matching reference file");

  EvalOpts ev;
  auto* c_ev = app.add_subcommand("eval", "score hypotheses against references");
  c_ev->add_option("--hyp", ev.hyp, "hypothesis file")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--ref", ev.ref, "reference file")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--per-utt", ev.per_utt, "per-utterance CSV");
  c_ev->add_option("--metric", ev.metric, "wer | acc")->check(CLI::IsMember({"wer", "acc"}));

  MatrixOpts mx;
  auto* c_mx = app.add_subcommand("matrix", "train every configured system and test every condition");
  c_mx->add_option("--corpus", mx.corpus, "corpus directory (default: config)");
  c_mx->add_option("--out", mx.out, "output directory");

  AlignOpts al;
  auto* c_al = app.add_subcommand("analyze-align", "three-system CTC peak alignment");
  c_al->add_option("--audio", al.audio, "audio-only checkpoint")->required();
  c_al->add_option("--video", al.video, "video-only checkpoint")->required();
  c_al->add_option("--av", al.av, "audio-visual checkpoint")->required();
  c_al->add_option("--corpus", al.corpus, "corpus directory (default: config)");
  c_al->add_option("--split", al.split, "train | heldout");
  c_al->add_option("--threshold", al.threshold, "peak threshold in (0, 1)");
  c_al->add_option("--delay", al.delay, "technical delay (frames) subtracted from video - audio");
  c_al->add_option("--out", al.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*c_gen) return GenCorpus(g, gen);
    if (*c_aug) return Augment(g, aug);
    if (*c_ext) return Extract(g, ext);
    if (*c_tr) return TrainCmd(g, tr);
    if (*c_dec) return DecodeCmd(g, dec);
    if (*c_ev) return EvalCmd(g, ev);
    if (*c_mx) return MatrixCmd(g, mx);
    if (*c_al) return AnalyzeAlignCmd(g, al);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return ExitCode(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 3;
  }
  return 0;
}
