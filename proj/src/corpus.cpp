// src/corpus.cpp


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

#include "ctcfuse/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/fmt/fmt.h>

#include "ctcfuse/error.hpp"
#include "ctcfuse/feature_io.hpp"

namespace ctcfuse::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

VisemeMap::VisemeMap(const LabelAlphabet& phonemes,
                     const std::vector<std::pair<std::string, std::string>>& pairs)
    : phonemes_(phonemes) {
  std::map<std::string, std::string> assign;
  for (const auto& [p, v] : pairs) {
    if (phonemes.id(p) < 0) Fail(ErrorKind::kInvalidArgument, "viseme map names unknown phoneme '" + p + "'");
    if (!assign.emplace(p, v).second)
      Fail(ErrorKind::kIncompleteMap, "phoneme '" + p + "' is mapped twice");
  }
  std::vector<std::string> vis;
  for (const auto& p : phonemes.units()) {
    auto it = assign.find(p);
    if (it == assign.end()) Fail(ErrorKind::kIncompleteMap, "phoneme '" + p + "' has no viseme");
    if (std::find(vis.begin(), vis.end(), it->second) == vis.end()) vis.push_back(it->second);
  }
  visemes_ = LabelAlphabet(vis);
  table_.assign(phonemes.output_dim(), 0);
  for (int k = 1; k <= phonemes.num_units(); ++k) table_[k] = visemes_.id(assign.at(phonemes.name(k)));
}

LabelSequence VisemeMap::Map(const LabelSequence& z) const {
  LabelSequence out;
  for (int id : z.ids) out.ids.push_back((*this)(id));
  return out;
}

std::vector<std::pair<std::string, std::string>> VisemeMap::Pairs() const {
  std::vector<std::pair<std::string, std::string>> p;
  for (int k = 1; k <= phonemes_.num_units(); ++k)
    p.emplace_back(phonemes_.name(k), visemes_.name(table_[k]));
  return p;
}

namespace {

// Phoneme -> viseme class over the full inventory.
const std::vector<std::pair<std::string, std::string>>& FullTable() {
  static const std::vector<std::pair<std::string, std::string>> t = {
      {"p", "bilabial"},      {"b", "bilabial"},      {"m", "bilabial"},      {"em", "bilabial"},
      {"f", "labiodental"},   {"v", "labiodental"},   {"th", "dental"},       {"dh", "dental"},
      {"t", "alveolar"},      {"d", "alveolar"},      {"n", "alveolar"},      {"s", "alveolar"},
      {"z", "alveolar"},      {"l", "alveolar"},      {"el", "alveolar"},     {"en", "alveolar"},
      {"dx", "alveolar"},     {"sh", "postalveolar"}, {"zh", "postalveolar"}, {"ch", "postalveolar"},
      {"jh", "postalveolar"}, {"k", "velar"},         {"g", "velar"},         {"ng", "velar"},
      {"hh", "velar"},        {"w", "rhotic_round"},  {"r", "rhotic_round"},  {"er", "rhotic_round"},
      {"axr", "rhotic_round"},{"y", "spread"},        {"iy", "spread"},       {"ih", "spread"},
      {"ae", "open_front"},   {"eh", "open_front"},   {"ey", "open_front"},   {"aa", "open_back"},
      {"ao", "open_back"},    {"ah", "open_back"},    {"ax", "open_back"},    {"aw", "diphthong"},
      {"ay", "diphthong"},    {"oy", "diphthong"},    {"uw", "rounded"},      {"uh", "rounded"},
      {"ow", "rounded"},
  };
  return t;
}

const std::vector<std::pair<std::string, std::string>>& DeskTable() {
  static const std::vector<std::pair<std::string, std::string>> t = {
      {"p", "bilabial"}, {"b", "bilabial"},  {"m", "bilabial"},  {"f", "labial"},
      {"v", "labial"},   {"w", "labial"},    {"t", "alveolar"},  {"d", "alveolar"},
      {"s", "alveolar"}, {"aa", "open"},     {"ae", "open"},     {"ah", "open"},
  };
  return t;
}

std::vector<std::string> Names(const std::vector<std::pair<std::string, std::string>>& t) {
  std::vector<std::string> n;
  for (const auto& [p, v] : t) n.push_back(p);
  return n;
}

}  // namespace

const std::vector<std::string>& FullPhonemeSet() {
  static const std::vector<std::string> s = Names(FullTable());
  return s;
}

const std::vector<std::string>& DeskPhonemeSet() {
  static const std::vector<std::string> s = Names(DeskTable());
  return s;
}

LabelAlphabet PhonemeAlphabet(int size) {
  if (size < 1) Fail(ErrorKind::kConfigError, "phoneme inventory must be non-empty");
  if (size == 12) return LabelAlphabet(DeskPhonemeSet());
  if (size == 45) return LabelAlphabet(FullPhonemeSet());
  std::vector<std::string> names;
  for (int i = 1; i <= size; ++i) names.push_back(fmt::format("ph{}", i));
  return LabelAlphabet(names);
}

VisemeMap DefaultVisemeMap(const LabelAlphabet& phonemes) {
  std::map<std::string, std::string> known;
  for (const auto* t : {&FullTable(), &DeskTable()})
    for (const auto& [p, v] : *t) known.emplace(p, v);
  const bool generic = phonemes.num_units() > 0 && phonemes.units()[0].rfind("ph", 0) == 0 &&
                       !known.count(phonemes.units()[0]);
  const bool desk = phonemes.units() == DeskPhonemeSet();
  std::vector<std::pair<std::string, std::string>> pairs;
  const int K = phonemes.num_units();
  const int classes = std::min(12, std::max(1, (K + 2) / 3));
  for (int k = 1; k <= K; ++k) {
    const std::string& p = phonemes.name(k);
    if (generic) {
      pairs.emplace_back(p, fmt::format("vis{}", 1 + (k - 1) * classes / K));
      continue;
    }
    auto table = desk ? &DeskTable() : &FullTable();
    auto it = std::find_if(table->begin(), table->end(), [&](const auto& e) { return e.first == p; });
    if (it == table->end()) Fail(ErrorKind::kIncompleteMap, "no built-in viseme for phoneme '" + p + "'");
    pairs.push_back(*it);
  }
  return VisemeMap(phonemes, pairs);
}

void CorpusConfig::Validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) Fail(ErrorKind::kConfigError, what);
  };
  need(num_phonemes >= 1, "num_phonemes must be >= 1");
  need(lexicon_size >= 1, "lexicon_size must be >= 1");
  need(min_pron_length >= 1 && max_pron_length >= min_pron_length, "bad pronunciation length range");
  need(min_words >= 1 && max_words >= min_words, "bad words-per-utterance range");
  need(num_train >= 0 && num_heldout >= 0 && num_train + num_heldout >= 1, "corpus needs utterances");
  need(min_duration >= 1, "min_duration must be >= 1");
  need(continue_prob >= 0 && continue_prob < 1, "continue_prob must be in [0, 1)");
  need(audio_dim >= 1 && video_dim >= 1, "feature dimensions must be >= 1");
  need(audio_noise_std >= 0 && video_noise_std >= 0, "noise levels must be >= 0");
  need(video_lead_frames >= 0, "video_lead_frames must be >= 0");
  // The leading silence is always longer than the lead, so the bound on
  // utterance length holds by construction.
  const double combos = std::pow(static_cast<double>(num_phonemes), min_pron_length);
  need(lexicon_size <= combos || max_pron_length > min_pron_length,
       "lexicon_size exceeds the number of distinct pronunciations");
}

void to_json(json& j, const CorpusConfig& c) {
  j = json{{"num_phonemes", c.num_phonemes},
           {"lexicon_size", c.lexicon_size},
           {"min_pron_length", c.min_pron_length},
           {"max_pron_length", c.max_pron_length},
           {"min_words", c.min_words},
           {"max_words", c.max_words},
           {"num_train", c.num_train},
           {"num_heldout", c.num_heldout},
           {"min_duration", c.min_duration},
           {"continue_prob", c.continue_prob},
           {"audio_dim", c.audio_dim},
           {"video_dim", c.video_dim},
           {"feature_offset", c.feature_offset},
           {"audio_mean_scale", c.audio_mean_scale},
           {"audio_noise_std", c.audio_noise_std},
           {"video_mean_scale", c.video_mean_scale},
           {"video_detail_scale", c.video_detail_scale},
           {"video_noise_std", c.video_noise_std},
           {"video_lead_frames", c.video_lead_frames},
           {"snr_db", c.snr_db},
           {"viseme_map", c.viseme_pairs},
           {"seed", c.seed}};
}

void from_json(const json& j, CorpusConfig& c) {
  if (!j.is_object()) Fail(ErrorKind::kConfigError, "corpus config must be a JSON object");
  json defaults;
  to_json(defaults, CorpusConfig{});
  for (const auto& [k, v] : j.items())
    if (!defaults.contains(k)) Fail(ErrorKind::kConfigError, "unknown corpus config key '" + k + "'");
  try {
    auto get = [&](const char* k, auto& field) {
      if (j.contains(k)) j.at(k).get_to(field);
    };
    get("num_phonemes", c.num_phonemes);
    get("lexicon_size", c.lexicon_size);
    get("min_pron_length", c.min_pron_length);
    get("max_pron_length", c.max_pron_length);
    get("min_words", c.min_words);
    get("max_words", c.max_words);
    get("num_train", c.num_train);
    get("num_heldout", c.num_heldout);
    get("min_duration", c.min_duration);
    get("continue_prob", c.continue_prob);
    get("audio_dim", c.audio_dim);
    get("video_dim", c.video_dim);
    get("feature_offset", c.feature_offset);
    get("audio_mean_scale", c.audio_mean_scale);
    get("audio_noise_std", c.audio_noise_std);
    get("video_mean_scale", c.video_mean_scale);
    get("video_detail_scale", c.video_detail_scale);
    get("video_noise_std", c.video_noise_std);
    get("video_lead_frames", c.video_lead_frames);
    get("snr_db", c.snr_db);
    get("viseme_map", c.viseme_pairs);
    get("seed", c.seed);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfigError, std::string("corpus config: ") + e.what());
  }
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
  // splitmix64 finalizer over the combined inputs.
  std::uint64_t z = seed ^ (index * 0x9E3779B97F4A7C15ULL) ^ (salt * 0xD1B54A32D192ED03ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<const Utterance*> Corpus::Split(const std::string& name) const {
  std::vector<const Utterance*> out;
  for (const auto& u : utterances)
    if (u.split == name) out.push_back(&u);
  return out;
}

namespace {

double Round32(double v) { return static_cast<double>(static_cast<float>(v)); }

Matrix GaussianMeans(std::mt19937_64& rng, int rows, int dim, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, dim);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

Corpus GenerateCorpus(const CorpusConfig& cfg) {
  cfg.Validate();
  Corpus c;
  c.config = cfg;
  c.phonemes = PhonemeAlphabet(cfg.num_phonemes);
  c.visemes = cfg.viseme_pairs.empty() ? DefaultVisemeMap(c.phonemes)
                                       : VisemeMap(c.phonemes, cfg.viseme_pairs);
  const int K = c.phonemes.num_units();
  const int V = c.visemes.visemes().num_units();

  std::mt19937_64 rng(DeriveSeed(cfg.seed, 0, 0xC0));
  {
    std::uniform_int_distribution<int> len(cfg.min_pron_length, cfg.max_pron_length);
    std::uniform_int_distribution<int> unit(1, K);
    std::set<std::vector<int>> seen;
    for (int w = 0; w < cfg.lexicon_size; ++w) {
      std::vector<int> pron;
      do {
        pron.assign(len(rng), 0);
        for (auto& u : pron) u = unit(rng);
      } while (!seen.insert(pron).second);
      c.lexicon.Add(fmt::format("w{:02d}", w), pron);
    }
  }
  c.audio_means = GaussianMeans(rng, K + 1, cfg.audio_dim, cfg.audio_mean_scale).array() +
                  cfg.feature_offset;
  const Matrix vis = GaussianMeans(rng, V + 1, cfg.video_dim, cfg.video_mean_scale);
  const Matrix detail = GaussianMeans(rng, K + 1, cfg.video_dim, cfg.video_detail_scale);
  c.video_means.resize(K + 1, cfg.video_dim);
  for (int k = 0; k <= K; ++k)
    c.video_means.row(k) = vis.row(k == 0 ? 0 : c.visemes(k)) + detail.row(k) +
                           RowVector::Constant(cfg.video_dim, cfg.feature_offset);

  const int total = cfg.num_train + cfg.num_heldout;
  c.utterances.resize(total);
  for (int i = 0; i < total; ++i) {
    Utterance& u = c.utterances[i];
    const bool train = i < cfg.num_train;
    u.split = train ? "train" : "heldout";
    u.id = fmt::format("{}{:04d}", train ? "tr" : "dv", train ? i + 1 : i - cfg.num_train + 1);
    std::mt19937_64 r(DeriveSeed(cfg.seed, static_cast<std::uint64_t>(i), 1));
    std::uniform_int_distribution<int> nw(cfg.min_words, cfg.max_words);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(c.lexicon.prons().size()) - 1);
    std::geometric_distribution<int> extra(1.0 - cfg.continue_prob);
    std::normal_distribution<double> g(0.0, 1.0);

    // Segment classes: 0 = silence, k = phoneme k.
    std::vector<int> cls{0};
    const int n = nw(r);
    for (int w = 0; w < n; ++w) {
      const auto& p = c.lexicon.prons()[pick(r)];
      u.words.push_back(c.lexicon.words().Word(p.word));
      for (int k : p.units) {
        cls.push_back(k);
        u.phonemes.ids.push_back(k);
      }
    }
    cls.push_back(0);

    std::vector<int> len(cls.size());
    for (std::size_t s = 0; s < cls.size(); ++s) {
      const int lo = s == 0 ? std::max(cfg.min_duration, cfg.video_lead_frames + 1) : cfg.min_duration;
      len[s] = lo + extra(r);
    }
    int T = 0;
    for (int l : len) T += l;
    const int L = cfg.video_lead_frames;
    int start = 1;
    for (std::size_t s = 0; s < cls.size(); ++s) {
      const std::string name = cls[s] ? c.phonemes.name(cls[s]) : kSilence;
      const int end = start + len[s] - 1;
      u.audio_segments.push_back({name, start, end});
      const bool last = s + 1 == cls.size();
      u.video_segments.push_back({name, std::max(1, start - L), last ? T : end - L});
      start = end + 1;
    }

    u.audio.resize(T, cfg.audio_dim);
    u.video.resize(T, cfg.video_dim);
    for (std::size_t s = 0; s < cls.size(); ++s) {
      for (int t = u.audio_segments[s].start; t <= u.audio_segments[s].end; ++t)
        for (int d = 0; d < cfg.audio_dim; ++d)
          u.audio(t - 1, d) = Round32(c.audio_means(cls[s], d) + cfg.audio_noise_std * g(r));
      for (int t = u.video_segments[s].start; t <= u.video_segments[s].end; ++t)
        for (int d = 0; d < cfg.video_dim; ++d)
          u.video(t - 1, d) = Round32(c.video_means(cls[s], d) + cfg.video_noise_std * g(r));
    }
  }
  return c;
}

Matrix CorruptFeatures(const Matrix& x, double snr_db, std::uint64_t seed) {
  const double power = x.size() ? x.squaredNorm() / static_cast<double>(x.size()) : 0.0;
  if (!(power > 0)) Fail(ErrorKind::kZeroPowerSignal, "cannot set SNR of an all-zero feature matrix");
  if (std::isinf(snr_db) && snr_db > 0) return x;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(power / std::pow(10.0, snr_db / 10.0)));
  Matrix y = x;
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) += g(rng);
  return y;
}

namespace {

std::ofstream OpenOut(const fs::path& p) {
  std::ofstream os(p);
  if (!os) Fail(ErrorKind::kIoError, "cannot write " + p.string());
  return os;
}

std::ifstream OpenIn(const fs::path& p) {
  std::ifstream is(p);
  if (!is) Fail(ErrorKind::kParseError, p.string() + ": missing or unreadable");
  return is;
}

json MatrixJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

Matrix JsonMatrix(const json& j) {
  Matrix m(j.size(), j.empty() ? 0 : j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i)
    for (std::size_t k = 0; k < j[i].size(); ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

// Reads "utt field..." lines into a map keyed by utterance id.
std::map<std::string, std::vector<std::vector<std::string>>> ReadKeyed(const fs::path& p,
                                                                       bool one_per_utt) {
  std::ifstream is = OpenIn(p);
  std::map<std::string, std::vector<std::vector<std::string>>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string id;
    if (!(ss >> id)) continue;
    std::vector<std::string> fields;
    for (std::string f; ss >> f;) fields.push_back(f);
    auto& slot = out[id];
    if (one_per_utt && !slot.empty())
      Fail(ErrorKind::kParseError, fmt::format("{}:{}: duplicate entry for '{}'", p.string(), lineno, id));
    slot.push_back(std::move(fields));
  }
  return out;
}

std::vector<Segment> ParseSegments(const std::vector<std::vector<std::string>>& rows,
                                   const fs::path& p, const std::string& id) {
  std::vector<Segment> segs;
  for (const auto& r : rows) {
    if (r.size() != 3) Fail(ErrorKind::kParseError, p.string() + ": bad segment line for '" + id + "'");
    try {
      segs.push_back({r[0], std::stoi(r[1]), std::stoi(r[2])});
    } catch (const std::exception&) {
      Fail(ErrorKind::kParseError, p.string() + ": bad frame index for '" + id + "'");
    }
  }
  return segs;
}

}  // namespace

void WriteCorpus(const std::string& dir, const Corpus& c) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root / "audio", ec);
  fs::create_directories(root / "video", ec);
  if (ec) Fail(ErrorKind::kIoError, "cannot create " + dir + ": " + ec.message());

  auto labels = OpenOut(root / "labels.txt");
  auto words = OpenOut(root / "words.txt");
  auto sega = OpenOut(root / "segments_audio.txt");
  auto segv = OpenOut(root / "segments_video.txt");
  json utts = json::array();
  for (const auto& u : c.utterances) {
    features::WriteFmat((root / "audio" / (u.id + ".fmat")).string(), u.audio);
    features::WriteFmat((root / "video" / (u.id + ".fmat")).string(), u.video);
    labels << u.id;
    for (int k : u.phonemes.ids) labels << ' ' << c.phonemes.name(k);
    labels << '\n';
    words << u.id;
    for (const auto& w : u.words) words << ' ' << w;
    words << '\n';
    for (const auto& s : u.audio_segments) sega << fmt::format("{} {} {} {}\n", u.id, s.label, s.start, s.end);
    for (const auto& s : u.video_segments) segv << fmt::format("{} {} {} {}\n", u.id, s.label, s.start, s.end);
    utts.push_back({{"id", u.id}, {"split", u.split}});
  }
  auto lex = OpenOut(root / "lexicon.txt");
  c.lexicon.Write(lex, c.phonemes);

  json meta;
  meta["config"] = c.config;
  meta["seed"] = c.config.seed;
  meta["phonemes"] = c.phonemes.units();
  meta["viseme_map"] = c.visemes.Pairs();
  meta["audio_means"] = MatrixJson(c.audio_means);
  meta["video_means"] = MatrixJson(c.video_means);
  meta["utterances"] = utts;
  auto m = OpenOut(root / "meta.json");
  m << meta.dump(2) << '\n';
  for (auto* os : {&labels, &words, &sega, &segv, &lex, &m})
    if (!*os) Fail(ErrorKind::kIoError, "write failed under " + dir);
}

Corpus ReadCorpus(const std::string& dir) {
  const fs::path root(dir);
  Corpus c;
  json meta;
  {
    auto is = OpenIn(root / "meta.json");
    try {
      meta = json::parse(is);
      c.config = meta.at("config").get<CorpusConfig>();
      c.phonemes = LabelAlphabet(meta.at("phonemes").get<std::vector<std::string>>());
      c.visemes = VisemeMap(
          c.phonemes, meta.at("viseme_map").get<std::vector<std::pair<std::string, std::string>>>());
      c.audio_means = JsonMatrix(meta.at("audio_means"));
      c.video_means = JsonMatrix(meta.at("video_means"));
    } catch (const json::exception& e) {
      Fail(ErrorKind::kParseError, (root / "meta.json").string() + ": " + e.what());
    } catch (const Error& e) {
      Fail(ErrorKind::kParseError, (root / "meta.json").string() + ": " + e.what());
    }
  }
  c.lexicon = decode::Lexicon::Load((root / "lexicon.txt").string(), c.phonemes);

  const auto labels = ReadKeyed(root / "labels.txt", true);
  const auto words = ReadKeyed(root / "words.txt", true);
  const auto sega = ReadKeyed(root / "segments_audio.txt", false);
  const auto segv = ReadKeyed(root / "segments_video.txt", false);
  for (const auto& entry : meta.at("utterances")) {
    Utterance u;
    u.id = entry.at("id").get<std::string>();
    u.split = entry.at("split").get<std::string>();
    auto need = [&](const auto& m, const char* file) -> const auto& {
      auto it = m.find(u.id);
      if (it == m.end())
        Fail(ErrorKind::kParseError, (root / file).string() + ": no entry for utterance '" + u.id + "'");
      return it->second;
    };
    for (const auto& name : need(labels, "labels.txt")[0]) {
      const int id = c.phonemes.id(name);
      if (id < 1)
        Fail(ErrorKind::kParseError, (root / "labels.txt").string() + ": unknown phoneme '" + name + "'");
      u.phonemes.ids.push_back(id);
    }
    u.words = need(words, "words.txt")[0];
    u.audio_segments = ParseSegments(need(sega, "segments_audio.txt"), root / "segments_audio.txt", u.id);
    u.video_segments = ParseSegments(need(segv, "segments_video.txt"), root / "segments_video.txt", u.id);
    u.audio = features::ReadFmat((root / "audio" / (u.id + ".fmat")).string());
    u.video = features::ReadFmat((root / "video" / (u.id + ".fmat")).string());
    if (u.audio.rows() != u.video.rows())
      Fail(ErrorKind::kParseError, "audio and video of '" + u.id + "' differ in length");
    c.utterances.push_back(std::move(u));
  }
  return c;
}

}  // namespace ctcfuse::corpus
