// src/features.cpp


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

#include "ctcfuse/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>

#include <unsupported/Eigen/FFT>

#include "ctcfuse/binary_io.hpp"
#include "ctcfuse/error.hpp"

namespace ctcfuse::features {

const char* ModalityName(Modality m) {
  switch (m) {
    case Modality::kAudio: return "audio";
    case Modality::kVideo: return "video";
    case Modality::kFused: return "fused";
  }
  return "?";
}

Modality ParseModality(const std::string& name) {
  if (name == "audio") return Modality::kAudio;
  if (name == "video") return Modality::kVideo;
  if (name == "fused") return Modality::kFused;
  Fail(ErrorKind::kParseError, "unknown modality '" + name + "'");
}

void Waveform::Validate() const {
  if (sample_rate_hz <= 0) Fail(ErrorKind::kInvalidArgument, "sample rate must be positive");
  if (samples.empty()) Fail(ErrorKind::kEmptySignal, "waveform has no samples");
  for (double s : samples)
    if (!std::isfinite(s)) Fail(ErrorKind::kInvalidArgument, "non-finite sample");
}

void FeatureSequence::Validate() const {
  if (frames.rows() < 1 || frames.cols() < 1)
    Fail(ErrorKind::kInvalidArgument, "feature sequence is empty");
  if (!frames.allFinite()) Fail(ErrorKind::kInvalidArgument, "non-finite feature value");
  if (!(frame_shift_ms > 0)) Fail(ErrorKind::kInvalidArgument, "frame shift must be positive");
  if (!dim_labels.empty() && static_cast<int>(dim_labels.size()) != dim())
    Fail(ErrorKind::kDimensionMismatch, "dim_labels does not match feature dimension");
}

void LandmarkTrack::Validate() const {
  if (points.cols() != 2 * kNumLipPoints)
    Fail(ErrorKind::kDimensionMismatch,
         "landmark track needs " + std::to_string(2 * kNumLipPoints) + " coordinates per frame");
  if (anchors.rows() != points.rows())
    Fail(ErrorKind::kLengthMismatch, "anchor and lip tracks differ in length");
  if (anchors.cols() < 6 || anchors.cols() % 2)
    Fail(ErrorKind::kDimensionMismatch, "need at least three (x, y) anchor points");
  if (!points.allFinite() || !anchors.allFinite())
    Fail(ErrorKind::kInvalidArgument, "non-finite landmark coordinate");
}

int FrameConfig::ShiftSamples(int sr) const {
  return static_cast<int>(std::lround(frame_shift_ms * sr / 1000.0));
}

int FrameConfig::WindowSamples(int sr) const {
  return static_cast<int>(std::lround(frame_length_ms * sr / 1000.0));
}

void FrameConfig::Validate(int sr) const {
  if (ShiftSamples(sr) < 1 || WindowSamples(sr) < 2)
    Fail(ErrorKind::kConfigError, "frame shift/length too small for the sample rate");
  if (num_mel_bins < 1) Fail(ErrorKind::kConfigError, "num_mel_bins must be positive");
  const double hi = high_freq_hz > 0 ? high_freq_hz : sr / 2.0;
  if (low_freq_hz < 0 || low_freq_hz >= hi || hi > sr / 2.0)
    Fail(ErrorKind::kConfigError, "bad mel frequency range");
  if (!(min_f0_hz > 0 && min_f0_hz < max_f0_hz))
    Fail(ErrorKind::kConfigError, "bad F0 search range");
}

double MelScale(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double InverseMelScale(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

double HighFreq(const FrameConfig& cfg, int sr) {
  return cfg.high_freq_hz > 0 ? cfg.high_freq_hz : sr / 2.0;
}

std::vector<double> MelEdges(const FrameConfig& cfg, int sr) {
  const double lo = MelScale(cfg.low_freq_hz);
  const double hi = MelScale(HighFreq(cfg, sr));
  std::vector<double> e(cfg.num_mel_bins + 2);
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = lo + (hi - lo) * static_cast<double>(i) / (cfg.num_mel_bins + 1);
  return e;
}

// num_mel_bins x (nfft/2 + 1) triangular weights on the mel axis.
Matrix MelWeights(const FrameConfig& cfg, int sr, int nfft) {
  const auto edges = MelEdges(cfg, sr);
  const int nbins = nfft / 2 + 1;
  Matrix w = Matrix::Zero(cfg.num_mel_bins, nbins);
  for (int k = 0; k < nbins; ++k) {
    const double mel = MelScale(static_cast<double>(k) * sr / nfft);
    for (int m = 0; m < cfg.num_mel_bins; ++m) {
      const double l = edges[m], c = edges[m + 1], r = edges[m + 2];
      if (mel > l && mel < r) w(m, k) = mel <= c ? (mel - l) / (c - l) : (r - mel) / (r - c);
    }
  }
  return w;
}

void CheckLength(const Waveform& w, const FrameConfig& cfg) {
  w.Validate();
  cfg.Validate(w.sample_rate_hz);
  if (static_cast<long>(w.samples.size()) < cfg.WindowSamples(w.sample_rate_hz))
    Fail(ErrorKind::kEmptySignal, "waveform is shorter than one analysis window");
}

}  // namespace

std::vector<double> MelCenters(const FrameConfig& cfg, int sr) {
  const auto e = MelEdges(cfg, sr);
  std::vector<double> c;
  for (int m = 0; m < cfg.num_mel_bins; ++m) c.push_back(InverseMelScale(e[m + 1]));
  return c;
}

int NumFrames(const Waveform& w, const FrameConfig& cfg) {
  const long len = static_cast<long>(w.samples.size());
  const int win = cfg.WindowSamples(w.sample_rate_hz);
  if (len < win) return 0;
  return static_cast<int>((len - win) / cfg.ShiftSamples(w.sample_rate_hz)) + 1;
}

FeatureSequence ComputeFbank(const Waveform& w, const FrameConfig& cfg) {
  CheckLength(w, cfg);
  const int sr = w.sample_rate_hz;
  const int win = cfg.WindowSamples(sr);
  const int hop = cfg.ShiftSamples(sr);
  const int nfft = static_cast<int>(std::bit_ceil(static_cast<unsigned>(win)));
  const int T = NumFrames(w, cfg);
  const Matrix weights = MelWeights(cfg, sr, nfft);

  std::vector<double> hann(win);
  for (int n = 0; n < win; ++n)
    hann[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / (win - 1));

  Eigen::FFT<double> fft;
  std::vector<double> buf(nfft);
  std::vector<std::complex<double>> spec;
  Vector power(nfft / 2 + 1);
  Matrix out(T, cfg.num_mel_bins);
  for (int t = 0; t < T; ++t) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int n = 0; n < win; ++n) buf[n] = w.samples[static_cast<std::size_t>(t) * hop + n] * hann[n];
    fft.fwd(spec, buf);
    for (int k = 0; k <= nfft / 2; ++k) power[k] = std::norm(spec[k]);
    const Vector e = weights * power;
    for (int m = 0; m < cfg.num_mel_bins; ++m) out(t, m) = std::log(std::max(e[m], kEnergyFloor));
  }
  FeatureSequence fs(std::move(out), Modality::kAudio, cfg.frame_shift_ms);
  for (int m = 0; m < cfg.num_mel_bins; ++m) fs.dim_labels.push_back("fbank" + std::to_string(m));
  return fs;
}

FeatureSequence ComputeMfcc(const Waveform& w, const FrameConfig& cfg) {
  const FeatureSequence fb = ComputeFbank(w, cfg);
  const int n = fb.dim();
  const int keep = std::min(12, n - 1);
  // Orthonormal DCT-II rows 1..keep.
  Matrix dct(n, keep);
  for (int k = 1; k <= keep; ++k)
    for (int i = 0; i < n; ++i)
      dct(i, k - 1) = std::sqrt(2.0 / n) * std::cos(std::numbers::pi * k * (i + 0.5) / n);
  FeatureSequence fs(fb.frames * dct, Modality::kAudio, cfg.frame_shift_ms);
  for (int k = 1; k <= keep; ++k) fs.dim_labels.push_back("c" + std::to_string(k));
  return fs;
}

FeatureSequence ComputePitchProxy(const Waveform& w, const FrameConfig& cfg) {
  CheckLength(w, cfg);
  const int sr = w.sample_rate_hz;
  const int win = cfg.WindowSamples(sr);
  const int hop = cfg.ShiftSamples(sr);
  const int T = NumFrames(w, cfg);
  const int lag_lo = std::max(1, static_cast<int>(std::ceil(sr / cfg.max_f0_hz)));
  const int lag_hi = std::min(win - 2, static_cast<int>(std::floor(sr / cfg.min_f0_hz)));

  Matrix out(T, 3);
  double carry = std::log(100.0);
  std::vector<double> x(win), ncc;
  for (int t = 0; t < T; ++t) {
    double mean = 0.0;
    for (int n = 0; n < win; ++n) mean += (x[n] = w.samples[static_cast<std::size_t>(t) * hop + n]);
    mean /= win;
    for (double& v : x) v -= mean;

    ncc.assign(std::max(0, lag_hi - lag_lo + 1), 0.0);
    for (int tau = lag_lo; tau <= lag_hi; ++tau) {
      double r = 0.0, e0 = 0.0, e1 = 0.0;
      for (int n = 0; n + tau < win; ++n) {
        r += x[n] * x[n + tau];
        e0 += x[n] * x[n];
        e1 += x[n + tau] * x[n + tau];
      }
      ncc[tau - lag_lo] = e0 > 0 && e1 > 0 ? r / std::sqrt(e0 * e1) : 0.0;
    }
    double peak = 0.0;
    double lag = 0.0;
    if (!ncc.empty()) {
      const double best = *std::max_element(ncc.begin(), ncc.end());
      // Prefer the shortest lag near the global maximum so harmonics of the
      // period do not halve the estimate.
      const int n = static_cast<int>(ncc.size());
      for (int i = 0; i < n && best > 0; ++i) {
        const double l = i > 0 ? ncc[i - 1] : -1.0;
        const double r = i + 1 < n ? ncc[i + 1] : -1.0;
        if (ncc[i] >= l && ncc[i] >= r && ncc[i] >= 0.9 * best) {
          peak = ncc[i];
          double delta = 0.0;
          if (i > 0 && i + 1 < n) {
            const double den = l - 2 * ncc[i] + r;
            if (den < 0) delta = std::clamp(0.5 * (l - r) / den, -0.5, 0.5);
          }
          lag = lag_lo + i + delta;
          break;
        }
      }
    }
    peak = std::clamp(peak, 0.0, 1.0);
    if (peak >= cfg.voicing_threshold && lag > 0) carry = std::log(sr / lag);
    out(t, 0) = carry;
    out(t, 1) = peak;
  }
  for (int t = 0; t < T; ++t) {
    if (T == 1)
      out(t, 2) = 0.0;
    else if (t == 0)
      out(t, 2) = out(1, 0) - out(0, 0);
    else if (t == T - 1)
      out(t, 2) = out(t, 0) - out(t - 1, 0);
    else
      out(t, 2) = 0.5 * (out(t + 1, 0) - out(t - 1, 0));
  }
  FeatureSequence fs(std::move(out), Modality::kAudio, cfg.frame_shift_ms);
  fs.dim_labels = {"logf0", "voicing", "dlogf0"};
  return fs;
}

FeatureSequence Cmvn(const FeatureSequence& x) {
  x.Validate();
  const int T = x.num_frames();
  if (T < 2) Fail(ErrorKind::kDegenerateUtterance, "CMVN needs at least two frames");
  FeatureSequence y = x;
  for (int d = 0; d < x.dim(); ++d) {
    auto col = y.frames.col(d);
    const double mean = col.mean();
    col.array() -= mean;
    const double var = col.squaredNorm() / T;
    if (var > 1e-20 * std::max(1.0, mean * mean))
      col /= std::sqrt(var);
    else
      col.setZero();
  }
  return y;
}

FeatureSequence StackContext(const FeatureSequence& x, int k) {
  if (k < 0) Fail(ErrorKind::kInvalidArgument, "context radius must be >= 0");
  x.Validate();
  const int T = x.num_frames(), D = x.dim();
  FeatureSequence y = x;
  y.frames.resize(T, (2 * k + 1) * D);
  for (int t = 0; t < T; ++t)
    for (int j = -k; j <= k; ++j)
      y.frames.block(t, (j + k) * D, 1, D) = x.frames.row(std::clamp(t + j, 0, T - 1));
  y.dim_labels.clear();
  if (!x.dim_labels.empty())
    for (int j = -k; j <= k; ++j)
      for (const auto& l : x.dim_labels) y.dim_labels.push_back(l + "@" + std::to_string(j));
  return y;
}

double SnrDb(double signal_power, double noise_power) {
  return 10.0 * std::log10(signal_power / noise_power);
}

std::vector<double> SnrGrid(double hi, double lo, int levels) {
  if (levels < 1) Fail(ErrorKind::kInvalidArgument, "SNR grid needs at least one level");
  if (levels == 1) return {hi};
  std::vector<double> g(levels);
  for (int i = 0; i < levels; ++i) g[i] = hi + (lo - hi) * i / (levels - 1);
  return g;
}

Waveform AddNoiseAtSnr(const Waveform& w, double snr_db, std::uint64_t seed) {
  w.Validate();
  double power = 0.0;
  for (double s : w.samples) power += s * s;
  power /= static_cast<double>(w.samples.size());
  if (power <= 0.0) Fail(ErrorKind::kZeroPowerSignal, "cannot set SNR of an all-zero signal");
  if (std::isinf(snr_db) && snr_db > 0) return w;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(power / std::pow(10.0, snr_db / 10.0)));
  Waveform out = w;
  for (double& s : out.samples) s += noise(rng);
  return out;
}

namespace {

// Least-squares affine map (3 x 2, homogeneous rows) taking `from` onto `to`;
// both are A x 2.
Eigen::Matrix<double, 3, 2> FitAffine(const Eigen::MatrixX2d& from, const Eigen::MatrixX2d& to) {
  const Eigen::RowVector2d c = from.colwise().mean();
  const Eigen::MatrixX2d centered = from.rowwise() - c;
  const Eigen::JacobiSVD<Eigen::MatrixX2d> svd(centered);
  const auto s = svd.singularValues();
  if (!(s[0] > 0) || s[1] <= 1e-9 * s[0])
    Fail(ErrorKind::kSingularAlignment, "anchor points are collinear");
  Eigen::MatrixXd h(from.rows(), 3);
  h << from, Eigen::VectorXd::Ones(from.rows());
  return h.colPivHouseholderQr().solve(to);
}

Eigen::MatrixX2d AsPoints(const RowVector& row) {
  Eigen::MatrixX2d p(row.size() / 2, 2);
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) << row[2 * i], row[2 * i + 1];
  return p;
}

}  // namespace

FeatureSequence LandmarkFeatures(const LandmarkTrack& lm, const RowVector& reference) {
  lm.Validate();
  const int T = lm.num_frames();
  if (T < 3) Fail(ErrorKind::kDegenerateUtterance, "landmark kinematics need three frames");
  const RowVector ref = reference.size() ? reference : RowVector(lm.anchors.colwise().mean());
  if (ref.size() != lm.anchors.cols())
    Fail(ErrorKind::kDimensionMismatch, "reference anchor layout has the wrong size");
  const Eigen::MatrixX2d ref_pts = AsPoints(ref);

  const int P = kNumLipPoints;
  Matrix norm(T, 2 * P);
  for (int t = 0; t < T; ++t) {
    const auto a = FitAffine(AsPoints(lm.anchors.row(t)), ref_pts);
    Eigen::MatrixXd lips(P, 3);
    lips << AsPoints(lm.points.row(t)), Eigen::VectorXd::Ones(P);
    Eigen::MatrixX2d mapped = lips * a;
    mapped.rowwise() -= mapped.colwise().mean();
    for (int i = 0; i < P; ++i) {
      norm(t, 2 * i) = mapped(i, 0);
      norm(t, 2 * i + 1) = mapped(i, 1);
    }
  }

  // Central differences inside, one-sided at the edges.
  auto velocity = [&](int t) -> RowVector {
    if (t == 0) return norm.row(1) - norm.row(0);
    if (t == T - 1) return norm.row(T - 1) - norm.row(T - 2);
    return 0.5 * (norm.row(t + 1) - norm.row(t - 1));
  };
  auto acceleration = [&](int t) -> RowVector {
    const int c = std::clamp(t, 1, T - 2);
    return norm.row(c + 1) - 2.0 * norm.row(c) + norm.row(c - 1);
  };

  Matrix out(T, kLandmarkDim);
  for (int t = 0; t < T; ++t) {
    out.block(t, 0, 1, 2 * P) = norm.row(t);
    const RowVector v = velocity(t), acc = acceleration(t);
    for (int i = 0; i < P; ++i) {
      out(t, 2 * P + i) = std::hypot(v[2 * i], v[2 * i + 1]);
      out(t, 3 * P + i) = std::hypot(acc[2 * i], acc[2 * i + 1]);
    }
  }
  FeatureSequence fs(std::move(out), Modality::kVideo);
  for (int i = 0; i < P; ++i) {
    fs.dim_labels.push_back("x" + std::to_string(i));
    fs.dim_labels.push_back("y" + std::to_string(i));
  }
  for (int i = 0; i < P; ++i) fs.dim_labels.push_back("speed" + std::to_string(i));
  for (int i = 0; i < P; ++i) fs.dim_labels.push_back("accel" + std::to_string(i));
  return fs;
}

PcaModel PcaModel::Truncated(int m) const {
  if (m < 1 || m > num_components())
    Fail(ErrorKind::kInvalidArgument, "cannot truncate PCA to " + std::to_string(m) + " components");
  PcaModel t = *this;
  t.basis = basis.leftCols(m);
  t.explained_variance = explained_variance.head(m);
  return t;
}

void PcaModel::Validate() const {
  if (basis.rows() != mean.size() || explained_variance.size() != basis.cols())
    Fail(ErrorKind::kDimensionMismatch, "inconsistent PCA model shapes");
  const Matrix g = basis.transpose() * basis;
  if (!g.isIdentity(1e-8)) Fail(ErrorKind::kInvalidArgument, "PCA basis is not orthonormal");
  for (int i = 0; i < explained_variance.size(); ++i) {
    if (explained_variance[i] < 0 || (i > 0 && explained_variance[i] > explained_variance[i - 1]))
      Fail(ErrorKind::kInvalidArgument, "PCA variances must be non-negative and non-increasing");
  }
}

PcaModel FitPca(const Matrix& data, double variance_target) {
  if (!(variance_target > 0 && variance_target <= 1))
    Fail(ErrorKind::kInvalidArgument, "variance target must lie in (0, 1]");
  const int N = static_cast<int>(data.rows());
  if (N <= 1) Fail(ErrorKind::kInsufficientData, "PCA needs more than one sample");
  PcaModel m;
  m.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - m.mean.transpose();
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Vector var = svd.singularValues().array().square() / (N - 1);
  m.total_variance = var.sum();

  int M = 1;
  double cum = var.size() ? var[0] : 0.0;
  const double need = variance_target * m.total_variance * (1.0 - 1e-12);
  while (M < var.size() && cum < need) cum += var[M++];

  m.basis = svd.matrixV().leftCols(M);
  // Sign convention: largest-magnitude entry of each column is positive.
  for (int j = 0; j < M; ++j) {
    Eigen::Index i;
    m.basis.col(j).cwiseAbs().maxCoeff(&i);
    if (m.basis(i, j) < 0) m.basis.col(j) *= -1.0;
  }
  m.explained_variance = var.head(M);
  return m;
}

FeatureSequence ApplyPca(const PcaModel& m, const FeatureSequence& x) {
  if (x.dim() != m.input_dim())
    Fail(ErrorKind::kDimensionMismatch, "PCA expects dimension " + std::to_string(m.input_dim()) +
                                            ", got " + std::to_string(x.dim()));
  FeatureSequence y = x;
  y.frames = (x.frames.rowwise() - m.mean.transpose()) * m.basis;
  y.dim_labels.clear();
  for (int j = 0; j < m.num_components(); ++j) y.dim_labels.push_back("pc" + std::to_string(j));
  return y;
}

void SavePca(const PcaModel& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIoError, "cannot write " + path);
  os.write("CPCA", 4);
  io::WriteU32(os, 1);
  io::WriteU32(os, static_cast<std::uint32_t>(m.input_dim()));
  io::WriteU32(os, static_cast<std::uint32_t>(m.num_components()));
  io::WriteF64(os, m.total_variance);
  for (double v : m.mean) io::WriteF64(os, v);
  for (int i = 0; i < m.basis.rows(); ++i)
    for (int j = 0; j < m.basis.cols(); ++j) io::WriteF64(os, m.basis(i, j));
  for (double v : m.explained_variance) io::WriteF64(os, v);
  if (!os) Fail(ErrorKind::kIoError, "write failed: " + path);
}

PcaModel LoadPca(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIoError, "cannot open " + path);
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "CPCA") Fail(ErrorKind::kParseError, path + ": bad magic");
  if (io::ReadU32(is, path) != 1) Fail(ErrorKind::kParseError, path + ": unsupported version");
  const int D = static_cast<int>(io::ReadU32(is, path));
  const int M = static_cast<int>(io::ReadU32(is, path));
  PcaModel m;
  m.total_variance = io::ReadF64(is, path);
  m.mean.resize(D);
  for (auto& v : m.mean) v = io::ReadF64(is, path);
  m.basis.resize(D, M);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < M; ++j) m.basis(i, j) = io::ReadF64(is, path);
  m.explained_variance.resize(M);
  for (auto& v : m.explained_variance) v = io::ReadF64(is, path);
  m.Validate();
  return m;
}

FeatureSequence Fuse(const std::vector<FeatureSequence>& xs) {
  if (xs.empty()) Fail(ErrorKind::kInvalidArgument, "nothing to fuse");
  if (xs.size() == 1) return xs[0];
  const int T = xs[0].num_frames();
  int D = 0;
  bool labelled = true;
  for (const auto& x : xs) {
    x.Validate();
    if (x.num_frames() != T)
      Fail(ErrorKind::kLengthMismatch, "fusion inputs differ in length (" + std::to_string(T) +
                                           " vs " + std::to_string(x.num_frames()) + ")");
    if (std::abs(x.frame_shift_ms - xs[0].frame_shift_ms) > 1e-9)
      Fail(ErrorKind::kLengthMismatch, "fusion inputs differ in frame shift");
    D += x.dim();
    labelled = labelled && !x.dim_labels.empty();
  }
  FeatureSequence y(Matrix(T, D), Modality::kFused, xs[0].frame_shift_ms);
  int off = 0;
  for (const auto& x : xs) {
    y.frames.middleCols(off, x.dim()) = x.frames;
    off += x.dim();
    if (labelled) y.dim_labels.insert(y.dim_labels.end(), x.dim_labels.begin(), x.dim_labels.end());
  }
  return y;
}

FeatureSequence ShiftModality(const FeatureSequence& x, int offset_frames) {
  const int T = x.num_frames();
  if (std::abs(offset_frames) >= T)
    Fail(ErrorKind::kOffsetTooLarge, "offset " + std::to_string(offset_frames) +
                                         " is not smaller than T = " + std::to_string(T));
  FeatureSequence y = x;
  for (int t = 0; t < T; ++t) y.frames.row(t) = x.frames.row(std::clamp(t - offset_frames, 0, T - 1));
  return y;
}

FeatureSequence SynthesizeDescriptors(const FeatureSequence& source, int dim, std::uint64_t seed,
                                      double noise_std) {
  if (dim < 1) Fail(ErrorKind::kInvalidArgument, "descriptor dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix proj(source.dim(), dim);
  for (int i = 0; i < proj.rows(); ++i)
    for (int j = 0; j < dim; ++j) proj(i, j) = g(rng) / std::sqrt(source.dim());
  FeatureSequence y(source.frames * proj, Modality::kVideo, source.frame_shift_ms);
  for (int t = 0; t < y.num_frames(); ++t)
    for (int j = 0; j < dim; ++j) y.frames(t, j) += noise_std * g(rng);
  return y;
}

}  // namespace ctcfuse::features
