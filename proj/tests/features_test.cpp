// tests/features_test.cpp


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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "ctcfuse/error.hpp"
#include "ctcfuse/feature_io.hpp"
#include "ctcfuse/features.hpp"
#include "test_util.hpp"

using namespace ctcfuse;
using namespace ctcfuse::features;
using namespace ctcfuse::testing;

namespace {

template <typename F>
ErrorKind KindOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::kInvalidArgument;
}

// Naive O(N^2) power spectrum of a Hann-windowed, zero-padded frame.
std::vector<double> NaivePower(const std::vector<double>& x, int start, int win, int nfft) {
  std::vector<double> p(nfft / 2 + 1);
  for (int k = 0; k <= nfft / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < win; ++n) {
      const double h = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * n / (win - 1));
      acc += x[start + n] * h * std::polar(1.0, -2 * std::numbers::pi * k * n / nfft);
    }
    p[k] = std::norm(acc);
  }
  return p;
}

double Mel(double f) { return 1127.0 * std::log(1.0 + f / 700.0); }

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ctcfuse_" + name)).string();
}

}  // namespace

TEST_CASE("mel scale and framing") {
  CHECK(MelScale(700.0) == doctest::Approx(781.17).epsilon(1e-5));
  CHECK(MelScale(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
  CHECK(InverseMelScale(MelScale(1234.5)) == doctest::Approx(1234.5));
  FrameConfig cfg;
  CHECK(cfg.WindowSamples(16000) == 533);
  CHECK(cfg.ShiftSamples(16000) == 533);
  const Waveform w = Sine(440, 1.0);
  CHECK(NumFrames(w, cfg) == (16000 - 533) / 533 + 1);
}

TEST_CASE("filterbank energies") {
  SUBCASE("silence hits the floor") {
    Waveform w;
    w.samples.assign(16000, 0.0);
    const auto fb = ComputeFbank(w);
    CHECK(fb.dim() == 40);
    CHECK(fb.num_frames() == 30);
    CHECK((fb.frames.array() == std::log(1e-10)).all());
  }
  SUBCASE("1 kHz tone peaks in the nearest mel bin") {
    const Waveform w = Sine(1000.0, 1.0);
    const auto fb = ComputeFbank(w);
    // Centres from an independent evaluation of the mel scale; the tone's
    // spectral peak located with a direct DFT.
    const int win = 533, nfft = 1024, sr = 16000;
    const auto p = NaivePower(w.samples, 533 * 5, win, nfft);
    const int kpk = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    const double fpk = static_cast<double>(kpk) * sr / nfft;
    int nearest = 0;
    double best = 1e300;
    for (int m = 0; m < 40; ++m) {
      const double c = Mel(sr / 2.0) * (m + 1) / 41.0;
      if (std::abs(c - Mel(fpk)) < best) {
        best = std::abs(c - Mel(fpk));
        nearest = m;
      }
    }
    for (int t = 1; t + 1 < fb.num_frames(); ++t) {
      Eigen::Index arg;
      fb.frames.row(t).maxCoeff(&arg);
      CHECK(arg == nearest);
    }
  }
  SUBCASE("matches a direct DFT and triangle evaluation") {
    std::mt19937_64 rng(1);
    const Waveform w = WhiteNoise(rng, 0.2);
    const auto fb = ComputeFbank(w);
    const int win = 533, nfft = 1024, sr = 16000;
    for (int t : {0, 3}) {
      const auto p = NaivePower(w.samples, 533 * t, win, nfft);
      for (int m = 0; m < 40; ++m) {
        const double l = Mel(sr / 2.0) * m / 41.0, c = Mel(sr / 2.0) * (m + 1) / 41.0,
                     r = Mel(sr / 2.0) * (m + 2) / 41.0;
        double e = 0.0;
        for (int k = 0; k <= nfft / 2; ++k) {
          const double mk = Mel(static_cast<double>(k) * sr / nfft);
          if (mk > l && mk < r) e += p[k] * (mk <= c ? (mk - l) / (c - l) : (r - mk) / (r - c));
        }
        CHECK(fb.frames(t, m) == doctest::Approx(std::log(std::max(e, 1e-10))).epsilon(1e-9));
      }
    }
  }
  SUBCASE("short input") {
    Waveform w;
    w.samples.assign(100, 0.1);
    CHECK(KindOf([&] { ComputeFbank(w); }) == ErrorKind::kEmptySignal);
    CHECK(KindOf([&] { ComputeMfcc(w); }) == ErrorKind::kEmptySignal);
    CHECK(KindOf([&] { ComputePitchProxy(w); }) == ErrorKind::kEmptySignal);
  }
}

TEST_CASE("cepstra") {
  std::mt19937_64 rng(2);
  const Waveform noise = WhiteNoise(rng, 1.0);
  const auto a = ComputeMfcc(noise), b = ComputeMfcc(noise);
  CHECK(a.dim() == 12);
  CHECK(a.num_frames() == ComputeFbank(noise).num_frames());
  CHECK(a.frames == b.frames);

  Waveform silence;
  silence.samples.assign(16000, 0.0);
  CHECK(ComputeMfcc(silence).frames.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("pitch proxy") {
  const auto p = ComputePitchProxy(Sine(200.0, 1.0));
  CHECK(p.dim() == 3);
  for (int t = 1; t + 1 < p.num_frames(); ++t) {
    CHECK(std::abs(p.frames(t, 0) - std::log(200.0)) < 0.05 * std::log(200.0));
    CHECK(std::abs(std::exp(p.frames(t, 0)) - 200.0) < 10.0);
    CHECK(p.frames(t, 1) > 0.9);
  }

  std::mt19937_64 rng(3);
  const auto n = ComputePitchProxy(WhiteNoise(rng, 1.0));
  CHECK(n.frames.col(1).mean() < 0.5);

  Waveform silence;
  silence.samples.assign(8000, 0.0);
  const auto s = ComputePitchProxy(silence);
  CHECK((s.frames.col(0).array() == std::log(100.0)).all());
  CHECK((s.frames.col(2).array() == 0.0).all());

  const auto w = Sine(150.0, 0.5);
  CHECK(Fuse({ComputeFbank(w), ComputePitchProxy(w)}).dim() == 43);
}

TEST_CASE("cmvn") {
  FeatureSequence x(Matrix{{1.0}, {3.0}}, Modality::kAudio);
  CHECK(Cmvn(x).frames == Matrix{{-1.0}, {1.0}});
  FeatureSequence c(Matrix{{5.0}, {5.0}, {5.0}}, Modality::kAudio);
  CHECK(Cmvn(c).frames == Matrix::Zero(3, 1));
  FeatureSequence one(Matrix{{1.0, 2.0}}, Modality::kAudio);
  CHECK(KindOf([&] { Cmvn(one); }) == ErrorKind::kDegenerateUtterance);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const int T = 2 + static_cast<int>(rng() % 200), D = 1 + static_cast<int>(rng() % 20);
    Matrix m = RandomLogits(rng, T, D, 3.0);
    m.col(0).setConstant(7.25);
    m.array() += 100.0;
    const FeatureSequence y = Cmvn(FeatureSequence(m, Modality::kAudio));
    for (int d = 0; d < D; ++d) {
      const double mean = y.frames.col(d).mean();
      const double var = (y.frames.col(d).array() - mean).square().mean();
      CHECK(std::abs(mean) < 1e-6);
      if (d == 0)
        CHECK(y.frames.col(d).isZero());
      else
        CHECK(std::abs(var - 1.0) < 1e-4);
    }
    CHECK((Cmvn(y).frames - y.frames).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("context stacking") {
  FeatureSequence x(Matrix{{1.0}, {2.0}}, Modality::kAudio);
  CHECK(StackContext(x, 0).frames == x.frames);
  CHECK(StackContext(x, 1).frames == Matrix{{1, 1, 2}, {1, 2, 2}});
  std::mt19937_64 rng(5);
  FeatureSequence f(RandomLogits(rng, 9, 40), Modality::kAudio);
  CHECK(StackContext(f, 1).dim() == 120);
  CHECK(StackContext(f, 3).dim() == 7 * 40);
  CHECK(KindOf([&] { StackContext(f, -1); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("additive noise at a target SNR") {
  Waveform unit;
  for (int n = 0; n < 160000; ++n) unit.samples.push_back(n % 2 ? 1.0 : -1.0);
  const Waveform noisy = AddNoiseAtSnr(unit, 20.0, 9);
  double pn = 0.0;
  for (std::size_t n = 0; n < unit.samples.size(); ++n)
    pn += std::pow(noisy.samples[n] - unit.samples[n], 2);
  pn /= static_cast<double>(unit.samples.size());
  CHECK(pn == doctest::Approx(0.01).epsilon(0.02));

  const auto grid = SnrGrid();
  REQUIRE(grid.size() == 10);
  CHECK(grid.front() == 40.0);
  CHECK(grid.back() == 20.0);

  const Waveform speech = Sine(310.0, 10.0);
  double ps = 0.0;
  for (double s : speech.samples) ps += s * s;
  ps /= static_cast<double>(speech.samples.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Waveform out = AddNoiseAtSnr(speech, grid[i], 100 + i);
    double p = 0.0;
    for (std::size_t n = 0; n < out.samples.size(); ++n)
      p += std::pow(out.samples[n] - speech.samples[n], 2);
    p /= static_cast<double>(out.samples.size());
    CHECK(std::abs(SnrDb(ps, p) - grid[i]) <= 0.1);
  }
  CHECK(AddNoiseAtSnr(speech, 30, 1).samples == AddNoiseAtSnr(speech, 30, 1).samples);
  CHECK(AddNoiseAtSnr(speech, 30, 1).samples != AddNoiseAtSnr(speech, 30, 2).samples);

  Waveform zero;
  zero.samples.assign(100, 0.0);
  CHECK(KindOf([&] { AddNoiseAtSnr(zero, 20, 1); }) == ErrorKind::kZeroPowerSignal);
}

TEST_CASE("landmark features") {
  std::mt19937_64 rng(6);
  const LandmarkTrack lm = RandomLandmarkTrack(rng, 20);
  const auto f = LandmarkFeatures(lm);
  CHECK(f.dim() == 72);
  CHECK(f.num_frames() == 20);
  for (int t = 0; t < 20; ++t) {
    double cx = 0.0, cy = 0.0;
    for (int i = 0; i < 18; ++i) {
      cx += f.frames(t, 2 * i);
      cy += f.frames(t, 2 * i + 1);
    }
    CHECK(std::abs(cx) < 1e-9);
    CHECK(std::abs(cy) < 1e-9);
  }

  SUBCASE("static mouth has no motion") {
    LandmarkTrack s = lm;
    for (int t = 0; t < 20; ++t) {
      s.points.row(t) = lm.points.row(0);
      s.anchors.row(t) = lm.anchors.row(0);
    }
    CHECK(LandmarkFeatures(s).frames.rightCols(36).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("rigid translation of lips and anchors cancels") {
    LandmarkTrack m = lm;
    for (int t = 0; t < 20; ++t) {
      for (int i = 0; i < 36; i += 2) {
        m.points(t, i) += 10.0;
        m.points(t, i + 1) += 4.0;
      }
      for (int i = 0; i < 8; i += 2) {
        m.anchors(t, i) += 10.0;
        m.anchors(t, i + 1) += 4.0;
      }
    }
    CHECK((LandmarkFeatures(m).frames - f.frames).norm() < 1e-8);
  }
  SUBCASE("a joint affine warp cancels against a fixed reference") {
    const RowVector ref = lm.anchors.row(0);
    const auto base = LandmarkFeatures(lm, ref);
    LandmarkTrack m = lm;
    const double a = 1.3, b = 0.2, c = -0.4, d = 0.9, ex = 7, ey = -3;
    for (Matrix* mat : {&m.points, &m.anchors})
      for (int t = 0; t < 20; ++t)
        for (int i = 0; i < mat->cols(); i += 2) {
          const double x = (*mat)(t, i), y = (*mat)(t, i + 1);
          (*mat)(t, i) = a * x + b * y + ex;
          (*mat)(t, i + 1) = c * x + d * y + ey;
        }
    CHECK((LandmarkFeatures(m, ref).frames - base.frames).norm() < 1e-8);
  }
  SUBCASE("errors") {
    LandmarkTrack bad = lm;
    for (int i = 0; i < 8; i += 2) bad.anchors(4, i + 1) = 2.0 * bad.anchors(4, i) + 1.0;
    CHECK(KindOf([&] { LandmarkFeatures(bad); }) == ErrorKind::kSingularAlignment);
    LandmarkTrack shortt = lm;
    shortt.points.conservativeResize(2, 36);
    shortt.anchors.conservativeResize(2, 8);
    CHECK(KindOf([&] { LandmarkFeatures(shortt); }) == ErrorKind::kDegenerateUtterance);
  }
}

TEST_CASE("principal components") {
  std::mt19937_64 rng(7);
  SUBCASE("rank bound") {
    Matrix d = Matrix::Zero(100, 5);
    d.col(1) = RandomLogits(rng, 100, 1);
    d.col(3) = RandomLogits(rng, 100, 1);
    d.col(4).setConstant(2.0);
    CHECK(FitPca(d, 0.98).num_components() <= 2);
  }
  SUBCASE("full variance target") {
    CHECK(FitPca(RandomLogits(rng, 10, 5), 1.0).num_components() == 5);
    CHECK(FitPca(RandomLogits(rng, 4, 6), 1.0).num_components() == 3);
  }
  SUBCASE("retained variance and orthonormality") {
    Matrix d = RandomLogits(rng, 300, 30);
    for (int j = 0; j < 30; ++j) d.col(j) *= std::pow(0.8, j);
    const PcaModel m = FitPca(d, 0.98);
    m.Validate();
    const Matrix g = m.basis.transpose() * m.basis;
    CHECK((g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 1e-8);
    // Residual variance measured directly on the data.
    const Matrix c = d.rowwise() - m.mean.transpose();
    const Matrix recon = c * m.basis * m.basis.transpose();
    const double kept = 1.0 - (c - recon).squaredNorm() / c.squaredNorm();
    CHECK(kept >= 0.98);
    CHECK(m.explained_variance.sum() >= 0.98 * m.total_variance);
    CHECK(FitPca(d, 0.5).num_components() < m.num_components());
  }
  SUBCASE("apply") {
    const Matrix d = RandomLogits(rng, 50, 6);
    const PcaModel m = FitPca(d, 1.0);
    FeatureSequence x(m.mean.transpose().replicate(4, 1), Modality::kVideo);
    CHECK(ApplyPca(m, x).frames.cwiseAbs().maxCoeff() < 1e-12);
    PcaModel id = m;
    id.basis = Matrix::Identity(6, 6);
    FeatureSequence z(d, Modality::kVideo);
    CHECK((ApplyPca(id, z).frames - (d.rowwise() - m.mean.transpose())).norm() < 1e-12);
    FeatureSequence wrong(Matrix::Zero(3, 5), Modality::kVideo);
    CHECK(KindOf([&] { ApplyPca(m, wrong); }) == ErrorKind::kDimensionMismatch);
    CHECK(KindOf([&] { FitPca(d.topRows(1), 0.9); }) == ErrorKind::kInsufficientData);

    const std::string path = TempPath("pca.bin");
    SavePca(m, path);
    const PcaModel back = LoadPca(path);
    CHECK(back.basis == m.basis);
    CHECK(back.mean == m.mean);
    CHECK(back.explained_variance == m.explained_variance);
    std::filesystem::remove(path);
  }
  SUBCASE("descriptor stream reduced to 222") {
    FeatureSequence src(RandomLogits(rng, 400, 320), Modality::kVideo);
    const auto desc = SynthesizeDescriptors(src, 2304, 11);
    CHECK(desc.dim() == 2304);
    const PcaModel m = FitPca(desc.frames, 0.98);
    REQUIRE(m.num_components() >= 222);
    CHECK(ApplyPca(m.Truncated(222), desc).dim() == 222);
  }
}

TEST_CASE("fusion and shifting") {
  std::mt19937_64 rng(8);
  FeatureSequence a(RandomLogits(rng, 12, 43), Modality::kAudio);
  FeatureSequence l(RandomLogits(rng, 12, 72), Modality::kVideo);
  FeatureSequence s(RandomLogits(rng, 12, 222), Modality::kVideo);
  const auto all = Fuse({a, l, s});
  CHECK(all.dim() == 337);
  CHECK(all.modality == Modality::kFused);
  CHECK(all.frames.middleCols(43, 72) == l.frames);
  CHECK(Fuse({l, s}).dim() == 294);
  CHECK(Fuse({a}).frames == a.frames);
  CHECK(Fuse({a}).modality == Modality::kAudio);
  FeatureSequence shorter(RandomLogits(rng, 11, 3), Modality::kVideo);
  CHECK(KindOf([&] { Fuse({a, shorter}); }) == ErrorKind::kLengthMismatch);

  CHECK(ShiftModality(a, 0).frames == a.frames);
  const auto d = ShiftModality(a, 3);
  CHECK(d.frames.row(5) == a.frames.row(2));
  CHECK(d.frames.row(0) == a.frames.row(0));
  const auto back = ShiftModality(d, -3);
  CHECK(back.frames.middleRows(3, 6) == a.frames.middleRows(3, 6));
  CHECK(10 * a.frame_shift_ms == doctest::Approx(333.333).epsilon(1e-5));
  CHECK(KindOf([&] { ShiftModality(a, 12); }) == ErrorKind::kOffsetTooLarge);
  CHECK(KindOf([&] { ShiftModality(a, -12); }) == ErrorKind::kOffsetTooLarge);
}

TEST_CASE("feature file formats") {
  std::mt19937_64 rng(9);
  const Matrix m = RandomLogits(rng, 7, 5).cast<float>().cast<double>();
  SUBCASE("fmat") {
    std::stringstream ss;
    WriteFmat(ss, m);
    const std::string bytes = ss.str();
    CHECK(bytes.size() == 12 + 4 * 35);
    CHECK(bytes.substr(0, 4) == "FMAT");
    CHECK(static_cast<unsigned char>(bytes[4]) == 7);
    CHECK(static_cast<unsigned char>(bytes[8]) == 5);
    CHECK(ReadFmat(ss, "mem") == m);

    const std::string path = TempPath("m.fmat");
    WriteFmat(path, m);
    CHECK(ReadFmat(path) == m);
    std::filesystem::resize_file(path, 30);
    try {
      ReadFmat(path);
      FAIL("truncated file accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kParseError);
      CHECK(std::string(e.what()).find(path) != std::string::npos);
    }
    std::filesystem::remove(path);
  }
  SUBCASE("csv") {
    std::stringstream with_header, bare;
    WriteFeatureCsv(with_header, m, {"a", "b", "c", "d", "e"});
    WriteFeatureCsv(bare, m);
    CHECK(ReadFeatureCsv(with_header, "h") == m);
    CHECK(ReadFeatureCsv(bare, "b") == m);
    std::istringstream ragged("1,2\n3\n");
    CHECK(KindOf([&] { ReadFeatureCsv(ragged, "r"); }) == ErrorKind::kParseError);
    std::istringstream junk("1,2\n3,x\n");
    CHECK(KindOf([&] { ReadFeatureCsv(junk, "j"); }) == ErrorKind::kParseError);
  }
  SUBCASE("wav") {
    Waveform w = Sine(440.0, 0.05, 8000);
    for (auto& s : w.samples) s = std::round(s * 32768.0) / 32768.0;
    std::stringstream ss;
    WriteWav(ss, w);
    CHECK(ss.str().size() == 44 + 2 * w.samples.size());
    const Waveform r = ReadWav(ss, "mem");
    CHECK(r.sample_rate_hz == 8000);
    CHECK(r.samples == w.samples);
    std::istringstream bad("RIFF....WAVX");
    CHECK(KindOf([&] { ReadWav(bad, "bad"); }) == ErrorKind::kParseError);
  }
}
