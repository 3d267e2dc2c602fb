// include/ctcfuse/features.hpp


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

#ifndef CTCFUSE_FEATURES_HPP_
#define CTCFUSE_FEATURES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ctcfuse/types.hpp"

namespace ctcfuse::features {

inline constexpr double kDefaultFrameShiftMs = 100.0 / 3.0;
inline constexpr double kEnergyFloor = 1e-10;
inline constexpr int kNumLipPoints = 18;
inline constexpr int kLandmarkDim = 4 * kNumLipPoints;  // 36 + 18 + 18

enum class Modality { kAudio, kVideo, kFused };

const char* ModalityName(Modality m);
/// Throws ParseError for an unknown name.
Modality ParseModality(const std::string& name);

struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  /// Throws InvalidArgument (EmptySignal when there are no samples).
  void Validate() const;
};

struct FeatureSequence {
  Matrix frames;  // T x D
  double frame_shift_ms = kDefaultFrameShiftMs;
  Modality modality = Modality::kAudio;
  std::vector<std::string> dim_labels;  // empty or D names

  FeatureSequence() = default;
  FeatureSequence(Matrix f, Modality m, double shift_ms = kDefaultFrameShiftMs)
      : frames(std::move(f)), frame_shift_ms(shift_ms), modality(m) {}

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
  void Validate() const;
};

/// Lip contour plus a few stable reference points (eye corners, nose) per
/// frame. Rows are frames; columns interleave x and y.
struct LandmarkTrack {
  Matrix points;   // T x 36
  Matrix anchors;  // T x 2A, A >= 3

  int num_frames() const { return static_cast<int>(points.rows()); }
  int num_anchors() const { return static_cast<int>(anchors.cols() / 2); }
  void Validate() const;
};

struct FrameConfig {
  double frame_shift_ms = kDefaultFrameShiftMs;
  double frame_length_ms = kDefaultFrameShiftMs;
  int num_mel_bins = 40;
  double low_freq_hz = 0.0;
  double high_freq_hz = 0.0;  // <= 0 means Nyquist
  double min_f0_hz = 60.0;
  double max_f0_hz = 400.0;
  /// Normalized autocorrelation peak below which a frame counts as unvoiced.
  double voicing_threshold = 0.3;

  int ShiftSamples(int sample_rate_hz) const;
  int WindowSamples(int sample_rate_hz) const;
  void Validate(int sample_rate_hz) const;
};

/// HTK mel scale.
double MelScale(double hz);
double InverseMelScale(double mel);
/// Center frequencies (Hz) of the triangular filters.
std::vector<double> MelCenters(const FrameConfig& cfg, int sample_rate_hz);
/// floor((len - window) / hop) + 1.
int NumFrames(const Waveform& w, const FrameConfig& cfg);

FeatureSequence ComputeFbank(const Waveform& w, const FrameConfig& cfg = {});
FeatureSequence ComputeMfcc(const Waveform& w, const FrameConfig& cfg = {});
/// [log F0, normalized autocorrelation peak, delta log F0] per frame.
FeatureSequence ComputePitchProxy(const Waveform& w, const FrameConfig& cfg = {});

/// Per-utterance mean and variance normalization. Constant dimensions are
/// centered, which makes them zero.
FeatureSequence Cmvn(const FeatureSequence& x);
/// Concatenates frames t-k..t+k with edge replication.
FeatureSequence StackContext(const FeatureSequence& x, int k);
/// w + white Gaussian noise at the requested SNR relative to the mean power
/// of w.
Waveform AddNoiseAtSnr(const Waveform& w, double snr_db, std::uint64_t seed);
/// Evenly spaced SNR levels from `hi` down to `lo`, inclusive.
std::vector<double> SnrGrid(double hi = 40.0, double lo = 20.0, int levels = 10);
/// 10 log10(P_signal / P_noise).
double SnrDb(double signal_power, double noise_power);

/// 36 normalized coordinates, 18 speeds, 18 accelerations per frame.
/// `reference` is the average-face anchor layout (1 x 2A); when empty the
/// track's mean anchor layout is used.
FeatureSequence LandmarkFeatures(const LandmarkTrack& lm, const RowVector& reference = {});

struct PcaModel {
  Vector mean;               // D
  Matrix basis;              // D x M, orthonormal columns
  Vector explained_variance; // M, non-increasing
  double total_variance = 0.0;

  int input_dim() const { return static_cast<int>(mean.size()); }
  int num_components() const { return static_cast<int>(basis.cols()); }
  /// First m components.
  PcaModel Truncated(int m) const;
  void Validate() const;
};

/// Smallest leading set of principal components whose cumulative variance
/// reaches `variance_target` of the total.
PcaModel FitPca(const Matrix& data, double variance_target);
FeatureSequence ApplyPca(const PcaModel& m, const FeatureSequence& x);
void SavePca(const PcaModel& m, const std::string& path);
PcaModel LoadPca(const std::string& path);

/// Frame-wise concatenation; all inputs must share T and frame shift.
FeatureSequence Fuse(const std::vector<FeatureSequence>& xs);
/// Positive offsets delay the stream; padding replicates the edge frame.
FeatureSequence ShiftModality(const FeatureSequence& x, int offset_frames);

/// Stand-in for an image descriptor stream: a fixed random projection of
/// `source` to `dim` dimensions plus small noise.
FeatureSequence SynthesizeDescriptors(const FeatureSequence& source, int dim,
                                      std::uint64_t seed, double noise_std = 0.05);

}  // namespace ctcfuse::features

#endif  // CTCFUSE_FEATURES_HPP_
