// include/ctcfuse/model.hpp

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

#ifndef CTCFUSE_MODEL_HPP_
#define CTCFUSE_MODEL_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ctcfuse/types.hpp"

namespace ctcfuse::model {

struct NetworkConfig {
  int num_layers = 4;
  int hidden_size = 64;  // per direction
  int input_dim = 1;
  int output_dim = 2;  // K + 1
  std::uint64_t seed = 0;

  void Validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

/// One direction of one bidirectional LSTM layer. Gate blocks are stacked in
/// the order input, forget, cell candidate, output (4H rows).
struct LstmWeights {
  Matrix w_input;      // 4H x In
  Matrix w_recurrent;  // 4H x H
  Vector bias;         // 4H
};

struct LayerParams {
  std::array<LstmWeights, 2> dir;  // [0] forward in time, [1] backward
};

/// Flat view of one parameter tensor. Rank 1 for biases, 2 for matrices
/// (row-major).
template <typename T>
struct TensorView {
  std::span<T> data;
  int rank = 2;
  std::array<int, 2> dims{};
};

/// Parameters, or gradients of the same shape.
struct NetworkParams {
  NetworkConfig config;
  std::vector<LayerParams> layers;
  Matrix w_out;  // (K+1) x 2H
  Vector b_out;  // K+1

  /// Zero-valued tensors shaped by `cfg`.
  static NetworkParams Zeros(const NetworkConfig& cfg);

  /// Visits every tensor in declaration order: per layer, per direction
  /// (w_input, w_recurrent, bias), then w_out, b_out.
  void ForEachTensor(const std::function<void(TensorView<double>)>& fn);
  void ForEachTensor(const std::function<void(TensorView<const double>)>& fn) const;

  std::size_t NumParameters() const;
  double SquaredNorm() const;
  bool AllFinite() const;
  /// Content hash used to detect stale forward caches.
  std::uint64_t Fingerprint() const;
  /// this += scale * other (same shapes).
  void AddScaled(const NetworkParams& other, double scale);
  void Scale(double factor);
};

/// Uniform in [-0.1, 0.1] from a generator seeded with cfg.seed; forget-gate
/// biases start at 1.
NetworkParams InitParams(const NetworkConfig& cfg);

/// Activations kept by Forward for the backward pass.
struct DirectionCache {
  Matrix gates;   // T x 4H, post-nonlinearity
  Matrix cell;    // T x H
  Matrix tanh_cell;
  Matrix hidden;  // T x H
};

struct LayerCache {
  Matrix input;  // T x In
  std::array<DirectionCache, 2> dir;
};

struct ForwardCache {
  std::uint64_t params_fingerprint = 0;
  std::vector<LayerCache> layers;
  Matrix top;     // T x 2H, input of the output projection
  Matrix logits;  // T x (K+1)
};

struct ForwardResult {
  Posteriorgram posteriors;
  ForwardCache cache;
};

/// Runs every layer in both time directions, concatenates, projects and
/// applies a row-wise softmax. Throws DimensionMismatch if x.cols() differs
/// from the configured input dimension.
ForwardResult Forward(const NetworkParams& params, const Matrix& x);

/// Logits only, without keeping activations.
Matrix ForwardLogits(const NetworkParams& params, const Matrix& x);

/// Backpropagation through time of d(loss)/d(logits). Throws CacheMismatch if
/// `cache` was produced with different parameters or a different T.
NetworkParams Backward(const NetworkParams& params, const ForwardCache& cache,
                       const Matrix& dlogits);

/// Clips the global gradient norm to `clip_norm` and then applies
/// params -= lr * grads. Returns the pre-clip norm. Throws
/// NonFiniteGradient if any gradient entry is NaN or infinite.
double SgdStep(NetworkParams& params, const NetworkParams& grads, double lr,
               double clip_norm);

// Checkpoint container: "CTCM", u32 version, config, then every tensor in
// ForEachTensor order as u32 rank, u32 dims, f64 data (all little-endian).
inline constexpr std::uint32_t kCheckpointVersion = 1;
void SaveCheckpoint(const NetworkParams& params, const std::string& path);
NetworkParams LoadCheckpoint(const std::string& path);

}  // namespace ctcfuse::model

#endif  // CTCFUSE_MODEL_HPP_
