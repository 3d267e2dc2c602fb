// src/model.cpp

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

#include "ctcfuse/model.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <random>

#include "ctcfuse/binary_io.hpp"
#include "ctcfuse/error.hpp"

namespace ctcfuse::model {

void NetworkConfig::Validate() const {
  if (num_layers < 1 || hidden_size < 1 || input_dim < 1 || output_dim < 2)
    Fail(ErrorKind::kConfigError,
         "network config needs num_layers, hidden_size, input_dim >= 1 and "
         "output_dim >= 2");
}

NetworkParams NetworkParams::Zeros(const NetworkConfig& cfg) {
  cfg.Validate();
  const int H = cfg.hidden_size;
  NetworkParams p;
  p.config = cfg;
  p.layers.resize(cfg.num_layers);
  for (int l = 0; l < cfg.num_layers; ++l) {
    const int in = l == 0 ? cfg.input_dim : 2 * H;
    for (auto& d : p.layers[l].dir) {
      d.w_input = Matrix::Zero(4 * H, in);
      d.w_recurrent = Matrix::Zero(4 * H, H);
      d.bias = Vector::Zero(4 * H);
    }
  }
  p.w_out = Matrix::Zero(cfg.output_dim, 2 * H);
  p.b_out = Vector::Zero(cfg.output_dim);
  return p;
}

namespace {

template <typename T, typename M>
TensorView<T> ViewOf(M& m) {
  TensorView<T> v;
  v.data = std::span<T>(m.data(), static_cast<std::size_t>(m.size()));
  if constexpr (M::ColsAtCompileTime == 1) {
    v.rank = 1;
    v.dims = {static_cast<int>(m.rows()), 0};
  } else {
    v.rank = 2;
    v.dims = {static_cast<int>(m.rows()), static_cast<int>(m.cols())};
  }
  return v;
}

template <typename Params, typename T, typename Fn>
void VisitTensors(Params& p, Fn&& fn) {
  for (auto& layer : p.layers) {
    for (auto& d : layer.dir) {
      fn(ViewOf<T>(d.w_input));
      fn(ViewOf<T>(d.w_recurrent));
      fn(ViewOf<T>(d.bias));
    }
  }
  fn(ViewOf<T>(p.w_out));
  fn(ViewOf<T>(p.b_out));
}

}  // namespace

void NetworkParams::ForEachTensor(const std::function<void(TensorView<double>)>& fn) {
  VisitTensors<NetworkParams, double>(*this, fn);
}

void NetworkParams::ForEachTensor(
    const std::function<void(TensorView<const double>)>& fn) const {
  VisitTensors<const NetworkParams, const double>(*this, fn);
}

std::size_t NetworkParams::NumParameters() const {
  std::size_t n = 0;
  ForEachTensor([&](TensorView<const double> t) { n += t.data.size(); });
  return n;
}

double NetworkParams::SquaredNorm() const {
  double s = 0.0;
  ForEachTensor([&](TensorView<const double> t) {
    for (double v : t.data) s += v * v;
  });
  return s;
}

bool NetworkParams::AllFinite() const {
  bool ok = true;
  ForEachTensor([&](TensorView<const double> t) {
    for (double v : t.data) ok = ok && std::isfinite(v);
  });
  return ok;
}

std::uint64_t NetworkParams::Fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    h *= 1099511628211ULL;
  };
  mix(static_cast<std::uint64_t>(config.num_layers));
  mix(static_cast<std::uint64_t>(config.hidden_size));
  mix(static_cast<std::uint64_t>(config.input_dim));
  mix(static_cast<std::uint64_t>(config.output_dim));
  ForEachTensor([&](TensorView<const double> t) {
    for (double v : t.data) mix(std::bit_cast<std::uint64_t>(v));
  });
  return h;
}

void NetworkParams::AddScaled(const NetworkParams& other, double scale) {
  std::vector<std::span<const double>> src;
  other.ForEachTensor([&](TensorView<const double> t) { src.push_back(t.data); });
  std::size_t i = 0;
  ForEachTensor([&](TensorView<double> t) {
    if (i >= src.size() || src[i].size() != t.data.size())
      Fail(ErrorKind::kDimensionMismatch, "parameter shapes differ");
    const auto& s = src[i++];
    for (std::size_t j = 0; j < t.data.size(); ++j) t.data[j] += scale * s[j];
  });
}

void NetworkParams::Scale(double factor) {
  ForEachTensor([&](TensorView<double> t) {
    for (double& v : t.data) v *= factor;
  });
}

NetworkParams InitParams(const NetworkConfig& cfg) {
  NetworkParams p = NetworkParams::Zeros(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(-0.1, 0.1);
  p.ForEachTensor([&](TensorView<double> t) {
    for (double& v : t.data) v = uni(rng);
  });
  const int H = cfg.hidden_size;
  for (auto& layer : p.layers)
    for (auto& d : layer.dir) d.bias.segment(H, H).setConstant(1.0);
  return p;
}

namespace {

inline double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void RunDirection(const LstmWeights& w, const Matrix& x, bool reverse,
                  DirectionCache& c) {
  const int T = static_cast<int>(x.rows());
  const int H = static_cast<int>(w.w_recurrent.cols());
  Matrix z = x * w.w_input.transpose();
  z.rowwise() += w.bias.transpose();
  c.gates.resize(T, 4 * H);
  c.cell.resize(T, H);
  c.tanh_cell.resize(T, H);
  c.hidden.resize(T, H);
  Vector h_prev = Vector::Zero(H);
  Vector c_prev = Vector::Zero(H);
  Vector a(4 * H);
  for (int k = 0; k < T; ++k) {
    const int t = reverse ? T - 1 - k : k;
    a.noalias() = w.w_recurrent * h_prev;
    a += z.row(t).transpose();
    for (int j = 0; j < H; ++j) {
      const double ig = Sigmoid(a[j]);
      const double fg = Sigmoid(a[H + j]);
      const double gg = std::tanh(a[2 * H + j]);
      const double og = Sigmoid(a[3 * H + j]);
      const double cell = fg * c_prev[j] + ig * gg;
      const double tc = std::tanh(cell);
      c.gates(t, j) = ig;
      c.gates(t, H + j) = fg;
      c.gates(t, 2 * H + j) = gg;
      c.gates(t, 3 * H + j) = og;
      c.cell(t, j) = cell;
      c.tanh_cell(t, j) = tc;
      c.hidden(t, j) = og * tc;
      c_prev[j] = cell;
      h_prev[j] = og * tc;
    }
  }
}

// Accumulates weight gradients into `g` and returns d(loss)/d(input).
Matrix BackDirection(const LstmWeights& w, const Matrix& x,
                     const DirectionCache& c, bool reverse, const Matrix& dh_out,
                     LstmWeights& g) {
  const int T = static_cast<int>(x.rows());
  const int H = static_cast<int>(w.w_recurrent.cols());
  Matrix dz(T, 4 * H);
  Matrix h_prev = Matrix::Zero(T, H);
  Vector dh_next = Vector::Zero(H);
  Vector dc_next = Vector::Zero(H);
  for (int k = 0; k < T; ++k) {
    const int t = reverse ? k : T - 1 - k;
    const int tp = reverse ? t + 1 : t - 1;
    const bool has_prev = tp >= 0 && tp < T;
    if (has_prev) h_prev.row(t) = c.hidden.row(tp);
    for (int j = 0; j < H; ++j) {
      const double ig = c.gates(t, j);
      const double fg = c.gates(t, H + j);
      const double gg = c.gates(t, 2 * H + j);
      const double og = c.gates(t, 3 * H + j);
      const double tc = c.tanh_cell(t, j);
      const double cp = has_prev ? c.cell(tp, j) : 0.0;
      const double dh = dh_out(t, j) + dh_next[j];
      const double dc = dh * og * (1.0 - tc * tc) + dc_next[j];
      dz(t, j) = dc * gg * ig * (1.0 - ig);
      dz(t, H + j) = dc * cp * fg * (1.0 - fg);
      dz(t, 2 * H + j) = dc * ig * (1.0 - gg * gg);
      dz(t, 3 * H + j) = dh * tc * og * (1.0 - og);
      dc_next[j] = dc * fg;
    }
    dh_next.noalias() = w.w_recurrent.transpose() * dz.row(t).transpose();
  }
  g.w_input.noalias() += dz.transpose() * x;
  g.w_recurrent.noalias() += dz.transpose() * h_prev;
  g.bias += dz.colwise().sum().transpose();
  return dz * w.w_input;
}

}  // namespace

ForwardResult Forward(const NetworkParams& params, const Matrix& x) {
  const auto& cfg = params.config;
  if (x.cols() != cfg.input_dim)
    Fail(ErrorKind::kDimensionMismatch,
         "input has " + std::to_string(x.cols()) + " dims, network expects " +
             std::to_string(cfg.input_dim));
  if (x.rows() < 1) Fail(ErrorKind::kInvalidArgument, "empty input sequence");
  const int T = static_cast<int>(x.rows());
  const int H = cfg.hidden_size;
  ForwardResult res;
  ForwardCache& cache = res.cache;
  cache.params_fingerprint = params.Fingerprint();
  cache.layers.resize(cfg.num_layers);
  Matrix input = x;
  for (int l = 0; l < cfg.num_layers; ++l) {
    LayerCache& lc = cache.layers[l];
    lc.input = std::move(input);
    RunDirection(params.layers[l].dir[0], lc.input, false, lc.dir[0]);
    RunDirection(params.layers[l].dir[1], lc.input, true, lc.dir[1]);
    input.resize(T, 2 * H);
    input.leftCols(H) = lc.dir[0].hidden;
    input.rightCols(H) = lc.dir[1].hidden;
  }
  cache.top = std::move(input);
  cache.logits = cache.top * params.w_out.transpose();
  cache.logits.rowwise() += params.b_out.transpose();
  res.posteriors = Posteriorgram::FromLogits(cache.logits);
  return res;
}

Matrix ForwardLogits(const NetworkParams& params, const Matrix& x) {
  return Forward(params, x).cache.logits;
}

NetworkParams Backward(const NetworkParams& params, const ForwardCache& cache,
                       const Matrix& dlogits) {
  const auto& cfg = params.config;
  if (cache.params_fingerprint != params.Fingerprint() ||
      static_cast<int>(cache.layers.size()) != cfg.num_layers)
    Fail(ErrorKind::kCacheMismatch, "forward cache was built with other parameters");
  if (dlogits.rows() != cache.logits.rows() || dlogits.cols() != cfg.output_dim)
    Fail(ErrorKind::kCacheMismatch, "upstream gradient shape does not match cache");
  const int H = cfg.hidden_size;
  NetworkParams g = NetworkParams::Zeros(cfg);
  g.w_out.noalias() = dlogits.transpose() * cache.top;
  g.b_out = dlogits.colwise().sum().transpose();
  Matrix dtop = dlogits * params.w_out;
  for (int l = cfg.num_layers - 1; l >= 0; --l) {
    const LayerCache& lc = cache.layers[l];
    const Matrix dh_fwd = dtop.leftCols(H);
    const Matrix dh_bwd = dtop.rightCols(H);
    Matrix dx = BackDirection(params.layers[l].dir[0], lc.input, lc.dir[0], false,
                              dh_fwd, g.layers[l].dir[0]);
    dx += BackDirection(params.layers[l].dir[1], lc.input, lc.dir[1], true,
                        dh_bwd, g.layers[l].dir[1]);
    dtop = std::move(dx);
  }
  return g;
}

double SgdStep(NetworkParams& params, const NetworkParams& grads, double lr,
               double clip_norm) {
  if (!(lr > 0.0) || !(clip_norm > 0.0))
    Fail(ErrorKind::kInvalidArgument, "lr and clip_norm must be positive");
  if (!grads.AllFinite())
    Fail(ErrorKind::kNonFiniteGradient, "gradient contains NaN or Inf");
  const double norm = std::sqrt(grads.SquaredNorm());
  const double scale = norm > clip_norm ? clip_norm / norm : 1.0;
  params.AddScaled(grads, -lr * scale);
  return norm;
}

namespace {
constexpr char kCkptMagic[4] = {'C', 'T', 'C', 'M'};
}

void SaveCheckpoint(const NetworkParams& params, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIoError, "cannot open " + path + " for writing");
  os.write(kCkptMagic, 4);
  io::WriteU32(os, kCheckpointVersion);
  const auto& c = params.config;
  io::WriteU32(os, static_cast<std::uint32_t>(c.num_layers));
  io::WriteU32(os, static_cast<std::uint32_t>(c.hidden_size));
  io::WriteU32(os, static_cast<std::uint32_t>(c.input_dim));
  io::WriteU32(os, static_cast<std::uint32_t>(c.output_dim));
  io::WriteU64(os, c.seed);
  params.ForEachTensor([&](TensorView<const double> t) {
    io::WriteU32(os, static_cast<std::uint32_t>(t.rank));
    for (int r = 0; r < t.rank; ++r) io::WriteU32(os, static_cast<std::uint32_t>(t.dims[r]));
    for (double v : t.data) io::WriteF64(os, v);
  });
  if (!os) Fail(ErrorKind::kIoError, "write failed: " + path);
}

NetworkParams LoadCheckpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIoError, "cannot open " + path);
  char magic[4] = {};
  is.read(magic, 4);
  if (is.gcount() != 4 || !std::equal(magic, magic + 4, kCkptMagic))
    Fail(ErrorKind::kParseError, path + ": not a CTCM checkpoint");
  const auto version = io::ReadU32(is, path);
  if (version != kCheckpointVersion)
    Fail(ErrorKind::kParseError, path + ": unsupported checkpoint version " +
                                     std::to_string(version));
  NetworkConfig cfg;
  cfg.num_layers = static_cast<int>(io::ReadU32(is, path));
  cfg.hidden_size = static_cast<int>(io::ReadU32(is, path));
  cfg.input_dim = static_cast<int>(io::ReadU32(is, path));
  cfg.output_dim = static_cast<int>(io::ReadU32(is, path));
  cfg.seed = io::ReadU64(is, path);
  try {
    cfg.Validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kParseError, path + ": " + e.what());
  }
  NetworkParams p = NetworkParams::Zeros(cfg);
  p.ForEachTensor([&](TensorView<double> t) {
    const auto rank = io::ReadU32(is, path);
    if (static_cast<int>(rank) != t.rank)
      Fail(ErrorKind::kParseError, path + ": tensor rank mismatch");
    for (int r = 0; r < t.rank; ++r)
      if (static_cast<int>(io::ReadU32(is, path)) != t.dims[r])
        Fail(ErrorKind::kParseError, path + ": tensor shape mismatch");
    for (double& v : t.data) v = io::ReadF64(is, path);
  });
  if (is.peek() != std::char_traits<char>::eof())
    Fail(ErrorKind::kParseError, path + ": trailing bytes after last tensor");
  return p;
}

}  // namespace ctcfuse::model
