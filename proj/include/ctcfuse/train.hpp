// include/ctcfuse/train.hpp


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

#ifndef CTCFUSE_TRAIN_HPP_
#define CTCFUSE_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "ctcfuse/decode.hpp"
#include "ctcfuse/model.hpp"
#include "ctcfuse/types.hpp"

namespace ctcfuse::model {

struct Example {
  std::string id;
  Matrix features;  // T x D
  LabelSequence labels;
};

/// Random access to training material. Get() may vary with the epoch (for
/// multi-condition training) but must be a pure function of (i, epoch) and
/// safe to call from several threads.
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual int size() const = 0;
  virtual Example Get(int i, int epoch) const = 0;
};

/// Fixed in-memory examples.
class VectorSource : public ExampleSource {
 public:
  explicit VectorSource(std::vector<Example> ex) : ex_(std::move(ex)) {}
  int size() const override { return static_cast<int>(ex_.size()); }
  Example Get(int i, int) const override { return ex_.at(i); }

 private:
  std::vector<Example> ex_;
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 8;
  double learning_rate = 0.5;
  double clip_norm = 5.0;
  /// Learning-rate factor applied when heldout accuracy drops.
  double lr_decay = 0.5;
  int jobs = 1;
  std::uint64_t seed = 0;  // shuffling
  /// Return the parameters of the best heldout epoch instead of the last.
  bool keep_best = true;

  void Validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean CTC loss per utterance
  double heldout_accuracy = 0.0;
  double learning_rate = 0.0;
  int skipped = 0;  // infeasible utterances
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochStats> trace;  // epoch 0 is the initial model
  int best_epoch = 0;
};

/// Minibatch SGD on the CTC loss. Gradients within a batch are computed
/// concurrently on `jobs` threads and summed in utterance order, so the
/// result does not depend on `jobs`. Infeasible utterances are skipped with
/// a warning; if every utterance is infeasible, throws
/// InfeasibleLabelSequence.
TrainResult Train(NetworkParams init, const ExampleSource& train, const ExampleSource& heldout,
                  const TrainConfig& cfg,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

/// Greedy decoding of every example, scored against its labels (pooled).
decode::ErrorCounts EvaluateGreedy(const NetworkParams& params, const ExampleSource& data,
                                   int jobs = 1, int epoch = 0);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions are
/// rethrown on the caller's thread (the lowest failing index wins).
void ParallelFor(int n, int jobs, const std::function<void(int)>& fn);

void WriteTraceCsv(std::ostream& os, const std::vector<EpochStats>& trace);

}  // namespace ctcfuse::model

#endif  // CTCFUSE_TRAIN_HPP_
