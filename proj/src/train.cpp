// src/train.cpp


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

#include "ctcfuse/train.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "ctcfuse/ctc.hpp"
#include "ctcfuse/error.hpp"

namespace ctcfuse::model {

void TrainConfig::Validate() const {
  if (epochs < 0) Fail(ErrorKind::kConfigError, "epochs must be >= 0");
  if (batch_size < 1) Fail(ErrorKind::kConfigError, "batch_size must be >= 1");
  if (!(learning_rate > 0)) Fail(ErrorKind::kConfigError, "learning_rate must be positive");
  if (!(clip_norm > 0)) Fail(ErrorKind::kConfigError, "clip_norm must be positive");
  if (!(lr_decay > 0 && lr_decay <= 1)) Fail(ErrorKind::kConfigError, "lr_decay must be in (0, 1]");
  if (jobs < 1) Fail(ErrorKind::kConfigError, "jobs must be >= 1");
}

void ParallelFor(int n, int jobs, const std::function<void(int)>& fn) {
  const int nt = std::max(1, std::min(jobs, n));
  if (nt == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  for (int w = 0; w < nt; ++w) {
    threads.emplace_back([&, w] {
      for (int i = w; i < n; i += nt) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

decode::ErrorCounts EvaluateGreedy(const NetworkParams& params, const ExampleSource& data,
                                   int jobs, int epoch) {
  std::vector<decode::ErrorCounts> per(data.size());
  ParallelFor(data.size(), jobs, [&](int i) {
    const Example ex = data.Get(i, epoch);
    const auto y = Posteriorgram::FromLogits(ForwardLogits(params, ex.features));
    per[i] = decode::EditDistance(ex.labels.ids, decode::GreedyDecode(y));
  });
  decode::ErrorCounts total;
  for (const auto& c : per) total += c;
  return total;
}

namespace {

struct UttGrad {
  bool used = false;
  double loss = 0.0;
  NetworkParams grad;
};

double HeldoutAccuracy(const NetworkParams& p, const ExampleSource& heldout, int jobs) {
  if (heldout.size() == 0) return 0.0;
  const auto c = EvaluateGreedy(p, heldout, jobs);
  return c.ref_length ? c.Accuracy() : 0.0;
}

}  // namespace

TrainResult Train(NetworkParams params, const ExampleSource& train, const ExampleSource& heldout,
                  const TrainConfig& cfg, const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.Validate();
  const int N = train.size();

  TrainResult result;
  double lr = cfg.learning_rate;
  EpochStats init;
  init.heldout_accuracy = HeldoutAccuracy(params, heldout, cfg.jobs);
  init.learning_rate = lr;
  result.trace.push_back(init);
  if (on_epoch) on_epoch(init);
  NetworkParams best = params;
  double best_acc = init.heldout_accuracy;
  // The untrained model's score (mostly insertions) is not a baseline for
  // the halving rule.
  double prev_acc = -1.0;

  std::vector<int> order(N);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    EpochStats st;
    st.epoch = epoch;
    st.learning_rate = lr;
    double loss_sum = 0.0;
    int used = 0;
    for (int b = 0; b < N; b += cfg.batch_size) {
      const int nb = std::min(cfg.batch_size, N - b);
      std::vector<UttGrad> g(nb);
      ParallelFor(nb, cfg.jobs, [&](int j) {
        const Example ex = train.Get(order[b + j], epoch);
        if (!ctc::IsFeasible(ex.labels.ids, static_cast<int>(ex.features.rows()))) return;
        auto fwd = Forward(params, ex.features);
        double loss = 0.0;
        const Matrix dlogits = ctc::CtcGrad(fwd.cache.logits, ex.labels, &loss);
        g[j].grad = Backward(params, fwd.cache, dlogits);
        g[j].loss = loss;
        g[j].used = true;
      });
      NetworkParams sum;
      int count = 0;
      for (int j = 0; j < nb; ++j) {
        if (!g[j].used) {
          if (epoch == 1)
            spdlog::warn("skipping '{}': label sequence does not fit the frame count",
                         train.Get(order[b + j], epoch).id);
          ++st.skipped;
          continue;
        }
        if (count == 0)
          sum = std::move(g[j].grad);
        else
          sum.AddScaled(g[j].grad, 1.0);
        loss_sum += g[j].loss;
        ++count;
      }
      if (count == 0) continue;
      sum.Scale(1.0 / count);
      SgdStep(params, sum, lr, cfg.clip_norm);
      used += count;
    }
    if (used == 0)
      Fail(ErrorKind::kInfeasibleLabelSequence, "no training utterance is CTC-feasible");
    st.train_loss = loss_sum / used;
    st.heldout_accuracy = HeldoutAccuracy(params, heldout, cfg.jobs);
    spdlog::info("epoch {}: loss {:.4f} heldout acc {:.2f} lr {:.3g}", epoch, st.train_loss,
                 st.heldout_accuracy, lr);
    result.trace.push_back(st);
    if (on_epoch) on_epoch(st);
    if (st.heldout_accuracy > best_acc) {
      best_acc = st.heldout_accuracy;
      best = params;
      result.best_epoch = epoch;
    }
    if (st.heldout_accuracy < prev_acc) lr *= cfg.lr_decay;
    prev_acc = st.heldout_accuracy;
  }
  result.params = cfg.keep_best && heldout.size() > 0 ? std::move(best) : std::move(params);
  if (!(cfg.keep_best && heldout.size() > 0)) result.best_epoch = cfg.epochs;
  return result;
}

void WriteTraceCsv(std::ostream& os, const std::vector<EpochStats>& trace) {
  os << "epoch,train_loss,heldout_unit_accuracy,learning_rate,skipped\n";
  for (const auto& s : trace)
    os << fmt::format("{},{:.6f},{:.4f},{:.6g},{}\n", s.epoch, s.train_loss, s.heldout_accuracy,
                      s.learning_rate, s.skipped);
}

}  // namespace ctcfuse::model
