// Copyright 2026 The mdc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MDC_TRAINER_HPP_
#define MDC_TRAINER_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mdc/checkpoint.hpp"
#include "mdc/dct.hpp"
#include "mdc/denoiser.hpp"
#include "mdc/error.hpp"
#include "mdc/motion.hpp"
#include "mdc/rng.hpp"
#include "mdc/schedule.hpp"

namespace mdc {

// How a training/evaluation window of n frames is partitioned into
// (observed tail x, generated middle m, observed head k).
struct PartitionPolicy {
  enum class Kind { random_split, fixed };
  Kind kind = Kind::random_split;
  int x = 10;  // fixed-mode values; the 10/90/15 split of a 125 window
  int m = 90;
  int k = 15;

  // Draws (x, m, k) summing to n. Random mode keeps both observed ends
  // between ~4% and 20% of the window.
  std::array<int, 3> draw(int n, Rng& rng) const {
    if (kind == Kind::fixed) {
      if (x + m + k != n)
        throw ConfigError("fixed partition " + std::to_string(x) + "+" +
                          std::to_string(m) + "+" + std::to_string(k) +
                          " does not sum to window length " +
                          std::to_string(n));
      return {x, m, k};
    }
    const int lo = std::max(1, n / 25);
    const int hi = std::max(lo + 1, n / 5);
    const int xs = lo + static_cast<int>(rng.uniform_index(hi - lo + 1));
    const int ks = lo + static_cast<int>(rng.uniform_index(hi - lo + 1));
    return {xs, n - xs - ks, ks};
  }
};

struct TrainConfig {
  int epochs = 1000;
  int batch_size = 64;
  double learning_rate = 3e-4;  // Adam
  ScheduleKind schedule_kind = ScheduleKind::cosine;
  int schedule_T = 1000;
  int window = 125;
  int dct_coeffs = 0;  // 0 = keep all window coefficients
  PartitionPolicy partition;
  std::uint64_t rng_seed = 0;
  int checkpoint_every = 100;  // epochs; 0 disables periodic checkpoints
  bool use_ema = false;
  double ema_decay = 0.999;
  double grad_clip = 1.0;  // global-norm clip; 0 disables

  int retained_coeffs() const { return dct_coeffs > 0 ? dct_coeffs : window; }

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning rate must be > 0");
    if (window < 2) throw ConfigError("window must be >= 2 frames");
    if (dct_coeffs < 0 || dct_coeffs > window)
      throw ConfigError("dct_coeffs outside [0, window]");
  }
};

// Adam with bias correction and optional global-norm gradient clipping.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<Parameter>& params,
            const std::vector<Eigen::MatrixXd>& grads, double clip = 0.0) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
        v_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
      }
    }
    double scale = 1.0;
    if (clip > 0.0) {
      double sq = 0.0;
      for (const auto& g : grads) sq += g.squaredNorm();
      const double norm = std::sqrt(sq);
      if (norm > clip) scale = clip / norm;
    }
    ++steps_;
    const double c1 = 1.0 - std::pow(beta1_, steps_);
    const double c2 = 1.0 - std::pow(beta2_, steps_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Eigen::MatrixXd g = scale * grads[i];
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
      params[i].value.array() -=
          lr_ * (m_[i].array() / c1) /
          ((v_[i].array() / c2).sqrt() + eps_);
    }
  }

  double learning_rate() const { return lr_; }
  long steps() const { return steps_; }
  std::vector<Eigen::MatrixXd>& moment1() { return m_; }
  std::vector<Eigen::MatrixXd>& moment2() { return v_; }
  void restore(long steps, std::vector<Eigen::MatrixXd> m,
               std::vector<Eigen::MatrixXd> v) {
    steps_ = steps;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long steps_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

// One window turned into a denoising example: x_t = q_sample(dct(window), t).
struct TrainSample {
  Eigen::MatrixXd x_t;
  int t = 0;
  Eigen::MatrixXd eps;
};

inline std::vector<TrainSample> make_train_samples(
    const std::vector<MotionSequence>& windows, int retained,
    const NoiseSchedule& schedule, Rng& rng) {
  std::vector<TrainSample> samples;
  samples.reserve(windows.size());
  for (const auto& w : windows) {
    DctCoeffs x0 = dct(w, retained);
    const int t = static_cast<int>(rng.uniform_index(schedule.T));
    Eigen::MatrixXd eps = rng.normal_matrix(x0.coeffs.rows(), x0.coeffs.cols());
    samples.push_back({q_sample(x0.coeffs, t, eps, schedule), t,
                       std::move(eps)});
  }
  return samples;
}

// Mean squared error of an arbitrary noise predictor over a sample batch.
// Lets tests score oracle stubs with the exact training objective.
inline double batch_loss(
    const std::vector<TrainSample>& samples,
    const std::function<Eigen::MatrixXd(const TrainSample&)>& predict) {
  double total = 0.0;
  for (const auto& s : samples) {
    const Eigen::MatrixXd err = predict(s) - s.eps;
    total += err.squaredNorm() / static_cast<double>(err.size());
  }
  return total / static_cast<double>(samples.size());
}

// One optimization step: builds the denoising objective for the batch,
// backpropagates, and applies one Adam update. Returns the pre-update loss.
inline double training_step(DenoiserNet& net, AdamOptimizer& opt,
                            const std::vector<MotionSequence>& windows,
                            const NoiseSchedule& schedule, Rng& rng,
                            int retained, double grad_clip = 1.0) {
  if (windows.empty()) throw ConfigError("training batch is empty");
  const auto samples = make_train_samples(windows, retained, schedule, rng);

  std::vector<Eigen::MatrixXd> grads;
  for (const auto& p : net.parameters())
    grads.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));

  double total = 0.0;
  const bool use_dropout = net.config().dropout > 0.0;
  for (const auto& s : samples) {
    Tape tape;
    auto pv = net.leaves(tape, true);
    Var pred = net.forward_on_tape(tape, pv, s.x_t, s.t, schedule.T,
                                   use_dropout ? &rng : nullptr);
    Var diff = tape.add(pred, tape.affine(tape.leaf(s.eps, false), -1.0));
    Var loss = tape.mean_all(tape.hadamard(diff, diff));
    total += tape.scalar_value(loss);
    tape.backward(loss);
    for (std::size_t i = 0; i < pv.size(); ++i) grads[i] += tape.grad(pv[i]);
  }
  const double denom = static_cast<double>(samples.size());
  for (auto& g : grads) g /= denom;
  const double batch_mean = total / denom;
  if (!std::isfinite(batch_mean)) {
    std::string ts;
    for (const auto& s : samples) ts += std::to_string(s.t) + " ";
    throw DivergenceError("non-finite training loss on a batch of " +
                          std::to_string(samples.size()) +
                          " windows (steps drawn: " + ts + ")");
  }
  opt.step(net.parameters(), grads, grad_clip);
  return batch_mean;
}

struct TrainResult {
  std::vector<double> epoch_losses;
};

inline Checkpoint make_checkpoint(const DenoiserNet& net, AdamOptimizer& opt,
                                  const TrainConfig& cfg, int epochs_done,
                                  double last_loss,
                                  const std::vector<Eigen::MatrixXd>* ema) {
  Checkpoint ckpt;
  ckpt.model = net.config();
  ckpt.schedule_kind = cfg.schedule_kind;
  ckpt.schedule_T = cfg.schedule_T;
  ckpt.meta = {{"epochs_done", epochs_done},
               {"last_loss", last_loss},
               {"seed", cfg.rng_seed},
               {"adam_steps", opt.steps()},
               {"learning_rate", cfg.learning_rate},
               {"window", cfg.window},
               {"dct_coeffs", cfg.retained_coeffs()},
               {"batch_size", cfg.batch_size}};
  const auto& params = net.parameters();
  for (const auto& p : params) ckpt.arrays["param:" + p.name] = p.value;
  if (!opt.moment1().empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      ckpt.arrays["adam.m:" + params[i].name] = opt.moment1()[i];
      ckpt.arrays["adam.v:" + params[i].name] = opt.moment2()[i];
    }
  }
  if (ema)
    for (std::size_t i = 0; i < params.size(); ++i)
      ckpt.arrays["ema:" + params[i].name] = (*ema)[i];
  return ckpt;
}

// Restores optimizer moments saved by make_checkpoint.
inline void restore_optimizer(const Checkpoint& ckpt, const DenoiserNet& net,
                              AdamOptimizer& opt) {
  std::vector<Eigen::MatrixXd> m, v;
  for (const auto& p : net.parameters()) {
    auto im = ckpt.arrays.find("adam.m:" + p.name);
    auto iv = ckpt.arrays.find("adam.v:" + p.name);
    if (im == ckpt.arrays.end() || iv == ckpt.arrays.end()) return;
    m.push_back(im->second);
    v.push_back(iv->second);
  }
  opt.restore(ckpt.meta.value("adam_steps", 0L), std::move(m), std::move(v));
}

// Epoch loop with seeded shuffling, periodic checkpoints, and a
// `metrics.csv` log (epoch,loss,wallclock). Each epoch reseeds from
// (seed, epoch), so resuming from a checkpoint at epoch e reproduces the
// uninterrupted run exactly.
inline TrainResult train(DenoiserNet& net, AdamOptimizer& opt,
                         const std::vector<MotionSequence>& dataset,
                         const TrainConfig& cfg, const std::string& out_dir = "",
                         int start_epoch = 0,
                         const std::function<void(int, double)>& on_epoch = {}) {
  cfg.validate();
  if (dataset.empty())
    throw ConfigError("training dataset is empty; need at least one window");
  for (const auto& w : dataset)
    if (w.frames() != cfg.window)
      throw ShapeError("dataset window has " + std::to_string(w.frames()) +
                       " frames, config expects " + std::to_string(cfg.window));

  const NoiseSchedule schedule =
      make_schedule(cfg.schedule_kind, cfg.schedule_T);
  const int retained = cfg.retained_coeffs();
  const Rng master(cfg.rng_seed);

  std::vector<Eigen::MatrixXd> ema;
  if (cfg.use_ema)
    for (const auto& p : net.parameters()) ema.push_back(p.value);

  std::ofstream log;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const auto log_path = out_dir + "/metrics.csv";
    const bool fresh = start_epoch == 0 || !std::filesystem::exists(log_path);
    log.open(log_path, fresh ? std::ios::trunc : std::ios::app);
    if (fresh) log << "epoch,loss,wallclock\n";
  }
  const auto t0 = std::chrono::steady_clock::now();

  TrainResult result;
  std::vector<int> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  double last_loss = 0.0;
  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    Rng rng = master.child(static_cast<std::uint64_t>(epoch) + 1);
    rng.shuffle(order);
    double epoch_total = 0.0;
    int n_batches = 0;
    for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
      std::vector<MotionSequence> batch;
      for (std::size_t i = at;
           i < std::min(order.size(), at + cfg.batch_size); ++i)
        batch.push_back(dataset[order[i]]);
      epoch_total += training_step(net, opt, batch, schedule, rng, retained,
                                   cfg.grad_clip);
      ++n_batches;
      if (cfg.use_ema)
        for (std::size_t i = 0; i < ema.size(); ++i)
          ema[i] = cfg.ema_decay * ema[i] +
                   (1.0 - cfg.ema_decay) * net.parameters()[i].value;
    }
    last_loss = epoch_total / n_batches;
    result.epoch_losses.push_back(last_loss);
    if (log) {
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      log << epoch << "," << last_loss << "," << wall << "\n";
      log.flush();
    }
    if (on_epoch) on_epoch(epoch, last_loss);
    if (!out_dir.empty() && cfg.checkpoint_every > 0 &&
        (epoch + 1) % cfg.checkpoint_every == 0 && epoch + 1 < cfg.epochs) {
      save_checkpoint(make_checkpoint(net, opt, cfg, epoch + 1, last_loss,
                                      cfg.use_ema ? &ema : nullptr),
                      out_dir + "/checkpoint_epoch" +
                          std::to_string(epoch + 1) + ".ckpt");
    }
  }
  if (!out_dir.empty())
    save_checkpoint(make_checkpoint(net, opt, cfg, cfg.epochs, last_loss,
                                    cfg.use_ema ? &ema : nullptr),
                    out_dir + "/checkpoint.ckpt");
  return result;
}

}  // namespace mdc

#endif  // MDC_TRAINER_HPP_
