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

#ifndef MDC_DENOISER_HPP_
#define MDC_DENOISER_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mdc/autodiff.hpp"
#include "mdc/error.hpp"
#include "mdc/rng.hpp"

namespace mdc {

enum class TimeEmbedKind { basic, multiscale };

inline std::string to_string(TimeEmbedKind k) {
  return k == TimeEmbedKind::basic ? "basic" : "multiscale";
}

inline TimeEmbedKind time_embed_kind_from_string(const std::string& s) {
  if (s == "basic") return TimeEmbedKind::basic;
  if (s == "multiscale") return TimeEmbedKind::multiscale;
  throw ConfigError("unknown time embedding kind \"" + s +
                    "\" (expected basic|multiscale)");
}

// Noise-prediction network configuration. Tokens are DCT-coefficient rows,
// so n_frames bounds the token count and n_feats = joints * 3.
struct ModelConfig {
  int n_blocks = 4;
  int latent_dim = 512;
  int n_heads = 8;
  int ff_dim = 2560;
  double dropout = 0.0;
  int n_frames = 125;
  int n_feats = 51;
  bool use_gate = true;
  TimeEmbedKind time_embed = TimeEmbedKind::multiscale;

  void validate() const {
    if (n_blocks < 2 || n_blocks % 2 != 0)
      throw ConfigError("n_blocks must be even and >= 2 (blocks are "
                        "skip-paired), got " + std::to_string(n_blocks));
    if (latent_dim < 1 || n_heads < 1 || latent_dim % n_heads != 0)
      throw ConfigError("latent_dim must be divisible by n_heads");
    if (latent_dim % 8 != 0)
      throw ConfigError("latent_dim must be a multiple of 8 for the "
                        "multi-scale sinusoid layout");
    if (ff_dim < 1 || n_frames < 1 || n_feats < 1)
      throw ConfigError("ff_dim, n_frames, n_feats must be positive");
    if (dropout < 0.0 || dropout >= 1.0)
      throw ConfigError("dropout must be in [0, 1)");
  }
};

// Raw (unlearned) sinusoid features for diffusion step t. Frequencies are
// geometrically spaced from 1 down to 1e-4; the multiscale variant evaluates
// them at four time scales {1, 1/4, 4, 16} in equal chunks.
inline Eigen::RowVectorXd time_sinusoid(int t, int T, int dim,
                                        TimeEmbedKind kind) {
  if (t < 0 || t >= T)
    throw BoundsError("time step " + std::to_string(t) + " outside [0, " +
                      std::to_string(T) + ")");
  auto fill = [](Eigen::RowVectorXd& out, int first, int count, double time) {
    const int half = count / 2;
    for (int i = 0; i < half; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / half);
      out(first + i) = std::sin(time * freq);
      out(first + half + i) = std::cos(time * freq);
    }
  };
  Eigen::RowVectorXd out(dim);
  if (kind == TimeEmbedKind::basic) {
    fill(out, 0, dim, static_cast<double>(t));
  } else {
    static constexpr double kScales[4] = {1.0, 0.25, 4.0, 16.0};
    const int chunk = dim / 4;
    for (int c = 0; c < 4; ++c)
      fill(out, c * chunk, chunk, static_cast<double>(t) * kScales[c]);
  }
  return out;
}

// Sigmoid-gated convex combination of the two block streams (the gate input
// is the block's input token stream): bias = sigmoid(gate_in W + b),
// output = bias (.) ffn_out + (1 - bias) (.) attn_out.
inline Eigen::MatrixXd gate_combine(const Eigen::MatrixXd& attn_out,
                                    const Eigen::MatrixXd& ffn_out,
                                    const Eigen::MatrixXd& gate_in,
                                    const Eigen::MatrixXd& gate_w,
                                    const Eigen::RowVectorXd& gate_b) {
  if (attn_out.rows() != ffn_out.rows() || attn_out.cols() != ffn_out.cols() ||
      gate_in.rows() != attn_out.rows())
    throw ShapeError("gate_combine stream shapes disagree");
  if (gate_in.cols() != gate_w.rows() || gate_w.cols() != attn_out.cols())
    throw ShapeError("gate_combine projection shape disagrees");
  Eigen::MatrixXd z = gate_in * gate_w;
  z.rowwise() += gate_b;
  Eigen::ArrayXXd bias = 1.0 / (1.0 + (-z.array()).exp());
  return (bias * ffn_out.array() + (1.0 - bias) * attn_out.array()).matrix();
}

struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
};

// Exact number of learnable scalars for a config, without allocating them.
inline std::size_t parameter_count(const ModelConfig& cfg) {
  const std::size_t D = cfg.latent_dim, F = cfg.n_feats, H = cfg.ff_dim;
  std::size_t n = 0;
  n += F * D + D;                    // input embedding
  n += static_cast<std::size_t>(cfg.n_frames) * D;  // learned positions
  n += 2 * (D * D + D);              // time-embedding projection
  std::size_t block = 0;
  block += 4 * (D * D + D);          // attention q/k/v/out
  block += 4 * D;                    // two layer norms
  block += D * H + H + H * D + D;    // feed-forward
  if (cfg.use_gate) block += D * D + D;
  n += static_cast<std::size_t>(cfg.n_blocks) * block;
  n += D * F + F;                    // output head
  return n;
}

// The trainable noise-prediction network: linear token embedding of DCT rows,
// learned positions, sinusoid+MLP step embedding, n_blocks attention blocks
// with sigmoid-gated attention/feed-forward fusion, and additive skip
// connections pairing block i with block n_blocks-1-i.
class DenoiserNet {
 public:
  DenoiserNet(ModelConfig cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    build(&rng);
  }

  explicit DenoiserNet(ModelConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    build(nullptr);
  }

  const ModelConfig& config() const { return cfg_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }

  Eigen::MatrixXd& param(const std::string& name) {
    return params_[index_.at(name)].value;
  }
  const Eigen::MatrixXd& param(const std::string& name) const {
    return params_[index_.at(name)].value;
  }
  bool has_param(const std::string& name) const { return index_.count(name); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  // Learned step embedding (sinusoid features through the projection MLP).
  Eigen::RowVectorXd time_embedding(int t, int T) const {
    Eigen::RowVectorXd raw =
        time_sinusoid(t, T, cfg_.latent_dim, cfg_.time_embed);
    Eigen::RowVectorXd h = raw * param("time.W1") + param("time.b1");
    for (int i = 0; i < h.size(); ++i)
      h(i) = 0.5 * h(i) * (1.0 + std::erf(h(i) / std::sqrt(2.0)));
    return h * param("time.W2") + param("time.b2");
  }

  // Tape leaves for every parameter, in storage order.
  std::vector<Var> leaves(Tape& tape, bool needs_grad) const {
    std::vector<Var> vars;
    vars.reserve(params_.size());
    for (const auto& p : params_) vars.push_back(tape.leaf(p.value, needs_grad));
    return vars;
  }

  // Builds the forward graph for one sample (L x n_feats, L <= n_frames).
  // With dropout_rng set and cfg.dropout > 0, inverted-dropout masks are
  // applied after the attention and feed-forward sublayers.
  Var forward_on_tape(Tape& tape, const std::vector<Var>& pv,
                      const Eigen::MatrixXd& noisy, int t, int T,
                      Rng* dropout_rng = nullptr) const {
    const int L = static_cast<int>(noisy.rows());
    if (static_cast<int>(noisy.cols()) != cfg_.n_feats)
      throw ShapeError("input has " + std::to_string(noisy.cols()) +
                       " features, model expects " +
                       std::to_string(cfg_.n_feats));
    if (L < 1 || L > cfg_.n_frames)
      throw ShapeError("sequence of " + std::to_string(L) +
                       " tokens exceeds the model's trained maximum of " +
                       std::to_string(cfg_.n_frames));

    auto P = [&](const std::string& name) { return pv[index_.at(name)]; };

    Var x = tape.leaf(noisy, false);
    Var tok = tape.add_row_broadcast(tape.matmul(x, P("embed.W")), P("embed.b"));
    tok = tape.add(tok, tape.slice_rows(P("pos"), 0, L));
    Var sinus = tape.leaf(time_sinusoid(t, T, cfg_.latent_dim, cfg_.time_embed),
                          false);
    Var temb = tape.add_row_broadcast(
        tape.matmul(tape.gelu(tape.add_row_broadcast(
                        tape.matmul(sinus, P("time.W1")), P("time.b1"))),
                    P("time.W2")),
        P("time.b2"));
    tok = tape.add_row_broadcast(tok, temb);

    std::vector<Var> skips;
    for (int b = 0; b < cfg_.n_blocks; ++b) {
      if (b < cfg_.n_blocks / 2)
        skips.push_back(tok);
      else {
        tok = tape.add(tok, skips.back());
        skips.pop_back();
      }
      tok = block(tape, pv, tok, b, dropout_rng);
    }
    return tape.add_row_broadcast(tape.matmul(tok, P("out.W")), P("out.b"));
  }

  // Inference forward: same graph, gradient-free leaves, no dropout.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& noisy, int t, int T) const {
    Tape tape;
    auto pv = leaves(tape, false);
    return tape.value(forward_on_tape(tape, pv, noisy, t, T));
  }

 private:
  Var block(Tape& tape, const std::vector<Var>& pv, Var xin, int b,
            Rng* dropout_rng) const {
    const std::string pre = "block" + std::to_string(b) + ".";
    auto P = [&](const std::string& name) { return pv[index_.at(pre + name)]; };

    auto attn_on = [&](Var h) {
      Var a = attention(tape, pv, pre, h);
      return dropout(tape, a, dropout_rng);
    };
    auto ffn_on = [&](Var h) {
      Var f = tape.matmul(
          tape.gelu(tape.add_row_broadcast(tape.matmul(h, P("ffn.W1")),
                                           P("ffn.b1"))),
          P("ffn.W2"));
      f = tape.add_row_broadcast(f, P("ffn.b2"));
      return dropout(tape, f, dropout_rng);
    };

    if (!cfg_.use_gate) {
      // Plain pre-norm encoder block.
      Var a = tape.add(
          xin, attn_on(tape.layernorm_rows(xin, P("ln1.gamma"), P("ln1.beta"))));
      return tape.add(
          a, ffn_on(tape.layernorm_rows(a, P("ln2.gamma"), P("ln2.beta"))));
    }

    // Gated block: attention and feed-forward run as parallel residual
    // streams off the block input; the gate picks per element.
    Var attn_stream = tape.add(
        xin, attn_on(tape.layernorm_rows(xin, P("ln1.gamma"), P("ln1.beta"))));
    Var ffn_stream = tape.add(
        xin, ffn_on(tape.layernorm_rows(xin, P("ln2.gamma"), P("ln2.beta"))));
    Var bias = tape.sigmoid(tape.add_row_broadcast(
        tape.matmul(xin, P("gate.W")), P("gate.b")));
    Var one_minus = tape.affine(bias, -1.0, 1.0);
    return tape.add(tape.hadamard(bias, ffn_stream),
                    tape.hadamard(one_minus, attn_stream));
  }

  Var attention(Tape& tape, const std::vector<Var>& pv, const std::string& pre,
                Var h) const {
    auto P = [&](const std::string& name) { return pv[index_.at(pre + name)]; };
    Var q = tape.add_row_broadcast(tape.matmul(h, P("attn.Wq")), P("attn.bq"));
    Var k = tape.add_row_broadcast(tape.matmul(h, P("attn.Wk")), P("attn.bk"));
    Var v = tape.add_row_broadcast(tape.matmul(h, P("attn.Wv")), P("attn.bv"));
    const int dh = cfg_.latent_dim / cfg_.n_heads;
    std::vector<Var> heads;
    heads.reserve(cfg_.n_heads);
    for (int head = 0; head < cfg_.n_heads; ++head) {
      Var qh = tape.slice_cols(q, head * dh, dh);
      Var kh = tape.slice_cols(k, head * dh, dh);
      Var vh = tape.slice_cols(v, head * dh, dh);
      Var scores = tape.affine(tape.matmul(qh, tape.transpose(kh)),
                               1.0 / std::sqrt(static_cast<double>(dh)));
      heads.push_back(tape.matmul(tape.softmax_rows(scores), vh));
    }
    Var ctx = tape.concat_cols(heads);
    return tape.add_row_broadcast(tape.matmul(ctx, P("attn.Wo")),
                                  P("attn.bo"));
  }

  Var dropout(Tape& tape, Var x, Rng* rng) const {
    if (!rng || cfg_.dropout <= 0.0) return x;
    const auto& v = tape.value(x);
    Eigen::MatrixXd mask(v.rows(), v.cols());
    const double keep = 1.0 - cfg_.dropout;
    for (Eigen::Index r = 0; r < v.rows(); ++r)
      for (Eigen::Index c = 0; c < v.cols(); ++c)
        mask(r, c) = rng->uniform() < keep ? 1.0 / keep : 0.0;
    return tape.hadamard(x, tape.leaf(std::move(mask), false));
  }

  void add_param(const std::string& name, int rows, int cols, Rng* rng,
                 double init) {
    Eigen::MatrixXd value;
    if (rng && init > 0.0)
      value = init * rng->normal_matrix(rows, cols);
    else
      value = Eigen::MatrixXd::Zero(rows, cols);
    if (init < 0.0) value.setOnes();  // layer-norm gains
    index_[name] = params_.size();
    params_.push_back({name, std::move(value)});
  }

  void build(Rng* rng) {
    const int D = cfg_.latent_dim, F = cfg_.n_feats, H = cfg_.ff_dim;
    auto xavier = [](int in, int out) { return std::sqrt(2.0 / (in + out)); };
    add_param("embed.W", F, D, rng, xavier(F, D));
    add_param("embed.b", 1, D, rng, 0.0);
    add_param("pos", cfg_.n_frames, D, rng, 0.02);
    add_param("time.W1", D, D, rng, xavier(D, D));
    add_param("time.b1", 1, D, rng, 0.0);
    add_param("time.W2", D, D, rng, xavier(D, D));
    add_param("time.b2", 1, D, rng, 0.0);
    for (int b = 0; b < cfg_.n_blocks; ++b) {
      const std::string pre = "block" + std::to_string(b) + ".";
      add_param(pre + "ln1.gamma", 1, D, rng, -1.0);
      add_param(pre + "ln1.beta", 1, D, rng, 0.0);
      for (const char* w : {"attn.Wq", "attn.Wk", "attn.Wv", "attn.Wo"})
        add_param(pre + w, D, D, rng, xavier(D, D));
      for (const char* bname : {"attn.bq", "attn.bk", "attn.bv", "attn.bo"})
        add_param(pre + bname, 1, D, rng, 0.0);
      add_param(pre + "ln2.gamma", 1, D, rng, -1.0);
      add_param(pre + "ln2.beta", 1, D, rng, 0.0);
      add_param(pre + "ffn.W1", D, H, rng, xavier(D, H));
      add_param(pre + "ffn.b1", 1, H, rng, 0.0);
      add_param(pre + "ffn.W2", H, D, rng, xavier(H, D));
      add_param(pre + "ffn.b2", 1, D, rng, 0.0);
      if (cfg_.use_gate) {
        // Zero gate weights start the fusion at an even 0.5/0.5 split.
        add_param(pre + "gate.W", D, D, rng, 0.0);
        add_param(pre + "gate.b", 1, D, rng, 0.0);
      }
    }
    // Zero output head: the untrained net predicts zero noise.
    add_param("out.W", D, F, rng, 0.0);
    add_param("out.b", 1, F, rng, 0.0);
  }

  ModelConfig cfg_;
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace mdc

#endif  // MDC_DENOISER_HPP_
