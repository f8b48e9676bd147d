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

#ifndef MDC_AUTODIFF_HPP_
#define MDC_AUTODIFF_HPP_

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mdc/error.hpp"

namespace mdc {

// Reverse-mode tape over dense double matrices. One tape per forward pass;
// nodes are append-only and backward walks them in reverse. Every op is
// smooth (GELU rather than ReLU) so finite-difference checks converge.
class Tape {
 public:
  struct Var {
    int id = -1;
  };

  Var leaf(Eigen::MatrixXd value, bool needs_grad = false) {
    return push(Op::kLeaf, std::move(value), -1, -1, -1, needs_grad);
  }

  Var matmul(Var a, Var b) {
    const auto& A = value(a);
    const auto& B = value(b);
    if (A.cols() != B.rows()) throw ShapeError("matmul inner dims disagree");
    return push(Op::kMatMul, A * B, a.id, b.id);
  }

  Var add(Var a, Var b) {
    const auto& A = value(a);
    const auto& B = value(b);
    if (A.rows() != B.rows() || A.cols() != B.cols())
      throw ShapeError("add shapes disagree");
    return push(Op::kAdd, A + B, a.id, b.id);
  }

  Var hadamard(Var a, Var b) {
    const auto& A = value(a);
    const auto& B = value(b);
    if (A.rows() != B.rows() || A.cols() != B.cols())
      throw ShapeError("hadamard shapes disagree");
    return push(Op::kHadamard, A.cwiseProduct(B), a.id, b.id);
  }

  // y = s * x + c, elementwise.
  Var affine(Var a, double scale, double shift = 0.0) {
    Var v = push(Op::kAffine, (value(a).array() * scale + shift).matrix(),
                 a.id);
    nodes_[v.id].scalar = scale;
    return v;
  }

  // Adds a 1 x C row vector to every row of an R x C matrix.
  Var add_row_broadcast(Var a, Var row) {
    const auto& A = value(a);
    const auto& r = value(row);
    if (r.rows() != 1 || r.cols() != A.cols())
      throw ShapeError("add_row_broadcast needs a 1 x cols row vector");
    Eigen::MatrixXd out = A;
    out.rowwise() += r.row(0);
    return push(Op::kAddRow, std::move(out), a.id, row.id);
  }

  Var sigmoid(Var a) {
    Eigen::MatrixXd out =
        (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
    return push(Op::kSigmoid, std::move(out), a.id);
  }

  Var gelu(Var a) {
    const auto& x = value(a).array();
    Eigen::MatrixXd out =
        (0.5 * x * (1.0 + (x / std::sqrt(2.0)).erf())).matrix();
    return push(Op::kGelu, std::move(out), a.id);
  }

  Var softmax_rows(Var a) {
    Eigen::MatrixXd out = value(a);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const double m = out.row(r).maxCoeff();
      out.row(r) = (out.row(r).array() - m).exp();
      out.row(r) /= out.row(r).sum();
    }
    return push(Op::kSoftmaxRows, std::move(out), a.id);
  }

  // Per-row layer norm with affine gain/offset (gamma, beta are 1 x C rows).
  Var layernorm_rows(Var a, Var gamma, Var beta, double eps = 1e-5) {
    const auto& X = value(a);
    const auto& g = value(gamma);
    const auto& b = value(beta);
    if (g.rows() != 1 || g.cols() != X.cols() || b.rows() != 1 ||
        b.cols() != X.cols())
      throw ShapeError("layernorm gamma/beta must be 1 x cols rows");
    Eigen::MatrixXd xhat(X.rows(), X.cols());
    Eigen::VectorXd inv_std(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      const double mean = X.row(r).mean();
      const double var = (X.row(r).array() - mean).square().mean();
      inv_std(r) = 1.0 / std::sqrt(var + eps);
      xhat.row(r) = (X.row(r).array() - mean) * inv_std(r);
    }
    Eigen::MatrixXd out = xhat;
    out.array().rowwise() *= g.row(0).array();
    out.rowwise() += b.row(0);
    Var v = push(Op::kLayerNormRows, std::move(out), a.id, gamma.id, beta.id);
    nodes_[v.id].aux = std::move(xhat);
    nodes_[v.id].aux_vec = std::move(inv_std);
    return v;
  }

  Var transpose(Var a) {
    return push(Op::kTranspose, value(a).transpose(), a.id);
  }

  Var slice_cols(Var a, int first, int count) {
    const auto& A = value(a);
    if (first < 0 || first + count > A.cols())
      throw BoundsError("slice_cols out of range");
    Var v = push(Op::kSliceCols, A.middleCols(first, count), a.id);
    nodes_[v.id].i0 = first;
    return v;
  }

  Var slice_rows(Var a, int first, int count) {
    const auto& A = value(a);
    if (first < 0 || first + count > A.rows())
      throw BoundsError("slice_rows out of range");
    Var v = push(Op::kSliceRows, A.middleRows(first, count), a.id);
    nodes_[v.id].i0 = first;
    return v;
  }

  Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw BoundsError("concat_cols needs inputs");
    Eigen::Index rows = value(parts[0]).rows(), cols = 0;
    for (Var p : parts) cols += value(p).cols();
    Eigen::MatrixXd out(rows, cols);
    Eigen::Index at = 0;
    bool needs = false;
    for (Var p : parts) {
      out.middleCols(at, value(p).cols()) = value(p);
      at += value(p).cols();
      needs = needs || nodes_[p.id].needs_grad;
    }
    Var v = push(Op::kConcatCols, std::move(out), -1, -1, -1, needs);
    for (Var p : parts) nodes_[v.id].extra.push_back(p.id);
    return v;
  }

  // Sum of all entries, as a 1x1 node.
  Var sum_all(Var a) {
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = value(a).sum();
    return push(Op::kSumAll, std::move(out), a.id);
  }

  Var mean_all(Var a) {
    return affine(sum_all(a),
                  1.0 / static_cast<double>(value(a).size()));
  }

  const Eigen::MatrixXd& value(Var v) const { return nodes_[v.id].value; }

  double scalar_value(Var v) const { return nodes_[v.id].value(0, 0); }

  // Backpropagates from a 1x1 loss node. Gradients accumulate into grad(v).
  void backward(Var loss) {
    if (value(loss).size() != 1)
      throw ShapeError("backward expects a scalar loss node");
    grads_.assign(nodes_.size(), Eigen::MatrixXd());
    set_grad(loss.id, Eigen::MatrixXd::Ones(1, 1));
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.needs_grad || grads_[id].size() == 0) continue;
      const Eigen::MatrixXd& gy = grads_[id];
      switch (n.op) {
        case Op::kLeaf:
          break;
        case Op::kMatMul:
          if (wants(n.a)) add_grad(n.a, gy * nodes_[n.b].value.transpose());
          if (wants(n.b)) add_grad(n.b, nodes_[n.a].value.transpose() * gy);
          break;
        case Op::kAdd:
          if (wants(n.a)) add_grad(n.a, gy);
          if (wants(n.b)) add_grad(n.b, gy);
          break;
        case Op::kHadamard:
          if (wants(n.a)) add_grad(n.a, gy.cwiseProduct(nodes_[n.b].value));
          if (wants(n.b)) add_grad(n.b, gy.cwiseProduct(nodes_[n.a].value));
          break;
        case Op::kAffine:
          if (wants(n.a)) add_grad(n.a, n.scalar * gy);
          break;
        case Op::kAddRow:
          if (wants(n.a)) add_grad(n.a, gy);
          if (wants(n.b)) add_grad(n.b, gy.colwise().sum());
          break;
        case Op::kSigmoid:
          if (wants(n.a)) {
            const auto& y = n.value.array();
            add_grad(n.a, (gy.array() * y * (1.0 - y)).matrix());
          }
          break;
        case Op::kGelu:
          if (wants(n.a)) {
            const auto& x = nodes_[n.a].value.array();
            const double inv_sqrt2pi = 0.3989422804014327;
            auto phi = 0.5 * (1.0 + (x / std::sqrt(2.0)).erf());
            auto dens = inv_sqrt2pi * (-0.5 * x.square()).exp();
            add_grad(n.a, (gy.array() * (phi + x * dens)).matrix());
          }
          break;
        case Op::kSoftmaxRows:
          if (wants(n.a)) {
            Eigen::MatrixXd gx = gy.cwiseProduct(n.value);
            for (Eigen::Index r = 0; r < gx.rows(); ++r) {
              const double dot = gx.row(r).sum();
              gx.row(r) -= dot * n.value.row(r);
            }
            add_grad(n.a, std::move(gx));
          }
          break;
        case Op::kLayerNormRows: {
          const Eigen::MatrixXd& xhat = n.aux;
          const Eigen::VectorXd& inv_std = n.aux_vec;
          const auto& gamma = nodes_[n.b].value;
          if (wants(n.b)) add_grad(n.b, gy.cwiseProduct(xhat).colwise().sum());
          if (wants(n.c)) add_grad(n.c, gy.colwise().sum());
          if (wants(n.a)) {
            Eigen::MatrixXd g = gy;
            g.array().rowwise() *= gamma.row(0).array();
            Eigen::MatrixXd gx(g.rows(), g.cols());
            for (Eigen::Index r = 0; r < g.rows(); ++r) {
              const double mg = g.row(r).mean();
              const double mgx = g.row(r).cwiseProduct(xhat.row(r)).mean();
              gx.row(r) =
                  inv_std(r) *
                  (g.row(r).array() - mg - xhat.row(r).array() * mgx);
            }
            add_grad(n.a, std::move(gx));
          }
          break;
        }
        case Op::kTranspose:
          if (wants(n.a)) add_grad(n.a, gy.transpose());
          break;
        case Op::kSliceCols:
          if (wants(n.a)) {
            Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(
                nodes_[n.a].value.rows(), nodes_[n.a].value.cols());
            gx.middleCols(n.i0, gy.cols()) = gy;
            add_grad(n.a, std::move(gx));
          }
          break;
        case Op::kSliceRows:
          if (wants(n.a)) {
            Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(
                nodes_[n.a].value.rows(), nodes_[n.a].value.cols());
            gx.middleRows(n.i0, gy.rows()) = gy;
            add_grad(n.a, std::move(gx));
          }
          break;
        case Op::kConcatCols: {
          Eigen::Index at = 0;
          for (int src : n.extra) {
            const Eigen::Index w = nodes_[src].value.cols();
            if (nodes_[src].needs_grad)
              add_grad(src, gy.middleCols(at, w));
            at += w;
          }
          break;
        }
        case Op::kSumAll:
          if (wants(n.a))
            add_grad(n.a, Eigen::MatrixXd::Constant(
                              nodes_[n.a].value.rows(),
                              nodes_[n.a].value.cols(), gy(0, 0)));
          break;
      }
    }
  }

  // Gradient of the last backward() pass; zero matrix if the var was not
  // reached.
  Eigen::MatrixXd grad(Var v) const {
    if (v.id < static_cast<int>(grads_.size()) && grads_[v.id].size() != 0)
      return grads_[v.id];
    return Eigen::MatrixXd::Zero(nodes_[v.id].value.rows(),
                                 nodes_[v.id].value.cols());
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kLeaf, kMatMul, kAdd, kHadamard, kAffine, kAddRow, kSigmoid, kGelu,
    kSoftmaxRows, kLayerNormRows, kTranspose, kSliceCols, kSliceRows,
    kConcatCols, kSumAll,
  };

  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;
    Eigen::MatrixXd value;
    Eigen::MatrixXd aux;      // op-specific saved forward state
    Eigen::VectorXd aux_vec;
    std::vector<int> extra;   // concat sources
    double scalar = 0.0;
    int i0 = 0;
    bool needs_grad = false;
  };

  Var push(Op op, Eigen::MatrixXd value, int a = -1, int b = -1, int c = -1,
           bool force_needs = false) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.c = c;
    n.value = std::move(value);
    n.needs_grad = force_needs || (a >= 0 && nodes_[a].needs_grad) ||
                   (b >= 0 && nodes_[b].needs_grad) ||
                   (c >= 0 && nodes_[c].needs_grad);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  bool wants(int id) const { return id >= 0 && nodes_[id].needs_grad; }

  void set_grad(int id, Eigen::MatrixXd g) { grads_[id] = std::move(g); }

  void add_grad(int id, Eigen::MatrixXd g) {
    if (grads_[id].size() == 0)
      grads_[id] = std::move(g);
    else
      grads_[id] += g;
  }

  std::vector<Node> nodes_;
  std::vector<Eigen::MatrixXd> grads_;
};

using Var = Tape::Var;

}  // namespace mdc

#endif  // MDC_AUTODIFF_HPP_
