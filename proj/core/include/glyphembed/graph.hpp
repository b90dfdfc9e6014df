// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "glyphembed/tensor.hpp"

namespace glyphembed {

/// Handle to a node of a Graph.
struct Var {
  std::uint32_t index = UINT32_MAX;
  bool valid() const { return index != UINT32_MAX; }
  friend bool operator==(Var, Var) = default;
};

enum class Activation { relu, sigmoid, tanh };

/// Floor applied to probabilities inside the log of the cross-entropy.
inline constexpr double kLogProbFloor = 1e-12;

/// Reverse-mode tape. Nodes are appended in evaluation order, so reverse creation order is a
/// valid reverse topological order; backward visits each node once. A Graph is single-threaded;
/// independent graphs may run concurrently as long as they do not share Parameters' gradients.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  Var constant(Tensor value);
  /// Leaf bound to a parameter; repeated calls for the same parameter return the same node.
  /// backward() accumulates into Parameter::grad().
  Var param(Parameter& parameter);
  /// Row `row` of a matrix parameter; backward touches only that row of the gradient.
  Var gather_row(Parameter& table, std::size_t row);

  /// Valid 3x3 convolution, stride 1: C×H×W with O×C×3×3 kernels and O biases -> O×(H−2)×(W−2).
  Var conv2d(Var input, Var kernels, Var bias);
  /// 2x2 max pooling, stride 2, trailing odd row/column dropped. Ties route to the first cell.
  Var maxpool2d(Var input);
  /// weight (M×N) · input (N) + bias (M).
  Var affine(Var input, Var weight, Var bias);
  Var matvec(Var weight, Var input);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  /// (1 − t) ⊙ a + t ⊙ b.
  Var lerp(Var a, Var b, Var t);
  Var activation(Var input, Activation kind);
  Var relu(Var input) { return activation(input, Activation::relu); }
  Var sigmoid(Var input) { return activation(input, Activation::sigmoid); }
  Var tanh(Var input) { return activation(input, Activation::tanh); }
  Var concat(Var a, Var b);
  Var reshape(Var input, Shape shape);

  Var softmax(Var logits);
  /// Mean over the batch of −log p[label], log floored at log(1e−12). `targets` must be one-hot.
  /// `normalizer` replaces the batch size in the mean when nonzero.
  Var cross_entropy(std::span<const Var> probs, std::span<const Tensor> targets, std::size_t normalizer = 0);
  /// Softmax followed by cross-entropy with the fused (p − t)/B gradient into the logits.
  Var softmax_cross_entropy(std::span<const Var> logits, std::span<const std::size_t> labels,
                            std::size_t normalizer = 0);

  Var sum(Var input);
  Var sum_squares(Var input);
  Var dot(Var a, Var b);

  void backward(Var loss);

  const Shape& shape(Var v) const { return node(v).shape; }
  std::span<const double> value(Var v) const { return node(v).value; }
  double scalar(Var v) const;
  /// Gradient of the last backward() w.r.t. this node; empty when nothing flowed into it.
  std::span<const double> grad(Var v) const { return node(v).grad; }

  std::size_t size() const { return nodes_.size(); }

  /// Hash of every ReLU input sign and max-pool winner. Two evaluations of the same
  /// computation with equal signatures lie on the same linear piece of those ops.
  std::uint64_t branch_signature() const;

 private:
  enum class Op : std::uint8_t {
    constant, param, gather_row, conv2d, maxpool2d, affine, matvec, add, sub, mul, lerp,
    activation, concat, reshape, softmax, cross_entropy, softmax_ce, sum, sum_squares, dot
  };

  struct Node {
    Op op = Op::constant;
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<std::uint32_t> inputs;
    bool needs_grad = false;
    Parameter* parameter = nullptr;
    std::size_t row = 0;
    Activation act = Activation::relu;
    std::vector<std::uint32_t> argmax;
    std::vector<std::size_t> labels;
    std::vector<double> saved;
    double normalizer = 1.0;
  };

  const Node& node(Var v) const;
  Node& node(Var v);
  Var push(Node n);
  std::vector<double>& grad_buffer(std::uint32_t index);
  void backprop(std::uint32_t index);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, Var> bound_;
};

}  // namespace glyphembed
