// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/graph.hpp"

#include <algorithm>
#include <cmath>

#include "glyphembed/error.hpp"

namespace glyphembed {
namespace {

double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const Graph::Node& Graph::node(Var v) const {
  GLYPHEMBED_EXPECT(v.index < nodes_.size(), "variable does not belong to this graph");
  return nodes_[v.index];
}

Graph::Node& Graph::node(Var v) {
  GLYPHEMBED_EXPECT(v.index < nodes_.size(), "variable does not belong to this graph");
  return nodes_[v.index];
}

Var Graph::push(Node n) {
  if (!n.needs_grad) {
    for (auto in : n.inputs) n.needs_grad = n.needs_grad || nodes_[in].needs_grad;
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

double Graph::scalar(Var v) const {
  const Node& n = node(v);
  GLYPHEMBED_EXPECT(n.value.size() == 1, "scalar() on a non-scalar node");
  return n.value[0];
}

Var Graph::constant(Tensor value) {
  Node n;
  n.op = Op::constant;
  n.shape = value.shape();
  n.value.assign(value.values().begin(), value.values().end());
  return push(std::move(n));
}

Var Graph::param(Parameter& parameter) {
  if (auto it = bound_.find(&parameter); it != bound_.end()) return it->second;
  Node n;
  n.op = Op::param;
  n.shape = parameter.shape();
  n.value.assign(parameter.value().values().begin(), parameter.value().values().end());
  n.parameter = &parameter;
  n.needs_grad = true;
  Var v = push(std::move(n));
  bound_.emplace(&parameter, v);
  return v;
}

Var Graph::gather_row(Parameter& table, std::size_t row) {
  GLYPHEMBED_EXPECT(table.shape().size() == 2, "gather_row needs a matrix parameter");
  GLYPHEMBED_EXPECT(row < table.shape()[0], "row index out of range");
  const std::size_t width = table.shape()[1];
  Node n;
  n.op = Op::gather_row;
  n.shape = {width};
  const auto values = table.value().values();
  n.value.assign(values.begin() + static_cast<std::ptrdiff_t>(row * width),
                 values.begin() + static_cast<std::ptrdiff_t>((row + 1) * width));
  n.parameter = &table;
  n.row = row;
  n.needs_grad = true;
  return push(std::move(n));
}

Var Graph::conv2d(Var input, Var kernels, Var bias) {
  const Shape& is = shape(input);
  const Shape& ks = shape(kernels);
  const Shape& bs = shape(bias);
  GLYPHEMBED_EXPECT(is.size() == 3, "conv2d input must be C×H×W");
  GLYPHEMBED_EXPECT(ks.size() == 4 && ks[2] == 3 && ks[3] == 3, "conv2d kernels must be O×C×3×3");
  GLYPHEMBED_EXPECT(ks[1] == is[0], "conv2d channel mismatch: input " + shape_string(is) + ", kernels " + shape_string(ks));
  GLYPHEMBED_EXPECT(bs.size() == 1 && bs[0] == ks[0], "conv2d bias must have O entries");
  GLYPHEMBED_EXPECT(is[1] >= 3 && is[2] >= 3, "conv2d input must be at least 3×3");

  const std::size_t C = is[0], H = is[1], W = is[2], O = ks[0];
  const std::size_t OH = H - 2, OW = W - 2;
  Node n;
  n.op = Op::conv2d;
  n.shape = {O, OH, OW};
  n.inputs = {input.index, kernels.index, bias.index};
  n.value.assign(O * OH * OW, 0.0);

  const double* in = nodes_[input.index].value.data();
  const double* k = nodes_[kernels.index].value.data();
  const double* b = nodes_[bias.index].value.data();
  double* out = n.value.data();
  for (std::size_t o = 0; o < O; ++o) {
    double* plane = out + o * OH * OW;
    std::fill(plane, plane + OH * OW, b[o]);
    for (std::size_t c = 0; c < C; ++c) {
      const double* src_plane = in + c * H * W;
      for (std::size_t dy = 0; dy < 3; ++dy) {
        for (std::size_t dx = 0; dx < 3; ++dx) {
          const double w = k[((o * C + c) * 3 + dy) * 3 + dx];
          if (w == 0.0) continue;
          for (std::size_t y = 0; y < OH; ++y) {
            const double* src = src_plane + (y + dy) * W + dx;
            double* dst = plane + y * OW;
            for (std::size_t x = 0; x < OW; ++x) dst[x] += w * src[x];
          }
        }
      }
    }
  }
  return push(std::move(n));
}

Var Graph::maxpool2d(Var input) {
  const Shape& is = shape(input);
  GLYPHEMBED_EXPECT(is.size() == 3, "maxpool2d input must be C×H×W");
  GLYPHEMBED_EXPECT(is[1] >= 2 && is[2] >= 2, "maxpool2d input must be at least 2×2");
  const std::size_t C = is[0], H = is[1], W = is[2];
  const std::size_t OH = H / 2, OW = W / 2;
  Node n;
  n.op = Op::maxpool2d;
  n.shape = {C, OH, OW};
  n.inputs = {input.index};
  n.value.resize(C * OH * OW);
  n.argmax.resize(C * OH * OW);
  const double* in = nodes_[input.index].value.data();
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t y = 0; y < OH; ++y) {
      for (std::size_t x = 0; x < OW; ++x) {
        std::size_t best = (c * H + 2 * y) * W + 2 * x;
        const std::size_t candidates[3] = {best + 1, best + W, best + W + 1};
        for (std::size_t cand : candidates) {
          if (in[cand] > in[best]) best = cand;
        }
        const std::size_t o = (c * OH + y) * OW + x;
        n.value[o] = in[best];
        n.argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return push(std::move(n));
}

Var Graph::matvec(Var weight, Var input) {
  const Shape& ws = shape(weight);
  const Shape& is = shape(input);
  GLYPHEMBED_EXPECT(ws.size() == 2 && is.size() == 1 && ws[1] == is[0],
                    "matvec shape mismatch: weight " + shape_string(ws) + ", input " + shape_string(is));
  const std::size_t M = ws[0], N = ws[1];
  Node n;
  n.op = Op::matvec;
  n.shape = {M};
  n.inputs = {weight.index, input.index};
  n.value.assign(M, 0.0);
  const double* w = nodes_[weight.index].value.data();
  const double* x = nodes_[input.index].value.data();
  for (std::size_t i = 0; i < M; ++i) {
    double acc = 0.0;
    const double* row = w + i * N;
    for (std::size_t j = 0; j < N; ++j) acc += row[j] * x[j];
    n.value[i] = acc;
  }
  return push(std::move(n));
}

Var Graph::affine(Var input, Var weight, Var bias) {
  const Shape& ws = shape(weight);
  const Shape& is = shape(input);
  const Shape& bs = shape(bias);
  GLYPHEMBED_EXPECT(ws.size() == 2 && is.size() == 1 && ws[1] == is[0],
                    "affine shape mismatch: weight " + shape_string(ws) + ", input " + shape_string(is));
  GLYPHEMBED_EXPECT(bs.size() == 1 && bs[0] == ws[0], "affine bias must have M entries");
  const std::size_t M = ws[0], N = ws[1];
  Node n;
  n.op = Op::affine;
  n.shape = {M};
  n.inputs = {input.index, weight.index, bias.index};
  n.value.resize(M);
  const double* w = nodes_[weight.index].value.data();
  const double* x = nodes_[input.index].value.data();
  const double* b = nodes_[bias.index].value.data();
  for (std::size_t i = 0; i < M; ++i) {
    double acc = 0.0;
    const double* row = w + i * N;
    for (std::size_t j = 0; j < N; ++j) acc += row[j] * x[j];
    n.value[i] = acc + b[i];
  }
  return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
  GLYPHEMBED_EXPECT(shape(a) == shape(b), "add shape mismatch");
  Node n;
  n.op = Op::add;
  n.shape = shape(a);
  n.inputs = {a.index, b.index};
  const auto& av = nodes_[a.index].value;
  const auto& bv = nodes_[b.index].value;
  n.value.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + bv[i];
  return push(std::move(n));
}

Var Graph::sub(Var a, Var b) {
  GLYPHEMBED_EXPECT(shape(a) == shape(b), "sub shape mismatch");
  Node n;
  n.op = Op::sub;
  n.shape = shape(a);
  n.inputs = {a.index, b.index};
  const auto& av = nodes_[a.index].value;
  const auto& bv = nodes_[b.index].value;
  n.value.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] - bv[i];
  return push(std::move(n));
}

Var Graph::mul(Var a, Var b) {
  GLYPHEMBED_EXPECT(shape(a) == shape(b), "mul shape mismatch");
  Node n;
  n.op = Op::mul;
  n.shape = shape(a);
  n.inputs = {a.index, b.index};
  const auto& av = nodes_[a.index].value;
  const auto& bv = nodes_[b.index].value;
  n.value.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] * bv[i];
  return push(std::move(n));
}

Var Graph::lerp(Var a, Var b, Var t) {
  GLYPHEMBED_EXPECT(shape(a) == shape(b) && shape(a) == shape(t), "lerp shape mismatch");
  Node n;
  n.op = Op::lerp;
  n.shape = shape(a);
  n.inputs = {a.index, b.index, t.index};
  const auto& av = nodes_[a.index].value;
  const auto& bv = nodes_[b.index].value;
  const auto& tv = nodes_[t.index].value;
  n.value.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = (1.0 - tv[i]) * av[i] + tv[i] * bv[i];
  return push(std::move(n));
}

Var Graph::activation(Var input, Activation kind) {
  Node n;
  n.op = Op::activation;
  n.act = kind;
  n.shape = shape(input);
  n.inputs = {input.index};
  const auto& x = nodes_[input.index].value;
  n.value.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (kind) {
      case Activation::relu: n.value[i] = x[i] > 0.0 ? x[i] : 0.0; break;
      case Activation::sigmoid: n.value[i] = sigmoid_value(x[i]); break;
      case Activation::tanh: n.value[i] = std::tanh(x[i]); break;
    }
  }
  return push(std::move(n));
}

std::uint64_t Graph::branch_signature() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  for (const auto& n : nodes_) {
    if (n.op == Op::activation && n.act == Activation::relu) {
      for (double x : nodes_[n.inputs[0]].value) feed(x > 0.0 ? 1 : 2);
    } else if (n.op == Op::maxpool2d) {
      for (auto w : n.argmax) feed(w);
    }
  }
  return h;
}

Var Graph::concat(Var a, Var b) {
  GLYPHEMBED_EXPECT(shape(a).size() == 1 && shape(b).size() == 1, "concat takes vectors");
  Node n;
  n.op = Op::concat;
  n.shape = {shape(a)[0] + shape(b)[0]};
  n.inputs = {a.index, b.index};
  n.value = nodes_[a.index].value;
  n.value.insert(n.value.end(), nodes_[b.index].value.begin(), nodes_[b.index].value.end());
  return push(std::move(n));
}

Var Graph::reshape(Var input, Shape new_shape) {
  GLYPHEMBED_EXPECT(element_count(new_shape) == nodes_[input.index].value.size(), "reshape changes element count");
  Node n;
  n.op = Op::reshape;
  n.shape = std::move(new_shape);
  n.inputs = {input.index};
  n.value = nodes_[input.index].value;
  return push(std::move(n));
}

Var Graph::softmax(Var logits) {
  GLYPHEMBED_EXPECT(shape(logits).size() == 1 && shape(logits)[0] >= 1, "softmax takes a nonempty vector");
  Node n;
  n.op = Op::softmax;
  n.shape = shape(logits);
  n.inputs = {logits.index};
  const auto& z = nodes_[logits.index].value;
  const double zmax = *std::max_element(z.begin(), z.end());
  n.value.resize(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    n.value[i] = std::exp(z[i] - zmax);
    total += n.value[i];
  }
  for (double& p : n.value) p /= total;
  return push(std::move(n));
}

Var Graph::cross_entropy(std::span<const Var> probs, std::span<const Tensor> targets, std::size_t normalizer) {
  GLYPHEMBED_EXPECT(!probs.empty(), "cross_entropy needs a nonempty batch");
  GLYPHEMBED_EXPECT(probs.size() == targets.size(), "cross_entropy batch size mismatch");
  Node n;
  n.op = Op::cross_entropy;
  n.shape = {1};
  n.normalizer = static_cast<double>(normalizer ? normalizer : probs.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto& p = node(probs[i]).value;
    const auto t = targets[i].values();
    GLYPHEMBED_EXPECT(t.size() == p.size(), "target width does not match prediction");
    std::size_t hot = t.size();
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t[j] == 1.0 && hot == t.size()) {
        hot = j;
      } else {
        GLYPHEMBED_EXPECT(t[j] == 0.0, "cross_entropy target is not one-hot");
      }
    }
    GLYPHEMBED_EXPECT(hot < t.size(), "cross_entropy target is not one-hot");
    n.inputs.push_back(probs[i].index);
    n.labels.push_back(hot);
    loss -= std::log(std::max(p[hot], kLogProbFloor));
  }
  n.value = {loss / n.normalizer};
  return push(std::move(n));
}

Var Graph::softmax_cross_entropy(std::span<const Var> logits, std::span<const std::size_t> labels,
                                 std::size_t normalizer) {
  GLYPHEMBED_EXPECT(!logits.empty(), "softmax_cross_entropy needs a nonempty batch");
  GLYPHEMBED_EXPECT(logits.size() == labels.size(), "softmax_cross_entropy batch size mismatch");
  Node n;
  n.op = Op::softmax_ce;
  n.shape = {1};
  n.normalizer = static_cast<double>(normalizer ? normalizer : logits.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto& z = node(logits[i]).value;
    GLYPHEMBED_EXPECT(labels[i] < z.size(), "label out of range");
    const double zmax = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double v : z) total += std::exp(v - zmax);
    const double log_total = std::log(total);
    for (double v : z) n.saved.push_back(std::exp(v - zmax - log_total));
    const double log_p = z[labels[i]] - zmax - log_total;
    loss -= std::max(log_p, std::log(kLogProbFloor));
    n.inputs.push_back(logits[i].index);
    n.labels.push_back(labels[i]);
  }
  n.value = {loss / n.normalizer};
  return push(std::move(n));
}

Var Graph::sum(Var input) {
  Node n;
  n.op = Op::sum;
  n.shape = {1};
  n.inputs = {input.index};
  double total = 0.0;
  for (double v : nodes_[input.index].value) total += v;
  n.value = {total};
  return push(std::move(n));
}

Var Graph::sum_squares(Var input) {
  Node n;
  n.op = Op::sum_squares;
  n.shape = {1};
  n.inputs = {input.index};
  double total = 0.0;
  for (double v : nodes_[input.index].value) total += v * v;
  n.value = {total};
  return push(std::move(n));
}

Var Graph::dot(Var a, Var b) {
  GLYPHEMBED_EXPECT(nodes_[a.index].value.size() == nodes_[b.index].value.size(), "dot size mismatch");
  Node n;
  n.op = Op::dot;
  n.shape = {1};
  n.inputs = {a.index, b.index};
  double total = 0.0;
  const auto& av = nodes_[a.index].value;
  const auto& bv = nodes_[b.index].value;
  for (std::size_t i = 0; i < av.size(); ++i) total += av[i] * bv[i];
  n.value = {total};
  return push(std::move(n));
}

std::vector<double>& Graph::grad_buffer(std::uint32_t index) {
  Node& n = nodes_[index];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Graph::backward(Var loss) {
  const Node& root = node(loss);
  GLYPHEMBED_EXPECT(root.value.size() == 1, "backward() needs a scalar loss");
  for (auto& n : nodes_) n.grad.clear();
  grad_buffer(loss.index)[0] = 1.0;
  for (std::uint32_t i = loss.index + 1; i-- > 0;) {
    if (nodes_[i].needs_grad && !nodes_[i].grad.empty()) backprop(i);
  }
}

void Graph::backprop(std::uint32_t index) {
  Node& n = nodes_[index];
  const std::vector<double>& g = n.grad;
  auto wants = [&](std::size_t k) { return nodes_[n.inputs[k]].needs_grad; };

  switch (n.op) {
    case Op::constant:
      break;

    case Op::param: {
      auto dst = n.parameter->grad().values();
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
      break;
    }

    case Op::gather_row: {
      auto dst = n.parameter->grad().values();
      const std::size_t offset = n.row * g.size();
      for (std::size_t i = 0; i < g.size(); ++i) dst[offset + i] += g[i];
      break;
    }

    case Op::conv2d: {
      const Node& in = nodes_[n.inputs[0]];
      const Node& kn = nodes_[n.inputs[1]];
      const std::size_t C = in.shape[0], H = in.shape[1], W = in.shape[2];
      const std::size_t O = n.shape[0], OH = n.shape[1], OW = n.shape[2];
      if (wants(2)) {
        auto& db = grad_buffer(n.inputs[2]);
        for (std::size_t o = 0; o < O; ++o) {
          double acc = 0.0;
          for (std::size_t p = 0; p < OH * OW; ++p) acc += g[o * OH * OW + p];
          db[o] += acc;
        }
      }
      if (wants(1)) {
        auto& dk = grad_buffer(n.inputs[1]);
        for (std::size_t o = 0; o < O; ++o) {
          const double* gp = g.data() + o * OH * OW;
          for (std::size_t c = 0; c < C; ++c) {
            const double* src_plane = in.value.data() + c * H * W;
            for (std::size_t dy = 0; dy < 3; ++dy) {
              for (std::size_t dx = 0; dx < 3; ++dx) {
                double acc = 0.0;
                for (std::size_t y = 0; y < OH; ++y) {
                  const double* src = src_plane + (y + dy) * W + dx;
                  const double* gr = gp + y * OW;
                  for (std::size_t x = 0; x < OW; ++x) acc += gr[x] * src[x];
                }
                dk[((o * C + c) * 3 + dy) * 3 + dx] += acc;
              }
            }
          }
        }
      }
      if (wants(0)) {
        auto& din = grad_buffer(n.inputs[0]);
        for (std::size_t o = 0; o < O; ++o) {
          const double* gp = g.data() + o * OH * OW;
          for (std::size_t c = 0; c < C; ++c) {
            double* dst_plane = din.data() + c * H * W;
            for (std::size_t dy = 0; dy < 3; ++dy) {
              for (std::size_t dx = 0; dx < 3; ++dx) {
                const double w = kn.value[((o * C + c) * 3 + dy) * 3 + dx];
                if (w == 0.0) continue;
                for (std::size_t y = 0; y < OH; ++y) {
                  double* dst = dst_plane + (y + dy) * W + dx;
                  const double* gr = gp + y * OW;
                  for (std::size_t x = 0; x < OW; ++x) dst[x] += w * gr[x];
                }
              }
            }
          }
        }
      }
      break;
    }

    case Op::maxpool2d: {
      if (!wants(0)) break;
      auto& din = grad_buffer(n.inputs[0]);
      for (std::size_t o = 0; o < g.size(); ++o) din[n.argmax[o]] += g[o];
      break;
    }

    case Op::matvec:
    case Op::affine: {
      const bool is_affine = n.op == Op::affine;
      const std::uint32_t x_idx = is_affine ? n.inputs[0] : n.inputs[1];
      const std::uint32_t w_idx = is_affine ? n.inputs[1] : n.inputs[0];
      const Node& xn = nodes_[x_idx];
      const Node& wn = nodes_[w_idx];
      const std::size_t M = wn.shape[0], N = wn.shape[1];
      if (nodes_[w_idx].needs_grad) {
        auto& dw = grad_buffer(w_idx);
        for (std::size_t i = 0; i < M; ++i) {
          if (g[i] == 0.0) continue;
          double* row = dw.data() + i * N;
          for (std::size_t j = 0; j < N; ++j) row[j] += g[i] * xn.value[j];
        }
      }
      if (nodes_[x_idx].needs_grad) {
        auto& dx = grad_buffer(x_idx);
        for (std::size_t i = 0; i < M; ++i) {
          if (g[i] == 0.0) continue;
          const double* row = wn.value.data() + i * N;
          for (std::size_t j = 0; j < N; ++j) dx[j] += row[j] * g[i];
        }
      }
      if (is_affine && wants(2)) {
        auto& db = grad_buffer(n.inputs[2]);
        for (std::size_t i = 0; i < M; ++i) db[i] += g[i];
      }
      break;
    }

    case Op::add:
    case Op::sub: {
      const double sign = n.op == Op::add ? 1.0 : -1.0;
      if (wants(0)) {
        auto& da = grad_buffer(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
      }
      if (wants(1)) {
        auto& db = grad_buffer(n.inputs[1]);
        for (std::size_t i = 0; i < g.size(); ++i) db[i] += sign * g[i];
      }
      break;
    }

    case Op::mul: {
      const auto& av = nodes_[n.inputs[0]].value;
      const auto& bv = nodes_[n.inputs[1]].value;
      if (wants(0)) {
        auto& da = grad_buffer(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv[i];
      }
      if (wants(1)) {
        auto& db = grad_buffer(n.inputs[1]);
        for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * av[i];
      }
      break;
    }

    case Op::lerp: {
      const auto& av = nodes_[n.inputs[0]].value;
      const auto& bv = nodes_[n.inputs[1]].value;
      const auto& tv = nodes_[n.inputs[2]].value;
      if (wants(0)) {
        auto& da = grad_buffer(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (1.0 - tv[i]);
      }
      if (wants(1)) {
        auto& db = grad_buffer(n.inputs[1]);
        for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * tv[i];
      }
      if (wants(2)) {
        auto& dt = grad_buffer(n.inputs[2]);
        for (std::size_t i = 0; i < g.size(); ++i) dt[i] += g[i] * (bv[i] - av[i]);
      }
      break;
    }

    case Op::activation: {
      if (!wants(0)) break;
      auto& dx = grad_buffer(n.inputs[0]);
      const auto& x = nodes_[n.inputs[0]].value;
      const auto& y = n.value;
      for (std::size_t i = 0; i < g.size(); ++i) {
        switch (n.act) {
          case Activation::relu: dx[i] += x[i] > 0.0 ? g[i] : 0.0; break;
          case Activation::sigmoid: dx[i] += g[i] * y[i] * (1.0 - y[i]); break;
          case Activation::tanh: dx[i] += g[i] * (1.0 - y[i] * y[i]); break;
        }
      }
      break;
    }

    case Op::concat: {
      const std::size_t left = nodes_[n.inputs[0]].value.size();
      if (wants(0)) {
        auto& da = grad_buffer(n.inputs[0]);
        for (std::size_t i = 0; i < left; ++i) da[i] += g[i];
      }
      if (wants(1)) {
        auto& db = grad_buffer(n.inputs[1]);
        for (std::size_t i = left; i < g.size(); ++i) db[i - left] += g[i];
      }
      break;
    }

    case Op::reshape: {
      if (!wants(0)) break;
      auto& dx = grad_buffer(n.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
      break;
    }

    case Op::softmax: {
      if (!wants(0)) break;
      auto& dz = grad_buffer(n.inputs[0]);
      const auto& p = n.value;
      double inner = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) inner += g[i] * p[i];
      for (std::size_t i = 0; i < p.size(); ++i) dz[i] += p[i] * (g[i] - inner);
      break;
    }

    case Op::cross_entropy: {
      for (std::size_t b = 0; b < n.inputs.size(); ++b) {
        if (!wants(b)) continue;
        auto& dp = grad_buffer(n.inputs[b]);
        const double p = nodes_[n.inputs[b]].value[n.labels[b]];
        if (p > kLogProbFloor) dp[n.labels[b]] += -g[0] / (n.normalizer * p);
      }
      break;
    }

    case Op::softmax_ce: {
      std::size_t offset = 0;
      for (std::size_t b = 0; b < n.inputs.size(); ++b) {
        const std::size_t width = nodes_[n.inputs[b]].value.size();
        if (wants(b)) {
          auto& dz = grad_buffer(n.inputs[b]);
          for (std::size_t j = 0; j < width; ++j) {
            const double target = j == n.labels[b] ? 1.0 : 0.0;
            dz[j] += g[0] * (n.saved[offset + j] - target) / n.normalizer;
          }
        }
        offset += width;
      }
      break;
    }

    case Op::sum: {
      if (!wants(0)) break;
      auto& dx = grad_buffer(n.inputs[0]);
      for (double& d : dx) d += g[0];
      break;
    }

    case Op::sum_squares: {
      if (!wants(0)) break;
      auto& dx = grad_buffer(n.inputs[0]);
      const auto& x = nodes_[n.inputs[0]].value;
      for (std::size_t i = 0; i < x.size(); ++i) dx[i] += 2.0 * x[i] * g[0];
      break;
    }

    case Op::dot: {
      const auto& av = nodes_[n.inputs[0]].value;
      const auto& bv = nodes_[n.inputs[1]].value;
      if (wants(0)) {
        auto& da = grad_buffer(n.inputs[0]);
        for (std::size_t i = 0; i < av.size(); ++i) da[i] += g[0] * bv[i];
      }
      if (wants(1)) {
        auto& db = grad_buffer(n.inputs[1]);
        for (std::size_t i = 0; i < av.size(); ++i) db[i] += g[0] * av[i];
      }
      break;
    }
  }
}

}  // namespace glyphembed
