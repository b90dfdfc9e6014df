// SPDX-License-Identifier: Apache-2.0
// Reference implementations written as plain loops, independent of the graph engine.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline Vec conv2d(const Vec& in, std::size_t C, std::size_t H, std::size_t W, const Vec& k, std::size_t O,
                  const Vec& bias) {
  const std::size_t Ho = H - 2, Wo = W - 2;
  Vec out(O * Ho * Wo, 0.0);
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t y = 0; y < Ho; ++y)
      for (std::size_t x = 0; x < Wo; ++x) {
        double s = bias[o];
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t dy = 0; dy < 3; ++dy)
            for (std::size_t dx = 0; dx < 3; ++dx)
              s += in[(c * H + y + dy) * W + x + dx] * k[((o * C + c) * 3 + dy) * 3 + dx];
        out[(o * Ho + y) * Wo + x] = s;
      }
  return out;
}

inline Vec maxpool(const Vec& in, std::size_t C, std::size_t H, std::size_t W) {
  const std::size_t Ho = H / 2, Wo = W / 2;
  Vec out(C * Ho * Wo);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t y = 0; y < Ho; ++y)
      for (std::size_t x = 0; x < Wo; ++x) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx) m = std::max(m, in[(c * H + 2 * y + dy) * W + 2 * x + dx]);
        out[(c * Ho + y) * Wo + x] = m;
      }
  return out;
}

// weight is M×N row-major
inline Vec affine(const Vec& input, const Vec& weight, const Vec& bias) {
  const std::size_t M = bias.size(), N = input.size();
  Vec out(M);
  for (std::size_t i = 0; i < M; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j) s += weight[i * N + j] * input[j];
    out[i] = s + bias[i];
  }
  return out;
}

inline Vec softmax_unshifted(const Vec& z) {
  double total = 0.0;
  for (double v : z) total += std::exp(v);
  Vec p;
  for (double v : z) p.push_back(std::exp(v) / total);
  return p;
}

inline double cross_entropy(const std::vector<Vec>& probs, const std::vector<std::size_t>& labels) {
  double j = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    for (std::size_t c = 0; c < probs[i].size(); ++c) {
      const double t = c == labels[i] ? 1.0 : 0.0;
      j += -t * std::log(std::max(probs[i][c], 1e-12));
    }
  return j / static_cast<double>(probs.size());
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Gru {
  std::size_t dc = 0, dh = 0;
  Vec wz, wr, wh, uz, ur, uh, bz, br, bh;
};

inline Vec gru_step(const Gru& g, const Vec& h, const Vec& x) {
  Vec out(g.dh), r(g.dh), z(g.dh);
  for (std::size_t i = 0; i < g.dh; ++i) {
    double az = g.bz[i], ar = g.br[i];
    for (std::size_t j = 0; j < g.dc; ++j) {
      az += g.wz[i * g.dc + j] * x[j];
      ar += g.wr[i * g.dc + j] * x[j];
    }
    for (std::size_t j = 0; j < g.dh; ++j) {
      az += g.uz[i * g.dh + j] * h[j];
      ar += g.ur[i * g.dh + j] * h[j];
    }
    z[i] = sigmoid(az);
    r[i] = sigmoid(ar);
  }
  for (std::size_t i = 0; i < g.dh; ++i) {
    double a = g.bh[i];
    for (std::size_t j = 0; j < g.dc; ++j) a += g.wh[i * g.dc + j] * x[j];
    for (std::size_t j = 0; j < g.dh; ++j) a += g.uh[i * g.dh + j] * (r[j] * h[j]);
    out[i] = (1.0 - z[i]) * h[i] + z[i] * std::tanh(a);
  }
  return out;
}

// All-pairs shortest paths (Floyd-Warshall) over category nodes, then the min-depth rule.
// Returns article -> (label, depth) for reachable articles.
inline std::map<std::string, std::pair<std::size_t, std::size_t>> min_depth_labels(
    const std::vector<std::pair<std::string, std::string>>& edges, const std::vector<std::string>& roots,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& memberships) {
  std::map<std::string, std::size_t> id;
  auto intern = [&](const std::string& s) { id.emplace(s, id.size()); };
  for (const auto& r : roots) intern(r);
  for (const auto& [a, b] : edges) {
    intern(a);
    intern(b);
  }
  const std::size_t n = id.size();
  constexpr std::size_t inf = std::numeric_limits<std::size_t>::max() / 4;
  std::vector<std::size_t> d(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0;
  for (const auto& [a, b] : edges) d[id[a] * n + id[b]] = std::min<std::size_t>(d[id[a] * n + id[b]], 1);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);

  std::map<std::string, std::pair<std::size_t, std::size_t>> out;
  for (const auto& [article, cats] : memberships) {
    std::size_t best_root = 0, best = inf;
    for (std::size_t r = 0; r < roots.size(); ++r) {
      std::size_t depth = inf;
      for (const auto& c : cats) depth = std::min(depth, d[id.at(roots[r]) * n + id.at(c)]);
      if (depth < inf && depth + 1 < best) {
        best = depth + 1;
        best_root = r;
      }
    }
    if (best < inf) out[article] = {best_root, best};
  }
  return out;
}

// Full distance matrix row, then repeated minimum extraction.
inline std::vector<std::pair<char32_t, double>> knn(const std::vector<std::pair<char32_t, Vec>>& table,
                                                    const Vec& query_vec, char32_t query, std::size_t k) {
  std::vector<std::pair<char32_t, double>> pool;
  for (const auto& [cp, v] : table) {
    if (cp == query) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += (v[i] - query_vec[i]) * (v[i] - query_vec[i]);
    pool.emplace_back(cp, std::sqrt(s));
  }
  std::vector<std::pair<char32_t, double>> out;
  std::vector<bool> taken(pool.size(), false);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t pick = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      if (pick == pool.size() || pool[i].second < pool[pick].second ||
          (pool[i].second == pool[pick].second && pool[i].first < pool[pick].first))
        pick = i;
    }
    taken[pick] = true;
    out.push_back(pool[pick]);
  }
  return out;
}

// Recount from scratch for each character of the title.
inline double avg_char_frequency(const std::u32string& title, const std::vector<std::u32string>& train_titles) {
  double total = 0.0;
  for (char32_t ch : title) {
    std::size_t count = 0;
    for (const auto& t : train_titles)
      for (char32_t c : t) count += c == ch ? 1 : 0;
    total += static_cast<double>(count);
  }
  return total / static_cast<double>(title.size());
}

}  // namespace oracle
