#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "patenthan/embed.hpp"
#include "patenthan/model.hpp"
#include "patenthan/rng.hpp"

namespace testing {

using patenthan::ClaimMatrix;
using patenthan::Matrix;
using patenthan::ModelConfig;
using patenthan::ModelParams;
using patenthan::Rng;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

inline ClaimMatrix random_claims(std::size_t m, std::size_t d_e, std::size_t active, Rng& rng) {
  ClaimMatrix c{Matrix(m, d_e), active};
  for (std::size_t i = 0; i < active; ++i) {
    for (double& v : c.rows.row(i)) v = rng.uniform(-1.0, 1.0);
  }
  return c;
}

inline ModelConfig small_config(std::size_t d_e, std::size_t m, std::size_t encoders, double dropout = 0.0) {
  ModelConfig c;
  c.d_e = d_e;
  c.m = m;
  c.n_encoders = encoders;
  c.dropout = dropout;
  return c;
}

// Gains and biases drawn away from their 1/0 initial values so every block matters.
inline void perturb_norms(ModelParams& p, Rng& rng) {
  for (auto& e : p.encoders) {
    for (auto* n : {&e.norm1_gain, &e.norm2_gain}) {
      for (double& v : n->value.values()) v = rng.uniform(0.5, 1.5);
    }
    for (auto* n : {&e.norm1_bias, &e.norm2_bias}) {
      for (double& v : n->value.values()) v = rng.uniform(-0.5, 0.5);
    }
  }
}

inline std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "patenthan_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Straight loop evaluation of the claim-level network, used as an oracle for
// the graph-based forward pass. Dropout is off.
namespace ref {

using Mat = std::vector<std::vector<double>>;

inline Mat from(const Matrix& m) {
  Mat out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline Mat mul(const Mat& a, const Mat& b) {
  Mat c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

inline Mat layer_norm(const Mat& x, const Matrix& gain, const Matrix& bias, double eps) {
  Mat out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(x[i].size());
    double mean = 0.0, var = 0.0;
    for (double v : x[i]) mean += v;
    mean /= n;
    for (double v : x[i]) var += (v - mean) * (v - mean);
    var /= n;
    for (std::size_t j = 0; j < x[i].size(); ++j) {
      out[i][j] = gain(0, j) * (x[i][j] - mean) / std::sqrt(var + eps) + bias(0, j);
    }
  }
  return out;
}

struct Output {
  std::array<double, 2> logits{};
  Mat attention;
};

inline Output forward(const ModelParams& params, const ClaimMatrix& claims) {
  const std::size_t m = claims.m(), d = claims.d_e(), k = claims.active;
  Mat p = from(claims.rows);
  Mat attention;
  for (const auto& enc : params.encoders) {
    const Mat q = mul(p, from(enc.query.value));
    const Mat key = mul(p, from(enc.key.value));
    const Mat v = mul(p, from(enc.value.value));
    Mat a(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> s(k);
      double top = -INFINITY;
      for (std::size_t j = 0; j < k; ++j) {
        double dot = 0.0;
        for (std::size_t t = 0; t < d; ++t) dot += q[i][t] * key[j][t];
        s[j] = dot / std::sqrt(static_cast<double>(d));
        top = std::max(top, s[j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < k; ++j) z += std::exp(s[j] - top);
      for (std::size_t j = 0; j < k; ++j) a[i][j] = std::exp(s[j] - top) / z;
    }
    const Mat head = mul(mul(a, v), from(enc.output.value));
    Mat sum1 = p;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d; ++j) sum1[i][j] += head[i][j];
    const Mat att = layer_norm(sum1, enc.norm1_gain.value, enc.norm1_bias.value, params.config.layer_norm_eps);
    Mat hidden = mul(att, from(enc.expand.value));
    for (auto& row : hidden)
      for (double& x : row) x = 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
    const Mat ffn = mul(hidden, from(enc.contract.value));
    Mat sum2 = att;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d; ++j) sum2[i][j] += ffn[i][j];
    p = layer_norm(sum2, enc.norm2_gain.value, enc.norm2_bias.value, params.config.layer_norm_eps);
    for (std::size_t i = k; i < m; ++i) std::fill(p[i].begin(), p[i].end(), 0.0);
    attention = a;
  }
  Mat pooled(1, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < d; ++j) pooled[0][j] += p[i][j] / static_cast<double>(k);
  Mat s = mul(pooled, from(params.pooling.value));
  for (double& x : s[0]) x = std::tanh(x);
  const Mat logits = mul(s, from(params.classifier.value));
  return {{logits[0][0], logits[0][1]}, attention};
}

}  // namespace ref

}  // namespace testing
