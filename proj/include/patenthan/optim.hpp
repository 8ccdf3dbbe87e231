#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "patenthan/autodiff.hpp"

namespace patenthan {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamMoments {
  Matrix first;
  Matrix second;
};

// One bias-corrected Adam update of `param` at step t (t >= 1).
void adam_step(Matrix& param, const Matrix& grad, AdamMoments& state, const AdamConfig& config, long t);

// Adam over a fixed list of parameters; moment buffers are matched by position.
class Adam {
 public:
  explicit Adam(AdamConfig config) : config_(config) {}

  void step(std::span<Parameter* const> params);
  long steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::vector<AdamMoments> state_;
};

}  // namespace patenthan
