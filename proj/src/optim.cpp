#include "patenthan/optim.hpp"

#include <cmath>

#include "patenthan/error.hpp"

namespace patenthan {

void adam_step(Matrix& param, const Matrix& grad, AdamMoments& state, const AdamConfig& config, long t) {
  if (t < 1) throw InvalidInput("adam step count must be >= 1");
  if (!param.same_shape(grad)) {
    throw ShapeError("adam: gradient " + grad.shape_string() + " does not match parameter " + param.shape_string());
  }
  if (state.first.empty() && state.second.empty()) {
    state.first = Matrix(param.rows(), param.cols());
    state.second = Matrix(param.rows(), param.cols());
  }
  if (!state.first.same_shape(param) || !state.second.same_shape(param)) {
    throw ShapeError("adam: moment buffers do not match parameter " + param.shape_string());
  }
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  auto p = param.values();
  auto g = grad.values();
  auto m = state.first.values();
  auto v = state.second.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

void Adam::step(std::span<Parameter* const> params) {
  if (state_.empty()) state_.resize(params.size());
  if (state_.size() != params.size()) throw ShapeError("adam: parameter list changed between steps");
  ++t_;
  for (std::size_t i = 0; i < params.size(); ++i) adam_step(params[i]->value, params[i]->grad, state_[i], config_, t_);
}

}  // namespace patenthan
