#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "patenthan/autodiff.hpp"

namespace patenthan {

struct GradBlockReport {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradBlockReport> blocks;
  double max_rel_error = 0.0;
  bool passed = true;
};

// Builds the loss for the current parameter values. Must bind every parameter
// through graph.parameter() and return a 1x1 loss.
using LossClosure = std::function<Var(Graph&)>;

// Compares backpropagated gradients with central differences
// (f(x+eps) - f(x-eps)) / 2eps, entry by entry. The relative error of an entry
// is |a - n| / max(|a|, |n|, floor). Throws if the closure is not
// deterministic.
GradCheckReport grad_check(const LossClosure& closure, std::span<Parameter* const> params, double eps = 1e-5,
                           double tolerance = 1e-4, double floor = 1e-6);

}  // namespace patenthan
