#include "patenthan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "patenthan/error.hpp"

namespace patenthan {

namespace {

double evaluate(const LossClosure& closure) {
  Graph g;
  Var loss = closure(g);
  if (loss.rows() != 1 || loss.cols() != 1) throw ShapeError("grad_check closure must return a 1x1 loss");
  return loss.value()(0, 0);
}

}  // namespace

GradCheckReport grad_check(const LossClosure& closure, std::span<Parameter* const> params, double eps,
                           double tolerance, double floor) {
  for (Parameter* p : params) p->zero_grad();
  double base = 0.0;
  {
    Graph g;
    Var loss = closure(g);
    base = loss.value()(0, 0);
    g.backward(loss);
  }
  if (evaluate(closure) != base) throw InvalidInput("non-deterministic closure: repeated evaluation changed the loss");

  GradCheckReport report;
  for (Parameter* p : params) {
    GradBlockReport block;
    block.name = p->name;
    auto values = p->value.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = evaluate(closure);
      values[i] = saved - eps;
      const double down = evaluate(closure);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad.values()[i];
      const double abs_err = std::abs(analytic - numeric);
      const double rel = abs_err / std::max({std::abs(analytic), std::abs(numeric), floor});
      block.max_abs_error = std::max(block.max_abs_error, abs_err);
      block.max_rel_error = std::max(block.max_rel_error, rel);
    }
    block.passed = block.max_rel_error < tolerance;
    report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
    report.passed = report.passed && block.passed;
    report.blocks.push_back(std::move(block));
  }
  return report;
}

}  // namespace patenthan
