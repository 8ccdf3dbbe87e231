#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "patenthan/matrix.hpp"

namespace patenthan {

class Rng;

// A named trainable matrix with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }
};

class Graph;

// Handle to a node recorded in a Graph. Cheap to copy; only valid while the
// graph is alive.
class Var {
 public:
  Var() = default;

  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

struct BackwardArgs {
  std::span<const Matrix* const> inputs;
  const Matrix& output;
  const Matrix& grad_output;
  // nullptr for inputs that need no gradient
  std::span<Matrix* const> grad_inputs;
};

using BackwardFn = std::function<void(const BackwardArgs&)>;

// Tape of recorded operations. Nodes are appended in execution order and
// backward() walks them in reverse, once each.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Value that never receives a gradient.
  Var constant(Matrix value);
  // Leaf whose gradient accumulates in grad(var) across backward passes.
  Var leaf(Matrix value);
  // Leaf bound to a parameter; its gradient accumulates into p.grad.
  Var parameter(Parameter& p);

  Var record(std::string op, Matrix value, std::vector<Var> inputs, BackwardFn backward);

  const Matrix& value(Var v) const { return nodes_[v.id()].value; }
  const Matrix& grad(Var v) const { return nodes_[v.id()].leaf_grad; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  // Seeds d(loss)/d(loss) = 1 for a 1x1 loss and propagates to every leaf.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Kind { kConstant, kLeaf, kParameter, kOp };

  struct Node {
    std::string op;
    Kind kind = Kind::kConstant;
    Matrix value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    Parameter* param = nullptr;
    Matrix leaf_grad;
  };

  Var add_node(Node node);

  std::deque<Node> nodes_;
};

inline const Matrix& Var::value() const { return graph_->value(*this); }

// Differentiable operations. Every op rejects non-finite results.
namespace ops {

Var matmul(Var a, Var b);
// a * b^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
Var scale(Var a, double s);

// Row-wise softmax over the first `active` columns; masked columns get exactly
// zero weight and rows at or beyond `active` are all zero.
Var softmax_rows(Var scores, std::size_t active);

// Per-row normalisation with population variance; gain and bias are 1 x cols.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

// x * Phi(x) with the exact Gaussian CDF.
Var gelu(Var x);
Var tanh(Var x);

// Inverted dropout. The identity when !train or rate == 0.
Var dropout(Var x, double rate, bool train, Rng* rng);

// Zeroes rows at or beyond `active`.
Var mask_rows(Var x, std::size_t active);
// Mean of the first `active` rows, 1 x cols.
Var mean_rows(Var x, std::size_t active);
Var stack_rows(std::span<const Var> rows);

// Mean over rows of -log softmax(logits)[label].
Var cross_entropy(Var logits, std::span<const int> labels);

}  // namespace ops

// Standard normal CDF and density.
double normal_cdf(double x);
double normal_pdf(double x);

}  // namespace patenthan
