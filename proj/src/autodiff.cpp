#include "patenthan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "patenthan/error.hpp"
#include "patenthan/rng.hpp"

namespace patenthan {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

namespace {

void require_finite(const Matrix& m, const std::string& where) {
  if (!m.all_finite()) throw NumericError("non-finite value produced by " + where);
}

Graph& same_graph(Var a, Var b) {
  if (&a.graph() != &b.graph()) throw InvalidInput("operands belong to different graphs");
  return a.graph();
}

}  // namespace

Var Graph::add_node(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::constant(Matrix value) {
  require_finite(value, "constant input");
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  return add_node(std::move(n));
}

Var Graph::leaf(Matrix value) {
  require_finite(value, "leaf input");
  Node n;
  n.op = "leaf";
  n.kind = Kind::kLeaf;
  n.leaf_grad = Matrix(value.rows(), value.cols());
  n.value = std::move(value);
  n.requires_grad = true;
  return add_node(std::move(n));
}

Var Graph::parameter(Parameter& p) {
  require_finite(p.value, "parameter " + p.name);
  if (!p.grad.same_shape(p.value)) p.zero_grad();
  Node n;
  n.op = "param:" + p.name;
  n.kind = Kind::kParameter;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  return add_node(std::move(n));
}

Var Graph::record(std::string op, Matrix value, std::vector<Var> inputs, BackwardFn backward) {
  require_finite(value, op);
  Node n;
  n.op = std::move(op);
  n.kind = Kind::kOp;
  n.value = std::move(value);
  for (Var v : inputs) {
    if (&v.graph() != this) throw InvalidInput("input of " + n.op + " belongs to another graph");
    n.inputs.push_back(v.id());
    n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
  }
  n.backward = std::move(backward);
  return add_node(std::move(n));
}

void Graph::backward(Var loss) {
  if (&loss.graph() != this) throw InvalidInput("loss belongs to another graph");
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ShapeError("backward() needs a 1x1 loss, got " + lv.shape_string());
  }
  std::vector<Matrix> grads(loss.id() + 1);
  grads[loss.id()] = Matrix(1, 1, 1.0);

  std::vector<const Matrix*> in_values;
  std::vector<Matrix*> in_grads;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || grads[id].empty()) continue;
    require_finite(grads[id], "gradient of " + node.op);
    switch (node.kind) {
      case Kind::kConstant:
        break;
      case Kind::kLeaf:
        node.leaf_grad += grads[id];
        break;
      case Kind::kParameter:
        node.param->grad += grads[id];
        break;
      case Kind::kOp: {
        in_values.clear();
        in_grads.clear();
        for (std::size_t in : node.inputs) {
          in_values.push_back(&nodes_[in].value);
          if (nodes_[in].requires_grad) {
            if (grads[in].empty()) grads[in] = Matrix(nodes_[in].value.rows(), nodes_[in].value.cols());
            in_grads.push_back(&grads[in]);
          } else {
            in_grads.push_back(nullptr);
          }
        }
        node.backward(BackwardArgs{in_values, node.value, grads[id], in_grads});
        break;
      }
    }
    grads[id] = Matrix();
  }
}

namespace ops {

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul shape mismatch: " + av.shape_string() + " x " + bv.shape_string());
  }
  Matrix out;
  kernels::matmul(av, bv, out);
  return g.record("matmul", std::move(out), {a, b}, [](const BackwardArgs& args) {
    // dA = dC * B^T, dB = A^T * dC
    if (args.grad_inputs[0]) kernels::matmul_nt_acc(args.grad_output, *args.inputs[1], *args.grad_inputs[0]);
    if (args.grad_inputs[1]) kernels::matmul_tn_acc(*args.inputs[0], args.grad_output, *args.grad_inputs[1]);
  });
}

Var matmul_nt(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.cols()) {
    throw ShapeError("matmul_nt shape mismatch: " + av.shape_string() + " x (" + bv.shape_string() + ")^T");
  }
  Matrix out(av.rows(), bv.rows());
  kernels::matmul_nt_acc(av, bv, out);
  return g.record("matmul_nt", std::move(out), {a, b}, [](const BackwardArgs& args) {
    // C = A B^T: dA = dC B, dB = dC^T A
    if (args.grad_inputs[0]) kernels::matmul_acc(args.grad_output, *args.inputs[1], *args.grad_inputs[0]);
    if (args.grad_inputs[1]) kernels::matmul_tn_acc(args.grad_output, *args.inputs[0], *args.grad_inputs[1]);
  });
}

Var add(Var a, Var b) {
  Graph& g = same_graph(a, b);
  if (!a.value().same_shape(b.value())) {
    throw ShapeError("add shape mismatch: " + a.value().shape_string() + " + " + b.value().shape_string());
  }
  Matrix out = a.value();
  out += b.value();
  return g.record("add", std::move(out), {a, b}, [](const BackwardArgs& args) {
    for (Matrix* gi : args.grad_inputs)
      if (gi) *gi += args.grad_output;
  });
}

Var scale(Var a, double s) {
  Matrix out = a.value();
  for (double& v : out.values()) v *= s;
  return a.graph().record("scale", std::move(out), {a}, [s](const BackwardArgs& args) {
    if (!args.grad_inputs[0]) return;
    auto gi = args.grad_inputs[0]->values();
    auto go = args.grad_output.values();
    for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += s * go[i];
  });
}

Var softmax_rows(Var scores, std::size_t active) {
  const Matrix& x = scores.value();
  if (active == 0) throw InvalidInput("softmax_rows needs at least one active column");
  if (active > x.cols()) {
    throw ShapeError("softmax_rows: active count " + std::to_string(active) + " exceeds " + x.shape_string());
  }
  Matrix out(x.rows(), x.cols());
  const std::size_t live_rows = std::min(active, x.rows());
  for (std::size_t r = 0; r < live_rows; ++r) {
    auto in = x.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(active));
    double z = 0.0;
    for (std::size_t c = 0; c < active; ++c) z += (o[c] = std::exp(in[c] - mx));
    for (std::size_t c = 0; c < active; ++c) o[c] /= z;
  }
  return scores.graph().record("softmax_rows", std::move(out), {scores}, [live_rows, active](const BackwardArgs& args) {
    if (!args.grad_inputs[0]) return;
    Matrix& gi = *args.grad_inputs[0];
    for (std::size_t r = 0; r < live_rows; ++r) {
      auto y = args.output.row(r);
      auto gy = args.grad_output.row(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < active; ++c) dot += y[c] * gy[c];
      for (std::size_t c = 0; c < active; ++c) gi(r, c) += y[c] * (gy[c] - dot);
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  Graph& g = same_graph(x, gain);
  same_graph(x, bias);
  const Matrix& xv = x.value();
  const std::size_t d = xv.cols();
  if (d == 0) throw ShapeError("layer_norm needs at least one column");
  if (!(eps > 0.0)) throw InvalidInput("layer_norm eps must be positive");
  if (gain.rows() != 1 || gain.cols() != d || bias.rows() != 1 || bias.cols() != d) {
    throw ShapeError("layer_norm parameters must be 1x" + std::to_string(d) + ", got " +
                     gain.value().shape_string() + " and " + bias.value().shape_string());
  }
  const Matrix& gv = gain.value();
  const Matrix& bv = bias.value();
  Matrix out(xv.rows(), d);
  Matrix normalized(xv.rows(), d);
  std::vector<double> inv_std(xv.rows());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    auto row = xv.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      normalized(r, c) = (row[c] - mean) * inv_std[r];
      out(r, c) = normalized(r, c) * gv(0, c) + bv(0, c);
    }
  }
  return g.record("layer_norm", std::move(out), {x, gain, bias},
                  [normalized = std::move(normalized), inv_std = std::move(inv_std)](const BackwardArgs& args) {
                    const Matrix& gamma = *args.inputs[1];
                    const Matrix& go = args.grad_output;
                    const std::size_t rows = go.rows(), d = go.cols();
                    if (Matrix* gg = args.grad_inputs[1]) {
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < d; ++c) (*gg)(0, c) += go(r, c) * normalized(r, c);
                    }
                    if (Matrix* gb = args.grad_inputs[2]) {
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < d; ++c) (*gb)(0, c) += go(r, c);
                    }
                    if (Matrix* gx = args.grad_inputs[0]) {
                      const double n = static_cast<double>(d);
                      for (std::size_t r = 0; r < rows; ++r) {
                        double sum_g = 0.0, sum_gx = 0.0;
                        for (std::size_t c = 0; c < d; ++c) {
                          const double gn = go(r, c) * gamma(0, c);
                          sum_g += gn;
                          sum_gx += gn * normalized(r, c);
                        }
                        for (std::size_t c = 0; c < d; ++c) {
                          const double gn = go(r, c) * gamma(0, c);
                          (*gx)(r, c) += inv_std[r] * (gn - sum_g / n - normalized(r, c) * sum_gx / n);
                        }
                      }
                    }
                  });
}

Var gelu(Var x) {
  Matrix out = x.value();
  for (double& v : out.values()) v = v * normal_cdf(v);
  return x.graph().record("gelu", std::move(out), {x}, [](const BackwardArgs& args) {
    if (!args.grad_inputs[0]) return;
    auto xi = args.inputs[0]->values();
    auto go = args.grad_output.values();
    auto gi = args.grad_inputs[0]->values();
    for (std::size_t i = 0; i < xi.size(); ++i) gi[i] += go[i] * (normal_cdf(xi[i]) + xi[i] * normal_pdf(xi[i]));
  });
}

Var tanh(Var x) {
  Matrix out = x.value();
  for (double& v : out.values()) v = std::tanh(v);
  return x.graph().record("tanh", std::move(out), {x}, [](const BackwardArgs& args) {
    if (!args.grad_inputs[0]) return;
    auto y = args.output.values();
    auto go = args.grad_output.values();
    auto gi = args.grad_inputs[0]->values();
    for (std::size_t i = 0; i < y.size(); ++i) gi[i] += go[i] * (1.0 - y[i] * y[i]);
  });
}

Var dropout(Var x, double rate, bool train, Rng* rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidInput("dropout rate must lie in [0, 1)");
  if (!train || rate == 0.0) return x;
  if (!rng) throw InvalidInput("dropout in train mode needs a random generator");
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(x.rows(), x.cols());
  for (double& m : mask.values()) m = rng->uniform() < rate ? 0.0 : keep_scale;
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= mask.values()[i];
  return x.graph().record("dropout", std::move(out), {x}, [mask = std::move(mask)](const BackwardArgs& args) {
    if (!args.grad_inputs[0]) return;
    auto go = args.grad_output.values();
    auto gi = args.grad_inputs[0]->values();
    for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += go[i] * mask.values()[i];
  });
}

Var mask_rows(Var x, std::size_t active) {
  Matrix out = x.value();
  for (std::size_t r = active; r < out.rows(); ++r)
    for (double& v : out.row(r)) v = 0.0;
  return x.graph().record("mask_rows", std::move(out), {x}, [active](const BackwardArgs& args) {
    if (!args.grad_inputs[0]) return;
    Matrix& gi = *args.grad_inputs[0];
    const std::size_t live = std::min(active, gi.rows());
    for (std::size_t r = 0; r < live; ++r)
      for (std::size_t c = 0; c < gi.cols(); ++c) gi(r, c) += args.grad_output(r, c);
  });
}

Var mean_rows(Var x, std::size_t active) {
  const Matrix& xv = x.value();
  if (active == 0 || active > xv.rows()) {
    throw ShapeError("mean_rows: active count " + std::to_string(active) + " invalid for " + xv.shape_string());
  }
  Matrix out(1, xv.cols());
  for (std::size_t r = 0; r < active; ++r)
    for (std::size_t c = 0; c < xv.cols(); ++c) out(0, c) += xv(r, c);
  const double inv = 1.0 / static_cast<double>(active);
  for (double& v : out.values()) v *= inv;
  return x.graph().record("mean_rows", std::move(out), {x}, [active, inv](const BackwardArgs& args) {
    if (!args.grad_inputs[0]) return;
    Matrix& gi = *args.grad_inputs[0];
    for (std::size_t r = 0; r < active; ++r)
      for (std::size_t c = 0; c < gi.cols(); ++c) gi(r, c) += args.grad_output(0, c) * inv;
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw InvalidInput("stack_rows needs at least one input");
  Graph& g = rows.front().graph();
  const std::size_t cols = rows.front().cols();
  std::size_t total = 0;
  for (Var v : rows) {
    if (v.cols() != cols) throw ShapeError("stack_rows: column counts differ");
    total += v.rows();
  }
  Matrix out(total, cols);
  std::size_t at = 0;
  for (Var v : rows) {
    for (std::size_t r = 0; r < v.rows(); ++r, ++at) std::ranges::copy(v.value().row(r), out.row(at).begin());
  }
  return g.record("stack_rows", std::move(out), std::vector<Var>(rows.begin(), rows.end()),
                  [](const BackwardArgs& args) {
                    std::size_t at = 0;
                    for (std::size_t i = 0; i < args.inputs.size(); ++i) {
                      const std::size_t n = args.inputs[i]->rows();
                      if (Matrix* gi = args.grad_inputs[i]) {
                        for (std::size_t r = 0; r < n; ++r)
                          for (std::size_t c = 0; c < gi->cols(); ++c) (*gi)(r, c) += args.grad_output(at + r, c);
                      }
                      at += n;
                    }
                  });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  const Matrix& z = logits.value();
  if (z.rows() != labels.size()) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + z.shape_string() +
                     " logits");
  }
  if (z.rows() == 0) throw InvalidInput("cross_entropy needs a nonempty batch");
  if (!z.all_finite()) throw NumericError("non-finite logits passed to cross_entropy");
  Matrix probs(z.rows(), z.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= z.cols()) throw InvalidInput("cross_entropy: label out of range");
    auto row = z.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double log_z = mx + std::log(sum);
    loss -= row[label] - log_z;
    for (std::size_t c = 0; c < z.cols(); ++c) probs(r, c) = std::exp(row[c] - log_z);
  }
  const double n = static_cast<double>(z.rows());
  std::vector<int> lab(labels.begin(), labels.end());
  return logits.graph().record("cross_entropy", Matrix(1, 1, loss / n), {logits},
                               [probs = std::move(probs), lab = std::move(lab), n](const BackwardArgs& args) {
                                 if (!args.grad_inputs[0]) return;
                                 Matrix& gi = *args.grad_inputs[0];
                                 const double s = args.grad_output(0, 0) / n;
                                 for (std::size_t r = 0; r < gi.rows(); ++r)
                                   for (std::size_t c = 0; c < gi.cols(); ++c)
                                     gi(r, c) += s * (probs(r, c) - (static_cast<int>(c) == lab[r] ? 1.0 : 0.0));
                               });
}

}  // namespace ops

}  // namespace patenthan
