#include "patenthan/model.hpp"

#include <cmath>
#include <unordered_map>

#include "patenthan/error.hpp"
#include "patenthan/rng.hpp"

namespace patenthan {

void ModelConfig::validate() const {
  if (d_e < 1) throw InvalidInput("d_e must be >= 1");
  if (m < 1) throw InvalidInput("m must be >= 1");
  if (n_encoders < 1) throw InvalidInput("n_encoders must be >= 1");
  if (ffn_mult < 1) throw InvalidInput("ffn_mult must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidInput("dropout must lie in [0, 1)");
  if (!(layer_norm_eps > 0.0)) throw InvalidInput("layer_norm_eps must be positive");
}

CheckpointConfig ModelConfig::to_checkpoint() const {
  return {static_cast<std::uint32_t>(d_e), static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(n_encoders),
          static_cast<std::uint32_t>(ffn_mult), dropout};
}

ModelConfig ModelConfig::from_checkpoint(const CheckpointConfig& c) {
  ModelConfig config;
  config.d_e = c.d_e;
  config.m = c.m;
  config.n_encoders = c.n_encoders;
  config.ffn_mult = c.ffn_mult;
  config.dropout = c.dropout;
  config.validate();
  return config;
}

std::vector<Parameter*> ModelParams::all() {
  std::vector<Parameter*> out;
  for (auto& e : encoders) {
    for (Parameter* p : {&e.query, &e.key, &e.value, &e.output, &e.norm1_gain, &e.norm1_bias, &e.expand, &e.contract,
                         &e.norm2_gain, &e.norm2_bias}) {
      out.push_back(p);
    }
  }
  out.push_back(&pooling);
  out.push_back(&classifier);
  return out;
}

std::vector<const Parameter*> ModelParams::all() const {
  auto mut = const_cast<ModelParams*>(this)->all();
  return {mut.begin(), mut.end()};
}

void ModelParams::zero_grad() {
  for (Parameter* p : all()) p->zero_grad();
}

namespace {

Parameter glorot(std::string name, std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-limit, limit);
  return {std::move(name), std::move(m)};
}

Parameter constant_row(std::string name, std::size_t cols, double value) {
  return {std::move(name), Matrix(1, cols, value)};
}

}  // namespace

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const std::size_t d = config.d_e;
  const std::size_t hidden = config.ffn_mult * d;
  ModelParams params;
  params.config = config;
  for (std::size_t i = 0; i < config.n_encoders; ++i) {
    const std::string p = "encoder." + std::to_string(i) + ".";
    EncoderParams e;
    e.query = glorot(p + "query", d, d, rng);
    e.key = glorot(p + "key", d, d, rng);
    e.value = glorot(p + "value", d, d, rng);
    e.output = glorot(p + "output", d, d, rng);
    e.norm1_gain = constant_row(p + "norm1.gain", d, 1.0);
    e.norm1_bias = constant_row(p + "norm1.bias", d, 0.0);
    e.expand = glorot(p + "ffn.expand", d, hidden, rng);
    e.contract = glorot(p + "ffn.contract", hidden, d, rng);
    e.norm2_gain = constant_row(p + "norm2.gain", d, 1.0);
    e.norm2_bias = constant_row(p + "norm2.bias", d, 0.0);
    params.encoders.push_back(std::move(e));
  }
  params.pooling = glorot("pooling", d, d, rng);
  params.classifier = glorot("classifier", d, 2, rng);
  return params;
}

std::vector<double> attention_received(const Matrix& attention, std::size_t active) {
  std::vector<double> scores(active, 0.0);
  for (std::size_t a = 0; a < active; ++a)
    for (std::size_t j = 0; j < active; ++j) scores[j] += attention(a, j);
  return scores;
}

namespace {

template <typename Bind>
ModelVars bind_with(ModelParams& params, Bind bind) {
  ModelVars vars;
  for (auto& e : params.encoders) {
    vars.encoders.push_back({bind(e.query), bind(e.key), bind(e.value), bind(e.output), bind(e.norm1_gain),
                             bind(e.norm1_bias), bind(e.expand), bind(e.contract), bind(e.norm2_gain),
                             bind(e.norm2_bias)});
  }
  vars.pooling = bind(params.pooling);
  vars.classifier = bind(params.classifier);
  return vars;
}

}  // namespace

ModelVars bind_parameters(Graph& g, ModelParams& params) {
  return bind_with(params, [&g](Parameter& p) { return g.parameter(p); });
}

ModelVars bind_constants(Graph& g, const ModelParams& params) {
  return bind_with(const_cast<ModelParams&>(params), [&g](Parameter& p) { return g.constant(p.value); });
}

EncoderResult encoder_forward(Var input, const EncoderVars& enc, std::size_t active, const ModelConfig& config,
                              bool train, Rng* rng) {
  const std::size_t d = config.d_e;
  if (input.cols() != d) {
    throw ShapeError("encoder input is " + input.value().shape_string() + ", expected width " + std::to_string(d));
  }
  if (active < 1 || active > input.rows()) {
    throw InvalidInput("active claim count " + std::to_string(active) + " outside [1, " +
                       std::to_string(input.rows()) + "]");
  }
  Var q = ops::matmul(input, enc.query);
  Var k = ops::matmul(input, enc.key);
  Var v = ops::matmul(input, enc.value);
  Var scores = ops::scale(ops::matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(d)));
  Var attention = ops::softmax_rows(scores, active);
  Var head = ops::matmul(attention, v);
  Var single_head = ops::matmul(head, enc.output);
  Var att = ops::layer_norm(ops::add(input, single_head), enc.norm1_gain, enc.norm1_bias, config.layer_norm_eps);

  Var hidden = ops::dropout(ops::gelu(ops::matmul(att, enc.expand)), config.dropout, train, rng);
  Var ffn = ops::matmul(hidden, enc.contract);
  Var out = ops::layer_norm(ops::add(att, ffn), enc.norm2_gain, enc.norm2_bias, config.layer_norm_eps);
  return {ops::mask_rows(out, active), attention};
}

ForwardResult forward(Graph& g, const ModelVars& vars, const ModelConfig& config, const ClaimMatrix& claims,
                      bool train, Rng* rng) {
  if (claims.d_e() != config.d_e || claims.m() != config.m) {
    throw ShapeError("claim matrix is " + claims.rows.shape_string() + ", model expects " + std::to_string(config.m) +
                     "x" + std::to_string(config.d_e));
  }
  if (claims.active == 0) throw InvalidInput("patent has no embeddable claims");
  if (vars.encoders.empty()) throw InvalidInput("model has no encoders");

  Var x = g.constant(claims.rows);
  Var attention;
  for (const auto& enc : vars.encoders) {
    EncoderResult r = encoder_forward(x, enc, claims.active, config, train, rng);
    x = r.output;
    attention = r.attention;
  }
  Var pooled = ops::tanh(ops::matmul(ops::mean_rows(x, claims.active), vars.pooling));
  Var logits = ops::matmul(pooled, vars.classifier);
  return {logits, attention, claims.active};
}

ModelOutput model_forward(const ClaimMatrix& claims, const ModelParams& params, bool train, Rng* rng) {
  Graph g;
  ModelVars vars = bind_constants(g, params);
  ForwardResult r = forward(g, vars, params.config, claims, train, rng);
  ModelOutput out;
  out.logits = {r.logits.value()(0, 0), r.logits.value()(0, 1)};
  out.attention.last_matrix = r.attention.value();
  out.attention.active = r.active;
  out.attention.claim_scores = attention_received(out.attention.last_matrix, r.active);
  return out;
}

Prediction predict_class(const std::array<double, 2>& logits) {
  if (!std::isfinite(logits[0]) || !std::isfinite(logits[1])) throw NumericError("non-finite logits");
  Prediction p;
  p.p_pbt = 1.0 / (1.0 + std::exp(logits[1] - logits[0]));
  p.label = p.p_pbt > 0.5 ? ValueClass::kPBT : ValueClass::kMT;
  return p;
}

void save_model(const std::filesystem::path& path, const ModelParams& params) {
  const auto ptrs = params.all();
  save_checkpoint(path, params.config.to_checkpoint(), ptrs);
}

ModelParams model_from_checkpoint(const Checkpoint& ck) {
  const ModelConfig config = ModelConfig::from_checkpoint(ck.config);
  ModelParams params = init_params(config, 0);
  std::unordered_map<std::string, const Parameter*> by_name;
  for (const auto& p : ck.params) by_name.emplace(p.name, &p);
  auto slots = params.all();
  if (by_name.size() != slots.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(by_name.size()) + " parameter blocks, model expects " +
                     std::to_string(slots.size()));
  }
  for (Parameter* slot : slots) {
    auto it = by_name.find(slot->name);
    if (it == by_name.end()) throw ShapeError("checkpoint lacks parameter block " + slot->name);
    if (!it->second->value.same_shape(slot->value)) {
      throw ShapeError("parameter " + slot->name + " is " + it->second->value.shape_string() + " in the checkpoint, " +
                       slot->value.shape_string() + " in the model");
    }
    slot->value = it->second->value;
    slot->zero_grad();
  }
  return params;
}

ModelParams load_model(const std::filesystem::path& path) { return model_from_checkpoint(load_checkpoint(path)); }

}  // namespace patenthan
