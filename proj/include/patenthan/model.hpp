#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "patenthan/autodiff.hpp"
#include "patenthan/checkpoint.hpp"
#include "patenthan/embed.hpp"
#include "patenthan/label.hpp"

namespace patenthan {

class Rng;

struct ModelConfig {
  std::size_t d_e = 768;
  std::size_t m = 18;
  std::size_t n_encoders = 4;
  std::size_t ffn_mult = 4;
  double dropout = 0.1;
  double layer_norm_eps = 1e-5;

  void validate() const;
  CheckpointConfig to_checkpoint() const;
  static ModelConfig from_checkpoint(const CheckpointConfig& c);
};

// One claim encoder block.
struct EncoderParams {
  Parameter query;       // d_e x d_e
  Parameter key;         // d_e x d_e
  Parameter value;       // d_e x d_e
  Parameter output;      // d_e x d_e, applied to the attention head
  Parameter norm1_gain;  // 1 x d_e
  Parameter norm1_bias;  // 1 x d_e
  Parameter expand;      // d_e x (ffn_mult * d_e)
  Parameter contract;    // (ffn_mult * d_e) x d_e
  Parameter norm2_gain;  // 1 x d_e
  Parameter norm2_bias;  // 1 x d_e
};

struct ModelParams {
  ModelConfig config;
  std::vector<EncoderParams> encoders;
  Parameter pooling;     // d_e x d_e, before tanh
  Parameter classifier;  // d_e x 2, producing [t_PBT, t_MT]

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  void zero_grad();
};

// Glorot-uniform weights, unit LayerNorm gains and zero biases.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Attention of the last encoder. Rows and columns at or past `active` are zero.
struct AttentionRecord {
  Matrix last_matrix;                // m x m
  std::vector<double> claim_scores;  // attention received by each active claim
  std::size_t active = 0;
};

// Column sums over the active rows: how much attention each claim receives.
std::vector<double> attention_received(const Matrix& attention, std::size_t active);

struct ModelOutput {
  std::array<double, 2> logits{};  // [t_PBT, t_MT]
  AttentionRecord attention;
};

// Graph bindings of the parameters, either trainable or frozen.
struct EncoderVars {
  Var query, key, value, output, norm1_gain, norm1_bias, expand, contract, norm2_gain, norm2_bias;
};

struct ModelVars {
  std::vector<EncoderVars> encoders;
  Var pooling;
  Var classifier;
};

ModelVars bind_parameters(Graph& g, ModelParams& params);
ModelVars bind_constants(Graph& g, const ModelParams& params);

struct EncoderResult {
  Var output;     // m x d_e, padded rows zero
  Var attention;  // m x m
};

EncoderResult encoder_forward(Var input, const EncoderVars& enc, std::size_t active, const ModelConfig& config,
                              bool train, Rng* rng);

struct ForwardResult {
  Var logits;     // 1 x 2
  Var attention;  // last encoder, m x m
  std::size_t active = 0;
};

ForwardResult forward(Graph& g, const ModelVars& vars, const ModelConfig& config, const ClaimMatrix& claims,
                      bool train, Rng* rng);

// Inference without gradient tracking.
ModelOutput model_forward(const ClaimMatrix& claims, const ModelParams& params, bool train = false,
                          Rng* rng = nullptr);

struct Prediction {
  ValueClass label = ValueClass::kMT;
  double p_pbt = 0.5;
};

// Softmax over [t_PBT, t_MT]; PBT only when p(PBT) > 0.5, so a tie is MT.
Prediction predict_class(const std::array<double, 2>& logits);

void save_model(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_model(const std::filesystem::path& path);
ModelParams model_from_checkpoint(const Checkpoint& ck);

}  // namespace patenthan
