#include "patenthan/pipeline.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

#include "patenthan/error.hpp"

namespace patenthan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw InvalidInput("config key '" + key + "': expected a number, got '" + v + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const auto n = std::stoull(v, &used);
      if (used == v.size()) return n;
    }
  } catch (const std::exception&) {
  }
  throw InvalidInput("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  model_config.validate();
  train_config.validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidInput("train_fraction must lie in (0, 1)");
  if (folds < 2) throw InvalidInput("folds must be >= 2");
  if (max_tokens < 1) throw InvalidInput("max_tokens must be >= 1");
  for (const auto& p : label_policies) {
    if (const auto* f = std::get_if<FixedThreshold>(&p.mode); f && f->threshold < 1) {
      throw InvalidInput("horizon thresholds must be positive");
    }
  }
}

std::array<LabelPolicy, 3> parse_thresholds(const std::string& text) {
  std::array<LabelPolicy, 3> out = default_label_policies();
  std::stringstream ss(text);
  std::string cell;
  std::size_t i = 0;
  while (std::getline(ss, cell, ',')) {
    if (i >= 3) throw InvalidInput("thresholds: expected three comma-separated integers");
    const auto v = to_u64("thresholds", trim(cell));
    out[i].mode = FixedThreshold{static_cast<int>(v)};
    ++i;
  }
  if (i != 3) throw InvalidInput("thresholds: expected three comma-separated integers");
  return out;
}

std::array<LabelPolicy, 3> quantile_policies(double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidInput("quantile must lie in (0, 1)");
  std::array<LabelPolicy, 3> out = default_label_policies();
  for (auto& p : out) p.mode = Quantile{q};
  return out;
}

void apply_config_entry(PipelineConfig& c, const std::string& key, const std::string& v) {
  using Setter = void (*)(PipelineConfig&, const std::string&, const std::string&);
  static const std::unordered_map<std::string, Setter> kSetters = {
      {"corpus", [](PipelineConfig& c, const std::string&, const std::string& v) { c.corpus = v; }},
      {"embeddings", [](PipelineConfig& c, const std::string&, const std::string& v) { c.embeddings = v; }},
      {"labels", [](PipelineConfig& c, const std::string&, const std::string& v) { c.labels = v; }},
      {"model", [](PipelineConfig& c, const std::string&, const std::string& v) { c.model = v; }},
      {"stopwords", [](PipelineConfig& c, const std::string&, const std::string& v) { c.stopwords = v; }},
      {"reports", [](PipelineConfig& c, const std::string&, const std::string& v) { c.reports = v; }},
      {"thresholds", [](PipelineConfig& c, const std::string&, const std::string& v) {
         c.label_policies = parse_thresholds(v);
       }},
      {"quantile", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.label_policies = quantile_policies(to_double(k, v));
       }},
      {"horizon", [](PipelineConfig& c, const std::string&, const std::string& v) { c.horizon = parse_horizon(v); }},
      {"claims", [](PipelineConfig& c, const std::string&, const std::string& v) {
         c.claim_filter = parse_claim_filter(v);
       }},
      {"normalization", [](PipelineConfig& c, const std::string&, const std::string& v) {
         c.normalization = parse_normalization(v);
       }},
      {"max_tokens", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.max_tokens = to_u64(k, v); }},
      {"d_e", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.model_config.d_e = to_u64(k, v); }},
      {"m", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.model_config.m = to_u64(k, v); }},
      {"n_encoders", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.model_config.n_encoders = to_u64(k, v);
       }},
      {"ffn_mult", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.model_config.ffn_mult = to_u64(k, v);
       }},
      {"dropout", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.model_config.dropout = to_double(k, v);
       }},
      {"lr", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train_config.learning_rate = to_double(k, v);
       }},
      {"batch_size", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train_config.batch_size = to_u64(k, v);
       }},
      {"max_epochs", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train_config.max_epochs = to_u64(k, v);
       }},
      {"patience", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train_config.patience = to_u64(k, v);
       }},
      {"val_fraction", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train_config.validation_fraction = to_double(k, v);
       }},
      {"train_fraction", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train_fraction = to_double(k, v);
       }},
      {"folds", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.folds = to_u64(k, v); }},
      {"seed", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.seed = to_u64(k, v);
         c.train_config.seed = c.seed;
       }},
      {"init_seed", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.init_seed = to_u64(k, v); }},
      {"embed_seed", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.embed_seed = to_u64(k, v);
       }},
  };
  auto it = kSetters.find(key);
  if (it == kSetters.end()) throw InvalidInput("unknown config key '" + key + "'");
  it->second(c, key, v);
}

PipelineConfig parse_pipeline_config(std::istream& in) {
  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const InvalidInput& e) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_pipeline_config(in);
}

Dataset assemble_dataset(const EmbeddingFile& embeddings, std::span<const LabeledPatent> labels, Horizon horizon,
                         std::size_t m) {
  std::unordered_map<std::string, const LabeledPatent*> by_id;
  for (const auto& lp : labels) by_id.emplace(lp.patent_id, &lp);
  Dataset ds;
  for (std::size_t i = 0; i < embeddings.records.size(); ++i) {
    const auto& rec = embeddings.records[i];
    auto it = by_id.find(rec.patent_id);
    if (it == by_id.end()) {
      ds.warnings.push_back("no label for patent " + rec.patent_id + "; skipped");
      continue;
    }
    if (rec.claim_count == 0) {
      ds.warnings.push_back("patent " + rec.patent_id + " has no embeddable claims; skipped");
      continue;
    }
    ds.examples.push_back({rec.patent_id, build_claim_matrix(embeddings.claim_vectors(i), m), it->second->label(horizon)});
  }
  return ds;
}

}  // namespace patenthan
