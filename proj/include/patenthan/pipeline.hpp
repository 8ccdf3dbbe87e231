#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "patenthan/corpus.hpp"
#include "patenthan/embed.hpp"
#include "patenthan/interpret.hpp"
#include "patenthan/model.hpp"
#include "patenthan/train.hpp"

namespace patenthan {

// Everything a pipeline run needs; populated from a key = value config file
// and then overridden by command-line flags.
struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path embeddings;
  std::filesystem::path labels;
  std::filesystem::path model;
  std::filesystem::path stopwords;
  std::filesystem::path reports = ".";

  std::array<LabelPolicy, 3> label_policies = default_label_policies();
  Horizon horizon = Horizon::kShort;
  ClaimFilter claim_filter = ClaimFilter::kIndependentOnly;
  Normalization normalization = Normalization::kMax;
  std::size_t max_tokens = kDefaultMaxTokens;

  ModelConfig model_config;
  TrainConfig train_config;
  double train_fraction = 0.8;
  std::size_t folds = 5;

  std::uint64_t seed = 0;        // splits
  std::uint64_t init_seed = 0;   // parameter initialization
  std::uint64_t embed_seed = 0;  // hashed embedder

  void validate() const;
};

// Applies one "key = value" setting; unknown keys are an error.
void apply_config_entry(PipelineConfig& config, const std::string& key, const std::string& value);

// Comments start with '#'; blank lines are ignored.
PipelineConfig parse_pipeline_config(std::istream& in);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// "3,7,18" -> fixed thresholds for the short, mid and long horizons.
std::array<LabelPolicy, 3> parse_thresholds(const std::string& text);
std::array<LabelPolicy, 3> quantile_policies(double q);

struct Dataset {
  std::vector<Example> examples;
  std::vector<std::string> warnings;
};

// Joins embedding records with labels by patent id. Records without a label
// or without any claim are skipped with a warning.
Dataset assemble_dataset(const EmbeddingFile& embeddings, std::span<const LabeledPatent> labels, Horizon horizon,
                         std::size_t m);

// ---------------------------------------------------------------------------
// Synthetic corpus with a planted class signal.

struct SyntheticCorpus {
  std::vector<PatentRecord> records;
  std::vector<std::pair<std::string, ValueClass>> key;
};

// Tokens that appear only in the planted claim of PBT patents.
const std::vector<std::string>& planted_tokens();

// round(n * pbt_fraction) patents are PBT. Each PBT patent carries the planted
// tokens in one independent claim and receives enough citations to clear the
// default thresholds at every horizon; MT patents stay below them.
SyntheticCorpus generate_synthetic_corpus(std::size_t n_patents, double pbt_fraction, std::uint64_t seed);

void write_key(std::ostream& out, const SyntheticCorpus& corpus);

// ---------------------------------------------------------------------------
// Static SVG charts.

struct HistogramSeries {
  std::string name;
  std::vector<double> values;
  std::string color;
};

void write_histogram_svg(std::ostream& out, const std::string& title, std::span<const HistogramSeries> series,
                         double lo, double hi, std::size_t bins);

struct LineSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
  std::string color;
};

void write_line_chart_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                          std::span<const LineSeries> series);

}  // namespace patenthan
