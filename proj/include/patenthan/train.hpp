#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patenthan/embed.hpp"
#include "patenthan/metrics.hpp"
#include "patenthan/model.hpp"

namespace patenthan {

struct Example {
  std::string patent_id;
  ClaimMatrix claims;
  ValueClass label = ValueClass::kMT;
};

struct TrainConfig {
  double learning_rate = 2e-5;
  std::size_t batch_size = 512;  // clamped to the training set size
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr double kLearningRateGrid[] = {1e-4, 5e-5, 3e-5, 2e-5, 1e-5, 1e-6};
inline constexpr std::size_t kBatchSizeGrid[] = {64, 128, 256, 512};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

enum class StopReason { kPatience, kMaxEpochs };

std::string_view to_string(StopReason r);

// Validation-loss early stopping. observe() returns true when training should
// stop after the epoch just reported.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  bool observe(std::size_t epoch, double val_loss);
  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double best_loss_ = 0.0;
  std::size_t stale_ = 0;
  bool improved_ = false;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  StopReason stop_reason = StopReason::kMaxEpochs;
  std::vector<std::string> warnings;
  Metrics train_metrics;  // best parameters on the training set
  Metrics val_metrics;    // best parameters on the validation set
};

struct TrainResult {
  ModelParams params;  // from the best validation epoch
  TrainReport report;
};

TrainResult train_model(std::span<const Example> train, std::span<const Example> validation,
                        const ModelConfig& model_config, const TrainConfig& config, std::uint64_t init_seed);

// Mean cross-entropy with dropout off.
double evaluate_loss(std::span<const Example> data, const ModelParams& params);

std::vector<ValueClass> predict_all(std::span<const Example> data, const ModelParams& params);
Metrics evaluate(std::span<const Example> data, const ModelParams& params);

struct GridPoint {
  double learning_rate = 0.0;
  std::size_t batch_size = 0;
  double best_val_loss = 0.0;
};

struct GridResult {
  std::vector<GridPoint> points;
  GridPoint best;
};

// Trains once per (learning rate, batch size) pair and keeps the lowest
// validation loss.
GridResult grid_search(std::span<const Example> train, std::span<const Example> validation,
                       const ModelConfig& model_config, const TrainConfig& base, std::span<const double> learning_rates,
                       std::span<const std::size_t> batch_sizes, std::uint64_t init_seed);

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::string> test_ids;
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  Metrics metrics;
  TrainReport report;
};

struct SummaryStat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation across folds
};

struct CvSummary {
  SummaryStat accuracy, precision, recall, f1, mcc;  // precision/recall/F1 are macro averages
};

struct CvResult {
  std::vector<FoldResult> folds;
  CvSummary summary;
  std::vector<std::string> warnings;
};

CvResult cross_validate(std::span<const Example> data, std::size_t k, const ModelConfig& model_config,
                        const TrainConfig& config, std::uint64_t init_seed);

// Structured text summary followed by an epoch table.
void write_train_report(std::ostream& out, const TrainReport& report);
// epoch, train_loss, val_loss
void write_loss_table(std::ostream& out, const TrainReport& report);
void write_cv_summary(std::ostream& out, const CvResult& result);

}  // namespace patenthan
