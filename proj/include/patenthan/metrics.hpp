#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>

#include "patenthan/label.hpp"

namespace patenthan {

// PBT is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  // The same counts seen with MT as the positive class.
  ConfusionMatrix swapped() const { return {tn, tp, fn, fp}; }

  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const ValueClass> predicted, std::span<const ValueClass> truth);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Metrics {
  ConfusionMatrix counts;
  double accuracy = 0.0;
  ClassMetrics pbt;
  ClassMetrics mt;
  ClassMetrics macro;  // unweighted mean of the two classes ("Overall")
  double mcc = 0.0;
};

// Unweighted mean of the per-class scores.
ClassMetrics macro_average(const ClassMetrics& pbt, const ClassMetrics& mt);

// Any ratio with a zero denominator is reported as 0.
Metrics compute_metrics(const ConfusionMatrix& cm);

double matthews_correlation(const ConfusionMatrix& cm);

// Rows Accuracy, Precision, Recall, F1-score, MCC; columns PBT, MT, Overall.
void write_metrics_table(std::ostream& out, const Metrics& m);

}  // namespace patenthan
