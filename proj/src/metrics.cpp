#include "patenthan/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "patenthan/error.hpp"

namespace patenthan {

ConfusionMatrix confusion(std::span<const ValueClass> predicted, std::span<const ValueClass> truth) {
  if (predicted.size() != truth.size()) {
    throw InvalidInput("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                       std::to_string(truth.size()) + " labels");
  }
  if (predicted.empty()) throw InvalidInput("confusion: no predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] == ValueClass::kPBT;
    const bool true_pos = truth[i] == ValueClass::kPBT;
    if (pred_pos && true_pos) ++cm.tp;
    else if (!pred_pos && !true_pos) ++cm.tn;
    else if (pred_pos) ++cm.fp;
    else ++cm.fn;
  }
  return cm;
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

ClassMetrics positive_class_metrics(const ConfusionMatrix& cm) {
  ClassMetrics c;
  c.precision = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
  c.recall = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
  c.f1 = ratio(2.0 * c.precision * c.recall, c.precision + c.recall);
  return c;
}

}  // namespace

double matthews_correlation(const ConfusionMatrix& cm) {
  const double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
  const double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
  const double radicand = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (radicand == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(radicand);
}

ClassMetrics macro_average(const ClassMetrics& pbt, const ClassMetrics& mt) {
  return {(pbt.precision + mt.precision) / 2.0, (pbt.recall + mt.recall) / 2.0, (pbt.f1 + mt.f1) / 2.0};
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidInput("compute_metrics: empty confusion matrix");
  Metrics m;
  m.counts = cm;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  m.pbt = positive_class_metrics(cm);
  m.mt = positive_class_metrics(cm.swapped());
  m.macro = macro_average(m.pbt, m.mt);
  m.mcc = matthews_correlation(cm);
  return m;
}

void write_metrics_table(std::ostream& out, const Metrics& m) {
  auto cell = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  out << "metric\tPBT\tMT\tOverall\n";
  out << "Accuracy\t-\t-\t" << cell(m.accuracy) << '\n';
  out << "Precision\t" << cell(m.pbt.precision) << '\t' << cell(m.mt.precision) << '\t' << cell(m.macro.precision)
      << '\n';
  out << "Recall\t" << cell(m.pbt.recall) << '\t' << cell(m.mt.recall) << '\t' << cell(m.macro.recall) << '\n';
  out << "F1-score\t" << cell(m.pbt.f1) << '\t' << cell(m.mt.f1) << '\t' << cell(m.macro.f1) << '\n';
  out << "MCC\t-\t-\t" << cell(m.mcc) << '\n';
}

}  // namespace patenthan
