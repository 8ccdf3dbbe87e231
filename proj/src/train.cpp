#include "patenthan/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "patenthan/corpus.hpp"
#include "patenthan/error.hpp"
#include "patenthan/optim.hpp"
#include "patenthan/rng.hpp"

namespace patenthan {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be positive");
  if (batch_size < 1) throw InvalidInput("batch size must be >= 1");
  if (max_epochs < 1) throw InvalidInput("max_epochs must be >= 1");
  if (patience < 1) throw InvalidInput("patience must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw InvalidInput("validation fraction must lie in (0, 1)");
  }
}

std::string_view to_string(StopReason r) { return r == StopReason::kPatience ? "patience" : "max_epochs"; }

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience_ < 1) throw InvalidInput("patience must be >= 1");
}

bool EarlyStopping::observe(std::size_t epoch, double val_loss) {
  improved_ = best_epoch_ == 0 || val_loss < best_loss_;
  if (improved_) {
    best_epoch_ = epoch;
    best_loss_ = val_loss;
    stale_ = 0;
    return false;
  }
  return ++stale_ >= patience_;
}

namespace {

bool has_both_classes(std::span<const Example> data) {
  bool pbt = false, mt = false;
  for (const auto& e : data) (e.label == ValueClass::kPBT ? pbt : mt) = true;
  return pbt && mt;
}

std::vector<ValueClass> labels_of(std::span<const Example> data) {
  std::vector<ValueClass> out;
  out.reserve(data.size());
  for (const auto& e : data) out.push_back(e.label);
  return out;
}

}  // namespace

double evaluate_loss(std::span<const Example> data, const ModelParams& params) {
  if (data.empty()) throw InvalidInput("evaluate_loss: empty data set");
  double total = 0.0;
  for (const auto& e : data) {
    Graph g;
    ModelVars vars = bind_constants(g, params);
    ForwardResult r = forward(g, vars, params.config, e.claims, false, nullptr);
    const int label = class_index(e.label);
    total += ops::cross_entropy(r.logits, std::span(&label, 1)).value()(0, 0);
  }
  return total / static_cast<double>(data.size());
}

std::vector<ValueClass> predict_all(std::span<const Example> data, const ModelParams& params) {
  std::vector<ValueClass> out;
  out.reserve(data.size());
  for (const auto& e : data) out.push_back(predict_class(model_forward(e.claims, params).logits).label);
  return out;
}

Metrics evaluate(std::span<const Example> data, const ModelParams& params) {
  const auto predicted = predict_all(data, params);
  const auto truth = labels_of(data);
  return compute_metrics(confusion(predicted, truth));
}

TrainResult train_model(std::span<const Example> train, std::span<const Example> validation,
                        const ModelConfig& model_config, const TrainConfig& config, std::uint64_t init_seed) {
  config.validate();
  model_config.validate();
  if (train.empty()) throw InvalidInput("training set is empty");
  if (validation.empty()) throw InvalidInput("validation set is empty");

  TrainResult result{init_params(model_config, init_seed), {}};
  TrainReport& report = result.report;
  if (!has_both_classes(train)) report.warnings.push_back("training set does not contain both classes");
  if (!has_both_classes(validation)) report.warnings.push_back("validation set does not contain both classes");

  ModelParams params = result.params;
  auto param_list = params.all();
  Adam adam(AdamConfig{config.learning_rate});
  Rng shuffle_rng(Rng::derive(config.seed, 1));
  Rng dropout_rng(Rng::derive(config.seed, 2));
  EarlyStopping stopper(config.patience);

  const std::size_t batch_size = std::min(config.batch_size, train.size());
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  report.stop_reason = StopReason::kMaxEpochs;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size, ++batch_no) {
      const std::size_t end = std::min(start + batch_size, order.size());
      params.zero_grad();
      try {
        Graph g;
        ModelVars vars = bind_parameters(g, params);
        std::vector<Var> rows;
        std::vector<int> labels;
        rows.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) {
          const Example& e = train[order[i]];
          rows.push_back(forward(g, vars, model_config, e.claims, true, &dropout_rng).logits);
          labels.push_back(class_index(e.label));
        }
        Var loss = ops::cross_entropy(ops::stack_rows(rows), labels);
        loss_sum += loss.value()(0, 0) * static_cast<double>(end - start);
        g.backward(loss);
        adam.step(param_list);
      } catch (const NumericError& err) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_no + 1) + ": " + err.what());
      }
    }
    for (const Parameter* p : param_list) {
      if (!p->value.all_finite()) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": parameter " + p->name +
                           " is non-finite");
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.val_loss = evaluate_loss(validation, params);
    if (!std::isfinite(rec.val_loss)) {
      throw NumericError("validation loss is non-finite at epoch " + std::to_string(epoch));
    }
    report.epochs.push_back(rec);

    const bool stop = stopper.observe(epoch, rec.val_loss);
    if (stopper.improved()) result.params = params;
    if (stop) {
      report.stop_reason = StopReason::kPatience;
      break;
    }
  }
  report.best_epoch = stopper.best_epoch();
  report.best_val_loss = stopper.best_loss();
  result.params.zero_grad();
  report.train_metrics = evaluate(train, result.params);
  report.val_metrics = evaluate(validation, result.params);
  return result;
}

GridResult grid_search(std::span<const Example> train, std::span<const Example> validation,
                       const ModelConfig& model_config, const TrainConfig& base, std::span<const double> learning_rates,
                       std::span<const std::size_t> batch_sizes, std::uint64_t init_seed) {
  if (learning_rates.empty() || batch_sizes.empty()) throw InvalidInput("grid_search: empty grid");
  GridResult grid;
  for (double lr : learning_rates) {
    for (std::size_t bs : batch_sizes) {
      TrainConfig cfg = base;
      cfg.learning_rate = lr;
      cfg.batch_size = bs;
      const TrainResult r = train_model(train, validation, model_config, cfg, init_seed);
      GridPoint point{lr, bs, r.report.best_val_loss};
      if (grid.points.empty() || point.best_val_loss < grid.best.best_val_loss) grid.best = point;
      grid.points.push_back(point);
    }
  }
  return grid;
}

namespace {

SummaryStat summarize_stat(const std::vector<double>& values) {
  SummaryStat s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace

CvResult cross_validate(std::span<const Example> data, std::size_t k, const ModelConfig& model_config,
                        const TrainConfig& config, std::uint64_t init_seed) {
  config.validate();
  const auto labels = labels_of(data);
  const auto folds = stratified_kfold(labels, k, config.seed);

  CvResult result;
  if (!has_both_classes(data)) result.warnings.push_back("corpus contains a single class; metrics are degenerate");

  std::vector<double> acc, prec, rec, f1, mcc;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<char> in_test(data.size(), 0);
    for (std::size_t i : folds[f]) in_test[i] = 1;
    std::vector<Example> pool, test;
    for (std::size_t i = 0; i < data.size(); ++i) (in_test[i] ? test : pool).push_back(data[i]);

    const auto pool_labels = labels_of(pool);
    const Split inner =
        stratified_split_lenient(pool_labels, 1.0 - config.validation_fraction, Rng::derive(config.seed, 100 + f));
    std::vector<Example> train, validation;
    for (std::size_t i : inner.train) train.push_back(pool[i]);
    for (std::size_t i : inner.test) validation.push_back(pool[i]);
    if (validation.empty()) {
      // Tiny folds: hold out one training example so early stopping has data.
      validation.push_back(train.back());
      train.pop_back();
    }

    TrainConfig fold_cfg = config;
    fold_cfg.seed = Rng::derive(config.seed, 200 + f);
    TrainResult trained = train_model(train, validation, model_config, fold_cfg, Rng::derive(init_seed, f));

    FoldResult fold;
    fold.fold = f + 1;
    for (const auto& e : test) fold.test_ids.push_back(e.patent_id);
    for (const auto& e : train) fold.train_ids.push_back(e.patent_id);
    for (const auto& e : validation) fold.validation_ids.push_back(e.patent_id);
    fold.metrics = evaluate(test, trained.params);
    for (const auto& w : trained.report.warnings) {
      result.warnings.push_back("fold " + std::to_string(f + 1) + ": " + w);
    }
    fold.report = std::move(trained.report);

    acc.push_back(fold.metrics.accuracy);
    prec.push_back(fold.metrics.macro.precision);
    rec.push_back(fold.metrics.macro.recall);
    f1.push_back(fold.metrics.macro.f1);
    mcc.push_back(fold.metrics.mcc);
    result.folds.push_back(std::move(fold));
  }
  result.summary = {summarize_stat(acc), summarize_stat(prec), summarize_stat(rec), summarize_stat(f1),
                    summarize_stat(mcc)};
  return result;
}

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void write_loss_table(std::ostream& out, const TrainReport& report) {
  out << "epoch\ttrain_loss\tval_loss\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << '\t' << fmt(e.train_loss, "%.17g") << '\t' << fmt(e.val_loss, "%.17g") << '\n';
  }
}

void write_train_report(std::ostream& out, const TrainReport& report) {
  out << "# patenthan training report\n";
  out << "epochs_run\t" << report.epochs.size() << '\n';
  out << "best_epoch\t" << report.best_epoch << '\n';
  out << "best_val_loss\t" << fmt(report.best_val_loss, "%.17g") << '\n';
  out << "stop_reason\t" << to_string(report.stop_reason) << '\n';
  out << "train_accuracy\t" << fmt(report.train_metrics.accuracy) << '\n';
  out << "val_accuracy\t" << fmt(report.val_metrics.accuracy) << '\n';
  out << "val_mcc\t" << fmt(report.val_metrics.mcc) << '\n';
  for (const auto& w : report.warnings) out << "warning\t" << w << '\n';
  out << '\n';
  write_loss_table(out, report);
}

void write_cv_summary(std::ostream& out, const CvResult& result) {
  out << "fold\taccuracy\tprecision\trecall\tf1\tmcc\tbest_epoch\n";
  for (const auto& f : result.folds) {
    out << f.fold << '\t' << fmt(f.metrics.accuracy) << '\t' << fmt(f.metrics.macro.precision) << '\t'
        << fmt(f.metrics.macro.recall) << '\t' << fmt(f.metrics.macro.f1) << '\t' << fmt(f.metrics.mcc) << '\t'
        << f.report.best_epoch << '\n';
  }
  const auto& s = result.summary;
  out << "mean\t" << fmt(s.accuracy.mean) << '\t' << fmt(s.precision.mean) << '\t' << fmt(s.recall.mean) << '\t'
      << fmt(s.f1.mean) << '\t' << fmt(s.mcc.mean) << "\t-\n";
  out << "std\t" << fmt(s.accuracy.stddev) << '\t' << fmt(s.precision.stddev) << '\t' << fmt(s.recall.stddev) << '\t'
      << fmt(s.f1.stddev) << '\t' << fmt(s.mcc.stddev) << "\t-\n";
  for (const auto& w : result.warnings) out << "# warning: " << w << '\n';
}

}  // namespace patenthan
