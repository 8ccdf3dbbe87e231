// patenthan: command-line pipeline for claim-level patent value screening.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "patenthan/error.hpp"
#include "patenthan/pipeline.hpp"
#include "patenthan/rng.hpp"

namespace fs = std::filesystem;
using namespace patenthan;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kInvalid = 4,
  kShape = 5,
  kNumeric = 6,
  kOutputExists = 7,
};

struct OutputExists : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  PipelineConfig config;
  bool force = false;
};

void require_input(const fs::path& path, const char* what) {
  if (path.empty()) throw InvalidInput(std::string("no ") + what + " path given (set it in the config or by flag)");
  if (!fs::exists(path)) throw IoError(std::string(what) + " not found: " + path.string());
}

void require_output(const fs::path& path, bool force) {
  if (path.empty()) throw InvalidInput("output path is empty");
  if (fs::exists(path) && !force) {
    throw OutputExists(path.string() + " already exists; pass --force to overwrite");
  }
}

// Writes through a temporary file so a failed command never leaves a partial output.
template <typename Fn>
void write_output(const fs::path& path, Fn&& fn) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    fn(out);
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path report_path(const Context& ctx, const std::string& name) { return ctx.config.reports / name; }

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

EmbeddingFile load_embeddings(const Context& ctx, std::size_t d_e) {
  require_input(ctx.config.embeddings, "embeddings file");
  EmbeddingFile file = read_embeddings(ctx.config.embeddings);
  require_embedding_dim(file, d_e);
  return file;
}

Dataset load_dataset(const Context& ctx, std::size_t d_e, std::size_t m) {
  const EmbeddingFile file = load_embeddings(ctx, d_e);
  require_input(ctx.config.labels, "labels file");
  const auto labels = read_labels(ctx.config.labels);
  Dataset ds = assemble_dataset(file, labels, ctx.config.horizon, m);
  print_warnings(ds.warnings);
  if (ds.examples.empty()) throw InvalidInput("no labeled patents with embeddings");
  return ds;
}

ModelParams load_trained_model(const Context& ctx) {
  require_input(ctx.config.model, "model checkpoint");
  return load_model(ctx.config.model);
}

StopwordSet stopwords_for(const Context& ctx) {
  if (ctx.config.stopwords.empty()) return default_stopwords();
  require_input(ctx.config.stopwords, "stopword list");
  return load_stopwords(ctx.config.stopwords);
}

std::vector<Example> subset(std::span<const Example> data, std::span<const std::size_t> idx) {
  std::vector<Example> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data[i]);
  return out;
}

std::vector<ValueClass> labels_of(std::span<const Example> data) {
  std::vector<ValueClass> out;
  for (const auto& e : data) out.push_back(e.label);
  return out;
}

// Patents of the corpus paired with their claim matrices under the config's claim filter.
struct ScoredPatent {
  const PatentRecord* record;
  std::vector<RawClaim> claims;
  ClaimMatrix matrix;
};

std::vector<ScoredPatent> join_corpus(const std::vector<PatentRecord>& corpus, const EmbeddingFile& file,
                                      const Context& ctx, std::size_t m) {
  const auto index = file.index_by_id();
  std::vector<ScoredPatent> out;
  for (const auto& rec : corpus) {
    auto it = index.find(rec.patent_id);
    if (it == index.end()) continue;
    auto claims = select_claims(rec, ctx.config.claim_filter);
    const auto& er = file.records[it->second];
    if (claims.size() != er.claim_count) {
      throw ShapeError("patent " + rec.patent_id + ": embeddings hold " + std::to_string(er.claim_count) +
                       " claims but the corpus has " + std::to_string(claims.size()) + " under claims=" +
                       std::string(to_string(ctx.config.claim_filter)));
    }
    if (claims.empty()) continue;
    out.push_back({&rec, std::move(claims), build_claim_matrix(file.claim_vectors(it->second), m)});
  }
  return out;
}

std::vector<ClaimScore> all_claim_scores(const std::vector<ScoredPatent>& patents, const ModelParams& params,
                                         Normalization mode) {
  std::vector<ClaimScore> scores;
  for (const auto& p : patents) {
    const ModelOutput out = model_forward(p.matrix, params);
    auto s = claim_scores(out.attention, p.record->patent_id, p.claims);
    normalize_scores(s, mode);
    scores.insert(scores.end(), s.begin(), s.end());
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Subcommands.

struct SynthArgs {
  std::size_t n = 200;
  double pbt_fraction = 0.1;
  std::uint64_t seed = 0;
  fs::path key;
};

int cmd_synth(const Context& ctx, const SynthArgs& a) {
  const fs::path& out = ctx.config.corpus;
  require_output(out, ctx.force);
  if (!a.key.empty()) require_output(a.key, ctx.force);
  const SyntheticCorpus corpus = generate_synthetic_corpus(a.n, a.pbt_fraction, a.seed);
  write_output(out, [&](std::ostream& o) { write_corpus(o, corpus.records); });
  if (!a.key.empty()) write_output(a.key, [&](std::ostream& o) { write_key(o, corpus); });
  std::cerr << "wrote " << corpus.records.size() << " patents to " << out.string() << '\n';
  return kOk;
}

int cmd_ingest(const Context& ctx) {
  const auto& c = ctx.config;
  require_input(c.corpus, "corpus file");
  require_output(c.labels, ctx.force);
  const StopwordSet stopwords = stopwords_for(ctx);

  std::vector<std::string> warnings;
  const auto records = parse_corpus(c.corpus, &warnings);
  std::size_t claims = 0, empty = 0;
  for (const auto& rec : records) {
    for (const auto& claim : select_claims(rec, c.claim_filter)) {
      ++claims;
      if (preprocess_claim(claim, stopwords, c.max_tokens).tokens.empty()) {
        ++empty;
        warnings.push_back(rec.patent_id + ": claim " + std::to_string(claim.index) + " has no tokens left");
      }
    }
  }
  const LabelingResult labeled = assign_labels(records, c.label_policies);
  write_output(c.labels, [&](std::ostream& o) { write_labels(o, labeled.patents); });
  print_warnings(warnings);

  std::array<std::size_t, 3> pbt{};
  for (const auto& p : labeled.patents) {
    for (Horizon h : kHorizons) pbt[horizon_slot(h)] += p.label(h) == ValueClass::kPBT;
  }
  std::cout << "patents\t" << records.size() << "\nclaims\t" << claims << " (" << empty << " without tokens)\n";
  for (Horizon h : kHorizons) {
    std::cout << "threshold_" << to_string(h) << '\t' << labeled.thresholds[horizon_slot(h)] << "\tPBT "
              << pbt[horizon_slot(h)] << '\n';
  }
  return kOk;
}

int cmd_embed(const Context& ctx, const fs::path& attach) {
  const auto& c = ctx.config;
  require_input(c.corpus, "corpus file");
  require_output(c.embeddings, ctx.force);
  const auto records = parse_corpus(c.corpus);

  EmbeddingFile file;
  if (!attach.empty()) {
    // An externally produced CEMB file must line up with the corpus claim by claim.
    require_input(attach, "CEMB file");
    file = read_embeddings(attach);
    require_embedding_dim(file, c.model_config.d_e);
    const auto index = file.index_by_id();
    for (const auto& rec : records) {
      auto it = index.find(rec.patent_id);
      if (it == index.end()) throw InvalidInput("CEMB file has no record for patent " + rec.patent_id);
      const auto expected = select_claims(rec, c.claim_filter).size();
      if (file.records[it->second].claim_count != expected) {
        throw ShapeError("patent " + rec.patent_id + ": CEMB record has " +
                         std::to_string(file.records[it->second].claim_count) + " claims, corpus has " +
                         std::to_string(expected) + " under claims=" + std::string(to_string(c.claim_filter)));
      }
    }
  } else {
    const HashedEmbedder embedder(c.model_config.d_e, c.embed_seed);
    file = embed_corpus(records, embedder, c.claim_filter, stopwords_for(ctx), c.max_tokens);
  }
  write_embeddings(c.embeddings.string() + ".tmp", file);
  fs::rename(c.embeddings.string() + ".tmp", c.embeddings);
  std::cerr << "wrote " << file.records.size() << " records (d_e=" << file.d_e << ") to " << c.embeddings.string()
            << '\n';
  return kOk;
}

int cmd_train(const Context& ctx) {
  const auto& c = ctx.config;
  const fs::path report = report_path(ctx, "train_report.txt");
  const fs::path split_file = report_path(ctx, "split.tsv");
  require_output(c.model, ctx.force);
  require_output(report, ctx.force);
  require_output(split_file, ctx.force);
  const Dataset ds = load_dataset(ctx, c.model_config.d_e, c.model_config.m);

  const auto labels = labels_of(ds.examples);
  const Split outer = stratified_split(labels, c.train_fraction, c.seed);
  const auto pool = subset(ds.examples, outer.train);
  const Split inner = stratified_split(labels_of(pool), 1.0 - c.train_config.validation_fraction,
                                       Rng::derive(c.seed, 1));
  const auto train = subset(pool, inner.train);
  const auto validation = subset(pool, inner.test);
  const auto test = subset(ds.examples, outer.test);

  const TrainResult result = train_model(train, validation, c.model_config, c.train_config, c.init_seed);
  print_warnings(result.report.warnings);
  save_model(c.model, result.params);
  write_output(report, [&](std::ostream& o) { write_train_report(o, result.report); });
  write_output(split_file, [&](std::ostream& o) {
    o << "patent_id\trole\n";
    for (const auto& e : train) o << e.patent_id << "\ttrain\n";
    for (const auto& e : validation) o << e.patent_id << "\tvalidation\n";
    for (const auto& e : test) o << e.patent_id << "\ttest\n";
  });

  const Metrics test_metrics = evaluate(test, result.params);
  std::printf("epochs %zu, best epoch %zu, best val loss %.6f (%s)\n", result.report.epochs.size(),
              result.report.best_epoch, result.report.best_val_loss,
              std::string(to_string(result.report.stop_reason)).c_str());
  std::printf("train accuracy %.3f, validation accuracy %.3f, test accuracy %.3f (n=%zu)\n",
              result.report.train_metrics.accuracy, result.report.val_metrics.accuracy, test_metrics.accuracy,
              test.size());
  return kOk;
}

int cmd_cv(const Context& ctx) {
  const auto& c = ctx.config;
  const fs::path summary = report_path(ctx, "cv_summary.tsv");
  require_output(summary, ctx.force);
  const Dataset ds = load_dataset(ctx, c.model_config.d_e, c.model_config.m);
  TrainConfig tc = c.train_config;
  tc.seed = c.seed;
  const CvResult result = cross_validate(ds.examples, c.folds, c.model_config, tc, c.init_seed);
  write_output(summary, [&](std::ostream& o) { write_cv_summary(o, result); });
  write_cv_summary(std::cout, result);
  return kOk;
}

// Examples restricted to the test rows of a previous `train` run when asked.
std::vector<Example> evaluation_set(const Context& ctx, const Dataset& ds, const std::string& subset_name) {
  if (subset_name == "all") return ds.examples;
  if (subset_name != "test") throw InvalidInput("unknown subset '" + subset_name + "' (expected all|test)");
  const fs::path split_file = report_path(ctx, "split.tsv");
  require_input(split_file, "split file from `train`");
  std::ifstream in(split_file);
  std::set<std::string> ids;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos && line.substr(tab + 1) == "test") ids.insert(line.substr(0, tab));
  }
  std::vector<Example> out;
  for (const auto& e : ds.examples) {
    if (ids.count(e.patent_id)) out.push_back(e);
  }
  if (out.empty()) throw InvalidInput("no test patents found in " + split_file.string());
  return out;
}

int cmd_evaluate(const Context& ctx, const std::string& subset_name) {
  const fs::path out = report_path(ctx, "metrics.txt");
  require_output(out, ctx.force);
  const ModelParams params = load_trained_model(ctx);
  const Dataset ds = load_dataset(ctx, params.config.d_e, params.config.m);
  const auto data = evaluation_set(ctx, ds, subset_name);
  const Metrics m = evaluate(data, params);
  write_output(out, [&](std::ostream& o) { write_metrics_table(o, m); });
  write_metrics_table(std::cout, m);
  return kOk;
}

int cmd_predict(const Context& ctx) {
  const auto& c = ctx.config;
  const fs::path out = report_path(ctx, "predictions.tsv");
  require_output(out, ctx.force);
  const ModelParams params = load_trained_model(ctx);
  const EmbeddingFile file = load_embeddings(ctx, params.config.d_e);
  write_output(out, [&](std::ostream& o) {
    o << "patent_id\tclaims_used\tcategory_" << to_string(c.horizon) << "\tp_pbt\n";
    for (std::size_t i = 0; i < file.records.size(); ++i) {
      const auto& rec = file.records[i];
      if (rec.claim_count == 0) {
        std::cerr << "warning: patent " << rec.patent_id << " has no claims; skipped\n";
        continue;
      }
      const auto pred =
          predict_class(model_forward(build_claim_matrix(file.claim_vectors(i), params.config.m), params).logits);
      char p[32];
      std::snprintf(p, sizeof p, "%.6f", pred.p_pbt);
      o << rec.patent_id << '\t' << rec.claim_count << '\t' << to_string(pred.label) << '\t' << p << '\n';
    }
  });
  std::cerr << "wrote " << out.string() << '\n';
  return kOk;
}

int cmd_explain(const Context& ctx, const std::vector<std::string>& ids) {
  const auto& c = ctx.config;
  if (ids.empty()) throw InvalidInput("explain needs at least one --patent");
  for (const auto& id : ids) require_output(report_path(ctx, "explain_" + id + ".txt"), ctx.force);
  require_input(c.corpus, "corpus file");
  const ModelParams params = load_trained_model(ctx);
  const EmbeddingFile file = load_embeddings(ctx, params.config.d_e);
  const auto corpus = parse_corpus(c.corpus);
  const auto patents = join_corpus(corpus, file, ctx, params.config.m);

  for (const auto& id : ids) {
    auto it = std::find_if(patents.begin(), patents.end(),
                           [&](const ScoredPatent& p) { return p.record->patent_id == id; });
    if (it == patents.end()) throw InvalidInput("patent " + id + " not found in both corpus and embeddings");
    const ExplanationReport report = explain(id, it->claims, it->matrix, params, c.normalization);
    write_output(report_path(ctx, "explain_" + id + ".txt"), [&](std::ostream& o) { write_explanation(o, report); });
    write_explanation(std::cout, report);
  }
  return kOk;
}

int cmd_ttest(const Context& ctx) {
  const auto& c = ctx.config;
  const fs::path out = report_path(ctx, "ttest.txt");
  require_output(out, ctx.force);
  require_input(c.corpus, "corpus file");
  const ModelParams params = load_trained_model(ctx);
  const EmbeddingFile file = load_embeddings(ctx, params.config.d_e);
  const auto corpus = parse_corpus(c.corpus);
  const auto scores = all_claim_scores(join_corpus(corpus, file, ctx, params.config.m), params, c.normalization);
  const std::vector<TTestColumn> columns{{std::string(to_string(c.horizon)), claim_type_ttest(scores)}};
  write_output(out, [&](std::ostream& o) { write_ttest_table(o, columns); });
  write_ttest_table(std::cout, columns);
  return kOk;
}

std::vector<EpochRecord> read_loss_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<EpochRecord> out;
  std::string line;
  bool in_table = false;
  while (std::getline(in, line)) {
    if (line.rfind("epoch\t", 0) == 0) {
      in_table = true;
      continue;
    }
    if (!in_table || line.empty()) continue;
    std::istringstream ss(line);
    EpochRecord r;
    if (!(ss >> r.epoch >> r.train_loss >> r.val_loss)) throw InvalidInput("malformed loss row in " + path.string());
    out.push_back(r);
  }
  return out;
}

int cmd_report(const Context& ctx) {
  const auto& c = ctx.config;
  const fs::path metrics_out = report_path(ctx, "report_metrics.txt");
  const fs::path scores_out = report_path(ctx, "scores.svg");
  const fs::path loss_in = report_path(ctx, "train_report.txt");
  const fs::path loss_out = report_path(ctx, "loss.svg");
  require_output(metrics_out, ctx.force);
  require_output(scores_out, ctx.force);
  const bool have_loss = fs::exists(loss_in);
  if (have_loss) require_output(loss_out, ctx.force);
  require_input(c.corpus, "corpus file");

  const ModelParams params = load_trained_model(ctx);
  const Dataset ds = load_dataset(ctx, params.config.d_e, params.config.m);
  const Metrics m = evaluate(ds.examples, params);
  write_output(metrics_out, [&](std::ostream& o) { write_metrics_table(o, m); });
  write_metrics_table(std::cout, m);

  const EmbeddingFile file = load_embeddings(ctx, params.config.d_e);
  const auto corpus = parse_corpus(c.corpus);
  const auto scores = all_claim_scores(join_corpus(corpus, file, ctx, params.config.m), params, c.normalization);
  std::vector<HistogramSeries> series{{"independent claims", {}, "#1f77b4"}, {"dependent claims", {}, "#ff7f0e"}};
  double hi = 1.0;
  for (const auto& s : scores) {
    series[s.claim_type == ClaimType::kIndependent ? 0 : 1].values.push_back(s.normalized);
    hi = std::max(hi, s.normalized);
  }
  if (series[1].values.empty()) series.pop_back();
  write_output(scores_out, [&](std::ostream& o) {
    write_histogram_svg(o, "Claim attention scores by claim type", series, 0.0, hi, 20);
  });

  if (have_loss) {
    const auto epochs = read_loss_table(loss_in);
    std::vector<LineSeries> lines{{"train loss", {}, "#1f77b4"}, {"validation loss", {}, "#d62728"}};
    for (const auto& e : epochs) {
      lines[0].points.emplace_back(static_cast<double>(e.epoch), e.train_loss);
      lines[1].points.emplace_back(static_cast<double>(e.epoch), e.val_loss);
    }
    write_output(loss_out, [&](std::ostream& o) { write_line_chart_svg(o, "Training curve", "epoch", lines); });
  }
  std::cerr << "wrote reports to " << c.reports.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// Flags that mirror config keys. Values given on the command line are applied
// after the config file, so they win.

struct KeyFlags {
  std::vector<std::pair<CLI::Option*, std::string>> bound;
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    bound.emplace_back(app->add_option(flag, values[flag], help), key);
  }

  void apply(PipelineConfig& config) const {
    for (const auto& [opt, key] : bound) {
      if (opt->count() > 0) {
        for (const auto& v : opt->results()) apply_config_entry(config, key, v);
      }
    }
  }
};

void add_path_flags(KeyFlags& f, CLI::App* app, std::initializer_list<const char*> keys) {
  for (const char* k : keys) f.add(app, std::string("--") + k, k, std::string(k) + " path");
}

void add_model_flags(KeyFlags& f, CLI::App* app) {
  f.add(app, "--d-e", "d_e", "embedding width");
  f.add(app, "--m", "m", "claims per patent (padding size)");
  f.add(app, "--n-encoders", "n_encoders", "number of claim encoders");
  f.add(app, "--ffn-mult", "ffn_mult", "feed-forward expansion factor");
  f.add(app, "--dropout", "dropout", "dropout rate");
}

void add_train_flags(KeyFlags& f, CLI::App* app) {
  f.add(app, "--lr", "lr", "Adam learning rate");
  f.add(app, "--batch-size", "batch_size", "mini-batch size");
  f.add(app, "--max-epochs", "max_epochs", "epoch limit");
  f.add(app, "--patience", "patience", "early-stopping patience");
  f.add(app, "--val-fraction", "val_fraction", "validation share of the training pool");
  f.add(app, "--seed", "seed", "split and shuffle seed");
  f.add(app, "--init-seed", "init_seed", "parameter initialization seed");
}

int run(int argc, char** argv) {
  CLI::App app{"patenthan: claim-level screening of potential breakthrough patents"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  bool force = false;
  if (const char* env = std::getenv("PATENTHAN_CONFIG")) config_path = env;
  app.add_option("--config", config_path, "config file (default: $PATENTHAN_CONFIG)");
  app.add_flag("--force", force, "overwrite existing outputs");

  KeyFlags flags;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with a planted class signal");
  SynthArgs synth_args;
  add_path_flags(flags, synth, {"corpus"});
  synth->add_option("--n", synth_args.n, "number of patents");
  synth->add_option("--pbt-fraction", synth_args.pbt_fraction, "share of PBT patents");
  synth->add_option("--synth-seed", synth_args.seed, "generator seed");
  synth->add_option("--key", synth_args.key, "ground-truth key output (TSV)");

  auto* ingest = app.add_subcommand("ingest", "parse, preprocess and label a corpus");
  add_path_flags(flags, ingest, {"corpus", "labels", "stopwords"});
  flags.add(ingest, "--thresholds", "thresholds", "fixed thresholds for 3/5/10 years, e.g. 3,7,18");
  flags.add(ingest, "--quantile", "quantile", "label the top (1-q) share of each horizon instead");
  flags.add(ingest, "--claims", "claims", "claim filter: independent|all");
  flags.add(ingest, "--max-tokens", "max_tokens", "token limit per claim");

  auto* embed = app.add_subcommand("embed", "embed claims with the hashed provider or attach a CEMB file");
  fs::path attach;
  add_path_flags(flags, embed, {"corpus", "embeddings", "stopwords"});
  embed->add_option("--attach", attach, "CEMB file produced elsewhere");
  flags.add(embed, "--d-e", "d_e", "embedding width");
  flags.add(embed, "--embed-seed", "embed_seed", "hashed embedder seed");
  flags.add(embed, "--claims", "claims", "claim filter: independent|all");
  flags.add(embed, "--max-tokens", "max_tokens", "token limit per claim");

  auto* train = app.add_subcommand("train", "train a model with early stopping");
  add_path_flags(flags, train, {"embeddings", "labels", "model", "reports"});
  flags.add(train, "--horizon", "horizon", "short|mid|long");
  flags.add(train, "--train-fraction", "train_fraction", "share kept for training (rest is test)");
  add_model_flags(flags, train);
  add_train_flags(flags, train);

  auto* cv = app.add_subcommand("cv", "stratified k-fold cross-validation");
  add_path_flags(flags, cv, {"embeddings", "labels", "reports"});
  flags.add(cv, "--horizon", "horizon", "short|mid|long");
  flags.add(cv, "--k,--folds", "folds", "number of folds");
  add_model_flags(flags, cv);
  add_train_flags(flags, cv);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "metrics table for a trained model");
  std::string subset_name = "all";
  add_path_flags(flags, evaluate_cmd, {"embeddings", "labels", "model", "reports"});
  flags.add(evaluate_cmd, "--horizon", "horizon", "short|mid|long");
  evaluate_cmd->add_option("--subset", subset_name, "all|test (test rows of the last train run)");

  auto* predict = app.add_subcommand("predict", "predict value classes");
  add_path_flags(flags, predict, {"embeddings", "model", "reports"});
  flags.add(predict, "--horizon", "horizon", "horizon name used in the column header");

  auto* explain_cmd = app.add_subcommand("explain", "rank the claims of a patent by attention");
  std::vector<std::string> explain_ids;
  add_path_flags(flags, explain_cmd, {"corpus", "embeddings", "model", "reports"});
  explain_cmd->add_option("--patent", explain_ids, "patent id (repeatable)")->required();
  flags.add(explain_cmd, "--claims", "claims", "claim filter used for the embeddings");
  flags.add(explain_cmd, "--normalization", "normalization", "max|mean");

  auto* ttest = app.add_subcommand("ttest", "Welch t-test of scores, independent vs dependent claims");
  add_path_flags(flags, ttest, {"corpus", "embeddings", "model", "reports"});
  flags.add(ttest, "--claims", "claims", "claim filter used for the embeddings (normally all)");
  flags.add(ttest, "--normalization", "normalization", "max|mean");
  flags.add(ttest, "--horizon", "horizon", "horizon name used in the column header");

  auto* report = app.add_subcommand("report", "metrics table and SVG plots");
  add_path_flags(flags, report, {"corpus", "embeddings", "labels", "model", "reports"});
  flags.add(report, "--horizon", "horizon", "short|mid|long");
  flags.add(report, "--claims", "claims", "claim filter used for the embeddings");
  flags.add(report, "--normalization", "normalization", "max|mean");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  Context ctx;
  ctx.force = force;
  if (!config_path.empty()) {
    if (!fs::exists(config_path)) throw IoError("config file not found: " + config_path);
    ctx.config = load_pipeline_config(config_path);
  }
  flags.apply(ctx.config);
  ctx.config.validate();

  if (synth->parsed()) return cmd_synth(ctx, synth_args);
  if (ingest->parsed()) return cmd_ingest(ctx);
  if (embed->parsed()) return cmd_embed(ctx, attach);
  if (train->parsed()) return cmd_train(ctx);
  if (cv->parsed()) return cmd_cv(ctx);
  if (evaluate_cmd->parsed()) return cmd_evaluate(ctx, subset_name);
  if (predict->parsed()) return cmd_predict(ctx);
  if (explain_cmd->parsed()) return cmd_explain(ctx, explain_ids);
  if (ttest->parsed()) return cmd_ttest(ctx);
  if (report->parsed()) return cmd_report(ctx);
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const OutputExists& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOutputExists;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::kIo: return kIo;
      case ErrorKind::kInvalidInput: return kInvalid;
      case ErrorKind::kShapeMismatch: return kShape;
      case ErrorKind::kNumeric: return kNumeric;
    }
    return kInternal;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
