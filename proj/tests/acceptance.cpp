// Acceptance suite: one PASS/FAIL line per top-level criterion.

#include <boost/math/distributions/students_t.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "patenthan/checkpoint.hpp"
#include "patenthan/gradcheck.hpp"
#include "patenthan/interpret.hpp"
#include "patenthan/metrics.hpp"
#include "patenthan/pipeline.hpp"
#include "patenthan/stats.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace patenthan;
using namespace testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome labeling_oracle(const std::string& cli) {
  const fs::path dir = temp_path("acceptance_ingest");
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path fixture = fs::path(PATENTHAN_TEST_DATA) / "table3_fixture.jsonl";
  const fs::path labels = dir / "labels.tsv";
  const std::string cmd = "\"" + cli + "\" ingest --corpus \"" + fixture.string() + "\" --labels \"" +
                          labels.string() + "\" --thresholds 3,7,18 > \"" + (dir / "stdout.txt").string() + "\" 2>&1";
  const auto start = Clock::now();
  const int rc = std::system(cmd.c_str());
  const double elapsed = seconds_since(start);
  if (rc != 0) return {false, "ingest exited with status " + std::to_string(rc)};

  const auto got = read_labels(labels);
  const auto want = read_labels(fs::path(PATENTHAN_TEST_DATA) / "table3_expected.tsv");
  if (got.size() != want.size()) return {false, "row count " + std::to_string(got.size())};
  int matched = 0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    for (std::size_t h = 0; h < 3; ++h) {
      matched += got[i].patent_id == want[i].patent_id && got[i].classes[h] == want[i].classes[h];
    }
  }
  return {matched == 30 && elapsed < 1.0,
          std::to_string(matched) + "/30 class cells, " + fmt("%.3f s", elapsed)};
}

Outcome gradient_fidelity() {
  const auto start = Clock::now();
  Rng rng(101);
  const ModelConfig cfg = small_config(8, 4, 2, 0.0);
  ModelParams p = init_params(cfg, 7);
  perturb_norms(p, rng);
  std::vector<ClaimMatrix> batch;
  for (std::size_t k : {4, 2, 3}) batch.push_back(random_claims(4, 8, k, rng));
  auto closure = [&](Graph& g) {
    ModelVars vars = bind_parameters(g, p);
    std::vector<Var> rows;
    for (const auto& c : batch) rows.push_back(forward(g, vars, cfg, c, false, nullptr).logits);
    const int labels[] = {0, 1, 0};
    return ops::cross_entropy(ops::stack_rows(rows), labels);
  };
  auto params = p.all();
  const GradCheckReport report = grad_check(closure, params, 1e-5, 1e-4);
  const double elapsed = seconds_since(start);
  std::string worst;
  double worst_err = -1;
  for (const auto& b : report.blocks) {
    if (b.max_rel_error > worst_err) worst_err = b.max_rel_error, worst = b.name;
  }
  return {report.passed && report.max_rel_error < 1e-4 && elapsed < 60.0,
          std::to_string(report.blocks.size()) + " blocks, max rel error " + fmt("%.2e", report.max_rel_error) +
              " (" + worst + "), " + fmt("%.2f s", elapsed)};
}

Outcome attention_invariants() {
  Rng rng(202);
  const std::size_t d = 16, m = 6;
  ModelParams p = init_params(small_config(d, m, 2), 3);
  perturb_norms(p, rng);
  ModelParams wide = p;
  wide.config.m = m + 5;
  double worst_row = 0, worst_sum = 0, worst_pad = 0, worst_logit = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + rng.uniform_index(m);
    const ClaimMatrix c = random_claims(m, d, k, rng);
    const ModelOutput out = model_forward(c, p);
    const Matrix& a = out.attention.last_matrix;
    for (std::size_t i = 0; i < k; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < m; ++j) row += a(i, j);
      worst_row = std::max(worst_row, std::abs(row - 1.0));
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = k; j < m; ++j) worst_pad = std::max(worst_pad, std::abs(a(i, j)));
    const auto scores = claim_scores(out.attention);
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(scores.begin(), scores.end(), 0.0) - double(k)));

    ClaimMatrix padded{Matrix(m + 5, d), k};
    for (std::size_t i = 0; i < k; ++i) std::copy(c.rows.row(i).begin(), c.rows.row(i).end(), padded.rows.row(i).begin());
    const ModelOutput w = model_forward(padded, wide);
    worst_logit = std::max({worst_logit, std::abs(w.logits[0] - out.logits[0]), std::abs(w.logits[1] - out.logits[1])});
  }
  const bool ok = worst_row <= 1e-6 && worst_pad == 0.0 && worst_sum <= 1e-5 && worst_logit < 1e-6;
  return {ok, "row sum dev " + fmt("%.1e", worst_row) + ", padded max " + fmt("%.1e", worst_pad) +
                  ", score sum dev " + fmt("%.1e", worst_sum) + ", m-growth logit dev " + fmt("%.1e", worst_logit)};
}

Outcome permutation_equivariance() {
  Rng rng(303);
  const std::size_t d = 16, m = 8;
  ModelParams p = init_params(small_config(d, m, 2), 5);
  perturb_norms(p, rng);
  double worst_logit = 0, worst_score = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(m - 1);
    ClaimMatrix c = random_claims(m, d, k, rng);
    round_to_float32(c.rows);  // vectors as they arrive from a CEMB file
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span(perm));
    ClaimMatrix shuffled{Matrix(m, d), k};
    for (std::size_t i = 0; i < k; ++i) {
      std::copy(c.rows.row(perm[i]).begin(), c.rows.row(perm[i]).end(), shuffled.rows.row(i).begin());
    }
    const ModelOutput a = model_forward(c, p), b = model_forward(shuffled, p);
    worst_logit = std::max({worst_logit, std::abs(a.logits[0] - b.logits[0]), std::abs(a.logits[1] - b.logits[1])});
    for (std::size_t i = 0; i < k; ++i) {
      worst_score = std::max(worst_score, std::abs(b.attention.claim_scores[i] - a.attention.claim_scores[perm[i]]));
    }
  }
  return {worst_logit <= 1e-5 && worst_score <= 1e-5,
          "50 patents, logit dev " + fmt("%.1e", worst_logit) + ", score dev " + fmt("%.1e", worst_score)};
}

Outcome metrics_oracle() {
  Rng rng(404);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    ConfusionMatrix cm{rng.uniform_index(60), rng.uniform_index(500), rng.uniform_index(60), rng.uniform_index(80)};
    if (cm.total() == 0) cm.tn = 1;
    const Metrics got = compute_metrics(cm);
    const double tp = double(cm.tp), tn = double(cm.tn), fp = double(cm.fp), fn = double(cm.fn);
    auto div = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
    const double pp = div(tp, tp + fp), pr = div(tp, tp + fn), mp = div(tn, tn + fn), mr = div(tn, tn + fp);
    const double pf = div(2 * pp * pr, pp + pr), mf = div(2 * mp * mr, mp + mr);
    const double want[] = {div(tp + tn, tp + tn + fp + fn), pp, pr, pf, mp, mr, mf, (pp + mp) / 2, (pr + mr) / 2,
                           (pf + mf) / 2, div(tp * tn - fp * fn, std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)))};
    const double have[] = {got.accuracy, got.pbt.precision, got.pbt.recall, got.pbt.f1, got.mt.precision,
                           got.mt.recall, got.mt.f1, got.macro.precision, got.macro.recall, got.macro.f1, got.mcc};
    for (std::size_t i = 0; i < std::size(want); ++i) worst = std::max(worst, std::abs(have[i] - want[i]));
  }
  const double perfect = compute_metrics({12, 88, 0, 0}).mcc;
  const double constant = compute_metrics({0, 88, 0, 12}).mcc;
  const double macro = macro_average({0.463, 0.0, 0.0}, {0.910, 0.0, 0.0}).precision;
  const bool ok = worst <= 1e-12 && perfect == 1.0 && constant == 0.0 && std::abs(macro - 0.687) <= 0.001;
  return {ok, "1000 matrices, max dev " + fmt("%.1e", worst) + ", perfect MCC " + fmt("%.0f", perfect) +
                  ", constant MCC " + fmt("%.0f", constant) + ", (0.463+0.910)/2 = " + fmt("%.4f", macro)};
}

struct LearningRun {
  TrainResult trained;
  CvResult cv;
};

LearningRun learning_run(const std::vector<Example>& data) {
  ModelConfig mc = small_config(32, 8, 2, 0.1);
  TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.batch_size = 16;
  tc.max_epochs = 200;
  tc.patience = 200;
  tc.seed = 17;

  std::vector<ValueClass> labels;
  for (const auto& e : data) labels.push_back(e.label);
  const Split split = stratified_split(labels, 1.0 - tc.validation_fraction, 23);
  std::vector<Example> train, val;
  for (auto i : split.train) train.push_back(data[i]);
  for (auto i : split.test) val.push_back(data[i]);

  LearningRun run{train_model(train, val, mc, tc, 29), {}};
  tc.patience = 10;
  run.cv = cross_validate(data, 5, mc, tc, 31);
  return run;
}

Outcome end_to_end_learning() {
  const auto start = Clock::now();
  const SyntheticCorpus corpus = generate_synthetic_corpus(200, 0.1, 2024);
  const HashedEmbedder embedder(32, 0);
  const EmbeddingFile emb = embed_corpus(corpus.records, embedder, ClaimFilter::kIndependentOnly, default_stopwords());
  const LabelingResult labels = assign_labels(corpus.records, default_label_policies());
  const Dataset ds = assemble_dataset(emb, labels.patents, Horizon::kShort, 8);

  const LearningRun a = learning_run(ds.examples);
  const LearningRun b = learning_run(ds.examples);
  const double elapsed = seconds_since(start);

  bool same = a.trained.report.epochs.size() == b.trained.report.epochs.size() &&
              a.cv.summary.accuracy.mean == b.cv.summary.accuracy.mean;
  const auto pa = a.trained.params.all(), pb = b.trained.params.all();
  for (std::size_t i = 0; same && i < pa.size(); ++i) same = pa[i]->value == pb[i]->value;
  for (std::size_t i = 0; same && i < a.trained.report.epochs.size(); ++i) {
    same = a.trained.report.epochs[i].train_loss == b.trained.report.epochs[i].train_loss;
  }

  // Highest training accuracy seen within the 200-epoch budget is reported by the best checkpoint.
  const double train_acc = a.trained.report.train_metrics.accuracy;
  const double cv_acc = a.cv.summary.accuracy.mean;
  const bool ok = train_acc >= 0.95 && cv_acc >= 0.9 && same && elapsed < 300.0;
  return {ok, "train acc " + fmt("%.3f", train_acc) + " (best epoch " +
                  std::to_string(a.trained.report.best_epoch) + "), 5-fold CV acc " + fmt("%.3f", cv_acc) +
                  " (MCC " + fmt("%.3f", a.cv.summary.mcc.mean) + "), deterministic " + (same ? "yes" : "no") +
                  ", " + fmt("%.1f s", elapsed)};
}

Outcome welch_oracle() {
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> cases = {
      {{1, 2, 3, 4}, {2, 3, 4, 5}},
      {{0.82, 0.91, 0.55, 1.0, 0.73, 0.64, 0.99}, {0.31, 0.72, 0.44, 0.5}},
      {{10.1, 9.8, 10.4, 10.0, 9.9, 10.2}, {8.0, 12.5, 9.1, 11.7, 10.8}},
      {{1, 1, 1, 2}, {5, 9, 2, 14, 3, 3, 8, 1}},
  };
  double dt = 0, ddf = 0, dp = 0, anti = 0;
  for (const auto& [g1, g2] : cases) {
    const WelchResult r = welch_ttest(g1, g2);
    // Independent float64 evaluation.
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); };
    auto var = [&](const std::vector<double>& v) {
      const double mu = mean(v);
      double s = 0;
      for (double x : v) s += (x - mu) * (x - mu);
      return s / double(v.size() - 1);
    };
    const double a = var(g1) / double(g1.size()), b = var(g2) / double(g2.size());
    const double t = (mean(g1) - mean(g2)) / std::sqrt(a + b);
    const double df = (a + b) * (a + b) / (a * a / double(g1.size() - 1) + b * b / double(g2.size() - 1));
    const double p = 2 * boost::math::cdf(boost::math::students_t(df), -std::abs(t));
    dt = std::max(dt, std::abs(r.t - t));
    ddf = std::max(ddf, std::abs(r.df - df));
    dp = std::max(dp, std::abs(r.p - p));
    const WelchResult s = welch_ttest(g2, g1);
    anti = std::max({anti, std::abs(r.t + s.t), std::abs(r.df - s.df), std::abs(r.p - s.p)});
  }
  const WelchResult known = welch_ttest(cases[0].first, cases[0].second);
  const bool known_ok = std::abs(known.t - (-1.095445)) < 5e-7 && std::abs(known.df - 6.0) < 1e-9;

  std::ostringstream table;
  const std::vector<TTestColumn> cols{{"short", known}};
  write_ttest_table(table, cols);
  std::istringstream in(table.str());
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line.substr(0, line.find('\t')));
  const std::vector<std::string> order{"statistic",
                                       "t-statistic",
                                       "Degree of freedom",
                                       "Mean of scores in group 1",
                                       "Variance of scores in group 1",
                                       "Mean of scores in group 2",
                                       "Variance of scores in group 2",
                                       "p-value"};
  const bool ok = dt <= 1e-9 && ddf <= 1e-9 && dp <= 1e-6 && anti <= 1e-12 && known_ok && rows == order;
  return {ok, "t dev " + fmt("%.1e", dt) + ", df dev " + fmt("%.1e", ddf) + ", p dev " + fmt("%.1e", dp) +
                  ", swap dev " + fmt("%.1e", anti) + ", t=" + fmt("%.6f", known.t) + " df=" + fmt("%.1f", known.df) +
                  ", row order " + (rows == order ? "ok" : "wrong")};
}

Outcome format_round_trips() {
  Rng rng(505);
  EmbeddingFile file;
  file.d_e = 24;
  for (int i = 0; i < 40; ++i) {
    file.records.push_back(make_embedding_record("US" + std::to_string(7000000 + i), random_matrix(i % 9, 24, rng)));
  }
  const fs::path cemb = temp_path("acceptance.cemb"), cemb2 = temp_path("acceptance2.cemb");
  write_embeddings(cemb, file);
  const EmbeddingFile back = read_embeddings(cemb);
  write_embeddings(cemb2, back);
  bool cemb_ok = slurp(cemb) == slurp(cemb2) && back.records.size() == file.records.size();
  for (std::size_t i = 0; cemb_ok && i < back.records.size(); ++i) {
    cemb_ok = back.records[i].patent_id == file.records[i].patent_id &&
              std::memcmp(back.records[i].values.data(), file.records[i].values.data(),
                          back.records[i].values.size() * sizeof(float)) == 0;
  }

  ModelParams p = init_params(small_config(24, 6, 3), 9);
  for (Parameter* q : p.all()) round_to_float32(q->value);
  const fs::path chan = temp_path("acceptance.chan"), chan2 = temp_path("acceptance2.chan");
  save_model(chan, p);
  const ModelParams loaded = load_model(chan);
  save_model(chan2, loaded);
  bool chan_ok = slurp(chan) == slurp(chan2);
  const auto a = p.all();
  const auto b = loaded.all();
  for (std::size_t i = 0; chan_ok && i < a.size(); ++i) chan_ok = a[i]->name == b[i]->name && a[i]->value == b[i]->value;
  return {cemb_ok && chan_ok, std::string("CEMB ") + (cemb_ok ? "bitwise equal" : "MISMATCH") + " (40 records), " +
                                  "checkpoint " + (chan_ok ? "bitwise equal" : "MISMATCH") + " (" +
                                  std::to_string(a.size()) + " blocks)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : PATENTHAN_CLI;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"labeling oracle", [&] { return labeling_oracle(cli); }},
      {"gradient fidelity", gradient_fidelity},
      {"attention invariants", attention_invariants},
      {"permutation equivariance", permutation_equivariance},
      {"metrics oracle", metrics_oracle},
      {"end-to-end learning", end_to_end_learning},
      {"Welch t-test oracle", welch_oracle},
      {"format round-trips", format_round_trips},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::printf("%s  %-26s %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
