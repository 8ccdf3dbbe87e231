#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "patenthan/checkpoint.hpp"
#include "patenthan/error.hpp"
#include "patenthan/gradcheck.hpp"
#include "patenthan/model.hpp"
#include "patenthan/train.hpp"
#include "support.hpp"

using namespace patenthan;
using namespace testing;

TEST_CASE("graph forward pass agrees with the loop oracle") {
  Rng rng(1);
  SUBCASE("tiny model") {
    ModelParams p = init_params(small_config(2, 2, 1), 3);
    perturb_norms(p, rng);
    for (std::size_t active = 1; active <= 2; ++active) {
      const ClaimMatrix c = random_claims(2, 2, active, rng);
      const auto got = model_forward(c, p);
      const auto want = ref::forward(p, c);
      CHECK(got.logits[0] == doctest::Approx(want.logits[0]).epsilon(1e-12));
      CHECK(got.logits[1] == doctest::Approx(want.logits[1]).epsilon(1e-12));
    }
  }
  SUBCASE("stacked encoders with padding") {
    ModelParams p = init_params(small_config(6, 5, 3), 4);
    perturb_norms(p, rng);
    for (int trial = 0; trial < 10; ++trial) {
      const ClaimMatrix c = random_claims(5, 6, 1 + rng.uniform_index(5), rng);
      const auto got = model_forward(c, p);
      const auto want = ref::forward(p, c);
      CHECK(got.logits[0] == doctest::Approx(want.logits[0]).epsilon(1e-12));
      CHECK(got.logits[1] == doctest::Approx(want.logits[1]).epsilon(1e-12));
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(got.attention.last_matrix(i, j) == doctest::Approx(want.attention[i][j]));
    }
  }
}

TEST_CASE("initialization follows the Glorot bound") {
  const ModelParams p = init_params(small_config(16, 4, 2), 7);
  const double qk_limit = std::sqrt(6.0 / 32.0), ffn_limit = std::sqrt(6.0 / (16.0 + 64.0));
  for (double v : p.encoders[0].query.value.values()) CHECK(std::abs(v) <= qk_limit);
  for (double v : p.encoders[1].expand.value.values()) CHECK(std::abs(v) <= ffn_limit);
  for (double v : p.encoders[0].norm1_gain.value.values()) CHECK(v == 1.0);
  for (double v : p.encoders[0].norm2_bias.value.values()) CHECK(v == 0.0);
  CHECK(p.classifier.value.rows() == 16);
  CHECK(p.classifier.value.cols() == 2);
  CHECK(init_params(small_config(16, 4, 2), 7).pooling.value == p.pooling.value);
  CHECK_FALSE(init_params(small_config(16, 4, 2), 8).pooling.value == p.pooling.value);
}

TEST_CASE("attention rows are distributions over active claims") {
  Rng rng(2);
  const ModelParams p = init_params(small_config(8, 6, 2), 1);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 1 + rng.uniform_index(6);
    const auto out = model_forward(random_claims(6, 8, k, rng), p);
    const Matrix& a = out.attention.last_matrix;
    double total = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < 6; ++j) {
        row += a(i, j);
        if (j >= k || i >= k) CHECK(a(i, j) == 0.0);
      }
      if (i < k) CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (double s : out.attention.claim_scores) total += s;
    CHECK(out.attention.claim_scores.size() == k);
    CHECK(total == doctest::Approx(static_cast<double>(k)).epsilon(1e-12));
  }
}

TEST_CASE("extra padding leaves logits unchanged") {
  Rng rng(3);
  ModelParams small = init_params(small_config(8, 4, 2), 5);
  perturb_norms(small, rng);
  ModelParams wide = small;
  wide.config.m = 9;
  const ClaimMatrix c = random_claims(4, 8, 3, rng);
  ClaimMatrix padded{Matrix(9, 8), 3};
  for (std::size_t i = 0; i < 3; ++i) std::copy(c.rows.row(i).begin(), c.rows.row(i).end(), padded.rows.row(i).begin());
  const auto a = model_forward(c, small), b = model_forward(padded, wide);
  CHECK(std::abs(a.logits[0] - b.logits[0]) < 1e-12);
  CHECK(std::abs(a.logits[1] - b.logits[1]) < 1e-12);
}

TEST_CASE("reordering claims permutes scores and keeps logits") {
  Rng rng(4);
  const ModelParams p = init_params(small_config(8, 5, 2), 9);
  const ClaimMatrix c = random_claims(5, 8, 4, rng);
  std::vector<std::size_t> perm{2, 0, 3, 1};
  ClaimMatrix shuffled{Matrix(5, 8), 4};
  for (std::size_t i = 0; i < 4; ++i) {
    std::copy(c.rows.row(perm[i]).begin(), c.rows.row(perm[i]).end(), shuffled.rows.row(i).begin());
  }
  const auto a = model_forward(c, p), b = model_forward(shuffled, p);
  CHECK(a.logits[0] == doctest::Approx(b.logits[0]).epsilon(1e-12));
  CHECK(a.logits[1] == doctest::Approx(b.logits[1]).epsilon(1e-12));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(b.attention.claim_scores[i] == doctest::Approx(a.attention.claim_scores[perm[i]]).epsilon(1e-12));
  }
}

TEST_CASE("full model gradient matches finite differences") {
  Rng rng(5);
  const ModelConfig cfg = small_config(4, 3, 2);
  ModelParams p = init_params(cfg, 2);
  perturb_norms(p, rng);
  const ClaimMatrix a = random_claims(3, 4, 3, rng), b = random_claims(3, 4, 2, rng);
  auto closure = [&](Graph& g) {
    ModelVars vars = bind_parameters(g, p);
    const Var rows[] = {forward(g, vars, cfg, a, false, nullptr).logits, forward(g, vars, cfg, b, false, nullptr).logits};
    const int labels[] = {0, 1};
    return ops::cross_entropy(ops::stack_rows(rows), labels);
  };
  auto params = p.all();
  const auto report = grad_check(closure, params);
  CHECK(report.blocks.size() == 2 * 10 + 2);
  for (const auto& b : report.blocks) {
    CAPTURE(b.name);
    CHECK(b.max_rel_error < 1e-4);
  }
}

TEST_CASE("forward rejects mismatched shapes and empty patents") {
  const ModelParams p = init_params(small_config(4, 3, 1), 0);
  CHECK_THROWS_AS(model_forward(ClaimMatrix{Matrix(3, 5), 1}, p), ShapeError);
  CHECK_THROWS_AS(model_forward(ClaimMatrix{Matrix(4, 4), 1}, p), ShapeError);
  CHECK_THROWS_WITH_AS(model_forward(ClaimMatrix{Matrix(3, 4), 0}, p), doctest::Contains("no embeddable claims"),
                       InvalidInput);
}

TEST_CASE("prediction breaks ties toward MT") {
  CHECK(predict_class({1.0, 1.0}).label == ValueClass::kMT);
  CHECK(predict_class({1.0, 1.0}).p_pbt == 0.5);
  CHECK(predict_class({1.0 + 1e-12, 1.0}).label == ValueClass::kPBT);
  CHECK(predict_class({0.0, std::log(3.0)}).p_pbt == doctest::Approx(0.25));
}

TEST_CASE("checkpoints round-trip bit for bit") {
  ModelParams p = init_params(small_config(6, 4, 2), 11);
  for (Parameter* q : p.all()) round_to_float32(q->value);
  const auto path = temp_path("model.chan");
  save_model(path, p);
  const ModelParams back = load_model(path);
  CHECK(back.config.d_e == 6);
  CHECK(back.config.m == 4);
  CHECK(back.config.n_encoders == 2);
  CHECK(back.config.dropout == p.config.dropout);
  const auto a = p.all();
  const auto b = back.all();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i]->name == b[i]->name);
    CHECK(a[i]->value == b[i]->value);
  }

  // Saving the loaded model again gives an identical file.
  const auto again = temp_path("model2.chan");
  save_model(again, back);
  auto slurp = [](const std::filesystem::path& f) {
    std::ifstream in(f, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(path) == slurp(again));
}

TEST_CASE("corrupt checkpoints are rejected") {
  const ModelParams p = init_params(small_config(4, 3, 1), 1);
  std::stringstream buf;
  const auto ptrs = p.all();
  write_checkpoint(buf, p.config.to_checkpoint(), ptrs);
  const std::string bytes = buf.str();

  std::istringstream bad_magic("XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(read_checkpoint(bad_magic), InvalidInput);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 7));
  CHECK_THROWS_WITH(read_checkpoint(truncated), doctest::Contains("offset"));
  std::istringstream trailing(bytes + "x");
  CHECK_THROWS_AS(read_checkpoint(trailing), InvalidInput);

  // A block with the wrong shape cannot be loaded into the model.
  Checkpoint ck = [&] {
    std::istringstream in(bytes);
    return read_checkpoint(in);
  }();
  ck.params[0].value = Matrix(2, 2);
  CHECK_THROWS_AS(model_from_checkpoint(ck), ShapeError);
  CHECK_THROWS_AS(load_model(temp_path("missing.chan")), IoError);
}

TEST_CASE("early stopping waits for the patience window") {
  EarlyStopping stop(3);
  const double losses[] = {1.0, 0.8, 0.9, 0.85, 0.79, 0.8, 0.81, 0.82};
  std::vector<bool> stops;
  for (std::size_t e = 0; e < 8; ++e) stops.push_back(stop.observe(e + 1, losses[e]));
  CHECK(stops == std::vector<bool>{false, false, false, false, false, false, false, true});
  CHECK(stop.best_epoch() == 5);
  CHECK(stop.best_loss() == 0.79);
  CHECK_THROWS_AS(EarlyStopping(0), InvalidInput);
}

namespace {

std::vector<Example> toy_examples(std::size_t n, std::uint64_t seed) {
  // Class is the sign of the first coordinate of the first claim.
  Rng rng(seed);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    ClaimMatrix c = random_claims(3, 4, 1 + rng.uniform_index(3), rng);
    const bool pbt = i % 3 == 0;
    c.rows(0, 0) = pbt ? 2.0 : -2.0;
    out.push_back({"P" + std::to_string(i), c, pbt ? ValueClass::kPBT : ValueClass::kMT});
  }
  return out;
}

}  // namespace

TEST_CASE("training learns a separable toy problem deterministically") {
  const auto train = toy_examples(48, 1), val = toy_examples(12, 2);
  const ModelConfig mc = small_config(4, 3, 1, 0.1);
  TrainConfig tc;
  tc.learning_rate = 1e-2;
  tc.batch_size = 8;
  tc.max_epochs = 40;
  tc.patience = 40;
  tc.seed = 3;
  const TrainResult a = train_model(train, val, mc, tc, 4);
  const TrainResult b = train_model(train, val, mc, tc, 4);
  CHECK(a.report.train_metrics.accuracy >= 0.95);
  CHECK(a.report.val_metrics.accuracy >= 0.9);
  REQUIRE(a.report.epochs.size() == b.report.epochs.size());
  for (std::size_t i = 0; i < a.report.epochs.size(); ++i) CHECK(a.report.epochs[i].val_loss == b.report.epochs[i].val_loss);
  CHECK(a.params.classifier.value == b.params.classifier.value);
  CHECK(a.report.best_val_loss == doctest::Approx(evaluate_loss(val, a.params)).epsilon(1e-12));

  tc.patience = 2;
  tc.learning_rate = 1.0;  // overshoots quickly, so validation loss stops improving
  const TrainResult c = train_model(train, val, mc, tc, 4);
  if (c.report.stop_reason == StopReason::kPatience) {
    CHECK(c.report.epochs.size() == c.report.best_epoch + 2);
  }
}

TEST_CASE("training rejects bad configurations") {
  const auto data = toy_examples(10, 1);
  TrainConfig tc;
  tc.learning_rate = 0.0;
  CHECK_THROWS_AS(train_model(data, data, small_config(4, 3, 1), tc, 0), InvalidInput);
  tc = TrainConfig{};
  CHECK_THROWS_AS(train_model({}, data, small_config(4, 3, 1), tc, 0), InvalidInput);
  CHECK_THROWS_AS(train_model(data, data, small_config(5, 3, 1), tc, 0), ShapeError);
}

TEST_CASE("cross-validation reports one row per fold") {
  const auto data = toy_examples(30, 5);
  TrainConfig tc;
  tc.learning_rate = 1e-2;
  tc.batch_size = 8;
  tc.max_epochs = 10;
  tc.seed = 1;
  const CvResult cv = cross_validate(data, 3, small_config(4, 3, 1), tc, 2);
  REQUIRE(cv.folds.size() == 3);
  std::size_t tested = 0;
  for (const auto& f : cv.folds) tested += f.test_ids.size();
  CHECK(tested == 30);
  double mean = 0;
  for (const auto& f : cv.folds) mean += f.metrics.accuracy / 3.0;
  CHECK(cv.summary.accuracy.mean == doctest::Approx(mean));
  std::ostringstream out;
  write_cv_summary(out, cv);
  CHECK(out.str().find("mean\t") != std::string::npos);
}
