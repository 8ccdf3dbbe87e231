#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "patenthan/corpus.hpp"
#include "patenthan/error.hpp"
#include "patenthan/pipeline.hpp"
#include "patenthan/rng.hpp"

using namespace patenthan;

namespace {

std::vector<PatentRecord> parse(const std::string& text, std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return parse_corpus(in, warnings);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return "";
}

RawClaim claim(const std::string& text, int index = 1) {
  return {index, text, ClaimType::kIndependent, std::nullopt};
}

}  // namespace

TEST_CASE("dates parse, print and shift by whole years") {
  const Date d = Date::parse("2004-02-29");
  CHECK(d.to_string() == "2004-02-29");
  CHECK(d.plus_years(3).to_string() == "2007-02-28");
  CHECK(d.plus_years(4).to_string() == "2008-02-29");
  CHECK(Date::parse("2000-01-04") < Date::parse("2000-01-05"));
  CHECK_THROWS_AS(Date::parse("2004-13-01"), InvalidInput);
  CHECK_THROWS_AS(Date::parse("2003-02-29"), InvalidInput);
  CHECK_THROWS_AS(Date::parse("20040101"), InvalidInput);
}

TEST_CASE("claim type comes from the first back reference") {
  auto r = classify_claim_type("2. The composition of claim 1, wherein", 2);
  CHECK(r.type == ClaimType::kDependent);
  CHECK(r.referenced_claim == 1);

  r = classify_claim_type("7. A method according to Claims 3 or 4", 7);
  CHECK(r.type == ClaimType::kDependent);
  CHECK(r.referenced_claim == 3);

  r = classify_claim_type("1. A tablet comprising a core.", 1);
  CHECK(r.type == ClaimType::kIndependent);
  CHECK_FALSE(r.warning.has_value());

  // A reference to a later claim cannot make a claim dependent.
  r = classify_claim_type("3. The kit of claim 5", 3);
  CHECK(r.type == ClaimType::kIndependent);
  CHECK(r.warning.has_value());

  // "proclaims" is not a reference.
  r = classify_claim_type("2. A device that proclaims 1 result", 2);
  CHECK(r.type == ClaimType::kIndependent);
}

TEST_CASE("corpus parsing reports the offending line") {
  const std::string good =
      R"({"patent_id":"A","grant_date":"2001-05-01","claims":[{"text":"1. A kit."},{"text":"2. The kit of claim 1."}],"citations":[{"citing_id":"X","date":"2002-01-01"}]})";
  const auto recs = parse(good + "\n\n");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].claims[1].index == 2);
  CHECK(recs[0].claims[1].type == ClaimType::kDependent);
  CHECK(recs[0].citations.size() == 1);

  CHECK(error_of(good + "\n{not json") .find("line 2") != std::string::npos);
  CHECK(error_of(R"({"patent_id":"A","grant_date":"2001-05-01","claims":[]})").find("no claims") !=
        std::string::npos);
  CHECK(error_of(good + "\n" + good).find("duplicate") != std::string::npos);
  CHECK(error_of(R"({"patent_id":"A","grant_date":"2001-05-01","claims":[{"text":"x"}],"citations":[{"date":"2000-01-01"}]})")
            .find("predates") != std::string::npos);
  CHECK(error_of(R"({"grant_date":"2001-05-01","claims":[{"text":"x"}]})").find("patent_id") != std::string::npos);
}

TEST_CASE("corpus write and parse round-trip") {
  const auto synthetic = generate_synthetic_corpus(20, 0.2, 3);
  std::stringstream buf;
  write_corpus(buf, synthetic.records);
  const auto back = parse_corpus(buf);
  REQUIRE(back.size() == synthetic.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].patent_id == synthetic.records[i].patent_id);
    CHECK(back[i].grant_date == synthetic.records[i].grant_date);
    REQUIRE(back[i].claims.size() == synthetic.records[i].claims.size());
    for (std::size_t j = 0; j < back[i].claims.size(); ++j) {
      CHECK(back[i].claims[j].text == synthetic.records[i].claims[j].text);
      CHECK(back[i].claims[j].type == synthetic.records[i].claims[j].type);
    }
    CHECK(back[i].citations.size() == synthetic.records[i].citations.size());
  }
}

TEST_CASE("claim filter keeps independent claims by default") {
  const auto recs = parse(
      R"({"patent_id":"A","grant_date":"2001-05-01","claims":[{"text":"1. A kit."},{"text":"2. The kit of claim 1."},{"text":"3. A method."}]})");
  CHECK(select_claims(recs[0], ClaimFilter::kIndependentOnly).size() == 2);
  CHECK(select_claims(recs[0], ClaimFilter::kAll).size() == 3);
  CHECK(parse_claim_filter("independent_only") == ClaimFilter::kIndependentOnly);
  CHECK_THROWS_AS(parse_claim_filter("some"), InvalidInput);
}

TEST_CASE("preprocessing folds, splits and drops stopwords") {
  const auto t = preprocess_claim(claim("12. A Café-style Émulsion of the ÆTHER, comprising 5% NaCl."), default_stopwords());
  const std::vector<std::string> expected{"cafe", "style", "emulsion", "aether", "comprising", "5", "nacl"};
  CHECK(t.tokens == expected);

  CHECK(fold_text("Straße Œuvre naïve") == "strasse oeuvre naive");
  CHECK(preprocess_claim(claim("the of and a"), default_stopwords()).tokens.empty());

  const auto capped = preprocess_claim(claim("alpha beta gamma delta"), default_stopwords(), 2);
  CHECK(capped.tokens == std::vector<std::string>{"alpha", "beta"});
}

TEST_CASE("preprocessing is idempotent") {
  const auto synthetic = generate_synthetic_corpus(30, 0.2, 11);
  for (const auto& rec : synthetic.records) {
    for (const auto& c : rec.claims) {
      const auto once = preprocess_claim(c, default_stopwords());
      std::string joined;
      for (const auto& tok : once.tokens) joined += tok + " ";
      const auto twice = preprocess_claim(claim(joined), default_stopwords());
      CHECK(twice.tokens == once.tokens);
    }
  }
}

TEST_CASE("stopword files skip comments") {
  const auto path = std::filesystem::temp_directory_path() / "patenthan_stopwords.txt";
  {
    std::ofstream out(path);
    out << "# custom list\nwherein\n\nComprising\n";
  }
  const auto words = load_stopwords(path);
  const auto t = preprocess_claim(claim("a kit comprising wherein parts"), words);
  CHECK(t.tokens == std::vector<std::string>{"a", "kit", "parts"});
  std::filesystem::remove(path);
}

TEST_CASE("citation windows end just before the anniversary") {
  PatentRecord rec;
  rec.grant_date = Date::parse("2000-01-04");
  for (const char* d : {"2000-01-04", "2003-01-03", "2003-01-04", "2010-01-03", "2010-01-04"}) {
    rec.citations.push_back({"c", Date::parse(d)});
  }
  CHECK(rec.citations_within(3) == 2);
  CHECK(rec.citations_within(5) == 3);
  CHECK(rec.citations_within(10) == 4);
}

TEST_CASE("fixed thresholds reproduce the Table 3 categories") {
  const auto records = parse_corpus(std::filesystem::path(PATENTHAN_TEST_DATA) / "table3_fixture.jsonl");
  const auto expected = read_labels(std::filesystem::path(PATENTHAN_TEST_DATA) / "table3_expected.tsv");
  const auto result = assign_labels(records, default_label_policies());
  REQUIRE(result.patents.size() == 10);
  CHECK(result.thresholds == std::array<int, 3>{3, 7, 18});
  for (std::size_t i = 0; i < 10; ++i) {
    CAPTURE(expected[i].patent_id);
    CHECK(result.patents[i].patent_id == expected[i].patent_id);
    CHECK(result.patents[i].counts == expected[i].counts);
    CHECK(result.patents[i].classes == expected[i].classes);
  }
  const auto& p = result.patents[2];  // 6010700
  CHECK(p.label(Horizon::kShort) == ValueClass::kPBT);
  CHECK(p.label(Horizon::kMid) == ValueClass::kMT);
  CHECK(p.label(Horizon::kLong) == ValueClass::kMT);
}

TEST_CASE("labels survive a TSV round-trip") {
  const auto synthetic = generate_synthetic_corpus(25, 0.2, 5);
  const auto labeled = assign_labels(synthetic.records, default_label_policies());
  std::stringstream buf;
  write_labels(buf, labeled.patents);
  const auto back = read_labels(buf);
  REQUIRE(back.size() == labeled.patents.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].patent_id == labeled.patents[i].patent_id);
    CHECK(back[i].counts == labeled.patents[i].counts);
    CHECK(back[i].classes == labeled.patents[i].classes);
  }
  std::istringstream bad("patent_id\tcount3\nX\t1\t2\n");
  CHECK_THROWS_AS(read_labels(bad), InvalidInput);
}

TEST_CASE("quantile threshold is the smallest count keeping the top share") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> counts(1 + rng.uniform_index(60));
    for (auto& c : counts) c = rng.uniform_index(25);
    const double q = rng.uniform(0.05, 0.95);
    const int t = quantile_threshold(counts, q);
    auto share = [&](int thr) {
      return static_cast<double>(std::count_if(counts.begin(), counts.end(),
                                               [thr](std::size_t c) { return static_cast<int>(c) >= thr; })) /
             static_cast<double>(counts.size());
    };
    CHECK(share(t) <= 1.0 - q + 1e-9);
    if (t > 0) CHECK(share(t - 1) > 1.0 - q + 1e-9);
  }
  CHECK_THROWS_AS(quantile_threshold(std::vector<std::size_t>{1, 2}, 1.0), InvalidInput);
}

TEST_CASE("synthetic labels agree with the generator key") {
  const auto synthetic = generate_synthetic_corpus(200, 0.1, 42);
  const auto labeled = assign_labels(synthetic.records, default_label_policies());
  std::size_t pbt = 0;
  for (std::size_t i = 0; i < labeled.patents.size(); ++i) {
    for (Horizon h : kHorizons) CHECK(labeled.patents[i].label(h) == synthetic.key[i].second);
    pbt += synthetic.key[i].second == ValueClass::kPBT;
  }
  CHECK(pbt == 20);

  std::stringstream a, b;
  write_corpus(a, synthetic.records);
  write_corpus(b, generate_synthetic_corpus(200, 0.1, 42).records);
  CHECK(a.str() == b.str());
  CHECK_THROWS_AS(generate_synthetic_corpus(5, 0.1, 1), InvalidInput);
  CHECK_THROWS_AS(generate_synthetic_corpus(50, 1.0, 1), InvalidInput);
}

TEST_CASE("stratified split keeps class proportions") {
  std::vector<ValueClass> labels;
  for (int i = 0; i < 37; ++i) labels.push_back(i % 5 == 0 ? ValueClass::kPBT : ValueClass::kMT);
  const auto split = stratified_split(labels, 0.8, 9);
  std::set<std::size_t> seen(split.train.begin(), split.train.end());
  for (auto i : split.test) CHECK(seen.insert(i).second);
  CHECK(seen.size() == labels.size());
  auto count_pbt = [&](const std::vector<std::size_t>& idx) {
    return std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return labels[i] == ValueClass::kPBT; });
  };
  CHECK(count_pbt(split.train) == 6);  // round(8 * 0.8)
  CHECK(split.train.size() - count_pbt(split.train) == 23);  // round(29 * 0.8)

  const auto again = stratified_split(labels, 0.8, 9);
  CHECK(again.train == split.train);
  CHECK(stratified_split(labels, 0.8, 10).train != split.train);

  std::vector<ValueClass> one_class(10, ValueClass::kMT);
  CHECK_THROWS_AS(stratified_split(one_class, 0.8, 1), InvalidInput);
  CHECK(stratified_split_lenient(one_class, 0.8, 1).train.size() == 8);
}

TEST_CASE("stratified k-fold covers every index once with balanced classes") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(5);
    std::vector<ValueClass> labels;
    const std::size_t n_pbt = k + rng.uniform_index(20), n_mt = k + rng.uniform_index(60);
    for (std::size_t i = 0; i < n_pbt; ++i) labels.push_back(ValueClass::kPBT);
    for (std::size_t i = 0; i < n_mt; ++i) labels.push_back(ValueClass::kMT);
    rng.shuffle(std::span(labels));

    const auto folds = stratified_kfold(labels, k, trial);
    REQUIRE(folds.size() == k);
    std::vector<int> hits(labels.size(), 0);
    std::size_t lo_p = SIZE_MAX, hi_p = 0, lo_m = SIZE_MAX, hi_m = 0, lo = SIZE_MAX, hi = 0;
    for (const auto& f : folds) {
      std::size_t p = 0;
      for (auto i : f) {
        ++hits[i];
        p += labels[i] == ValueClass::kPBT;
      }
      lo_p = std::min(lo_p, p), hi_p = std::max(hi_p, p);
      lo_m = std::min(lo_m, f.size() - p), hi_m = std::max(hi_m, f.size() - p);
      lo = std::min(lo, f.size()), hi = std::max(hi, f.size());
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK(hi_p - lo_p <= 1);
    CHECK(hi_m - lo_m <= 1);
    CHECK(hi - lo <= 1);
  }
  std::vector<ValueClass> few{ValueClass::kPBT, ValueClass::kMT, ValueClass::kMT, ValueClass::kMT};
  CHECK_THROWS_AS(stratified_kfold(few, 3, 0), InvalidInput);
}

TEST_CASE("config files parse with comments and reject unknown keys") {
  std::istringstream in(
      "# run\ncorpus = data/c.jsonl\nthresholds = 2, 5, 9\nhorizon = long\nclaims = all\nd_e=32\nlr = 0.001  # fast\n");
  const auto c = parse_pipeline_config(in);
  CHECK(c.corpus == "data/c.jsonl");
  CHECK(std::get<FixedThreshold>(c.label_policies[2].mode).threshold == 9);
  CHECK(c.horizon == Horizon::kLong);
  CHECK(c.claim_filter == ClaimFilter::kAll);
  CHECK(c.model_config.d_e == 32);
  CHECK(c.train_config.learning_rate == doctest::Approx(0.001));

  std::istringstream bad("colour = blue\n");
  CHECK_THROWS_WITH_AS(parse_pipeline_config(bad), doctest::Contains("line 1"), InvalidInput);
  std::istringstream bad_value("d_e = wide\n");
  CHECK_THROWS_AS(parse_pipeline_config(bad_value), InvalidInput);
}
