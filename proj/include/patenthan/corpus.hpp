#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include "patenthan/label.hpp"

namespace patenthan {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  // Accepts YYYY-MM-DD.
  static Date parse(std::string_view iso);
  std::string to_string() const;

  // Same month/day N years later; Feb 29 falls back to Feb 28.
  Date plus_years(int years) const;

  auto operator<=>(const Date&) const = default;
};

enum class ClaimType { kIndependent, kDependent };

std::string_view to_string(ClaimType type);

struct RawClaim {
  int index = 1;
  std::string text;
  ClaimType type = ClaimType::kIndependent;
  std::optional<int> referenced_claim;
};

struct Citation {
  std::string citing_id;
  Date date;
};

struct PatentRecord {
  std::string patent_id;
  Date grant_date;
  std::vector<RawClaim> claims;
  std::vector<Citation> citations;

  int grant_year() const { return grant_date.year; }

  // Whole years between grant and each citation.
  std::vector<int> citation_lags() const;

  // Citations dated strictly before grant_date + years.
  std::size_t citations_within(int years) const;
};

struct ClaimTypeResult {
  ClaimType type = ClaimType::kIndependent;
  std::optional<int> referenced_claim;
  std::optional<std::string> warning;
};

// Dependent iff the text refers to "claim N" / "claims N" with N < index.
ClaimTypeResult classify_claim_type(std::string_view text, int index);

// One patent object per line. Warnings (forward claim references) are appended
// to `warnings` when given.
std::vector<PatentRecord> parse_corpus(std::istream& in, std::vector<std::string>* warnings = nullptr);
std::vector<PatentRecord> parse_corpus(const std::filesystem::path& path,
                                       std::vector<std::string>* warnings = nullptr);

void write_corpus(std::ostream& out, std::span<const PatentRecord> records);

enum class ClaimFilter { kIndependentOnly, kAll };

ClaimFilter parse_claim_filter(std::string_view name);
std::string_view to_string(ClaimFilter filter);

std::vector<RawClaim> select_claims(const PatentRecord& record, ClaimFilter filter);

// ---------------------------------------------------------------------------
// Claim preprocessing

using StopwordSet = std::unordered_set<std::string>;

const StopwordSet& default_stopwords();
StopwordSet load_stopwords(const std::filesystem::path& path);

struct TokenizedClaim {
  std::vector<std::string> tokens;
};

inline constexpr std::size_t kDefaultMaxTokens = 512;

// Lowercases and folds accented Latin letters to their ASCII base letter.
std::string fold_text(std::string_view utf8);

// Strips the leading "24." marker, folds case and accents, splits on
// punctuation/whitespace, drops stopwords and keeps at most max_tokens tokens.
TokenizedClaim preprocess_claim(const RawClaim& raw, const StopwordSet& stopwords,
                                std::size_t max_tokens = kDefaultMaxTokens);

// ---------------------------------------------------------------------------
// Labeling by forward citations

enum class Horizon { kShort, kMid, kLong };

inline constexpr std::array<Horizon, 3> kHorizons = {Horizon::kShort, Horizon::kMid, Horizon::kLong};

int horizon_years(Horizon h);
std::size_t horizon_slot(Horizon h);
std::string_view to_string(Horizon h);
Horizon parse_horizon(std::string_view name);

struct FixedThreshold {
  int threshold = 0;
};

struct Quantile {
  double q = 0.9;
};

struct LabelPolicy {
  Horizon horizon = Horizon::kShort;
  std::variant<FixedThreshold, Quantile> mode = FixedThreshold{};
};

// Table 2 defaults: >= 3, >= 7, >= 18 citations in 3, 5, 10 years.
std::array<LabelPolicy, 3> default_label_policies();

struct LabeledPatent {
  std::string patent_id;
  std::array<std::size_t, 3> counts{};
  std::array<ValueClass, 3> classes{ValueClass::kMT, ValueClass::kMT, ValueClass::kMT};

  std::size_t count(Horizon h) const { return counts[horizon_slot(h)]; }
  ValueClass label(Horizon h) const { return classes[horizon_slot(h)]; }
};

// Smallest integer t with fraction(count >= t) <= 1 - q.
int quantile_threshold(std::span<const std::size_t> counts, double q);

struct LabelingResult {
  std::vector<LabeledPatent> patents;
  std::array<int, 3> thresholds{};
};

LabelingResult assign_labels(std::span<const PatentRecord> records,
                             std::span<const LabelPolicy> policies);

void write_labels(std::ostream& out, std::span<const LabeledPatent> labels);
std::vector<LabeledPatent> read_labels(std::istream& in);
std::vector<LabeledPatent> read_labels(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Stratified sampling

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per class, round(class_size * train_fraction) members go to train.
// Indices refer to `labels`.
Split stratified_split(std::span<const ValueClass> labels, double train_fraction, std::uint64_t seed);

// Same as stratified_split but tolerates classes that are absent.
Split stratified_split_lenient(std::span<const ValueClass> labels, double train_fraction,
                               std::uint64_t seed);

// Returns k test folds (indices into `labels`) that partition the input.
// Classes absent from the input are skipped; a present class smaller than k
// is an error.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const ValueClass> labels,
                                                       std::size_t k, std::uint64_t seed);

}  // namespace patenthan
