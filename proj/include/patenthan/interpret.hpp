#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patenthan/corpus.hpp"
#include "patenthan/model.hpp"
#include "patenthan/stats.hpp"

namespace patenthan {

struct ClaimScore {
  std::string patent_id;
  int claim_index = 0;
  ClaimType claim_type = ClaimType::kIndependent;
  double raw = 0.0;
  double normalized = 0.0;
};

// Raw score of claim j: total attention it receives from the active claims.
// `claims` describes the active rows in order; it may be longer than `active`.
std::vector<ClaimScore> claim_scores(const AttentionRecord& att, const std::string& patent_id,
                                     std::span<const RawClaim> claims);
std::vector<double> claim_scores(const AttentionRecord& att);

enum class Normalization { kMax, kMean };

Normalization parse_normalization(std::string_view name);

// kMax: raw / max(raw), so the top claim scores exactly 1. kMean: raw / mean(raw).
std::vector<double> normalize_scores(std::span<const double> raw, Normalization mode = Normalization::kMax);
void normalize_scores(std::span<ClaimScore> scores, Normalization mode = Normalization::kMax);

struct ExplanationRow {
  int claim_index = 0;
  ClaimType claim_type = ClaimType::kIndependent;
  double raw = 0.0;
  double normalized = 0.0;
  std::string excerpt;
  std::string flag;  // "max", "min" or empty

  bool operator==(const ExplanationRow&) const = default;
};

struct ExplanationReport {
  std::string patent_id;
  ValueClass prediction = ValueClass::kMT;
  double p_pbt = 0.5;
  std::size_t active = 0;
  bool tied = false;  // every active claim has the same score
  int max_claim = 0;  // most pivotal claim; lowest index on ties
  std::optional<int> min_claim;
  std::vector<ExplanationRow> rows;  // claim index order

  bool operator==(const ExplanationReport&) const = default;
};

inline constexpr std::size_t kExcerptChars = 160;

// Runs the model on one patent and ranks its claims by attention received.
// `claims` must be the claims that produced the rows of `matrix`.
ExplanationReport explain(const std::string& patent_id, std::span<const RawClaim> claims, const ClaimMatrix& matrix,
                          const ModelParams& params, Normalization mode = Normalization::kMax);

void write_explanation(std::ostream& out, const ExplanationReport& report);
ExplanationReport read_explanation(std::istream& in);

// Welch test of normalized scores, independent (group 1) vs dependent (group 2).
WelchResult claim_type_ttest(std::span<const ClaimScore> scores);

}  // namespace patenthan
