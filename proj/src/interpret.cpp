#include "patenthan/interpret.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "patenthan/error.hpp"

namespace patenthan {

std::vector<double> claim_scores(const AttentionRecord& att) {
  return attention_received(att.last_matrix, att.active);
}

std::vector<ClaimScore> claim_scores(const AttentionRecord& att, const std::string& patent_id,
                                     std::span<const RawClaim> claims) {
  if (claims.size() < att.active) {
    throw InvalidInput("claim_scores: " + std::to_string(claims.size()) + " claims for " +
                       std::to_string(att.active) + " active attention rows");
  }
  const auto raw = claim_scores(att);
  std::vector<ClaimScore> out;
  out.reserve(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    out.push_back({patent_id, claims[j].index, claims[j].type, raw[j], 0.0});
  }
  return out;
}

Normalization parse_normalization(std::string_view name) {
  if (name == "max") return Normalization::kMax;
  if (name == "mean") return Normalization::kMean;
  throw InvalidInput("unknown normalization '" + std::string(name) + "' (expected max|mean)");
}

std::vector<double> normalize_scores(std::span<const double> raw, Normalization mode) {
  if (raw.empty()) throw InvalidInput("normalize_scores needs at least one active claim");
  double denom = 0.0;
  if (mode == Normalization::kMax) {
    denom = *std::max_element(raw.begin(), raw.end());
  } else {
    for (double v : raw) denom += v;
    denom /= static_cast<double>(raw.size());
  }
  if (!(denom > 0.0)) throw InvalidInput("normalize_scores: all raw scores are zero");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / denom;
  return out;
}

void normalize_scores(std::span<ClaimScore> scores, Normalization mode) {
  std::vector<double> raw;
  raw.reserve(scores.size());
  for (const auto& s : scores) raw.push_back(s.raw);
  const auto norm = normalize_scores(raw, mode);
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i].normalized = norm[i];
}

namespace {

std::string excerpt_of(const std::string& text) {
  std::string flat;
  flat.reserve(std::min(text.size(), kExcerptChars + 3));
  for (char c : text) {
    if (flat.size() >= kExcerptChars) {
      // do not cut a UTF-8 sequence in half
      while (!flat.empty() && (static_cast<unsigned char>(flat.back()) & 0xC0) == 0x80) flat.pop_back();
      if (!flat.empty() && (static_cast<unsigned char>(flat.back()) & 0x80)) flat.pop_back();
      flat += "...";
      break;
    }
    flat.push_back(c == '\t' || c == '\n' || c == '\r' ? ' ' : c);
  }
  return flat;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput(std::string("explanation report: bad ") + what + " '" + s + "'");
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cells.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cells;
}

}  // namespace

ExplanationReport explain(const std::string& patent_id, std::span<const RawClaim> claims, const ClaimMatrix& matrix,
                          const ModelParams& params, Normalization mode) {
  const ModelOutput out = model_forward(matrix, params);
  const Prediction pred = predict_class(out.logits);
  auto scores = claim_scores(out.attention, patent_id, claims);
  normalize_scores(scores, mode);

  ExplanationReport report;
  report.patent_id = patent_id;
  report.prediction = pred.label;
  report.p_pbt = pred.p_pbt;
  report.active = out.attention.active;

  std::size_t best = 0, worst = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    // strict comparisons keep the lowest claim index on ties
    if (scores[i].raw > scores[best].raw) best = i;
    if (scores[i].raw < scores[worst].raw) worst = i;
  }
  report.tied = scores[best].raw == scores[worst].raw;
  report.max_claim = scores[best].claim_index;
  if (!report.tied) report.min_claim = scores[worst].claim_index;

  for (std::size_t i = 0; i < scores.size(); ++i) {
    ExplanationRow row;
    row.claim_index = scores[i].claim_index;
    row.claim_type = scores[i].claim_type;
    row.raw = scores[i].raw;
    row.normalized = scores[i].normalized;
    row.excerpt = excerpt_of(claims[i].text);
    if (i == best) row.flag = "max";
    else if (!report.tied && i == worst) row.flag = "min";
    report.rows.push_back(std::move(row));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const ExplanationRow& a, const ExplanationRow& b) { return a.claim_index < b.claim_index; });
  return report;
}

void write_explanation(std::ostream& out, const ExplanationReport& r) {
  out << "# patenthan explanation v1\n";
  out << "patent_id\t" << r.patent_id << '\n';
  out << "prediction\t" << to_string(r.prediction) << '\n';
  out << "p_pbt\t" << format_double(r.p_pbt) << '\n';
  out << "active_claims\t" << r.active << '\n';
  out << "tied\t" << (r.tied ? "yes" : "no") << '\n';
  out << "max_claim\t" << r.max_claim << '\n';
  out << "min_claim\t" << (r.min_claim ? std::to_string(*r.min_claim) : "-") << '\n';
  out << "index\ttype\tscore_raw\tscore_norm\tflag\texcerpt\n";
  for (const auto& row : r.rows) {
    out << row.claim_index << '\t' << to_string(row.claim_type) << '\t' << format_double(row.raw) << '\t'
        << format_double(row.normalized) << '\t' << (row.flag.empty() ? "-" : row.flag) << '\t' << row.excerpt
        << '\n';
  }
}

ExplanationReport read_explanation(std::istream& in) {
  ExplanationReport r;
  std::string line;
  if (!std::getline(in, line) || line != "# patenthan explanation v1") {
    throw InvalidInput("not a patenthan explanation report");
  }
  auto header = [&](const char* key) {
    if (!std::getline(in, line)) throw InvalidInput(std::string("explanation report: missing ") + key);
    const auto cells = split_tabs(line);
    if (cells.size() != 2 || cells[0] != key) throw InvalidInput(std::string("explanation report: expected ") + key);
    return cells[1];
  };
  r.patent_id = header("patent_id");
  r.prediction = parse_value_class(header("prediction"));
  r.p_pbt = parse_double(header("p_pbt"), "p_pbt");
  r.active = static_cast<std::size_t>(std::stoul(header("active_claims")));
  r.tied = header("tied") == "yes";
  r.max_claim = std::stoi(header("max_claim"));
  if (const auto mc = header("min_claim"); mc != "-") r.min_claim = std::stoi(mc);
  if (!std::getline(in, line) || line.rfind("index\t", 0) != 0) throw InvalidInput("explanation report: missing table");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_tabs(line);
    if (cells.size() != 6) throw InvalidInput("explanation report: malformed claim row");
    ExplanationRow row;
    row.claim_index = std::stoi(cells[0]);
    if (cells[1] == "Independent") row.claim_type = ClaimType::kIndependent;
    else if (cells[1] == "Dependent") row.claim_type = ClaimType::kDependent;
    else throw InvalidInput("explanation report: bad claim type '" + cells[1] + "'");
    row.raw = parse_double(cells[2], "score_raw");
    row.normalized = parse_double(cells[3], "score_norm");
    row.flag = cells[4] == "-" ? "" : cells[4];
    row.excerpt = cells[5];
    r.rows.push_back(std::move(row));
  }
  return r;
}

WelchResult claim_type_ttest(std::span<const ClaimScore> scores) {
  std::vector<double> independent, dependent;
  for (const auto& s : scores) {
    (s.claim_type == ClaimType::kIndependent ? independent : dependent).push_back(s.normalized);
  }
  return welch_ttest(independent, dependent);
}

}  // namespace patenthan
