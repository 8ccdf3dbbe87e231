#include "patenthan/corpus.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <unordered_set>

#include <json.hpp>

#include "patenthan/error.hpp"

namespace patenthan {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

int parse_int(std::string_view s, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidInput("invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

Date Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw InvalidInput("invalid date '" + std::string(iso) + "', expected YYYY-MM-DD");
  }
  Date d{parse_int(iso.substr(0, 4), "year"), parse_int(iso.substr(5, 2), "month"),
         parse_int(iso.substr(8, 2), "day")};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
    throw InvalidInput("invalid date '" + std::string(iso) + "'");
  }
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

Date Date::plus_years(int years) const {
  Date d{year + years, month, day};
  if (d.month == 2 && d.day == 29 && !is_leap(d.year)) d.day = 28;
  return d;
}

std::string_view to_string(ClaimType type) {
  return type == ClaimType::kIndependent ? "Independent" : "Dependent";
}

ValueClass parse_value_class(std::string_view text) {
  if (text == "PBT") return ValueClass::kPBT;
  if (text == "MT") return ValueClass::kMT;
  throw InvalidInput("unknown value class '" + std::string(text) + "'");
}

std::vector<int> PatentRecord::citation_lags() const {
  std::vector<int> lags;
  lags.reserve(citations.size());
  for (const auto& c : citations) {
    int lag = c.date.year - grant_date.year;
    if (std::pair(c.date.month, c.date.day) < std::pair(grant_date.month, grant_date.day)) --lag;
    lags.push_back(lag);
  }
  return lags;
}

std::size_t PatentRecord::citations_within(int years) const {
  const Date end = grant_date.plus_years(years);
  std::size_t n = 0;
  for (const auto& c : citations) {
    if (c.date < end) ++n;
  }
  return n;
}

ClaimTypeResult classify_claim_type(std::string_view text, int index) {
  static const std::regex kReference(R"(\bclaims?\s+(\d+))", std::regex::icase);
  ClaimTypeResult result;
  std::match_results<std::string_view::const_iterator> match;
  if (!std::regex_search(text.begin(), text.end(), match, kReference)) return result;

  const std::string digits = match[1].str();
  long referenced = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), referenced);
  if (ec != std::errc() || referenced >= index) {
    result.warning = "claim " + std::to_string(index) + " refers to claim " + digits +
                     " which does not precede it; treated as independent";
    return result;
  }
  result.type = ClaimType::kDependent;
  result.referenced_claim = static_cast<int>(referenced);
  return result;
}

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InvalidInput(std::string("missing field '") + key + "'");
  return *it;
}

PatentRecord record_from_json(const json& obj, std::vector<std::string>* warnings) {
  if (!obj.is_object()) throw InvalidInput("expected a JSON object");
  PatentRecord rec;
  rec.patent_id = require(obj, "patent_id").get<std::string>();
  if (rec.patent_id.empty()) throw InvalidInput("empty patent_id");
  rec.grant_date = Date::parse(require(obj, "grant_date").get<std::string>());

  const json& claims = require(obj, "claims");
  if (!claims.is_array()) throw InvalidInput("'claims' must be an array");
  if (claims.empty()) throw InvalidInput("patent has no claims");
  for (std::size_t i = 0; i < claims.size(); ++i) {
    const json& c = claims[i];
    RawClaim claim;
    claim.index = c.contains("index") ? c["index"].get<int>() : static_cast<int>(i + 1);
    if (claim.index < 1) throw InvalidInput("claim index must be >= 1");
    claim.text = require(c, "text").get<std::string>();
    if (claim.text.empty()) throw InvalidInput("claim " + std::to_string(claim.index) + " has empty text");
    auto kind = classify_claim_type(claim.text, claim.index);
    claim.type = kind.type;
    claim.referenced_claim = kind.referenced_claim;
    if (kind.warning && warnings) warnings->push_back(rec.patent_id + ": " + *kind.warning);
    rec.claims.push_back(std::move(claim));
  }

  if (auto it = obj.find("citations"); it != obj.end()) {
    if (!it->is_array()) throw InvalidInput("'citations' must be an array");
    for (const json& c : *it) {
      Citation cit;
      cit.citing_id = c.value("citing_id", std::string());
      cit.date = Date::parse(require(c, "date").get<std::string>());
      if (cit.date < rec.grant_date) {
        throw InvalidInput("citation " + cit.citing_id + " predates the grant date");
      }
      rec.citations.push_back(std::move(cit));
    }
  }
  return rec;
}

}  // namespace

std::vector<PatentRecord> parse_corpus(std::istream& in, std::vector<std::string>* warnings) {
  std::vector<PatentRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      PatentRecord rec = record_from_json(json::parse(line), warnings);
      if (!seen.insert(rec.patent_id).second) {
        throw InvalidInput("duplicate patent_id '" + rec.patent_id + "'");
      }
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw InvalidInput("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidInput& e) {
      throw InvalidInput("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<PatentRecord> parse_corpus(const std::filesystem::path& path,
                                       std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return parse_corpus(in, warnings);
}

void write_corpus(std::ostream& out, std::span<const PatentRecord> records) {
  for (const auto& rec : records) {
    json obj;
    obj["patent_id"] = rec.patent_id;
    obj["grant_date"] = rec.grant_date.to_string();
    obj["claims"] = json::array();
    for (const auto& c : rec.claims) obj["claims"].push_back({{"index", c.index}, {"text", c.text}});
    obj["citations"] = json::array();
    for (const auto& c : rec.citations) {
      obj["citations"].push_back({{"citing_id", c.citing_id}, {"date", c.date.to_string()}});
    }
    out << obj.dump() << '\n';
  }
}

ClaimFilter parse_claim_filter(std::string_view name) {
  if (name == "independent" || name == "independent_only") return ClaimFilter::kIndependentOnly;
  if (name == "all") return ClaimFilter::kAll;
  throw InvalidInput("unknown claim filter '" + std::string(name) + "' (expected independent|all)");
}

std::string_view to_string(ClaimFilter filter) {
  return filter == ClaimFilter::kIndependentOnly ? "independent" : "all";
}

std::vector<RawClaim> select_claims(const PatentRecord& record, ClaimFilter filter) {
  std::vector<RawClaim> out;
  for (const auto& c : record.claims) {
    if (filter == ClaimFilter::kAll || c.type == ClaimType::kIndependent) out.push_back(c);
  }
  return out;
}

}  // namespace patenthan
