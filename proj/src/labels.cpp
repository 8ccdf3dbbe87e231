#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "patenthan/corpus.hpp"
#include "patenthan/error.hpp"

namespace patenthan {

int horizon_years(Horizon h) {
  switch (h) {
    case Horizon::kShort: return 3;
    case Horizon::kMid: return 5;
    case Horizon::kLong: return 10;
  }
  return 0;
}

std::size_t horizon_slot(Horizon h) { return static_cast<std::size_t>(h); }

std::string_view to_string(Horizon h) {
  switch (h) {
    case Horizon::kShort: return "short";
    case Horizon::kMid: return "mid";
    case Horizon::kLong: return "long";
  }
  return "?";
}

Horizon parse_horizon(std::string_view name) {
  if (name == "short" || name == "3") return Horizon::kShort;
  if (name == "mid" || name == "5") return Horizon::kMid;
  if (name == "long" || name == "10") return Horizon::kLong;
  throw InvalidInput("unknown horizon '" + std::string(name) + "' (expected short|mid|long)");
}

std::array<LabelPolicy, 3> default_label_policies() {
  return {LabelPolicy{Horizon::kShort, FixedThreshold{3}}, LabelPolicy{Horizon::kMid, FixedThreshold{7}},
          LabelPolicy{Horizon::kLong, FixedThreshold{18}}};
}

int quantile_threshold(std::span<const std::size_t> counts, double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidInput("quantile q must lie in (0, 1)");
  if (counts.empty()) throw InvalidInput("quantile labeling needs a nonempty corpus");
  const double allowed = (1.0 - q) * static_cast<double>(counts.size()) + 1e-9;
  const std::size_t max_count = *std::max_element(counts.begin(), counts.end());
  for (std::size_t t = 0; t <= max_count + 1; ++t) {
    const auto at_or_above =
        std::count_if(counts.begin(), counts.end(), [t](std::size_t c) { return c >= t; });
    if (static_cast<double>(at_or_above) <= allowed) return static_cast<int>(t);
  }
  return static_cast<int>(max_count + 1);
}

LabelingResult assign_labels(std::span<const PatentRecord> records, std::span<const LabelPolicy> policies) {
  LabelingResult result;
  result.patents.reserve(records.size());
  for (const auto& rec : records) {
    LabeledPatent lp;
    lp.patent_id = rec.patent_id;
    for (Horizon h : kHorizons) lp.counts[horizon_slot(h)] = rec.citations_within(horizon_years(h));
    result.patents.push_back(std::move(lp));
  }

  // Horizons without an explicit policy fall back to the fixed Table 2 thresholds.
  std::array<LabelPolicy, 3> resolved = default_label_policies();
  for (const auto& p : policies) resolved[horizon_slot(p.horizon)] = p;

  for (Horizon h : kHorizons) {
    const std::size_t slot = horizon_slot(h);
    const LabelPolicy& policy = resolved[slot];
    int threshold = 0;
    if (const auto* fixed = std::get_if<FixedThreshold>(&policy.mode)) {
      if (fixed->threshold < 0) throw InvalidInput("label threshold must be >= 0");
      threshold = fixed->threshold;
    } else {
      std::vector<std::size_t> counts;
      counts.reserve(result.patents.size());
      for (const auto& lp : result.patents) counts.push_back(lp.counts[slot]);
      threshold = quantile_threshold(counts, std::get<Quantile>(policy.mode).q);
    }
    result.thresholds[slot] = threshold;
    for (auto& lp : result.patents) {
      lp.classes[slot] = lp.counts[slot] >= static_cast<std::size_t>(threshold) ? ValueClass::kPBT : ValueClass::kMT;
    }
  }
  return result;
}

void write_labels(std::ostream& out, std::span<const LabeledPatent> labels) {
  out << "patent_id\tcount3\tcount5\tcount10\tclass3\tclass5\tclass10\n";
  for (const auto& lp : labels) {
    out << lp.patent_id;
    for (auto c : lp.counts) out << '\t' << c;
    for (auto c : lp.classes) out << '\t' << to_string(c);
    out << '\n';
  }
}

std::vector<LabeledPatent> read_labels(std::istream& in) {
  std::vector<LabeledPatent> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("patent_id\t", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    if (cells.size() != 7) {
      throw InvalidInput("labels line " + std::to_string(line_no) + ": expected 7 columns, got " +
                         std::to_string(cells.size()));
    }
    LabeledPatent lp;
    lp.patent_id = cells[0];
    for (std::size_t i = 0; i < 3; ++i) {
      std::size_t v = 0;
      const auto& s = cells[1 + i];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InvalidInput("labels line " + std::to_string(line_no) + ": bad count '" + s + "'");
      }
      lp.counts[i] = v;
      lp.classes[i] = parse_value_class(cells[4 + i]);
    }
    out.push_back(std::move(lp));
  }
  return out;
}

std::vector<LabeledPatent> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels file " + path.string());
  return read_labels(in);
}

}  // namespace patenthan
