#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "patenthan/error.hpp"
#include "patenthan/pipeline.hpp"
#include "patenthan/rng.hpp"

namespace patenthan {

namespace {

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> kWords = {
      "aqueous",     "solution",    "compound",    "tablet",     "capsule",     "polymer",     "carrier",
      "excipient",   "dosage",      "oral",        "topical",    "sustained",   "release",     "matrix",
      "particle",    "suspension",  "emulsion",    "buffer",     "salt",        "crystalline", "amorphous",
      "hydrochloride", "derivative", "ester",      "receptor",   "inhibitor",   "antibody",    "peptide",
      "protein",     "enzyme",      "substrate",   "concentration", "weight",   "ratio",       "patient",
      "treatment",   "disorder",    "infection",   "inflammation", "tissue",    "cell",        "membrane",
      "administering", "effective", "amount",      "pharmaceutical", "composition", "formulation", "stabilizer",
      "surfactant",  "solvent",     "ethanol",     "glycerol",   "sodium",      "potassium",   "calcium",
      "chloride",    "phosphate",   "sulfate",     "granule",    "coating",     "layer",       "core",
  };
  return kWords;
}

const std::vector<std::string>& nouns() {
  static const std::vector<std::string> kNouns = {"composition", "method", "formulation", "kit", "device", "process"};
  return kNouns;
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[rng.uniform_index(items.size())];
}

std::string filler(Rng& rng, std::size_t words) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += pick(filler_words(), rng);
  }
  return s;
}

std::size_t draw_between(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.uniform_index(hi - lo + 1); }

// A date in [grant + lag years, grant + lag + 1 years). Grant days are <= 28.
Date citation_date(const Date& grant, int lag, Rng& rng) {
  Date d = grant.plus_years(lag);
  d.month += static_cast<int>(rng.uniform_index(12));
  if (d.month > 12) {
    d.month -= 12;
    d.year += 1;
  }
  return d;
}

}  // namespace

const std::vector<std::string>& planted_tokens() {
  static const std::vector<std::string> kPlanted = {"bispecific", "liposomal", "macrocycle"};
  return kPlanted;
}

SyntheticCorpus generate_synthetic_corpus(std::size_t n_patents, double pbt_fraction, std::uint64_t seed) {
  if (n_patents < 10) throw InvalidInput("synthetic corpus needs at least 10 patents");
  if (!(pbt_fraction > 0.0 && pbt_fraction < 1.0)) throw InvalidInput("pbt_fraction must lie in (0, 1)");
  Rng rng(seed);

  const auto n_pbt = static_cast<std::size_t>(std::llround(static_cast<double>(n_patents) * pbt_fraction));
  std::vector<std::size_t> order(n_patents);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span(order));
  std::vector<char> is_pbt(n_patents, 0);
  for (std::size_t i = 0; i < n_pbt; ++i) is_pbt[order[i]] = 1;

  SyntheticCorpus corpus;
  for (std::size_t p = 0; p < n_patents; ++p) {
    PatentRecord rec;
    char id[24];
    std::snprintf(id, sizeof id, "SYN%06zu", p + 1);
    rec.patent_id = id;
    rec.grant_date = Date{2000 + static_cast<int>(p % 10), 1 + static_cast<int>(rng.uniform_index(12)),
                          1 + static_cast<int>(rng.uniform_index(28))};

    const std::size_t n_claims = draw_between(rng, 3, 8);
    std::vector<std::size_t> independent;
    for (std::size_t i = 1; i <= n_claims; ++i) {
      RawClaim c;
      c.index = static_cast<int>(i);
      const std::string& noun = pick(nouns(), rng);
      if (i > 1 && rng.uniform() < 0.5) {
        const int ref = 1 + static_cast<int>(rng.uniform_index(i - 1));
        c.text = std::to_string(i) + ". The " + noun + " of claim " + std::to_string(ref) + ", wherein the " +
                 filler(rng, draw_between(rng, 6, 12)) + ".";
        c.type = ClaimType::kDependent;
        c.referenced_claim = ref;
      } else {
        c.text = std::to_string(i) + ". A " + noun + " comprising " + filler(rng, draw_between(rng, 8, 14)) + ".";
        independent.push_back(i - 1);
      }
      rec.claims.push_back(std::move(c));
    }

    const bool pbt = is_pbt[p] != 0;
    if (pbt) {
      RawClaim& target = rec.claims[independent[rng.uniform_index(independent.size())]];
      std::string planted;
      for (const auto& t : planted_tokens()) planted += " " + t;
      target.text.pop_back();  // trailing period
      target.text += "," + planted + " and" + planted + ".";
    }

    // Citation counts at 3/5/10 years, nested, on the right side of 3/7/18.
    std::size_t c3, c5, c10;
    if (pbt) {
      c3 = draw_between(rng, 3, 6);
      c5 = std::max<std::size_t>(c3 + draw_between(rng, 2, 6), 7);
      c10 = std::max<std::size_t>(c5 + draw_between(rng, 6, 14), 18);
    } else {
      c3 = draw_between(rng, 0, 2);
      c5 = c3 + draw_between(rng, 0, 6 - c3);
      c10 = c5 + draw_between(rng, 0, 17 - c5);
    }
    const std::size_t late = draw_between(rng, 0, 3);
    std::size_t n = 0;
    auto cite = [&](std::size_t count, int lag_lo, int lag_hi) {
      for (std::size_t i = 0; i < count; ++i) {
        const int lag = lag_lo + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(lag_hi - lag_lo + 1)));
        char cid[24];
        std::snprintf(cid, sizeof cid, "C%06zu-%03zu", p + 1, ++n);
        rec.citations.push_back({cid, citation_date(rec.grant_date, lag, rng)});
      }
    };
    cite(c3, 0, 2);
    cite(c5 - c3, 3, 4);
    cite(c10 - c5, 5, 9);
    cite(late, 10, 12);
    std::sort(rec.citations.begin(), rec.citations.end(),
              [](const Citation& a, const Citation& b) { return a.date < b.date; });

    corpus.key.emplace_back(rec.patent_id, pbt ? ValueClass::kPBT : ValueClass::kMT);
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

void write_key(std::ostream& out, const SyntheticCorpus& corpus) {
  out << "patent_id\tclass\n";
  for (const auto& [id, cls] : corpus.key) out << id << '\t' << to_string(cls) << '\n';
}

}  // namespace patenthan
