#include <cctype>
#include <fstream>

#include "patenthan/corpus.hpp"
#include "patenthan/error.hpp"

namespace patenthan {

namespace {

// Base letters for U+00C0..U+00FF. '_' marks a separator, '*' a multi-letter fold.
constexpr std::string_view kLatin1 =
    "aaaaaa*ceeeeiiiidnooooo_ouuuuy**aaaaaa*ceeeeiiiidnooooo_ouuuuy*y";
// Base letters for U+0100..U+017F; '*' marks a ligature.
constexpr std::string_view kLatinExtA =
    "aaaaaaccccccccddddeeeeeeeeeegggggggghhhhiiiiiiiiii**jjkkkllllllllllnnnnnnnnnoooooo**"
    "rrrrrrssssssssttttttuuuuuuuuuuuuwwyyyzzzzzzs";

static_assert(kLatin1.size() == 64);
static_assert(kLatinExtA.size() == 128);

std::string_view latin1_multi(char32_t cp) {
  switch (cp) {
    case 0xC6: case 0xE6: return "ae";
    case 0xDE: case 0xFE: return "th";
    case 0xDF: return "ss";
    default: return "";
  }
}

std::string_view latin_ext_multi(char32_t cp) {
  switch (cp) {
    case 0x132: case 0x133: return "ij";
    case 0x152: case 0x153: return "oe";
    default: return "";
  }
}

bool is_separator(char32_t cp) {
  if (cp < 0x80) return !std::isalnum(static_cast<unsigned char>(cp));
  return (cp >= 0xA0 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 || (cp >= 0x2000 && cp <= 0x206F) ||
         cp == 0x3000;
}

// Decodes one code point starting at s[i]; invalid bytes come back as U+FFFD.
char32_t decode(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int extra = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    ++i;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + extra >= s.size()) {
    i = s.size();
    return 0xFFFD;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += extra + 1;
  return cp;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string_view strip_index_marker(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  const std::size_t digits = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == digits) return text;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  if (i < text.size() && (text[i] == '.' || text[i] == ')')) return text.substr(i + 1);
  return text;
}

}  // namespace

std::string fold_text(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  for (std::size_t i = 0; i < utf8.size();) {
    const char32_t cp = decode(utf8, i);
    if (cp < 0x80) {
      out.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
    } else if (cp >= 0x300 && cp <= 0x36F) {
      // combining diacritics vanish
    } else if (cp >= 0xC0 && cp <= 0xFF) {
      const char base = kLatin1[cp - 0xC0];
      if (base == '*') {
        out += latin1_multi(cp);
      } else if (base == '_') {
        out.push_back(' ');
      } else {
        out.push_back(base);
      }
    } else if (cp >= 0x100 && cp <= 0x17F) {
      const char base = kLatinExtA[cp - 0x100];
      if (base == '*') {
        out += latin_ext_multi(cp);
      } else {
        out.push_back(base);
      }
    } else if (is_separator(cp)) {
      out.push_back(' ');
    } else {
      encode(cp, out);
    }
  }
  return out;
}

TokenizedClaim preprocess_claim(const RawClaim& raw, const StopwordSet& stopwords, std::size_t max_tokens) {
  if (max_tokens < 1) throw InvalidInput("max_tokens must be >= 1");
  const std::string folded = fold_text(strip_index_marker(raw.text));

  TokenizedClaim out;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stopwords.contains(current) && out.tokens.size() < max_tokens) {
      out.tokens.push_back(current);
    }
    current.clear();
  };
  for (std::size_t i = 0; i < folded.size();) {
    const std::size_t start = i;
    const char32_t cp = decode(folded, i);
    if (is_separator(cp)) {
      flush();
    } else {
      current.append(folded, start, i - start);
    }
  }
  flush();
  return out;
}

const StopwordSet& default_stopwords() {
  static const StopwordSet kDefault = {
      "a",     "an",    "and",   "are",   "as",    "at",    "be",    "been",  "being", "but",
      "by",    "can",   "could", "do",    "does",  "each",  "for",   "from",  "had",   "has",
      "have",  "in",    "into",  "is",    "it",    "its",   "may",   "more",  "no",    "not",
      "of",    "on",    "one",   "or",    "other", "said",  "same",  "say",   "says",  "shall",
      "so",    "some",  "such",  "than",  "that",  "the",   "their", "them",  "then",  "there",
      "these", "they",  "this",  "those", "thus",  "to",    "upon",  "was",   "were",  "what",
      "when",  "where", "which", "while", "who",   "will",  "with",  "within", "would",
  };
  return kDefault;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword file " + path.string());
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string folded = fold_text(line);
    const auto b = folded.find_first_not_of(" \t\r");
    if (b == std::string::npos || folded[b] == '#') continue;
    const auto e = folded.find_last_not_of(" \t\r");
    words.insert(folded.substr(b, e - b + 1));
  }
  return words;
}

}  // namespace patenthan
