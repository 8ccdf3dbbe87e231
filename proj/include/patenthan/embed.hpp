#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "patenthan/corpus.hpp"
#include "patenthan/matrix.hpp"

namespace patenthan {

// Claim vectors of one patent stacked into an m x d_e matrix. Rows at or past
// `active` are zero padding.
struct ClaimMatrix {
  Matrix rows;
  std::size_t active = 0;

  std::size_t m() const { return rows.rows(); }
  std::size_t d_e() const { return rows.cols(); }
};

// Maps the tokens of one claim to a single d_e-vector. Implementations must be
// deterministic and return the zero vector for an empty token list.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<double> embed(std::span<const std::string> tokens) const = 0;
};

// Feature hashing: every token becomes a signed one-hot vector at a hashed
// index, and a claim is the mean of its token vectors.
class HashedEmbedder final : public EmbeddingProvider {
 public:
  HashedEmbedder(std::size_t dim, std::uint64_t seed = 0);

  std::size_t dim() const override { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::vector<double> embed(std::span<const std::string> tokens) const override;

  // Index and sign (+1/-1) assigned to a token.
  std::pair<std::size_t, double> slot(std::string_view token) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Stable 64-bit token hash (FNV-1a over seed and bytes, then a 64-bit mixer).
std::uint64_t stable_hash(std::string_view text, std::uint64_t seed);

// Keeps the first m claims; shorter lists are zero padded.
ClaimMatrix build_claim_matrix(std::span<const TokenizedClaim> claims, const EmbeddingProvider& provider,
                               std::size_t m);
ClaimMatrix build_claim_matrix(const Matrix& claim_vectors, std::size_t m);

// ---------------------------------------------------------------------------
// CEMB interchange format, little-endian:
//   magic "CEMB", version u32 = 1, d_e u32, record count u64,
//   per record: id length u16, id bytes, claim count u16,
//               claim_count * d_e float32 values, row-major.

inline constexpr std::uint32_t kCembVersion = 1;

struct EmbeddingRecord {
  std::string patent_id;
  std::size_t claim_count = 0;
  std::vector<float> values;  // claim_count * d_e

  std::span<const float> claim(std::size_t i, std::size_t d_e) const { return {values.data() + i * d_e, d_e}; }
};

struct EmbeddingFile {
  std::size_t d_e = 0;
  std::vector<EmbeddingRecord> records;

  // Row-per-claim matrix of one record, widened to double.
  Matrix claim_vectors(std::size_t record) const;
  std::unordered_map<std::string, std::size_t> index_by_id() const;
};

EmbeddingRecord make_embedding_record(std::string patent_id, const Matrix& claim_vectors);

void write_embeddings(std::ostream& out, const EmbeddingFile& file);
EmbeddingFile read_embeddings(std::istream& in);
void write_embeddings(const std::filesystem::path& path, const EmbeddingFile& file);
EmbeddingFile read_embeddings(const std::filesystem::path& path);

// Throws ShapeError when an embedding file does not match the model width.
void require_embedding_dim(const EmbeddingFile& file, std::size_t model_d_e);

// Embeds every patent of a corpus with `provider` under a claim filter.
EmbeddingFile embed_corpus(std::span<const PatentRecord> records, const EmbeddingProvider& provider,
                           ClaimFilter filter, const StopwordSet& stopwords,
                           std::size_t max_tokens = kDefaultMaxTokens);

}  // namespace patenthan
