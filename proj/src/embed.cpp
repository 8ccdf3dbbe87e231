#include "patenthan/embed.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "patenthan/binary_io.hpp"
#include "patenthan/error.hpp"

namespace patenthan {

namespace {

constexpr char kMagic[4] = {'C', 'E', 'M', 'B'};

}  // namespace

std::uint64_t stable_hash(std::string_view text, std::uint64_t seed) {
  constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= (seed >> (8 * i)) & 0xFF;
    h *= kPrime;
  }
  for (unsigned char c : text) {
    h ^= c;
    h *= kPrime;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

HashedEmbedder::HashedEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ < 1) throw InvalidInput("embedding dimension must be >= 1");
}

std::pair<std::size_t, double> HashedEmbedder::slot(std::string_view token) const {
  const std::uint64_t h = stable_hash(token, seed_);
  return {static_cast<std::size_t>(h % dim_), (h >> 63) ? -1.0 : 1.0};
}

std::vector<double> HashedEmbedder::embed(std::span<const std::string> tokens) const {
  std::vector<double> v(dim_, 0.0);
  if (tokens.empty()) return v;
  for (const auto& t : tokens) {
    auto [index, sign] = slot(t);
    v[index] += sign;
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& x : v) x *= inv;
  return v;
}

ClaimMatrix build_claim_matrix(std::span<const TokenizedClaim> claims, const EmbeddingProvider& provider,
                               std::size_t m) {
  if (m < 1) throw InvalidInput("maximum claim count m must be >= 1");
  const std::size_t d = provider.dim();
  if (d < 1) throw InvalidInput("embedding dimension must be >= 1");
  ClaimMatrix out{Matrix(m, d), std::min(claims.size(), m)};
  for (std::size_t i = 0; i < out.active; ++i) {
    const auto v = provider.embed(claims[i].tokens);
    if (v.size() != d) throw ShapeError("embedding provider returned a vector of the wrong width");
    for (std::size_t c = 0; c < d; ++c) {
      if (!std::isfinite(v[c])) throw NumericError("embedding provider returned a non-finite value");
      out.rows(i, c) = v[c];
    }
  }
  return out;
}

ClaimMatrix build_claim_matrix(const Matrix& claim_vectors, std::size_t m) {
  if (m < 1) throw InvalidInput("maximum claim count m must be >= 1");
  ClaimMatrix out{Matrix(m, claim_vectors.cols()), std::min(claim_vectors.rows(), m)};
  for (std::size_t i = 0; i < out.active; ++i) {
    for (std::size_t c = 0; c < claim_vectors.cols(); ++c) out.rows(i, c) = claim_vectors(i, c);
  }
  if (!out.rows.all_finite()) throw NumericError("claim vectors contain non-finite values");
  return out;
}

Matrix EmbeddingFile::claim_vectors(std::size_t record) const {
  const EmbeddingRecord& rec = records.at(record);
  Matrix m(rec.claim_count, d_e);
  for (std::size_t i = 0; i < rec.values.size(); ++i) m.values()[i] = rec.values[i];
  return m;
}

std::unordered_map<std::string, std::size_t> EmbeddingFile::index_by_id() const {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < records.size(); ++i) idx.emplace(records[i].patent_id, i);
  return idx;
}

EmbeddingRecord make_embedding_record(std::string patent_id, const Matrix& claim_vectors) {
  EmbeddingRecord rec;
  rec.patent_id = std::move(patent_id);
  rec.claim_count = claim_vectors.rows();
  rec.values.reserve(claim_vectors.size());
  for (double v : claim_vectors.values()) rec.values.push_back(static_cast<float>(v));
  return rec;
}

void write_embeddings(std::ostream& out, const EmbeddingFile& file) {
  if (file.d_e < 1 || file.d_e > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidInput("embedding dimension out of range");
  }
  out.write(kMagic, 4);
  binary::put<std::uint32_t>(out, kCembVersion);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(file.d_e));
  binary::put<std::uint64_t>(out, file.records.size());
  for (const auto& rec : file.records) {
    if (rec.patent_id.size() > std::numeric_limits<std::uint16_t>::max()) throw InvalidInput("patent id too long");
    if (rec.claim_count > std::numeric_limits<std::uint16_t>::max()) throw InvalidInput("too many claims in one record");
    if (rec.values.size() != rec.claim_count * file.d_e) {
      throw ShapeError("record " + rec.patent_id + " holds " + std::to_string(rec.values.size()) +
                       " values, expected " + std::to_string(rec.claim_count) + " x " + std::to_string(file.d_e));
    }
    binary::put<std::uint16_t>(out, static_cast<std::uint16_t>(rec.patent_id.size()));
    binary::put_bytes(out, rec.patent_id);
    binary::put<std::uint16_t>(out, static_cast<std::uint16_t>(rec.claim_count));
    for (float v : rec.values) binary::put<float>(out, v);
  }
  if (!out) throw IoError("failed writing CEMB data");
}

EmbeddingFile read_embeddings(std::istream& in) {
  binary::Reader r(in, "CEMB");
  std::string magic;
  try {
    magic = r.get_bytes(4, "magic");
  } catch (const InvalidInput&) {
    throw InvalidInput("not a CEMB file");
  }
  if (magic != std::string(kMagic, 4)) throw InvalidInput("not a CEMB file");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCembVersion) throw InvalidInput("unsupported CEMB version " + std::to_string(version));
  EmbeddingFile file;
  file.d_e = r.get<std::uint32_t>("d_e");
  if (file.d_e == 0) throw InvalidInput("CEMB header declares d_e = 0");
  const auto count = r.get<std::uint64_t>("record count");
  for (std::uint64_t i = 0; i < count; ++i) {
    EmbeddingRecord rec;
    const auto id_len = r.get<std::uint16_t>("id length");
    rec.patent_id = r.get_bytes(id_len, "patent id");
    rec.claim_count = r.get<std::uint16_t>("claim count");
    rec.values.resize(rec.claim_count * file.d_e);
    for (float& v : rec.values) {
      v = r.get<float>("claim vector data");
      if (!std::isfinite(v)) {
        throw InvalidInput("non-finite value in record " + rec.patent_id + " at byte offset " +
                           std::to_string(r.offset() - 4));
      }
    }
    file.records.push_back(std::move(rec));
  }
  if (!r.at_end()) throw InvalidInput("trailing bytes after the last CEMB record at byte offset " +
                                      std::to_string(r.offset()));
  return file;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_embeddings(out, file);
}

EmbeddingFile read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings file " + path.string());
  return read_embeddings(in);
}

void require_embedding_dim(const EmbeddingFile& file, std::size_t model_d_e) {
  if (file.d_e != model_d_e) {
    throw ShapeError("embedding width d_e=" + std::to_string(file.d_e) + " does not match model d_e=" +
                     std::to_string(model_d_e));
  }
}

EmbeddingFile embed_corpus(std::span<const PatentRecord> records, const EmbeddingProvider& provider,
                           ClaimFilter filter, const StopwordSet& stopwords, std::size_t max_tokens) {
  EmbeddingFile file;
  file.d_e = provider.dim();
  for (const auto& rec : records) {
    const auto claims = select_claims(rec, filter);
    Matrix vectors(claims.size(), file.d_e);
    for (std::size_t i = 0; i < claims.size(); ++i) {
      const auto tokens = preprocess_claim(claims[i], stopwords, max_tokens);
      const auto v = provider.embed(tokens.tokens);
      std::copy(v.begin(), v.end(), vectors.row(i).begin());
    }
    file.records.push_back(make_embedding_record(rec.patent_id, vectors));
  }
  return file;
}

}  // namespace patenthan
