#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bacsum/hash.hpp"

namespace bacsum {

// ---------------------------------------------------------------------------
// Chunking

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const noexcept { return end - start; }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct Chunk {
  Sha256Digest id{};
  std::string text;
  std::string source;
  std::string section_path;  // "Heading > Subheading"
  CharSpan span;

  std::string id_hex() const { return to_hex(id); }
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct ChunkingConfig {
  std::size_t max_chunk_chars = 1000;
  std::size_t overlap_chars = 150;
};

Sha256Digest chunk_id(std::string_view source, CharSpan span, std::string_view text);

/// Heading-aware splitter. Markdown ATX headings start new chunks; oversized
/// sections fall back to paragraph, sentence and finally fixed-width splits.
/// Only fixed-width splits overlap. Whitespace-only pieces are skipped.
/// Throws Error(Precondition) unless max_chunk_chars > overlap_chars.
std::vector<Chunk> chunk_document(std::string_view text, std::string_view source,
                                  const ChunkingConfig& config = {});

// ---------------------------------------------------------------------------
// Embedding

using Vector = std::vector<float>;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual std::string id() const = 0;
  /// One vector per input, same order. Implementations must be deterministic.
  virtual std::vector<Vector> embed_batch(const std::vector<std::string>& texts) = 0;
};

/// Deterministic test embedder: lower-cased alphanumeric tokens hashed into
/// `dim` buckets with FNV-1a, counts as weights. Texts with no tokens get a
/// single bucket derived from the whole text so the vector is never zero.
class HashedBowProvider final : public EmbeddingProvider {
 public:
  explicit HashedBowProvider(std::size_t dim = 384);
  std::size_t dim() const override { return dim_; }
  std::string id() const override;
  std::vector<Vector> embed_batch(const std::vector<std::string>& texts) override;

  Vector embed_one(std::string_view text) const;
  std::size_t bucket_of(std::string_view token) const;

 private:
  std::size_t dim_;
};

struct HttpEmbeddingConfig {
  std::string endpoint;  // full URL, e.g. http://localhost:8080/v1/embeddings
  std::string model;
  std::string api_key_env;  // empty: no Authorization header
  std::size_t dim = 384;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds backoff{250};
};

/// POSTs {"input": [...], "model": ...} and reads data[].embedding.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);
  std::size_t dim() const override { return config_.dim; }
  std::string id() const override;
  std::vector<Vector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  HttpEmbeddingConfig config_;
};

/// Collapses whitespace runs to one space and trims.
std::string normalize_whitespace(std::string_view text);

/// Throws Error(Precondition) for blank text, Error(Configuration) when the
/// provider returns the wrong dimension, Error(EmbedTransport) for non-finite
/// output or transport failure.
Vector embed(EmbeddingProvider& provider, std::string_view text);

/// Computed in double precision. Throws Error(Configuration) on dimension
/// mismatch, Error(UndefinedSimilarity) if either norm is zero.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// ---------------------------------------------------------------------------
// Index

struct IndexMetadata {
  std::string embedder_id;
  std::int64_t build_timestamp = 0;  // unix seconds

  friend bool operator==(const IndexMetadata&, const IndexMetadata&) = default;
};

struct EmbeddedChunk {
  Chunk chunk;
  Vector vector;
  std::uint64_t ordinal = 0;

  friend bool operator==(const EmbeddedChunk&, const EmbeddedChunk&) = default;
};

class VectorIndex {
 public:
  VectorIndex() = default;
  VectorIndex(std::size_t dim, IndexMetadata metadata);

  /// Throws Error(Configuration) on dimension mismatch and Error(Validation)
  /// for non-finite or zero vectors.
  void add(Chunk chunk, Vector vector);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const IndexMetadata& metadata() const noexcept { return metadata_; }
  const std::vector<EmbeddedChunk>& entries() const noexcept { return entries_; }

  friend bool operator==(const VectorIndex&, const VectorIndex&) = default;

 private:
  friend VectorIndex deserialize_index(std::span<const std::uint8_t> bytes);

  std::size_t dim_ = 0;
  IndexMetadata metadata_;
  std::vector<EmbeddedChunk> entries_;
};

struct RetrievalResult {
  Chunk chunk;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
  std::size_t keyword_matches = 0;
  std::uint64_t ordinal = 0;
};

/// Exhaustive cosine scan. Ties keep insertion order. Throws
/// Error(Precondition) for k == 0, Error(Configuration) on dimension mismatch.
std::vector<RetrievalResult> index_search(const VectorIndex& index, std::span<const float> query,
                                          std::size_t k);

inline constexpr std::uint16_t kIndexFormatVersion = 1;

void save_index(const VectorIndex& index, const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_index(const VectorIndex& index);
/// Throws Error(IncompatibleIndex) on magic/version mismatch and
/// Error(CorruptIndex) on truncation or inconsistent content.
VectorIndex deserialize_index(std::span<const std::uint8_t> bytes);
VectorIndex load_index(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Keywords

using KeywordSet = std::set<std::string, std::less<>>;

bool is_stopword(std::string_view lowered);

/// Lower-cased tokens split on non-alphanumerics and camelCase boundaries,
/// keeping the compound. Stopwords, tokens under 3 chars and purely numeric
/// tokens are dropped.
KeywordSet extract_keywords(std::string_view text);

std::size_t count_keyword_matches(const KeywordSet& query, std::string_view text);

/// Picks the candidate with the most keyword matches, ties going to the
/// smallest rank. Throws Error(Precondition) for an empty candidate list.
RetrievalResult keyword_rerank(std::string_view apdu_text,
                               std::span<const RetrievalResult> candidates);

}  // namespace bacsum
