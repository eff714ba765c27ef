#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "bacsum/capture.hpp"
#include "bacsum/error.hpp"
#include "bacsum/retrieval.hpp"

namespace bacsum {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'P', 'S', 'I', 'X'};

class Writer {
 public:
  void bytes(std::span<const std::uint8_t> data) { out_.insert(out_.end(), data.begin(), data.end()); }
  template <typename T>
  void le(T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void f32(float value) { le(std::bit_cast<std::uint32_t>(value)); }
  void str(std::string_view s) {
    le(static_cast<std::uint32_t>(s.size()));
    bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::span<const std::uint8_t> bytes(std::size_t n, std::string_view what) {
    if (data_.size() - pos_ < n) {
      throw Error(ErrorKind::CorruptIndex,
                  fmt::format("index truncated reading {} at offset {}", what, pos_));
    }
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  template <typename T>
  T le(std::string_view what) {
    auto b = bytes(sizeof(T), what);
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<decltype(u)>(b[i]) << (8 * i);
    return static_cast<T>(u);
  }
  float f32(std::string_view what) { return std::bit_cast<float>(le<std::uint32_t>(what)); }
  std::string str(std::string_view what) {
    const auto n = le<std::uint32_t>(what);
    auto b = bytes(n, what);
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
  }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t offset() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void check_vector(std::span<const float> v, std::size_t dim) {
  if (v.size() != dim) {
    throw Error(ErrorKind::Configuration,
                fmt::format("vector dimension {} does not match index dimension {}", v.size(), dim));
  }
  bool nonzero = false;
  for (float x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::Validation, "vector has a non-finite component");
    nonzero = nonzero || x != 0.0f;
  }
  if (!nonzero) throw Error(ErrorKind::Validation, "vector is all zeros");
}

}  // namespace

VectorIndex::VectorIndex(std::size_t dim, IndexMetadata metadata)
    : dim_(dim), metadata_(std::move(metadata)) {
  if (dim == 0) throw Error(ErrorKind::Configuration, "index dimension must be positive");
}

void VectorIndex::add(Chunk chunk, Vector vector) {
  check_vector(vector, dim_);
  const auto ordinal = static_cast<std::uint64_t>(entries_.size());
  entries_.push_back(EmbeddedChunk{std::move(chunk), std::move(vector), ordinal});
}

std::vector<RetrievalResult> index_search(const VectorIndex& index, std::span<const float> query,
                                          std::size_t k) {
  if (k == 0) throw Error(ErrorKind::Precondition, "search requires k >= 1");
  if (index.empty()) return {};
  if (query.size() != index.dim()) {
    throw Error(ErrorKind::Configuration,
                fmt::format("query dimension {} does not match index dimension {}", query.size(),
                            index.dim()));
  }
  const auto& entries = index.entries();
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    scored.emplace_back(cosine_similarity(query, entries[i].vector), i);
  }
  const std::size_t n = std::min(k, scored.size());
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    better);

  std::vector<RetrievalResult> results;
  results.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const EmbeddedChunk& e = entries[scored[r].second];
    results.push_back(RetrievalResult{e.chunk, scored[r].first, r + 1, 0, e.ordinal});
  }
  return results;
}

std::vector<std::uint8_t> serialize_index(const VectorIndex& index) {
  Writer w;
  w.bytes(kMagic);
  w.le(kIndexFormatVersion);
  w.le(static_cast<std::uint32_t>(index.dim()));
  w.le(static_cast<std::uint64_t>(index.size()));
  w.str(index.metadata().embedder_id);
  w.le(index.metadata().build_timestamp);
  for (const EmbeddedChunk& e : index.entries()) {
    w.bytes(e.chunk.id);
    w.le(e.ordinal);
    for (float x : e.vector) w.f32(x);
    w.str(e.chunk.text);
    w.str(e.chunk.source);
    w.str(e.chunk.section_path);
    w.le(static_cast<std::uint64_t>(e.chunk.span.start));
    w.le(static_cast<std::uint64_t>(e.chunk.span.end));
  }
  return w.take();
}

VectorIndex deserialize_index(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorKind::IncompatibleIndex, "not an index file (bad magic)");
  }
  Reader r(bytes);
  r.bytes(kMagic.size(), "magic");
  const auto version = r.le<std::uint16_t>("format version");
  if (version != kIndexFormatVersion) {
    throw Error(ErrorKind::IncompatibleIndex,
                fmt::format("index format version {} is not supported (expected {})", version,
                            kIndexFormatVersion));
  }
  const auto dim = r.le<std::uint32_t>("dimension");
  const auto count = r.le<std::uint64_t>("entry count");
  IndexMetadata metadata;
  metadata.embedder_id = r.str("embedder id");
  metadata.build_timestamp = r.le<std::int64_t>("build timestamp");
  if (dim == 0) throw Error(ErrorKind::CorruptIndex, "index dimension is zero");

  // Each entry needs at least id + ordinal + vector + 3 length prefixes + span.
  const std::uint64_t min_entry = 32 + 8 + 4ULL * dim + 12 + 16;
  if (count > r.remaining() / min_entry) {
    throw Error(ErrorKind::CorruptIndex,
                fmt::format("index declares {} entries but only {} bytes remain", count,
                            r.remaining()));
  }

  VectorIndex index;
  index.dim_ = dim;
  index.metadata_ = std::move(metadata);
  index.entries_.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    EmbeddedChunk e;
    auto id = r.bytes(32, "chunk id");
    std::copy(id.begin(), id.end(), e.chunk.id.begin());
    e.ordinal = r.le<std::uint64_t>("ordinal");
    if (e.ordinal != i) {
      throw Error(ErrorKind::CorruptIndex,
                  fmt::format("entry {} has insertion ordinal {}", i, e.ordinal));
    }
    e.vector.resize(dim);
    for (auto& x : e.vector) x = r.f32("vector");
    e.chunk.text = r.str("chunk text");
    e.chunk.source = r.str("chunk source");
    e.chunk.section_path = r.str("section path");
    e.chunk.span.start = r.le<std::uint64_t>("span start");
    e.chunk.span.end = r.le<std::uint64_t>("span end");
    if (chunk_id(e.chunk.source, e.chunk.span, e.chunk.text) != e.chunk.id) {
      throw Error(ErrorKind::CorruptIndex, fmt::format("entry {} fails its content hash", i));
    }
    index.entries_.push_back(std::move(e));
  }
  if (r.remaining() != 0) {
    throw Error(ErrorKind::CorruptIndex,
                fmt::format("{} trailing bytes after the last entry", r.remaining()));
  }
  return index;
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
  const auto bytes = serialize_index(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write index '{}'", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, fmt::format("failed writing index '{}'", path.string()));
}

VectorIndex load_index(const std::filesystem::path& path) {
  return deserialize_index(read_file_bytes(path));
}

}  // namespace bacsum
