#include <algorithm>
#include <cctype>
#include <optional>

#include <fmt/format.h>

#include "bacsum/error.hpp"
#include "bacsum/retrieval.hpp"

namespace bacsum {
namespace {

enum class Level { Paragraph, Sentence, Hard };

struct Section {
  CharSpan span;
  std::string path;
};

bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Returns the heading level (1-6) of an ATX heading line, or 0.
int heading_level(std::string_view line) {
  int level = 0;
  while (level < static_cast<int>(line.size()) && line[level] == '#') ++level;
  if (level == 0 || level > 6) return 0;
  if (static_cast<std::size_t>(level) < line.size() && line[level] != ' ' && line[level] != '\t') {
    return 0;
  }
  return level;
}

std::vector<Section> split_sections(std::string_view text) {
  std::vector<Section> sections;
  std::vector<std::pair<int, std::string>> trail;
  auto path = [&] {
    std::string out;
    for (const auto& [level, title] : trail) {
      if (!out.empty()) out += " > ";
      out += title;
    }
    return out;
  };

  std::size_t section_start = 0;
  std::string current_path;
  bool in_fence = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    if (line.starts_with("```") || line.starts_with("~~~")) in_fence = !in_fence;
    if (const int level = in_fence ? 0 : heading_level(line); level > 0) {
      if (pos > section_start) sections.push_back({{section_start, pos}, current_path});
      while (!trail.empty() && trail.back().first >= level) trail.pop_back();
      std::string_view title = trim(line.substr(static_cast<std::size_t>(level)));
      while (!title.empty() && title.back() == '#') title.remove_suffix(1);
      trail.emplace_back(level, std::string(trim(title)));
      current_path = path();
      section_start = pos;
    }
    pos = eol + 1;
  }
  if (text.size() > section_start) sections.push_back({{section_start, text.size()}, current_path});
  return sections;
}

std::vector<std::size_t> break_points(std::string_view text, CharSpan span, Level level) {
  std::vector<std::size_t> breaks;
  std::size_t i = span.start;
  while (i < span.end) {
    std::size_t next = std::string_view::npos;
    if (level == Level::Paragraph) {
      if (text[i] == '\n' && i + 1 < span.end && text[i + 1] == '\n') {
        next = i + 2;
        while (next < span.end && text[next] == '\n') ++next;
      }
    } else if (text[i] == '.' || text[i] == '!' || text[i] == '?') {
      if (i + 1 < span.end && std::isspace(static_cast<unsigned char>(text[i + 1]))) {
        next = i + 1;
        while (next < span.end && std::isspace(static_cast<unsigned char>(text[next]))) ++next;
      }
    }
    if (next != std::string_view::npos) {
      if (next < span.end) breaks.push_back(next);
      i = next;
    } else {
      ++i;
    }
  }
  return breaks;
}

void hard_split(std::string_view text, CharSpan span, const ChunkingConfig& config,
                std::vector<CharSpan>& out) {
  std::size_t start = span.start;
  while (true) {
    std::size_t end = std::min(start + config.max_chunk_chars, span.end);
    while (end < span.end && end > start + 1 && is_continuation(text[end])) --end;
    out.push_back({start, end});
    if (end == span.end) return;
    std::size_t next = end > config.overlap_chars ? end - config.overlap_chars : span.start;
    while (next > span.start && is_continuation(text[next])) --next;
    start = next > start ? next : end;
  }
}

void split(std::string_view text, CharSpan span, Level level, const ChunkingConfig& config,
           std::vector<CharSpan>& out) {
  if (span.size() <= config.max_chunk_chars) {
    out.push_back(span);
    return;
  }
  if (level == Level::Hard) {
    hard_split(text, span, config, out);
    return;
  }
  const Level finer = level == Level::Paragraph ? Level::Sentence : Level::Hard;
  const auto breaks = break_points(text, span, level);
  if (breaks.empty()) {
    split(text, span, finer, config, out);
    return;
  }

  std::optional<CharSpan> pending;
  auto flush = [&] {
    if (pending) out.push_back(*pending);
    pending.reset();
  };
  std::size_t seg_start = span.start;
  for (std::size_t k = 0; k <= breaks.size(); ++k) {
    const CharSpan seg{seg_start, k < breaks.size() ? breaks[k] : span.end};
    seg_start = seg.end;
    if (seg.size() > config.max_chunk_chars) {
      flush();
      split(text, seg, finer, config, out);
    } else if (pending && seg.end - pending->start <= config.max_chunk_chars) {
      pending->end = seg.end;
    } else {
      flush();
      pending = seg;
    }
  }
  flush();
}

}  // namespace

Sha256Digest chunk_id(std::string_view source, CharSpan span, std::string_view text) {
  std::string material = fmt::format("{}\n{}:{}\n", source, span.start, span.end);
  material += text;
  return sha256(material);
}

std::vector<Chunk> chunk_document(std::string_view text, std::string_view source,
                                  const ChunkingConfig& config) {
  if (config.max_chunk_chars == 0 || config.max_chunk_chars <= config.overlap_chars) {
    throw Error(ErrorKind::Precondition,
                fmt::format("chunking requires max_chunk_chars > overlap_chars (got {} / {})",
                            config.max_chunk_chars, config.overlap_chars));
  }
  std::vector<Chunk> chunks;
  for (const Section& section : split_sections(text)) {
    std::vector<CharSpan> spans;
    split(text, section.span, Level::Paragraph, config, spans);
    for (const CharSpan& span : spans) {
      const std::string_view body = text.substr(span.start, span.size());
      if (is_blank(body)) continue;
      Chunk chunk;
      chunk.text = std::string(body);
      chunk.source = std::string(source);
      chunk.section_path = section.path;
      chunk.span = span;
      chunk.id = chunk_id(source, span, body);
      chunks.push_back(std::move(chunk));
    }
  }
  return chunks;
}

}  // namespace bacsum
