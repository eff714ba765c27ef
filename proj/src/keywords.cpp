#include <algorithm>
#include <array>
#include <cctype>

#include "bacsum/error.hpp"
#include "bacsum/retrieval.hpp"

namespace bacsum {
namespace {

// Sorted for binary search. Versioned with the repo; changing it changes
// retrieval results.
constexpr std::array<std::string_view, 121> kStopwords = {
    "about",   "above",   "after",   "again",   "against", "all",     "also",    "and",
    "any",     "are",     "because", "been",    "before",  "being",   "below",   "between",
    "both",    "but",     "can",     "cannot",  "could",   "did",     "does",    "doing",
    "down",    "during",  "each",    "either",  "else",    "etc",     "ever",    "every",
    "few",     "for",     "from",    "further", "had",     "has",     "have",    "having",
    "her",     "here",    "hers",    "herself", "him",     "himself", "his",     "how",
    "however", "into",    "its",     "itself",  "just",    "may",     "might",   "more",
    "most",    "must",    "myself",  "neither", "nor",     "not",     "now",     "off",
    "once",    "only",    "other",   "ought",   "our",     "ours",    "ourselves", "out",
    "over",    "own",     "same",    "shall",   "she",     "should",  "since",   "some",
    "such",    "than",    "that",    "the",     "their",   "theirs",  "them",    "themselves",
    "then",    "there",   "these",   "they",    "this",    "those",   "through", "thus",
    "too",     "under",   "until",   "upon",    "very",    "was",     "were",    "what",
    "when",    "where",   "whether", "which",   "while",   "who",     "whom",    "why",
    "will",    "with",    "within",  "without", "would",   "yet",     "you",     "your",
    "yours",
};
static_assert(std::is_sorted(kStopwords.begin(), kStopwords.end()));

bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80;
}
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void keep(KeywordSet& out, std::string_view token) {
  if (token.size() < 3) return;
  if (std::all_of(token.begin(), token.end(), is_digit)) return;
  std::string lowered = lower(token);
  if (is_stopword(lowered)) return;
  out.insert(std::move(lowered));
}

// "writePropertyMultiple" -> write, Property, Multiple; "COVNotification" -> COV, Notification.
void camel_parts(std::string_view token, KeywordSet& out) {
  std::size_t start = 0;
  for (std::size_t i = 1; i < token.size(); ++i) {
    const char prev = token[i - 1];
    const char cur = token[i];
    const bool lower_to_upper = is_lower(prev) && is_upper(cur);
    const bool acronym_end =
        is_upper(prev) && is_upper(cur) && i + 1 < token.size() && is_lower(token[i + 1]);
    const bool digit_edge = is_digit(prev) != is_digit(cur);
    if (lower_to_upper || acronym_end || digit_edge) {
      keep(out, token.substr(start, i - start));
      start = i;
    }
  }
  if (start > 0) keep(out, token.substr(start));
}

}  // namespace

bool is_stopword(std::string_view lowered) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), lowered);
}

KeywordSet extract_keywords(std::string_view text) {
  KeywordSet out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_alnum(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_alnum(text[j])) ++j;
    const std::string_view token = text.substr(i, j - i);
    keep(out, token);
    camel_parts(token, out);
    i = j;
  }
  return out;
}

std::size_t count_keyword_matches(const KeywordSet& query, std::string_view text) {
  const KeywordSet other = extract_keywords(text);
  std::size_t n = 0;
  for (const auto& k : query) n += other.count(k);
  return n;
}

RetrievalResult keyword_rerank(std::string_view apdu_text,
                               std::span<const RetrievalResult> candidates) {
  if (candidates.empty()) {
    throw Error(ErrorKind::Precondition, "keyword rerank needs at least one candidate");
  }
  const KeywordSet query = extract_keywords(apdu_text);
  const RetrievalResult* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& candidate : candidates) {
    const std::size_t count = count_keyword_matches(query, candidate.chunk.text);
    if (!best || count > best_count || (count == best_count && candidate.rank < best->rank)) {
      best = &candidate;
      best_count = count;
    }
  }
  RetrievalResult out = *best;
  out.keyword_matches = best_count;
  return out;
}

}  // namespace bacsum
