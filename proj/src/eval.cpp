#include "bacsum/eval.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "bacsum/error.hpp"

namespace bacsum {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

int parse_score(std::string_view field, std::string_view name, std::size_t line_no) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw Error(ErrorKind::Validation,
                fmt::format("row {}: {} '{}' is not an integer", line_no, name, field));
  }
  if (value < 1 || value > 5) {
    throw Error(ErrorKind::Validation,
                fmt::format("row {}: {} {} is outside [1, 5]", line_no, name, value));
  }
  return value;
}

}  // namespace

std::vector<RatingRecord> parse_ratings(std::string_view csv_text) {
  if (csv_text.starts_with("\xEF\xBB\xBF")) csv_text.remove_prefix(3);
  std::vector<RatingRecord> records;
  std::set<std::tuple<std::string, Mode, std::string>> seen;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < csv_text.size()) {
    auto eol = csv_text.find('\n', pos);
    if (eol == std::string_view::npos) eol = csv_text.size();
    const std::string_view line = trim(csv_text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kRatingsHeader) {
        throw Error(ErrorKind::Validation,
                    fmt::format("row {}: expected header '{}'", line_no, kRatingsHeader));
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 5) {
      throw Error(ErrorKind::Validation,
                  fmt::format("row {}: expected 5 fields, found {}", line_no, fields.size()));
    }
    RatingRecord r;
    r.packet_file_id = std::string(fields[0]);
    r.rater_id = std::string(fields[2]);
    if (r.packet_file_id.empty() || r.rater_id.empty()) {
      throw Error(ErrorKind::Validation,
                  fmt::format("row {}: packet_file_id and rater_id must not be empty", line_no));
    }
    const auto method = parse_mode(fields[1]);
    if (!method) {
      throw Error(ErrorKind::Validation,
                  fmt::format("row {}: method '{}' is not one of m1, m2, m3, m4", line_no, fields[1]));
    }
    r.method = *method;
    r.ca = parse_score(fields[3], "ca", line_no);
    r.ci = parse_score(fields[4], "ci", line_no);
    if (!seen.emplace(r.packet_file_id, r.method, r.rater_id).second) {
      throw Error(ErrorKind::DuplicateRating,
                  fmt::format("row {}: duplicate rating for ({}, {}, {})", line_no,
                              r.packet_file_id, to_string(r.method), r.rater_id));
    }
    records.push_back(std::move(r));
  }
  if (!header_seen) {
    throw Error(ErrorKind::Validation, fmt::format("missing header '{}'", kRatingsHeader));
  }
  return records;
}

std::vector<RatingRecord> load_ratings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open ratings '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_ratings(buffer.str());
}

std::vector<MethodScore> aggregate(std::span<const RatingRecord> records) {
  if (records.empty()) throw Error(ErrorKind::NoData, "no ratings to aggregate");
  // Integer sums keep the means independent of record order.
  struct Sums {
    long long ca = 0;
    long long ci = 0;
    std::size_t n = 0;
  };
  std::map<Mode, Sums> sums;
  for (const RatingRecord& r : records) {
    Sums& s = sums[r.method];
    s.ca += r.ca;
    s.ci += r.ci;
    ++s.n;
  }
  std::vector<MethodScore> scores;
  for (const auto& [method, s] : sums) {
    const double n = static_cast<double>(s.n);
    scores.push_back({method, static_cast<double>(s.ca) / n, static_cast<double>(s.ci) / n, s.n});
  }
  return scores;
}

std::string format_mean(double mean) {
  std::string text = fmt::format("{:.2f}", mean);
  while (text.back() == '0') text.pop_back();
  if (text.back() == '.') text.pop_back();
  return text;
}

std::string render_scores_table(std::span<const MethodScore> scores) {
  std::string out = fmt::format("{:<8}{:>6}{:>6}{:>6}\n", "Method", "CI", "CA", "n");
  for (const MethodScore& s : scores) {
    fmt::format_to(std::back_inserter(out), "{:<8}{:>6}{:>6}{:>6}\n", to_string(s.method),
                   format_mean(s.mean_ci), format_mean(s.mean_ca), s.n);
  }
  return out;
}

std::string scores_to_json(std::span<const MethodScore> scores, int indent) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const MethodScore& s : scores) {
    rows.push_back({{"method", to_string(s.method)},
                    {"mean_ci", s.mean_ci},
                    {"mean_ca", s.mean_ca},
                    {"ci_display", format_mean(s.mean_ci)},
                    {"ca_display", format_mean(s.mean_ca)},
                    {"n", s.n}});
  }
  return rows.dump(indent);
}

}  // namespace bacsum
