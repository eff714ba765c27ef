#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bacsum/context.hpp"

namespace bacsum {

struct RatingRecord {
  std::string packet_file_id;
  Mode method = Mode::M1NoContext;
  std::string rater_id;
  int ca = 0;  // control accuracy, 1..5
  int ci = 0;  // control informativeness, 1..5

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

struct MethodScore {
  Mode method = Mode::M1NoContext;
  double mean_ca = 0.0;
  double mean_ci = 0.0;
  std::size_t n = 0;
};

inline constexpr std::string_view kRatingsHeader = "packet_file_id,method,rater_id,ca,ci";

/// Errors name the 1-based line number: Validation for bad rows,
/// DuplicateRating for a repeated (packet_file_id, method, rater_id).
std::vector<RatingRecord> parse_ratings(std::string_view csv_text);
std::vector<RatingRecord> load_ratings(const std::filesystem::path& path);

/// One score per method present, ordered m1..m4. Throws Error(NoData).
std::vector<MethodScore> aggregate(std::span<const RatingRecord> records);

/// Rounds to 2 decimals and drops trailing zeros: 4.6, 3.18, 5.
std::string format_mean(double mean);

/// Aligned plain-text table, columns Method, CI, CA, n.
std::string render_scores_table(std::span<const MethodScore> scores);
std::string scores_to_json(std::span<const MethodScore> scores, int indent = 2);

}  // namespace bacsum
