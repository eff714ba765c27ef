#pragma once

#include <string>
#include <utility>

#include <fmt/format.h>

#include "bacsum/error.hpp"

namespace bacsum {

// Splits "http://host:port/v1/x" into ("http://host:port", "/v1/x").
inline std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos ||
      (url.compare(0, scheme_end, "http") != 0 && url.compare(0, scheme_end, "https") != 0)) {
    throw Error(ErrorKind::Configuration, fmt::format("unsupported endpoint URL '{}'", url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == scheme_end + 3) {
    throw Error(ErrorKind::Configuration, fmt::format("endpoint URL '{}' has no host", url));
  }
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace bacsum
