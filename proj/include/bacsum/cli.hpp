#pragma once

#include <ostream>

namespace bacsum {

/// Entry point of the `bacsum` tool. Returns the process exit code:
/// 0 success, 1 usage/config, 2 input format, 3 external service.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bacsum
