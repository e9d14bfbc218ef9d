#pragma once
// Internal helpers shared by the HTTP clients.

#include <string>
#include <string_view>

namespace ttbys::detail {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // always starts with '/'
};

/// Splits "http://host:8080/v1/x" into origin and path. A URL without a
/// scheme is treated as http.
SplitUrl split_url(std::string_view url);

}  // namespace ttbys::detail
