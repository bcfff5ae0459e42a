#pragma once

#include <string>
#include <string_view>

namespace tqa {

// "http://host:8080/v1/x" -> {"http://host:8080", "/v1/x"}. Path has no
// trailing slash; it is empty when the URL has none.
struct Url {
  std::string scheme_host_port;
  std::string path;
};

inline Url parse_url(std::string_view url) {
  Url out;
  const auto scheme_end = url.find("://");
  const std::size_t host_start = scheme_end == std::string_view::npos ? 0 : scheme_end + 3;
  const auto slash = url.find('/', host_start);
  if (slash == std::string_view::npos) {
    out.scheme_host_port = std::string(url);
    return out;
  }
  out.scheme_host_port = std::string(url.substr(0, slash));
  std::string_view path = url.substr(slash);
  while (!path.empty() && path.back() == '/') path.remove_suffix(1);
  out.path = std::string(path);
  return out;
}

}  // namespace tqa
