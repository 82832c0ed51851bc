#pragma once

#include <chrono>
#include <string>
#include <utility>

namespace limra::detail {

/// Splits "http://host:port/path" into ("http://host:port", "/path").
std::pair<std::string, std::string> split_url(const std::string& url);

struct HttpResult {
  int status = 0;
  std::string body;
};

/// POSTs JSON, retrying transport failures and 5xx with exponential backoff.
/// Throws TransportError when every attempt fails.
HttpResult post_json_with_retry(const std::string& base, const std::string& path, const std::string& body,
                                std::chrono::milliseconds timeout, int retries, std::chrono::milliseconds backoff);

}  // namespace limra::detail
