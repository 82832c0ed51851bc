#include "http_util.hpp"

#include <thread>

#include <httplib.h>

#include "limra/error.hpp"

namespace limra::detail {

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto host_start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

HttpResult post_json_with_retry(const std::string& base, const std::string& path, const std::string& body,
                                std::chrono::milliseconds timeout, int retries, std::chrono::milliseconds backoff) {
  httplib::Client client(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const int max_attempts = std::max(0, retries) + 1;
  std::string last_failure;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff * (1 << (attempt - 1)));
    auto result = client.Post(path, body, "application/json");
    if (!result) {
      last_failure = "transport failure contacting " + base + ": " + httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 500) {
      last_failure = "server error " + std::to_string(result->status) + " from " + base;
      continue;
    }
    return {result->status, result->body};
  }
  throw TransportError(last_failure, max_attempts);
}

}  // namespace limra::detail
