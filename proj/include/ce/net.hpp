#pragma once
// Shared HTTP plumbing: URL splitting and response-status classification.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <string>

#include "ce/errors.hpp"

namespace ce {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port], what httplib::Client wants
    std::string path;    // leading '/', possibly with query
};

inline ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("URL missing scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

// Maps a non-2xx response to the error taxonomy: auth errors fail fast,
// 429 carries the server-advised delay, timeouts and server errors retry.
[[noreturn]] inline void throw_for_status(int status, const std::string& context,
                                          const httplib::Response& res) {
    if (status == 401 || status == 403) throw AuthError(context + ": authentication failed");
    if (status == 429) {
        RateLimitError err(context + ": rate limited");
        if (res.has_header("Retry-After")) {
            try {
                long secs = std::stol(res.get_header_value("Retry-After"));
                if (secs >= 0) err.advised_delay = std::chrono::milliseconds(secs * 1000);
            } catch (...) {
                // HTTP-date form; fall back to computed backoff
            }
        }
        throw err;
    }
    if (status == 408 || status >= 500)
        throw NetworkError(context + ": server returned " + std::to_string(status));
    throw HttpStatusError(context, status);
}

[[noreturn]] inline void throw_for_transport(httplib::Error err, const std::string& context) {
    throw NetworkError(context + ": " + httplib::to_string(err));
}

}  // namespace ce
