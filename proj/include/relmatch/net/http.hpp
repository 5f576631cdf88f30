#pragma once

#include <stdexcept>
#include <string>

namespace relmatch::net {

/// Connection-level failure (DNS, refused, timeout). Retryable.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// POSTs a JSON body to `base_url` + `path` with a bearer token. `base_url`
/// is scheme://host[:port]. Throws TransportError when no response arrives.
HttpResponse post_json(const std::string& base_url, const std::string& path,
                       const std::string& api_key, const std::string& body);

} // namespace relmatch::net
