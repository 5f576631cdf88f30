#include "relmatch/net/http.hpp"

#include <httplib.h>

namespace relmatch::net {

HttpResponse post_json(const std::string& base_url, const std::string& path,
                       const std::string& api_key, const std::string& body) {
    httplib::Client client(base_url);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);

    httplib::Headers headers;
    if (!api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key);
    }

    auto result = client.Post(path, headers, body, "application/json");
    if (!result) {
        throw TransportError("POST " + base_url + path + " failed: " +
                             httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

} // namespace relmatch::net
