#include "relmatch/classify/backend.hpp"

#include "relmatch/errors.hpp"
#include "relmatch/net/http.hpp"

#include <json.hpp>

namespace relmatch::classify {

RemoteChatBackend::RemoteChatBackend(RemoteBackendConfig config)
    : config_(std::move(config)) {}

std::string RemoteChatBackend::id() const {
    return "remote:" + config_.model;
}

BackendResponse RemoteChatBackend::complete(const ClassificationRequest& request) {
    nlohmann::json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["messages"] = nlohmann::json::array({
        {{"role", "user"}, {"content", request.prompt}},
    });

    net::HttpResponse resp;
    try {
        resp = net::post_json(config_.endpoint, "/v1/chat/completions", config_.api_key,
                              body.dump());
    } catch (const net::TransportError& e) {
        throw BackendUnavailable(e.what());
    }
    if (resp.status < 200 || resp.status >= 300) {
        throw BackendUnavailable("chat backend returned HTTP " +
                                 std::to_string(resp.status) + ": " + resp.body);
    }

    std::string text;
    try {
        auto doc = nlohmann::json::parse(resp.body);
        text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendUnavailable(std::string("chat response malformed: ") + e.what());
    }
    if (text.empty()) {
        throw BackendUnavailable("chat backend returned an empty message");
    }
    return {std::move(text), core::Provenance::remote(config_.model)};
}

} // namespace relmatch::classify
