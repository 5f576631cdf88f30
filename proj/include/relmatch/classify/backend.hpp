#pragma once

#include "relmatch/classify/prompt.hpp"
#include "relmatch/core/verdict.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <string>

namespace relmatch::classify {

struct BackendResponse {
    std::string raw_text;
    core::Provenance provenance;
};

/// Chat-completion backend. Implementations signal transport-level failure
/// by throwing BackendUnavailable; classify_batch retries those.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    virtual std::string id() const = 0;
    virtual BackendResponse complete(const ClassificationRequest& request) = 0;
};

/// Retry schedule for transport failures. Parse failures are never retried.
struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    double multiplier = 2.0;
    /// Injection point so tests run without real sleeps.
    std::function<void(std::chrono::milliseconds)> sleep_fn;
};

/// Counts completions that actually reach the wrapped backend.
class CountingBackend : public ChatBackend {
public:
    explicit CountingBackend(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}

    std::string id() const override { return inner_->id(); }
    BackendResponse complete(const ClassificationRequest& request) override {
        ++calls_;
        return inner_->complete(request);
    }

    std::size_t calls() const { return calls_.load(); }

private:
    std::shared_ptr<ChatBackend> inner_;
    std::atomic<std::size_t> calls_{0};
};

struct RemoteBackendConfig {
    std::string endpoint; // e.g. "https://api.openai.com"
    std::string model = "gpt-4";
    std::string api_key; // from RELMATCH_API_KEY
    double temperature = 0.0;
};

/// HTTP backend speaking the common `/v1/chat/completions` shape. One attempt
/// per complete() call; retrying is classify_batch's job.
class RemoteChatBackend : public ChatBackend {
public:
    explicit RemoteChatBackend(RemoteBackendConfig config);

    std::string id() const override;
    BackendResponse complete(const ClassificationRequest& request) override;

private:
    RemoteBackendConfig config_;
};

} // namespace relmatch::classify
