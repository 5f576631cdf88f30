#include "relmatch/classify/matcher.hpp"

#include "relmatch/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace relmatch::classify {

std::vector<core::RelationVerdict> classify_batch(const ClassificationRequest& request,
                                                  const ClassifyEnv& env) {
    if (request.candidate_ids.empty()) {
        return {};
    }

    const std::string key = cache_key(request.prompt, request.model_hint);
    if (env.cache != nullptr) {
        if (auto hit = env.cache->lookup(key)) {
            for (auto& verdict : hit->verdicts) {
                verdict.provenance = core::Provenance::cache();
            }
            return hit->verdicts;
        }
    }

    if (env.backend == nullptr) {
        throw BackendUnavailable("no classification backend configured");
    }

    const int attempts = std::max(1, env.retry.attempts);
    auto backoff = env.retry.initial_backoff;
    BackendResponse response;
    for (int attempt = 1;; ++attempt) {
        try {
            response = env.backend->complete(request);
            break;
        } catch (const BackendUnavailable&) {
            if (attempt >= attempts) {
                throw;
            }
            if (env.retry.sleep_fn) {
                env.retry.sleep_fn(backoff);
            } else {
                std::this_thread::sleep_for(backoff);
            }
            backoff = std::chrono::milliseconds(static_cast<long long>(
                std::llround(static_cast<double>(backoff.count()) * env.retry.multiplier)));
        }
    }

    std::vector<core::RelationVerdict> verdicts;
    try {
        verdicts = parse_response(response, request);
    } catch (const ParseError&) {
        if (env.cache != nullptr) {
            env.cache->store_failure(key, response.raw_text);
        }
        throw;
    }

    if (env.cache != nullptr) {
        env.cache->store(key, CachedVerdicts{verdicts});
    }
    return verdicts;
}

PagedRetriever::PagedRetriever(const index::VectorIndex& index, index::EmbeddingVector probe,
                               std::size_t k)
    : index_(index), probe_(std::move(probe)), k_(k) {
    if (k_ == 0) {
        throw InvalidPolicy("retrieval batch size must be positive");
    }
}

const index::CandidateBatch& PagedRetriever::batch(std::size_t n) {
    while (fetched_.size() <= n) {
        const std::size_t next = fetched_.size();
        fetched_.push_back(index_.query_topk(probe_, k_, next * k_));
    }
    return fetched_[n];
}

bool PagedRetriever::exhausted_after(std::size_t n) const {
    return (n + 1) * k_ >= index_.size();
}

std::vector<std::pair<std::string, double>> PagedRetriever::retrieved() const {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& batch : fetched_) {
        out.insert(out.end(), batch.candidates.begin(), batch.candidates.end());
    }
    return out;
}

namespace {

std::vector<core::EntityRecord> resolve_candidates(const index::CandidateBatch& batch,
                                                   const core::EntityTable& targets) {
    std::vector<core::EntityRecord> records;
    records.reserve(batch.candidates.size());
    for (const auto& [id, distance] : batch.candidates) {
        (void)distance;
        const core::EntityRecord* record = targets.find(id);
        if (record == nullptr) {
            throw UnknownNode("index candidate '" + id + "' is not in the target table");
        }
        records.push_back(*record);
    }
    return records;
}

} // namespace

RelationMatchResult match_relation(const core::EntityRecord& source,
                                   const core::RelationSpec& relation,
                                   PagedRetriever& retriever,
                                   const core::EntityTable& targets,
                                   const RetrievalPolicy& policy,
                                   const ClassifyEnv& env) {
    validate_policy(policy);
    RelationMatchResult result;
    const std::string model_hint = env.backend != nullptr ? env.backend->id() : std::string{};

    for (std::size_t b = 0; b < policy.max_batches; ++b) {
        const index::CandidateBatch& batch = retriever.batch(b);
        if (batch.candidates.empty()) {
            break;
        }
        result.stats.batches_fetched = b + 1;
        result.stats.candidates_examined += batch.candidates.size();

        ClassificationRequest request =
            build_prompt(source, resolve_candidates(batch, targets), relation, model_hint);
        std::vector<core::RelationVerdict> verdicts;
        try {
            verdicts = classify_batch(request, env);
        } catch (const ParseError& e) {
            result.stats.failed = true;
            result.stats.failure = e.what();
            break;
        }

        const auto confirmed = static_cast<std::size_t>(
            std::count_if(verdicts.begin(), verdicts.end(),
                          [](const core::RelationVerdict& v) { return v.decision; }));
        result.verdicts.insert(result.verdicts.end(), verdicts.begin(), verdicts.end());

        const double fraction =
            static_cast<double>(confirmed) / static_cast<double>(batch.candidates.size());
        if (fraction < policy.continuation_threshold || retriever.exhausted_after(b)) {
            break;
        }
    }
    return result;
}

std::vector<core::RelationVerdict> naive_match(const core::EntityRecord& source,
                                               const std::vector<core::EntityRecord>& candidates,
                                               const ClassifyEnv& env) {
    const std::string model_hint = env.backend != nullptr ? env.backend->id() : std::string{};
    return classify_batch(build_naive_prompt(source, candidates, model_hint), env);
}

std::vector<core::RelationVerdict>
RunOutcome::all_verdicts(const core::RelationCatalog& catalog) const {
    std::vector<core::RelationVerdict> out;
    for (const auto& source : sources) {
        for (const core::RelationSpec* relation : catalog.by_priority()) {
            auto it = source.by_relation.find(relation->id);
            if (it == source.by_relation.end()) {
                continue;
            }
            out.insert(out.end(), it->second.verdicts.begin(), it->second.verdicts.end());
        }
    }
    return out;
}

std::size_t RunOutcome::failed_pairs() const {
    std::size_t n = 0;
    for (const auto& source : sources) {
        for (const auto& [relation_id, result] : source.by_relation) {
            (void)relation_id;
            if (result.stats.failed) {
                ++n;
            }
        }
    }
    return n;
}

std::size_t RunOutcome::total_pairs() const {
    std::size_t n = 0;
    for (const auto& source : sources) {
        n += source.by_relation.size();
    }
    return n;
}

RunOutcome match_all(const core::EntityTable& sources, const core::EntityTable& targets,
                     const index::VectorIndex& target_index,
                     const core::RelationCatalog& catalog, const RetrievalPolicy& policy,
                     const ClassifyEnv& env, const ProbeFn& probe_fn,
                     std::size_t jobs) {
    validate_policy(policy);
    core::validate_catalog(catalog);

    // Probes are computed up front on one thread so embedding providers need
    // no concurrency guarantees; only classification fans out.
    std::vector<index::EmbeddingVector> probes;
    probes.reserve(sources.records.size());
    for (const auto& record : sources.records) {
        probes.push_back(probe_fn(record));
    }

    RunOutcome outcome;
    outcome.sources.resize(sources.records.size());

    const auto relations = catalog.by_priority();
    auto process_source = [&](std::size_t i) {
        const core::EntityRecord& record = sources.records[i];
        SourceOutcome& slot = outcome.sources[i];
        slot.source_id = record.id;
        PagedRetriever retriever(target_index, probes[i], policy.k);
        for (const core::RelationSpec* relation : relations) {
            slot.by_relation.emplace(
                relation->id,
                match_relation(record, *relation, retriever, targets, policy, env));
        }
        slot.retrieved = retriever.retrieved();
    };

    const std::size_t worker_count =
        std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(sources.records.size(), 1));
    if (worker_count <= 1) {
        for (std::size_t i = 0; i < sources.records.size(); ++i) {
            process_source(i);
        }
        return outcome;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!stop.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= sources.records.size()) {
                return;
            }
            try {
                process_source(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                stop.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) {
        pool.emplace_back(worker);
    }
    for (auto& thread : pool) {
        thread.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return outcome;
}

} // namespace relmatch::classify
