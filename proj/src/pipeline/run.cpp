#include "relmatch/pipeline/run.hpp"

#include "relmatch/classify/backend.hpp"
#include "relmatch/classify/cache.hpp"
#include "relmatch/classify/matcher.hpp"
#include "relmatch/core/entity.hpp"
#include "relmatch/core/relation.hpp"
#include "relmatch/errors.hpp"
#include "relmatch/harness/metrics.hpp"
#include "relmatch/harness/mock_embed.hpp"
#include "relmatch/harness/oracle.hpp"
#include "relmatch/index/embedding.hpp"
#include "relmatch/index/vector_index.hpp"
#include "relmatch/pipeline/report.hpp"
#include "relmatch/resolve/cascade.hpp"
#include "relmatch/util/fs.hpp"
#include "relmatch/util/hash.hpp"

#include <json.hpp>

#include <cstdlib>
#include <memory>
#include <ostream>
#include <set>

namespace relmatch::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

IndexManifest load_manifest(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(util::read_file(path));
        IndexManifest manifest;
        manifest.provider = doc.at("provider").get<std::string>();
        manifest.model = doc.at("model").get<std::string>();
        manifest.dimension = doc.at("dimension").get<std::size_t>();
        manifest.rows = doc.at("rows").get<std::size_t>();
        manifest.source_csv_sha256 = doc.at("source_csv_sha256").get<std::string>();
        return manifest;
    } catch (const json::exception& e) {
        throw IoFailure("manifest " + path.string() + " is not readable: " + e.what());
    }
}

void save_manifest(const IndexManifest& manifest, const std::filesystem::path& path) {
    ordered_json doc{
        {"provider", manifest.provider},
        {"model", manifest.model},
        {"dimension", manifest.dimension},
        {"rows", manifest.rows},
        {"source_csv_sha256", manifest.source_csv_sha256},
    };
    util::write_file_atomic(path, doc.dump(2) + "\n");
}

namespace {

std::string api_key_from_env() {
    const char* key = std::getenv("RELMATCH_API_KEY");
    if (key == nullptr || *key == '\0') {
        throw Error("RELMATCH_API_KEY is not set; remote access needs an API key");
    }
    return key;
}

std::shared_ptr<index::EmbeddingProvider> make_provider(const ProviderConfig& config) {
    if (config.kind == "local-det") {
        return std::make_shared<index::DeterministicLocalProvider>(config.local_dim,
                                                                   config.local_seed);
    }
    if (config.kind == "remote") {
        if (config.endpoint.empty()) {
            throw Error("remote embedding provider needs --embed-endpoint");
        }
        index::RemoteProviderConfig remote;
        remote.endpoint = config.endpoint;
        remote.model = config.model;
        remote.api_key = api_key_from_env();
        return std::make_shared<index::RemoteEmbeddingProvider>(remote);
    }
    throw Error("unknown embedding provider '" + config.kind + "' (use local-det or remote)");
}

std::string provider_model_name(const ProviderConfig& config) {
    return config.kind == "remote" ? config.model : config.kind;
}

int report_error(std::ostream& err, const std::string& what, int code) {
    err << "error: " << what << "\n";
    return code;
}

} // namespace

int run_index(const IndexArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const std::string csv_bytes = util::read_file(args.targets_csv);
        const std::string csv_sha = util::sha256_hex(csv_bytes);
        const core::EntityTable targets = core::parse_table(csv_bytes, "targets");

        auto provider = make_provider(args.provider);
        const std::string provider_id = provider->id();

        std::filesystem::create_directories(args.out_dir);
        const auto manifest_path = args.out_dir / "manifest.json";
        const auto index_path = args.out_dir / "index.bin";
        const auto csv_copy_path = args.out_dir / "targets.csv";

        if (!args.force && std::filesystem::exists(manifest_path) &&
            std::filesystem::exists(index_path) && std::filesystem::exists(csv_copy_path)) {
            try {
                const IndexManifest existing = load_manifest(manifest_path);
                if (existing.provider == provider_id &&
                    existing.source_csv_sha256 == csv_sha) {
                    out << "index up to date (" << existing.rows << " rows, dimension "
                        << existing.dimension << "), nothing to do\n";
                    return kExitOk;
                }
            } catch (const Error&) {
                // Unreadable manifest: fall through and rebuild.
            }
        }

        index::CachingProvider caching(provider);
        std::vector<index::VectorIndex::Entry> entries;
        entries.reserve(targets.records.size());
        for (const auto& record : targets.records) {
            entries.emplace_back(record.id,
                                 caching.embed(index::serialize_entity(record, targets.schema)));
        }
        const index::VectorIndex built = index::VectorIndex::build(std::move(entries));
        index::save_index(built, index_path);
        util::write_file_atomic(csv_copy_path, csv_bytes);
        save_manifest(IndexManifest{provider_id, provider_model_name(args.provider),
                                    built.dimension(), built.size(), csv_sha},
                      manifest_path);
        out << "indexed " << built.size() << " rows (dimension " << built.dimension()
            << ") into " << args.out_dir.string() << "\n";
        return kExitOk;
    } catch (const ProviderUnavailable& e) {
        return report_error(err, e.what(), kExitBackend);
    } catch (const Error& e) {
        return report_error(err, e.what(), kExitConfig);
    }
}

namespace {

classify::ProbeFn make_probe_fn(const MatchArgs& args, const IndexManifest& manifest,
                                const index::VectorIndex& target_index,
                                const core::EntityTable& sources,
                                std::shared_ptr<void>& keep_alive) {
    if (!args.source_vectors.empty()) {
        const index::VectorIndex vectors = index::load_index(args.source_vectors);
        if (vectors.dimension() != target_index.dimension()) {
            throw DimensionMismatch("source vectors have dimension " +
                                    std::to_string(vectors.dimension()) +
                                    " but the index has dimension " +
                                    std::to_string(target_index.dimension()));
        }
        auto by_id = std::make_shared<std::map<std::string, index::EmbeddingVector>>();
        for (const auto& [id, vector] : vectors.entries()) {
            by_id->emplace(id, vector);
        }
        for (const auto& record : sources.records) {
            if (by_id->count(record.id) == 0) {
                throw Error("no precomputed vector for source '" + record.id + "' in " +
                            args.source_vectors.string());
            }
        }
        keep_alive = by_id;
        return [by_id](const core::EntityRecord& record) { return by_id->at(record.id); };
    }

    auto provider = make_provider(args.provider);
    if (provider->id() != manifest.provider) {
        throw Error("embeddings incomparable: index was built by provider '" +
                    manifest.provider + "' but '" + provider->id() +
                    "' is configured; rebuild the index or fix the provider flags");
    }
    auto caching = std::make_shared<index::CachingProvider>(provider);
    keep_alive = caching;
    return [caching](const core::EntityRecord& record) {
        return caching->embed(index::serialize_entity(record));
    };
}

std::shared_ptr<classify::ChatBackend> make_backend(const BackendConfig& config) {
    if (config.kind == "oracle") {
        if (config.truth_path.empty()) {
            throw Error("the oracle backend needs --truth <ground truth JSON>");
        }
        return std::make_shared<harness::OracleBackend>(harness::load_truth(config.truth_path));
    }
    if (config.kind == "remote") {
        if (config.endpoint.empty()) {
            throw Error("the remote backend needs --endpoint");
        }
        classify::RemoteBackendConfig remote;
        remote.endpoint = config.endpoint;
        remote.model = config.model;
        remote.api_key = api_key_from_env();
        return std::make_shared<classify::RemoteChatBackend>(remote);
    }
    throw Error("unknown backend '" + config.kind + "' (use remote or oracle)");
}

} // namespace

int run_match(const MatchArgs& args, std::ostream& out, std::ostream& err) {
    try {
        classify::validate_policy(args.policy);
        const core::RelationCatalog catalog = core::load_catalog(args.catalog_path);
        const core::EntityTable sources = core::load_table(args.sources_csv, "sources");

        const IndexManifest manifest = load_manifest(args.index_dir / "manifest.json");
        const index::VectorIndex target_index = index::load_index(args.index_dir / "index.bin");
        if (manifest.dimension != target_index.dimension() ||
            manifest.rows != target_index.size()) {
            throw Error("index directory is inconsistent with its manifest");
        }
        const std::string targets_csv = util::read_file(args.index_dir / "targets.csv");
        if (util::sha256_hex(targets_csv) != manifest.source_csv_sha256) {
            throw Error("targets.csv in the index directory does not match the manifest "
                        "hash; rebuild the index");
        }
        const core::EntityTable targets = core::parse_table(targets_csv, "targets");

        std::shared_ptr<void> keep_alive;
        const classify::ProbeFn probe_fn =
            make_probe_fn(args, manifest, target_index, sources, keep_alive);

        classify::CountingBackend backend(make_backend(args.backend));
        std::unique_ptr<classify::FileCache> cache;
        classify::VerdictCache* cache_ptr = nullptr;
        if (!args.no_cache) {
            cache = std::make_unique<classify::FileCache>(args.cache_dir);
            cache_ptr = cache.get();
        }
        classify::ClassifyEnv env{&backend, cache_ptr, classify::RetryPolicy{}};

        const classify::RunOutcome outcome =
            classify::match_all(sources, targets, target_index, catalog, args.policy, env,
                                probe_fn, args.jobs);

        std::vector<core::ResolvedMatch> resolutions;
        resolutions.reserve(outcome.sources.size());
        for (const auto& source : outcome.sources) {
            std::map<std::string, double> distances(source.retrieved.begin(),
                                                    source.retrieved.end());
            std::vector<core::RelationVerdict> verdicts;
            for (const auto& [relation_id, result] : source.by_relation) {
                (void)relation_id;
                verdicts.insert(verdicts.end(), result.verdicts.begin(),
                                result.verdicts.end());
            }
            resolutions.push_back(
                resolve::resolve(source.source_id, verdicts, distances, catalog));
        }

        RunConfigEcho echo;
        echo.source_rows = sources.records.size();
        echo.target_rows = targets.records.size();
        for (const core::RelationSpec* relation : catalog.by_priority()) {
            echo.relations.push_back(relation->id);
        }
        echo.policy = args.policy;
        echo.backend_id = backend.id();
        echo.provider_id = manifest.provider;
        echo.index_rows = target_index.size();
        echo.index_dimension = target_index.dimension();

        const MatchReport report = build_report(echo, outcome, resolutions);
        write_report(report, args.out_dir);
        out << "backend calls: " << backend.calls() << "\n";
        out << "report written to " << (args.out_dir / "report.json").string() << "\n";

        const std::size_t failed = outcome.failed_pairs();
        if (failed > 0) {
            err << failed << " of " << outcome.total_pairs()
                << " (source, relation) pairs failed; see the report for details\n";
            return kExitPartial;
        }
        return kExitOk;
    } catch (const ProviderUnavailable& e) {
        return report_error(err, e.what(), kExitBackend);
    } catch (const BackendUnavailable& e) {
        return report_error(err, e.what(), kExitBackend);
    } catch (const Error& e) {
        return report_error(err, e.what(), kExitConfig);
    }
}

namespace {

harness::GroundTruth filter_truth(const harness::GroundTruth& truth,
                                  std::string_view relation_id,
                                  const std::string& relabel_to = {}) {
    harness::GroundTruth filtered;
    for (const auto& triple : truth.triples) {
        if (triple.relation_id != relation_id) {
            continue;
        }
        filtered.triples.insert(harness::Triple{
            relabel_to.empty() ? triple.relation_id : relabel_to, triple.source_id,
            triple.target_id});
    }
    return filtered;
}

} // namespace

int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    try {
        harness::validate_params(args.params);
        classify::validate_policy(args.policy);

        const harness::Vocabulary vocabulary = args.vocab_path.empty()
                                                   ? harness::builtin_vocabulary()
                                                   : harness::load_vocabulary(args.vocab_path);
        const harness::SyntheticCorpus corpus =
            harness::generate_taxonomy(vocabulary, args.params);
        harness::validate_corpus(corpus);
        const core::RelationCatalog catalog = harness::builtin_esg_catalog();

        auto provider =
            std::make_shared<harness::MockCorpusProvider>(corpus, args.params.seed);
        std::vector<index::VectorIndex::Entry> entries;
        entries.reserve(corpus.targets.records.size());
        for (const auto& record : corpus.targets.records) {
            entries.emplace_back(record.id, provider->embed(index::serialize_entity(record)));
        }
        const index::VectorIndex target_index = index::VectorIndex::build(std::move(entries));

        std::map<std::string, index::EmbeddingVector> probes;
        for (const auto& record : corpus.sources.records) {
            probes.emplace(record.id, provider->embed(index::serialize_entity(record)));
        }

        classify::CountingBackend backend(
            std::make_shared<harness::OracleBackend>(corpus.truth));
        classify::ClassifyEnv env{&backend, nullptr, classify::RetryPolicy{}};

        // Strategy 1: the nearest neighbor alone, read as an exact match.
        std::vector<core::RelationVerdict> top1_verdicts;
        std::map<std::string, std::set<std::string>> top1_retrieved;
        for (const auto& record : corpus.sources.records) {
            const auto batch = target_index.query_topk(probes.at(record.id), 1, 0);
            const std::string& top = batch.candidates.front().first;
            top1_verdicts.push_back(core::RelationVerdict{
                std::string(harness::kExactId), record.id, top, true,
                "nearest neighbor", core::Provenance::oracle()});
            top1_retrieved[record.id].insert(top);
        }
        const harness::MetricsReport embed_metrics = harness::compute_metrics(
            top1_verdicts, filter_truth(corpus.truth, harness::kExactId), top1_retrieved);

        // Strategy 2: one batch of candidates, binary match question.
        std::vector<core::RelationVerdict> naive_verdicts;
        std::map<std::string, std::set<std::string>> naive_retrieved;
        for (const auto& record : corpus.sources.records) {
            const auto batch = target_index.query_topk(probes.at(record.id), args.policy.k, 0);
            std::vector<core::EntityRecord> candidates;
            for (const auto& [target_id, distance] : batch.candidates) {
                (void)distance;
                candidates.push_back(*corpus.targets.find(target_id));
                naive_retrieved[record.id].insert(target_id);
            }
            const auto verdicts = classify::naive_match(record, candidates, env);
            naive_verdicts.insert(naive_verdicts.end(), verdicts.begin(), verdicts.end());
        }
        const harness::MetricsReport naive_metrics = harness::compute_metrics(
            naive_verdicts,
            filter_truth(corpus.truth, harness::kExactId,
                         std::string(classify::kNaiveRelationId)),
            naive_retrieved);

        // Strategy 3: the relation pipeline with cascade resolution.
        const auto probe_fn = [&probes](const core::EntityRecord& record) {
            return probes.at(record.id);
        };
        const classify::RunOutcome outcome =
            classify::match_all(corpus.sources, corpus.targets, target_index, catalog,
                                args.policy, env, probe_fn, 1);
        std::map<std::string, std::set<std::string>> relation_retrieved;
        for (const auto& source : outcome.sources) {
            auto& set = relation_retrieved[source.source_id];
            for (const auto& [target_id, distance] : source.retrieved) {
                (void)distance;
                set.insert(target_id);
            }
        }
        const harness::MetricsReport relation_metrics = harness::compute_metrics(
            outcome.all_verdicts(catalog), corpus.truth, relation_retrieved);

        std::size_t resolved = 0;
        std::size_t component_only = 0;
        std::size_t unresolved = 0;
        for (const auto& source : outcome.sources) {
            std::map<std::string, double> distances(source.retrieved.begin(),
                                                    source.retrieved.end());
            std::vector<core::RelationVerdict> verdicts;
            for (const auto& [relation_id, result] : source.by_relation) {
                (void)relation_id;
                verdicts.insert(verdicts.end(), result.verdicts.begin(),
                                result.verdicts.end());
            }
            const core::ResolvedMatch match =
                resolve::resolve(source.source_id, verdicts, distances, catalog);
            switch (match.status) {
            case core::MatchStatus::resolved: ++resolved; break;
            case core::MatchStatus::component_only: ++component_only; break;
            case core::MatchStatus::unresolved: ++unresolved; break;
            }
        }

        const harness::SeparationReport separation =
            harness::measure_separation(corpus, args.params.seed);

        ordered_json doc;
        doc["params"] = {
            {"seed", args.params.seed},
            {"tree_depth", args.params.tree_depth},
            {"branching", args.params.branching},
            {"targets_count", args.params.targets_count},
            {"sources_count", args.params.sources_count},
            {"synonym_rate", args.params.synonym_rate},
            {"detail_rate", args.params.detail_rate},
        };
        doc["policy"] = {
            {"k", args.policy.k},
            {"continuation_threshold", args.policy.continuation_threshold},
            {"max_batches", args.policy.max_batches},
        };
        doc["separation"] = {
            {"max_intra_node", separation.max_intra_node},
            {"min_cross_subtree", separation.min_cross_subtree},
        };
        doc["strategies"] = {
            {"embedding-top1", harness::metrics_to_json(embed_metrics)},
            {"naive", harness::metrics_to_json(naive_metrics)},
            {"relation-based", harness::metrics_to_json(relation_metrics)},
        };
        doc["resolution"] = {
            {"resolved", resolved},
            {"component_only", component_only},
            {"unresolved", unresolved},
        };
        doc["comparison"] = {
            {"naive_true_positives",
             naive_metrics.by_relation.count(std::string(classify::kNaiveRelationId))
                 ? naive_metrics.by_relation.at(std::string(classify::kNaiveRelationId))
                       .true_positives
                 : 0},
            {"relation_exact_true_positives",
             relation_metrics.by_relation.count(std::string(harness::kExactId))
                 ? relation_metrics.by_relation.at(std::string(harness::kExactId))
                       .true_positives
                 : 0},
        };
        util::write_file_atomic(args.metrics_out, doc.dump(2) + "\n");
        out << "corpus: " << corpus.sources.records.size() << " sources, "
            << corpus.targets.records.size() << " targets, " << corpus.truth.triples.size()
            << " truth triples\n";
        out << "resolution: " << resolved << " resolved, " << component_only
            << " component-only, " << unresolved << " unresolved\n";
        out << "metrics written to " << args.metrics_out.string() << "\n";

        if (!args.export_dir.empty()) {
            std::filesystem::create_directories(args.export_dir);
            const std::string targets_csv = core::table_to_csv(corpus.targets);
            util::write_file_atomic(args.export_dir / "sources.csv",
                                    core::table_to_csv(corpus.sources));
            util::write_file_atomic(args.export_dir / "targets.csv", targets_csv);
            harness::save_truth(corpus.truth, args.export_dir / "truth.json");
            core::save_catalog(catalog, args.export_dir / "catalog.json");
            index::save_index(target_index, args.export_dir / "index.bin");
            save_manifest(IndexManifest{provider->id(), "mock", target_index.dimension(),
                                        target_index.size(), util::sha256_hex(targets_csv)},
                          args.export_dir / "manifest.json");
            std::vector<index::VectorIndex::Entry> probe_entries;
            for (const auto& record : corpus.sources.records) {
                probe_entries.emplace_back(record.id, probes.at(record.id));
            }
            index::save_index(index::VectorIndex::build(std::move(probe_entries)),
                              args.export_dir / "source_vectors.bin");
            out << "corpus exported to " << args.export_dir.string() << "\n";
        }
        return kExitOk;
    } catch (const Error& e) {
        return report_error(err, e.what(), kExitConfig);
    }
}

} // namespace relmatch::pipeline
