#pragma once

#include "relmatch/classify/policy.hpp"
#include "relmatch/harness/taxonomy.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace relmatch::pipeline {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;  // bad input or configuration
inline constexpr int kExitBackend = 3; // provider or backend exhaustion
inline constexpr int kExitPartial = 4; // some pairs failed, report written

/// Sidecar of every index directory. An index is only usable with the
/// provider that built it.
struct IndexManifest {
    std::string provider;
    std::string model;
    std::size_t dimension = 0;
    std::size_t rows = 0;
    std::string source_csv_sha256;
};

IndexManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const IndexManifest& manifest, const std::filesystem::path& path);

struct ProviderConfig {
    std::string kind = "local-det"; // local-det | remote
    std::size_t local_dim = 64;
    std::uint64_t local_seed = 0;
    std::string endpoint;
    std::string model = "text-embedding-ada-002";
};

struct IndexArgs {
    std::filesystem::path targets_csv;
    std::filesystem::path out_dir;
    ProviderConfig provider;
    bool force = false; // rebuild even when the manifest still matches
};

/// Builds (or confirms) the index directory: index.bin, manifest.json and a
/// verbatim copy of the target CSV for later prompt rendering.
int run_index(const IndexArgs& args, std::ostream& out, std::ostream& err);

struct BackendConfig {
    std::string kind = "remote"; // remote | oracle
    std::string endpoint;
    std::string model = "gpt-4";
    std::filesystem::path truth_path; // oracle
};

struct MatchArgs {
    std::filesystem::path sources_csv;
    std::filesystem::path index_dir;
    std::filesystem::path catalog_path;
    std::filesystem::path out_dir;
    classify::RetrievalPolicy policy;
    BackendConfig backend;
    ProviderConfig provider;                // for source probes
    std::filesystem::path source_vectors;   // optional: precomputed probes
    std::filesystem::path cache_dir = ".relmatch-cache";
    bool no_cache = false;
    std::size_t jobs = 1;
};

/// Classifies every (source, relation) pair against the index, resolves one
/// match per source, and writes report.json / report.txt into out_dir.
int run_match(const MatchArgs& args, std::ostream& out, std::ostream& err);

struct EvalArgs {
    harness::GenParams params;
    classify::RetrievalPolicy policy;
    std::filesystem::path metrics_out = "metrics.json";
    std::filesystem::path export_dir;  // optional: dump corpus + index + vectors
    std::filesystem::path vocab_path;  // optional: overrides the built-in vocabulary
};

/// Generates a synthetic corpus and scores three strategies against ground
/// truth: nearest-neighbor only, naive binary matching, and the full
/// relation pipeline.
int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);

} // namespace relmatch::pipeline
