#include "relmatch/pipeline/run.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_policy_flags(CLI::App* cmd, relmatch::classify::RetrievalPolicy& policy) {
    cmd->add_option("--k", policy.k, "Candidates retrieved per batch")
        ->capture_default_str();
    cmd->add_option("--threshold", policy.continuation_threshold,
                    "Confirmed fraction required to fetch the next batch")
        ->capture_default_str();
    cmd->add_option("--max-batches", policy.max_batches,
                    "Hard cap on batches per (source, relation)")
        ->capture_default_str();
}

void add_provider_flags(CLI::App* cmd, relmatch::pipeline::ProviderConfig& provider) {
    cmd->add_option("--provider", provider.kind,
                    "Embedding provider: local-det or remote")
        ->capture_default_str();
    cmd->add_option("--dim", provider.local_dim,
                    "Vector width of the local-det provider")
        ->capture_default_str();
    cmd->add_option("--embed-seed", provider.local_seed,
                    "Seed of the local-det provider")
        ->capture_default_str();
    cmd->add_option("--embed-endpoint", provider.endpoint,
                    "Base URL of the remote embedding service");
    cmd->add_option("--embed-model", provider.model, "Remote embedding model name")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"relation-based entity matching over CSV tables"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "Config file with per-command sections; command line flags win");

    relmatch::pipeline::IndexArgs index_args;
    CLI::App* cmd_index =
        app.add_subcommand("index", "Build the embedding index for a target table");
    cmd_index->add_option("--targets", index_args.targets_csv, "Target table CSV")
        ->required();
    cmd_index->add_option("--out", index_args.out_dir, "Index output directory")
        ->required();
    add_provider_flags(cmd_index, index_args.provider);
    cmd_index->add_flag("--force", index_args.force,
                        "Rebuild even when the existing index still matches");

    relmatch::pipeline::MatchArgs match_args;
    CLI::App* cmd_match =
        app.add_subcommand("match", "Match source entities against an indexed table");
    cmd_match->add_option("--sources", match_args.sources_csv, "Source table CSV")
        ->required();
    cmd_match->add_option("--index-dir", match_args.index_dir,
                          "Directory produced by the index command")
        ->required();
    cmd_match->add_option("--catalog", match_args.catalog_path, "Relation catalog JSON")
        ->required();
    cmd_match->add_option("--out", match_args.out_dir, "Report output directory")
        ->required();
    add_policy_flags(cmd_match, match_args.policy);
    cmd_match->add_option("--backend", match_args.backend.kind,
                          "Classification backend: remote or oracle")
        ->capture_default_str();
    cmd_match->add_option("--endpoint", match_args.backend.endpoint,
                          "Base URL of the remote chat service");
    cmd_match->add_option("--model", match_args.backend.model, "Remote chat model name")
        ->capture_default_str();
    cmd_match->add_option("--truth", match_args.backend.truth_path,
                          "Ground truth JSON for the oracle backend");
    add_provider_flags(cmd_match, match_args.provider);
    cmd_match->add_option("--source-vectors", match_args.source_vectors,
                          "Precomputed source vectors; skips the embedding provider");
    cmd_match->add_option("--cache-dir", match_args.cache_dir,
                          "Verdict cache directory")
        ->capture_default_str();
    cmd_match->add_flag("--no-cache", match_args.no_cache, "Disable the verdict cache");
    cmd_match->add_option("--jobs", match_args.jobs,
                          "Source entities classified concurrently")
        ->capture_default_str();

    relmatch::pipeline::EvalArgs eval_args;
    CLI::App* cmd_eval = app.add_subcommand(
        "eval", "Score matching strategies on a generated corpus with known truth");
    cmd_eval->add_option("--seed", eval_args.params.seed, "Generator seed")
        ->capture_default_str();
    cmd_eval->add_option("--tree-depth", eval_args.params.tree_depth,
                         "Levels per concept family, including the root")
        ->capture_default_str();
    cmd_eval->add_option("--branching", eval_args.params.branching,
                         "Children per expandable node")
        ->capture_default_str();
    cmd_eval->add_option("--targets", eval_args.params.targets_count,
                         "Generated target entities")
        ->capture_default_str();
    cmd_eval->add_option("--sources", eval_args.params.sources_count,
                         "Generated source entities")
        ->capture_default_str();
    cmd_eval->add_option("--synonym-rate", eval_args.params.synonym_rate,
                         "Chance of a non-primary surface form")
        ->capture_default_str();
    cmd_eval->add_option("--detail-rate", eval_args.params.detail_rate,
                         "Chance of filling each detail slot")
        ->capture_default_str();
    add_policy_flags(cmd_eval, eval_args.policy);
    cmd_eval->add_option("--metrics-out", eval_args.metrics_out, "Metrics JSON path")
        ->capture_default_str();
    cmd_eval->add_option("--export-corpus", eval_args.export_dir,
                         "Also write tables, truth, catalog, index and vectors here");
    cmd_eval->add_option("--vocab", eval_args.vocab_path,
                         "Vocabulary JSON overriding the built-in surface forms");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : relmatch::pipeline::kExitConfig;
    }

    if (cmd_index->parsed()) {
        return relmatch::pipeline::run_index(index_args, std::cout, std::cerr);
    }
    if (cmd_match->parsed()) {
        return relmatch::pipeline::run_match(match_args, std::cout, std::cerr);
    }
    return relmatch::pipeline::run_eval(eval_args, std::cout, std::cerr);
}
