#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "relmatch/core/entity.hpp"
#include "relmatch/errors.hpp"
#include "relmatch/index/embedding.hpp"
#include "relmatch/index/vector_index.hpp"
#include "relmatch/pipeline/report.hpp"
#include "relmatch/pipeline/run.hpp"
#include "relmatch/util/fs.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace relmatch;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    TempDir() {
        std::mt19937_64 gen(std::random_device{}());
        path = fs::temp_directory_path() /
               ("relmatch-pipeline-" + std::to_string(gen()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

fs::path fixture(const std::string& name) {
    return fs::path(RELMATCH_FIXTURES_DIR) / name;
}

struct CommandResult {
    int code = -1;
    std::string out;
    std::string err;
};

CommandResult index_run(const pipeline::IndexArgs& args) {
    std::ostringstream out;
    std::ostringstream err;
    CommandResult result;
    result.code = pipeline::run_index(args, out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

CommandResult match_run(const pipeline::MatchArgs& args) {
    std::ostringstream out;
    std::ostringstream err;
    CommandResult result;
    result.code = pipeline::run_match(args, out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

CommandResult eval_run(const pipeline::EvalArgs& args) {
    std::ostringstream out;
    std::ostringstream err;
    CommandResult result;
    result.code = pipeline::run_eval(args, out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

pipeline::IndexArgs charger_index_args(const fs::path& out_dir) {
    pipeline::IndexArgs args;
    args.targets_csv = fixture("charger_targets.csv");
    args.out_dir = out_dir;
    args.provider.kind = "local-det";
    args.provider.local_dim = 16;
    args.provider.local_seed = 1;
    return args;
}

pipeline::MatchArgs charger_match_args(const fs::path& index_dir, const fs::path& out_dir,
                                       const fs::path& cache_dir) {
    pipeline::MatchArgs args;
    args.sources_csv = fixture("charger_source.csv");
    args.index_dir = index_dir;
    args.catalog_path = fixture("esg_catalog.json");
    args.out_dir = out_dir;
    args.backend.kind = "oracle";
    args.backend.truth_path = fixture("charger_truth.json");
    args.provider.kind = "local-det";
    args.provider.local_dim = 16;
    args.provider.local_seed = 1;
    args.cache_dir = cache_dir;
    return args;
}

core::RelationVerdict make_verdict(std::string relation, std::string source, std::string target,
                                   bool decision, std::string rationale) {
    core::RelationVerdict v;
    v.relation_id = std::move(relation);
    v.source_id = std::move(source);
    v.target_id = std::move(target);
    v.decision = decision;
    v.rationale = std::move(rationale);
    return v;
}

} // namespace

TEST_CASE("index manifests round trip through disk") {
    TempDir dir;
    pipeline::IndexManifest manifest;
    manifest.provider = "local-det:dim=16:seed=1";
    manifest.model = "local-det";
    manifest.dimension = 16;
    manifest.rows = 6;
    manifest.source_csv_sha256 = std::string(64, 'a');

    const fs::path path = dir.path / "manifest.json";
    pipeline::save_manifest(manifest, path);
    const pipeline::IndexManifest back = pipeline::load_manifest(path);
    CHECK(back.provider == manifest.provider);
    CHECK(back.model == manifest.model);
    CHECK(back.dimension == manifest.dimension);
    CHECK(back.rows == manifest.rows);
    CHECK(back.source_csv_sha256 == manifest.source_csv_sha256);

    CHECK_THROWS_AS(pipeline::load_manifest(dir.path / "absent.json"), IoFailure);
    util::write_file_atomic(path, "{\"provider\": 3}");
    CHECK_THROWS_AS(pipeline::load_manifest(path), IoFailure);
}

TEST_CASE("build_report collates outcomes and the JSON keeps its shape") {
    classify::RunOutcome outcome;
    classify::SourceOutcome s1;
    s1.source_id = "s1";
    s1.retrieved = {{"t2", 0.5}, {"t1", 1.25}};
    classify::RelationMatchResult same;
    same.verdicts = {make_verdict("same", "s1", "t2", true, "batch zero reasoning"),
                     make_verdict("same", "s1", "t1", false, "batch zero reasoning"),
                     make_verdict("same", "s1", "t9", false, "batch one reasoning")};
    same.stats.batches_fetched = 2;
    same.stats.candidates_examined = 3;
    s1.by_relation["same"] = same;
    classify::RelationMatchResult part;
    part.stats.failed = true;
    part.stats.failure = "reply was unparseable";
    s1.by_relation["part-of"] = part;
    outcome.sources.push_back(s1);

    core::ResolvedMatch resolution;
    resolution.status = core::MatchStatus::resolved;
    resolution.relation_id = "same";
    resolution.target_ids = {"t2"};
    resolution.selection_reason = "relation 'same' (rank 1) confirmed 1 target";

    pipeline::RunConfigEcho echo;
    echo.source_rows = 1;
    echo.target_rows = 9;
    echo.relations = {"same", "part-of"};
    echo.backend_id = "oracle:v1";
    echo.provider_id = "local-det:dim=16:seed=1";
    echo.index_rows = 9;
    echo.index_dimension = 16;

    const pipeline::MatchReport report = pipeline::build_report(echo, outcome, {resolution});
    REQUIRE(report.entities.size() == 1);
    CHECK(report.entities[0].verdicts_by_relation.at("same").size() == 3);
    CHECK(report.entities[0].stats_by_relation.at("part-of").failed);

    const nlohmann::ordered_json doc = pipeline::report_to_json(report);
    CHECK(doc["run"]["source_rows"] == 1);
    CHECK(doc["run"]["relations"] == nlohmann::ordered_json({"same", "part-of"}));
    CHECK(doc["run"]["policy"]["k"] == 10);
    CHECK(doc["run"]["backend"] == "oracle:v1");
    CHECK(doc["run"]["index"]["provider"] == "local-det:dim=16:seed=1");

    const auto& entity = doc["entities"][0];
    CHECK(entity["source_id"] == "s1");
    CHECK(entity["resolutions"]["status"] == "resolved");
    CHECK(entity["resolutions"]["relation_id"] == "same");
    CHECK(entity["resolutions"]["target_ids"] == nlohmann::ordered_json({"t2"}));

    const auto& same_doc = entity["verdicts_by_relation"]["same"];
    REQUIRE(same_doc["verdicts"].size() == 3);
    CHECK(same_doc["verdicts"][0]["target_id"] == "t2");
    CHECK(same_doc["verdicts"][0]["decision"] == true);
    // Consecutive verdicts from one batch share a rationale; it appears once.
    REQUIRE(same_doc["rationales"].size() == 2);
    CHECK(same_doc["rationales"][0] == "batch zero reasoning");
    CHECK(same_doc["rationales"][1] == "batch one reasoning");

    CHECK(entity["stats"]["retrieved"][0] == nlohmann::ordered_json::array({"t2", 0.5}));
    CHECK(entity["stats"]["by_relation"]["same"]["batches_fetched"] == 2);
    REQUIRE(entity["stats"]["failed_relations"].size() == 1);
    CHECK(entity["stats"]["failed_relations"][0]["relation_id"] == "part-of");
    CHECK(entity["stats"]["failed_relations"][0]["error"] == "reply was unparseable");

    // Verdicts for relations missing from the run echo are not emitted.
    classify::RunOutcome stray = outcome;
    stray.sources[0].by_relation["uncatalogued"] = same;
    const auto stray_doc =
        pipeline::report_to_json(pipeline::build_report(echo, stray, {resolution}));
    CHECK_FALSE(stray_doc["entities"][0]["verdicts_by_relation"].contains("uncatalogued"));

    CHECK(pipeline::report_to_json(report).dump(2) == doc.dump(2));
}

TEST_CASE("report_to_text writes one line per source") {
    pipeline::MatchReport report;
    report.run.source_rows = 3;
    report.run.target_rows = 9;
    report.run.backend_id = "oracle:v1";

    pipeline::EntityReport a;
    a.source_id = "s1";
    a.resolution.status = core::MatchStatus::resolved;
    a.resolution.relation_id = "same";
    a.resolution.target_ids = {"t9"};
    pipeline::EntityReport b;
    b.source_id = "s2";
    b.resolution.status = core::MatchStatus::component_only;
    b.resolution.relation_id = "part-of";
    b.resolution.target_ids = {"t1", "t2"};
    pipeline::EntityReport c;
    c.source_id = "s3";
    c.resolution.status = core::MatchStatus::unresolved;
    report.entities = {a, b, c};

    const std::string text = pipeline::report_to_text(report);
    CHECK(text.find("relation match report\n") == 0);
    CHECK(text.find("sources: 3  targets: 9  backend: oracle:v1\n") != std::string::npos);
    CHECK(text.find("resolved: 1  component-only: 1  unresolved: 1  failed pairs: 0\n") !=
          std::string::npos);
    CHECK(text.find("s1 -> t9 [same]\n") != std::string::npos);
    CHECK(text.find("s2 -> t1,t2 [part-of]\n") != std::string::npos);
    CHECK(text.find("s3 unresolved\n") != std::string::npos);
}

TEST_CASE("run_index creates, short-circuits, and rebuilds") {
    TempDir dir;
    const fs::path index_dir = dir.path / "index";

    const CommandResult first = index_run(charger_index_args(index_dir));
    CAPTURE(first.err);
    CHECK(first.code == pipeline::kExitOk);
    CHECK(first.out.find("indexed 6 rows (dimension 16)") != std::string::npos);
    CHECK(fs::exists(index_dir / "index.bin"));
    CHECK(fs::exists(index_dir / "manifest.json"));
    CHECK(fs::exists(index_dir / "targets.csv"));

    const CommandResult second = index_run(charger_index_args(index_dir));
    CHECK(second.code == pipeline::kExitOk);
    CHECK(second.out.find("index up to date (6 rows, dimension 16), nothing to do") !=
          std::string::npos);

    pipeline::IndexArgs forced = charger_index_args(index_dir);
    forced.force = true;
    const CommandResult third = index_run(forced);
    CHECK(third.code == pipeline::kExitOk);
    CHECK(third.out.find("indexed 6 rows") != std::string::npos);

    // A different provider invalidates the manifest check and rebuilds.
    pipeline::IndexArgs wider = charger_index_args(index_dir);
    wider.provider.local_dim = 24;
    const CommandResult fourth = index_run(wider);
    CHECK(fourth.code == pipeline::kExitOk);
    CHECK(fourth.out.find("indexed 6 rows (dimension 24)") != std::string::npos);

    // So does a changed CSV.
    const fs::path edited_csv = dir.path / "targets2.csv";
    util::write_file_atomic(edited_csv,
                            util::read_file(fixture("charger_targets.csv")) + "t9,Spare Fuse\n");
    pipeline::IndexArgs edited = charger_index_args(index_dir);
    edited.provider.local_dim = 24;
    edited.targets_csv = edited_csv;
    const CommandResult fifth = index_run(edited);
    CHECK(fifth.code == pipeline::kExitOk);
    CHECK(fifth.out.find("indexed 7 rows") != std::string::npos);

    pipeline::IndexArgs missing = charger_index_args(dir.path / "other");
    missing.targets_csv = dir.path / "nope.csv";
    const CommandResult bad = index_run(missing);
    CHECK(bad.code == pipeline::kExitConfig);
    CHECK(bad.err.find("error:") != std::string::npos);

    pipeline::IndexArgs bad_provider = charger_index_args(dir.path / "other");
    bad_provider.provider.kind = "quantum";
    const CommandResult unknown = index_run(bad_provider);
    CHECK(unknown.code == pipeline::kExitConfig);
    CHECK(unknown.err.find("unknown embedding provider") != std::string::npos);
}

TEST_CASE("run_match resolves the charger fixture and reuses its cache") {
    TempDir dir;
    const fs::path index_dir = dir.path / "index";
    REQUIRE(index_run(charger_index_args(index_dir)).code == pipeline::kExitOk);

    const auto args1 = charger_match_args(index_dir, dir.path / "run1", dir.path / "cache");
    const CommandResult first = match_run(args1);
    CAPTURE(first.err);
    REQUIRE(first.code == pipeline::kExitOk);
    // Six targets fit in one batch of ten, so each relation costs one call.
    CHECK(first.out.find("backend calls: 5\n") != std::string::npos);
    CHECK(first.out.find("report written to ") != std::string::npos);

    const std::string json_text = util::read_file(dir.path / "run1" / "report.json");
    const auto doc = nlohmann::json::parse(json_text);
    REQUIRE(doc["entities"].size() == 1);
    CHECK(doc["entities"][0]["resolutions"]["status"] == "resolved");
    CHECK(doc["entities"][0]["resolutions"]["relation_id"] == "general-without-details");
    CHECK(doc["entities"][0]["resolutions"]["target_ids"] == nlohmann::json({"t1"}));

    const std::string text = util::read_file(dir.path / "run1" / "report.txt");
    CHECK(text.find("s1 -> t1 [general-without-details]\n") != std::string::npos);

    auto args2 = args1;
    args2.out_dir = dir.path / "run2";
    const CommandResult second = match_run(args2);
    REQUIRE(second.code == pipeline::kExitOk);
    CHECK(second.out.find("backend calls: 0\n") != std::string::npos);
    CHECK(util::read_file(dir.path / "run2" / "report.json") == json_text);

    auto uncached = args1;
    uncached.out_dir = dir.path / "run3";
    uncached.no_cache = true;
    const CommandResult third = match_run(uncached);
    REQUIRE(third.code == pipeline::kExitOk);
    CHECK(third.out.find("backend calls: 5\n") != std::string::npos);
    CHECK(util::read_file(dir.path / "run3" / "report.json") == json_text);
}

TEST_CASE("run_match rejects inconsistent configuration without writing a report") {
    TempDir dir;
    const fs::path index_dir = dir.path / "index";
    REQUIRE(index_run(charger_index_args(index_dir)).code == pipeline::kExitOk);

    SUBCASE("missing index directory") {
        const auto result = match_run(
            charger_match_args(dir.path / "not-there", dir.path / "out", dir.path / "cache"));
        CHECK(result.code == pipeline::kExitConfig);
        CHECK(result.err.find("error:") != std::string::npos);
    }

    SUBCASE("tampered target CSV copy") {
        std::ofstream append(index_dir / "targets.csv", std::ios::app);
        append << "t9,Imposter Row\n";
        append.close();
        const auto result =
            match_run(charger_match_args(index_dir, dir.path / "out", dir.path / "cache"));
        CHECK(result.code == pipeline::kExitConfig);
        CHECK(result.err.find("does not match the manifest hash") != std::string::npos);
    }

    SUBCASE("manifest row count out of step with the index") {
        auto manifest = pipeline::load_manifest(index_dir / "manifest.json");
        manifest.rows += 1;
        pipeline::save_manifest(manifest, index_dir / "manifest.json");
        const auto result =
            match_run(charger_match_args(index_dir, dir.path / "out", dir.path / "cache"));
        CHECK(result.code == pipeline::kExitConfig);
        CHECK(result.err.find("inconsistent with its manifest") != std::string::npos);
    }

    SUBCASE("probe provider differs from the index builder") {
        auto args = charger_match_args(index_dir, dir.path / "out", dir.path / "cache");
        args.provider.local_dim = 64;
        const auto result = match_run(args);
        CHECK(result.code == pipeline::kExitConfig);
        CHECK(result.err.find("embeddings incomparable") != std::string::npos);
    }

    SUBCASE("invalid retrieval policy") {
        auto args = charger_match_args(index_dir, dir.path / "out", dir.path / "cache");
        args.policy.k = 0;
        const auto result = match_run(args);
        CHECK(result.code == pipeline::kExitConfig);
    }

    SUBCASE("oracle backend without a truth file") {
        auto args = charger_match_args(index_dir, dir.path / "out", dir.path / "cache");
        args.backend.truth_path.clear();
        const auto result = match_run(args);
        CHECK(result.code == pipeline::kExitConfig);
        CHECK(result.err.find("--truth") != std::string::npos);
    }

    SUBCASE("unknown backend kind") {
        auto args = charger_match_args(index_dir, dir.path / "out", dir.path / "cache");
        args.backend.kind = "telepathy";
        const auto result = match_run(args);
        CHECK(result.code == pipeline::kExitConfig);
        CHECK(result.err.find("unknown backend") != std::string::npos);
    }

    CHECK_FALSE(fs::exists(dir.path / "out" / "report.json"));
}

TEST_CASE("run_match accepts precomputed source vectors") {
    TempDir dir;
    const fs::path index_dir = dir.path / "index";
    REQUIRE(index_run(charger_index_args(index_dir)).code == pipeline::kExitOk);

    const core::EntityTable sources = core::load_table(fixture("charger_source.csv"), "sources");
    index::DeterministicLocalProvider provider(16, 1);
    std::vector<index::VectorIndex::Entry> entries;
    for (const auto& record : sources.records) {
        entries.emplace_back(record.id, provider.embed(index::serialize_entity(record)));
    }
    const fs::path vectors_path = dir.path / "source_vectors.bin";
    index::save_index(index::VectorIndex::build(std::move(entries)), vectors_path);

    auto args = charger_match_args(index_dir, dir.path / "out", dir.path / "cache");
    args.source_vectors = vectors_path;
    // With precomputed probes the provider flags are never consulted; a
    // mismatching configuration must not matter.
    args.provider.local_dim = 64;
    const CommandResult result = match_run(args);
    CAPTURE(result.err);
    REQUIRE(result.code == pipeline::kExitOk);
    const auto doc =
        nlohmann::json::parse(util::read_file(dir.path / "out" / "report.json"));
    CHECK(doc["entities"][0]["resolutions"]["target_ids"] == nlohmann::json({"t1"}));

    SUBCASE("a vector file missing a source id is rejected") {
        std::vector<index::VectorIndex::Entry> wrong;
        wrong.emplace_back("someone-else", provider.embed("unrelated"));
        const fs::path bad_path = dir.path / "bad_vectors.bin";
        index::save_index(index::VectorIndex::build(std::move(wrong)), bad_path);
        auto bad = args;
        bad.source_vectors = bad_path;
        bad.out_dir = dir.path / "out2";
        const CommandResult missing = match_run(bad);
        CHECK(missing.code == pipeline::kExitConfig);
        CHECK(missing.err.find("no precomputed vector for source 's1'") != std::string::npos);
    }

    SUBCASE("a dimension mismatch against the index is rejected") {
        index::DeterministicLocalProvider narrow(8, 1);
        std::vector<index::VectorIndex::Entry> wrong;
        for (const auto& record : sources.records) {
            wrong.emplace_back(record.id, narrow.embed(index::serialize_entity(record)));
        }
        const fs::path bad_path = dir.path / "narrow_vectors.bin";
        index::save_index(index::VectorIndex::build(std::move(wrong)), bad_path);
        auto bad = args;
        bad.source_vectors = bad_path;
        bad.out_dir = dir.path / "out3";
        const CommandResult mismatch = match_run(bad);
        CHECK(mismatch.code == pipeline::kExitConfig);
        CHECK(mismatch.err.find("source vectors have dimension 8") != std::string::npos);
    }
}

TEST_CASE("run_eval scores the three strategies and exports the corpus") {
    TempDir dir;
    pipeline::EvalArgs args;
    args.params.seed = 7;
    args.params.targets_count = 80;
    args.params.sources_count = 10;
    args.metrics_out = dir.path / "metrics.json";
    args.export_dir = dir.path / "corpus";

    const CommandResult result = eval_run(args);
    CAPTURE(result.err);
    REQUIRE(result.code == pipeline::kExitOk);
    CHECK(result.out.find("corpus: 10 sources, 80 targets") != std::string::npos);
    CHECK(result.out.find("metrics written to ") != std::string::npos);
    CHECK(result.out.find("corpus exported to ") != std::string::npos);

    const auto doc = nlohmann::json::parse(util::read_file(args.metrics_out));
    CHECK(doc["params"]["seed"] == 7);
    CHECK(doc["policy"]["k"] == 10);
    CHECK(doc["separation"]["max_intra_node"].get<double>() <
          doc["separation"]["min_cross_subtree"].get<double>());
    REQUIRE(doc["strategies"].contains("embedding-top1"));
    REQUIRE(doc["strategies"].contains("naive"));
    REQUIRE(doc["strategies"].contains("relation-based"));
    CHECK(doc["resolution"].contains("resolved"));

    // The oracle backend never confirms a non-truth pair, so precision and
    // retrieval-bounded recall are 1.0 wherever they are defined at all.
    for (const auto& [relation_id, metrics] :
         doc["strategies"]["relation-based"]["relations"].items()) {
        CAPTURE(relation_id);
        if (metrics["precision"] != "n/a") {
            CHECK(metrics["precision"].get<double>() == 1.0);
        }
        if (metrics["retrieval_bounded_recall"] != "n/a") {
            CHECK(metrics["retrieval_bounded_recall"].get<double>() == 1.0);
        }
    }

    // Naive matching examines one batch; the relation pipeline examines at
    // least that much, so its exact-relation hits can only be a superset.
    CHECK(doc["comparison"]["naive_true_positives"].get<std::size_t>() <=
          doc["comparison"]["relation_exact_true_positives"].get<std::size_t>());

    const std::vector<std::string> expected_files{
        "sources.csv",  "targets.csv",   "truth.json",         "catalog.json",
        "index.bin",    "manifest.json", "source_vectors.bin",
    };
    std::size_t found = 0;
    for (const auto& entry : fs::directory_iterator(args.export_dir)) {
        ++found;
        CHECK(std::find(expected_files.begin(), expected_files.end(),
                        entry.path().filename().string()) != expected_files.end());
    }
    CHECK(found == expected_files.size());

    SUBCASE("an explicit vocabulary path replaces the built-in words") {
        pipeline::EvalArgs with_vocab;
        with_vocab.params.seed = 7;
        with_vocab.params.targets_count = 80;
        with_vocab.params.sources_count = 5;
        with_vocab.metrics_out = dir.path / "metrics2.json";
        with_vocab.vocab_path = fs::path(RELMATCH_DATA_DIR) / "surface_forms.json";
        CHECK(eval_run(with_vocab).code == pipeline::kExitOk);
    }

    SUBCASE("invalid generator parameters fail fast") {
        pipeline::EvalArgs bad;
        bad.params.targets_count = 7;
        bad.metrics_out = dir.path / "metrics3.json";
        const CommandResult failed = eval_run(bad);
        CHECK(failed.code == pipeline::kExitConfig);
        CHECK_FALSE(failed.err.empty());
        CHECK_FALSE(fs::exists(bad.metrics_out));
    }
}
