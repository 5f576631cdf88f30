#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "relmatch/classify/parse.hpp"
#include "relmatch/classify/prompt.hpp"
#include "relmatch/errors.hpp"
#include "relmatch/harness/metrics.hpp"
#include "relmatch/harness/mock_embed.hpp"
#include "relmatch/harness/oracle.hpp"
#include "relmatch/harness/taxonomy.hpp"
#include "relmatch/index/embedding.hpp"
#include "relmatch/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

using namespace relmatch;

namespace {

harness::GenParams small_params(std::uint64_t seed) {
    harness::GenParams params;
    params.seed = seed;
    params.targets_count = 80;
    params.sources_count = 10;
    return params;
}

core::RelationVerdict make_verdict(std::string relation, std::string source, std::string target,
                                   bool decision) {
    core::RelationVerdict v;
    v.relation_id = std::move(relation);
    v.source_id = std::move(source);
    v.target_id = std::move(target);
    v.decision = decision;
    return v;
}

} // namespace

TEST_CASE("bundled vocabulary file equals the built-in vocabulary") {
    const harness::Vocabulary from_file =
        harness::load_vocabulary(std::string(RELMATCH_DATA_DIR) + "/surface_forms.json");
    CHECK(from_file == harness::builtin_vocabulary());
    REQUIRE(from_file.size() == 3);
    for (const auto& family : from_file) {
        CHECK(family.nouns.size() >= 2);
        CHECK(family.slots.size() >= 2);
        CHECK_FALSE(family.parts.empty());
    }
}

TEST_CASE("vocabulary parsing rejects malformed shapes") {
    CHECK_THROWS_AS(harness::parse_vocabulary("]["), MalformedVocabulary);
    CHECK_THROWS_AS(harness::parse_vocabulary("{}"), MalformedVocabulary);
    CHECK_THROWS_AS(harness::parse_vocabulary(R"({"families": [{}]})"), MalformedVocabulary);

    // A word reused across families makes rendered text ambiguous.
    const std::string duplicated = R"({"families": [
      {"name": "alpha",
       "nouns": [["car", "auto"], ["truck", "lorry"]],
       "qualifiers": ["big", "small"],
       "slots": [{"name": "hue", "values": ["red", "blue"]},
                  {"name": "age", "values": ["new", "old"]}],
       "parts": ["wheel"]},
      {"name": "beta",
       "nouns": [["car", "sedan"], ["bus", "coach"]],
       "qualifiers": ["fast", "slow"],
       "slots": [{"name": "tone", "values": ["loud", "quiet"]},
                  {"name": "mass", "values": ["heavy", "light"]}],
       "parts": ["door"]}
    ]})";
    CHECK_THROWS_AS(harness::parse_vocabulary(duplicated), MalformedVocabulary);

    const std::string lonely_synonym = R"({"families": [
      {"name": "alpha",
       "nouns": [["car"]],
       "qualifiers": ["big", "small"],
       "slots": [{"name": "hue", "values": ["red", "blue"]},
                  {"name": "age", "values": ["new", "old"]}],
       "parts": ["wheel"]}
    ]})";
    CHECK_THROWS_AS(harness::parse_vocabulary(lonely_synonym), MalformedVocabulary);
}

TEST_CASE("built-in catalog is valid and ordered as documented") {
    const core::RelationCatalog catalog = harness::builtin_esg_catalog();
    CHECK_NOTHROW(core::validate_catalog(catalog));
    const auto order = catalog.by_priority();
    REQUIRE(order.size() == 5);
    CHECK(order[0]->id == harness::kExactId);
    CHECK(order[1]->id == harness::kGeneralId);
    CHECK(order[2]->id == harness::kAdditionalId);
    CHECK(order[3]->id == harness::kWrongId);
    CHECK(order[4]->id == harness::kComponentId);
    CHECK(order[4]->multiplicity == core::Multiplicity::many);
    for (std::size_t i = 0; i < order.size(); ++i) {
        CHECK(order[i]->priority_rank == static_cast<int>(i) + 1);
    }
}

TEST_CASE("generator parameter validation") {
    CHECK_NOTHROW(harness::validate_params(harness::GenParams{}));

    harness::GenParams params;
    params.tree_depth = 1;
    CHECK_THROWS_AS(harness::validate_params(params), InvalidParams);

    params = {};
    params.branching = 0;
    CHECK_THROWS_AS(harness::validate_params(params), InvalidParams);

    params = {};
    params.sources_count = 0;
    CHECK_THROWS_AS(harness::validate_params(params), InvalidParams);

    params = {};
    params.targets_count = 7;
    CHECK_THROWS_AS(harness::validate_params(params), InvalidParams);

    params = {};
    params.synonym_rate = 1.2;
    CHECK_THROWS_AS(harness::validate_params(params), InvalidParams);

    params = {};
    params.detail_rate = -0.1;
    CHECK_THROWS_AS(harness::validate_params(params), InvalidParams);
}

TEST_CASE("generation is deterministic in the seed") {
    const harness::Vocabulary vocabulary = harness::builtin_vocabulary();
    const harness::SyntheticCorpus a = harness::generate_taxonomy(vocabulary, small_params(9));
    const harness::SyntheticCorpus b = harness::generate_taxonomy(vocabulary, small_params(9));
    CHECK(a.sources == b.sources);
    CHECK(a.targets == b.targets);
    CHECK(a.truth.triples == b.truth.triples);
    CHECK(a.meta == b.meta);

    const harness::SyntheticCorpus c = harness::generate_taxonomy(vocabulary, small_params(10));
    CHECK(a.targets != c.targets);
}

TEST_CASE("generated corpora survive the independent validator") {
    const harness::Vocabulary vocabulary = harness::builtin_vocabulary();
    for (const std::uint64_t seed : {7ull, 42ull, 123ull}) {
        CAPTURE(seed);
        CHECK_NOTHROW(harness::validate_corpus(
            harness::generate_taxonomy(vocabulary, small_params(seed))));
    }

    harness::GenParams shallow = small_params(5);
    shallow.tree_depth = 2;
    shallow.branching = 1;
    CHECK_NOTHROW(
        harness::validate_corpus(harness::generate_taxonomy(vocabulary, shallow)));

    harness::GenParams extremes = small_params(6);
    extremes.synonym_rate = 0.0;
    extremes.detail_rate = 1.0;
    CHECK_NOTHROW(
        harness::validate_corpus(harness::generate_taxonomy(vocabulary, extremes)));

    harness::GenParams minimal = small_params(8);
    minimal.targets_count = 8;
    minimal.sources_count = 1;
    CHECK_NOTHROW(
        harness::validate_corpus(harness::generate_taxonomy(vocabulary, minimal)));
}

TEST_CASE("the seed block pins every relation and the overlap pair") {
    const harness::SyntheticCorpus corpus =
        harness::generate_taxonomy(harness::builtin_vocabulary(), small_params(42));
    const harness::GroundTruth& truth = corpus.truth;

    CHECK(truth.contains(harness::kExactId, "s1", "t2"));
    CHECK(truth.contains(harness::kGeneralId, "s1", "t3"));
    CHECK(truth.contains(harness::kGeneralId, "s1", "t4"));
    CHECK(truth.contains(harness::kAdditionalId, "s1", "t5"));
    CHECK(truth.contains(harness::kWrongId, "s1", "t6"));
    CHECK(truth.contains(harness::kComponentId, "s1", "t7"));

    // t1 carries two relations at once: it contradicts one filled slot and
    // adds another the source left empty.
    CHECK(truth.contains(harness::kWrongId, "s1", "t1"));
    CHECK(truth.contains(harness::kAdditionalId, "s1", "t1"));

    CHECK_FALSE(truth.contains(harness::kExactId, "s1", "t1"));
    CHECK_FALSE(truth.contains(harness::kExactId, "s1", "t3"));

    for (const auto& relation : harness::builtin_esg_catalog().relations) {
        CAPTURE(relation.id);
        CHECK(truth.count_for(relation.id) > 0);
    }
}

TEST_CASE("ground truth JSON round trips") {
    harness::GroundTruth truth;
    truth.triples.insert({"same", "s1", "t1"});
    truth.triples.insert({"part-of", "s2", "t9"});
    const harness::GroundTruth back = harness::parse_truth(harness::truth_to_json(truth));
    CHECK(back.triples == truth.triples);
    CHECK(back.contains("same", "s1", "t1"));
    CHECK_FALSE(back.contains("same", "s1", "t2"));
    CHECK(back.count_for("part-of") == 1);

    CHECK_THROWS_AS(harness::parse_truth("not json"), Error);
    CHECK_THROWS_AS(harness::parse_truth("{}"), Error);
}

TEST_CASE("mock embeddings are deterministic and tightly clustered") {
    const harness::SyntheticCorpus corpus =
        harness::generate_taxonomy(harness::builtin_vocabulary(), small_params(42));
    const harness::EmbeddingLayout layout = harness::make_layout(corpus.taxonomy);
    CHECK(layout.dimension > 0);

    const harness::EntityMeta& meta = corpus.meta.at("t2");
    const std::string& text = corpus.targets.records[1].attributes[0].second;

    const auto once = harness::mock_embed(meta, text, corpus.taxonomy, layout, 42);
    const auto twice = harness::mock_embed(meta, text, corpus.taxonomy, layout, 42);
    CHECK(once == twice);
    CHECK(once.dimension() == layout.dimension);

    // Reconstruct the noise-free coordinates and check the noise bound.
    std::vector<double> base(layout.dimension, 0.0);
    const harness::TaxonomyNode& node = corpus.taxonomy.node(meta.node_key);
    base[layout.family_axis.at(node.family)] = 1.0;
    for (const auto& path_key : node.path) {
        auto it = layout.node_axis.find(path_key);
        if (it != layout.node_axis.end()) {
            base[it->second] = 1.0;
        }
    }
    for (const auto& [slot_name, value] : meta.details) {
        const auto axis = layout.slot_axis.at(node.family + ":" + slot_name);
        double ordinal = -1.0;
        for (const auto& [slot_family, slot] : corpus.taxonomy.slots) {
            if (slot_family == node.family && slot.name == slot_name) {
                const auto pos = std::find(slot.values.begin(), slot.values.end(), value);
                ordinal = static_cast<double>(pos - slot.values.begin());
            }
        }
        REQUIRE(ordinal >= 0.0);
        base[axis] = (ordinal + 1.0) * 0.2;
    }
    for (std::size_t i = 0; i < layout.dimension; ++i) {
        CHECK(std::abs(static_cast<double>(once.values[i]) - base[i]) <= 0.02);
    }

    harness::EntityMeta bogus = meta;
    bogus.node_key = "nowhere/at all";
    CHECK_THROWS_AS(harness::mock_embed(bogus, text, corpus.taxonomy, layout, 42), UnknownNode);
}

TEST_CASE("the corpus provider embeds exactly the rendered records") {
    const harness::SyntheticCorpus corpus =
        harness::generate_taxonomy(harness::builtin_vocabulary(), small_params(7));
    harness::MockCorpusProvider provider(corpus, 7);
    CHECK(provider.id().find("seed=7") != std::string::npos);
    CHECK(provider.dimension() > 0);

    for (const auto& record : corpus.targets.records) {
        const auto vector = provider.embed(index::serialize_entity(record));
        CHECK(vector.dimension() == provider.dimension());
    }
    CHECK_THROWS_AS(provider.embed("never rendered anywhere"), UnknownNode);
}

TEST_CASE("intra-node distances stay below cross-subtree distances") {
    const harness::SyntheticCorpus corpus =
        harness::generate_taxonomy(harness::builtin_vocabulary(), small_params(7));
    const harness::SeparationReport report = harness::measure_separation(corpus, 7);
    CHECK(report.intra_pairs > 0);
    CHECK(report.cross_pairs > 0);
    CHECK(report.max_intra_node < report.min_cross_subtree);
    CHECK(report.ok());
}

TEST_CASE("rendered chat replies parse back to the confirmed set") {
    classify::ClassificationRequest request;
    request.source_id = "s1";
    request.relation_id = "related";
    request.candidate_ids = {"t1", "t2", "t3"};

    const std::string reply = harness::render_chat_reply(
        request, [](const std::string& id) { return id == "t2"; });
    CHECK(reply.find("Candidate t2: the relation holds.") != std::string::npos);
    CHECK(reply.find("Candidate t1: the relation does not hold.") != std::string::npos);

    const auto verdicts =
        classify::parse_response({reply, core::Provenance::oracle()}, request);
    REQUIRE(verdicts.size() == 3);
    CHECK_FALSE(verdicts[0].decision);
    CHECK(verdicts[1].decision);
    CHECK_FALSE(verdicts[2].decision);
}

TEST_CASE("oracle verdicts round trip to the truth restriction") {
    const core::RelationCatalog catalog = harness::builtin_esg_catalog();
    const std::vector<std::string> pool{"t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8"};
    util::Rng rng(31);

    for (int round = 0; round < 100; ++round) {
        CAPTURE(round);
        harness::GroundTruth truth;
        for (const auto& relation : catalog.relations) {
            for (const auto& target : pool) {
                if (rng.chance(0.3)) {
                    truth.triples.insert({relation.id, "s1", target});
                }
            }
        }
        harness::OracleBackend backend(truth);
        CHECK(backend.id() == "oracle:v1");

        classify::ClassificationRequest request;
        request.source_id = "s1";
        request.relation_id = catalog.relations[rng.below(catalog.relations.size())].id;
        for (const auto& target : pool) {
            if (rng.chance(0.6)) {
                request.candidate_ids.push_back(target);
            }
        }
        if (request.candidate_ids.empty()) {
            request.candidate_ids.push_back(pool[rng.below(pool.size())]);
        }

        const auto verdicts = classify::parse_response(backend.complete(request), request);
        REQUIRE(verdicts.size() == request.candidate_ids.size());
        for (const auto& v : verdicts) {
            CHECK(v.decision == truth.contains(request.relation_id, "s1", v.target_id));
        }
    }
}

TEST_CASE("the oracle answers the naive question from its alias relation") {
    harness::GroundTruth truth;
    truth.triples.insert({std::string(harness::kExactId), "s1", "t1"});
    truth.triples.insert({std::string(harness::kGeneralId), "s1", "t2"});
    harness::OracleBackend backend(truth);

    classify::ClassificationRequest request;
    request.source_id = "s1";
    request.relation_id = std::string(classify::kNaiveRelationId);
    request.candidate_ids = {"t1", "t2"};

    const auto verdicts = classify::parse_response(backend.complete(request), request);
    REQUIRE(verdicts.size() == 2);
    CHECK(verdicts[0].decision);
    CHECK_FALSE(verdicts[1].decision);
}

TEST_CASE("metrics: perfect verdicts score one everywhere") {
    harness::GroundTruth truth;
    truth.triples.insert({"same", "s1", "t1"});
    truth.triples.insert({"same", "s2", "t2"});

    const std::vector<core::RelationVerdict> verdicts{
        make_verdict("same", "s1", "t1", true), make_verdict("same", "s2", "t2", true)};
    const std::map<std::string, std::set<std::string>> retrieved{
        {"s1", {"t1"}}, {"s2", {"t2"}}};

    const harness::MetricsReport report = harness::compute_metrics(verdicts, truth, retrieved);
    const harness::RelationMetrics& m = report.by_relation.at("same");
    REQUIRE(m.precision.has_value());
    CHECK(*m.precision == 1.0);
    CHECK(m.recall == 1.0);
    REQUIRE(m.f1.has_value());
    CHECK(*m.f1 == 1.0);
    REQUIRE(m.retrieval_bounded_recall.has_value());
    CHECK(*m.retrieval_bounded_recall == 1.0);
    CHECK(report.retrieval_recall == 1.0);
}

TEST_CASE("metrics: two of three truth pairs found") {
    harness::GroundTruth truth;
    truth.triples.insert({"same", "s1", "t1"});
    truth.triples.insert({"same", "s1", "t2"});
    truth.triples.insert({"same", "s1", "t3"});

    const std::vector<core::RelationVerdict> verdicts{
        make_verdict("same", "s1", "t1", true), make_verdict("same", "s1", "t2", true),
        make_verdict("same", "s1", "t3", false), make_verdict("same", "s1", "t4", false)};
    const std::map<std::string, std::set<std::string>> retrieved{
        {"s1", {"t1", "t2", "t3", "t4"}}};

    const harness::MetricsReport report = harness::compute_metrics(verdicts, truth, retrieved);
    const harness::RelationMetrics& m = report.by_relation.at("same");
    CHECK(m.truth_pairs == 3);
    CHECK(m.predicted_pairs == 2);
    CHECK(m.true_positives == 2);
    CHECK(m.examined_truth_pairs == 3);
    REQUIRE(m.precision.has_value());
    CHECK(*m.precision == 1.0);
    CHECK(m.recall == 2.0 / 3.0);
    REQUIRE(m.f1.has_value());
    CHECK(*m.f1 == doctest::Approx(0.8));
    CHECK(*m.f1 == 2.0 * 1.0 * (2.0 / 3.0) / (1.0 + 2.0 / 3.0));
    REQUIRE(m.retrieval_bounded_recall.has_value());
    CHECK(*m.retrieval_bounded_recall == 2.0 / 3.0);
}

TEST_CASE("metrics: empty verdicts degrade to sentinels") {
    harness::GroundTruth truth;
    truth.triples.insert({"same", "s1", "t1"});

    const harness::MetricsReport report = harness::compute_metrics({}, truth, {});
    const harness::RelationMetrics& m = report.by_relation.at("same");
    CHECK(m.recall == 0.0);
    CHECK_FALSE(m.precision.has_value());
    CHECK_FALSE(m.f1.has_value());
    CHECK_FALSE(m.retrieval_bounded_recall.has_value());
    CHECK(report.retrieved_truth_triples == 0);
    CHECK(report.retrieval_recall == 0.0);

    const auto doc = harness::metrics_to_json(report);
    CHECK(doc["relations"]["same"]["precision"] == "n/a");
    CHECK(doc["relations"]["same"]["f1"] == "n/a");
    CHECK(doc["relations"]["same"]["retrieval_bounded_recall"] == "n/a");
    CHECK(doc["relations"]["same"]["recall"] == 0.0);
}

TEST_CASE("metrics: false positives pull precision down") {
    harness::GroundTruth truth;
    truth.triples.insert({"same", "s1", "t1"});

    const std::vector<core::RelationVerdict> verdicts{
        make_verdict("same", "s1", "t1", true), make_verdict("same", "s1", "t9", true)};
    const harness::MetricsReport report =
        harness::compute_metrics(verdicts, truth, {{"s1", {"t1", "t9"}}});
    const harness::RelationMetrics& m = report.by_relation.at("same");
    CHECK(m.predicted_pairs == 2);
    CHECK(m.true_positives == 1);
    REQUIRE(m.precision.has_value());
    CHECK(*m.precision == 0.5);
    CHECK(m.recall == 1.0);
}

TEST_CASE("metrics: retrieval recall counts triples whose target was fetched") {
    harness::GroundTruth truth;
    truth.triples.insert({"same", "s1", "t1"});
    truth.triples.insert({"same", "s1", "t2"});
    truth.triples.insert({"part-of", "s2", "t3"});
    truth.triples.insert({"part-of", "s2", "t4"});

    const std::map<std::string, std::set<std::string>> retrieved{
        {"s1", {"t1", "t2"}}, {"s2", {"t3"}}};
    const harness::MetricsReport report = harness::compute_metrics({}, truth, retrieved);
    CHECK(report.truth_triples == 4);
    CHECK(report.retrieved_truth_triples == 3);
    CHECK(report.retrieval_recall == 0.75);

    const harness::MetricsReport empty = harness::compute_metrics({}, {}, {});
    CHECK(empty.truth_triples == 0);
    CHECK(empty.retrieval_recall == 1.0);
}
