#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "legalqa/error.hpp"
#include "legalqa/runfile.hpp"

using namespace legalqa;
using namespace legalqa::runfile;

namespace {
const std::string kFixtures = LEGALQA_FIXTURE_DIR;
}

TEST_CASE("digest is FNV-1a 64 with known reference values") {
    // Published FNV-1a test vectors.
    CHECK(digest("") == "cbf29ce484222325");
    CHECK(digest("a") == "af63dc4c8601ec8c");
    CHECK(digest("foobar") == "85944171f73967e8");
    CHECK(digest("abc") != digest("acb"));
}

TEST_CASE("digest_file hashes the bytes on disk") {
    const std::string path = kFixtures + "/tmp_digest.txt";
    {
        std::ofstream out(path, std::ios::binary);
        out << "foobar";
    }
    CHECK(digest_file(path) == "85944171f73967e8");
    std::remove(path.c_str());
    CHECK_THROWS_AS(digest_file(path), Error);
}

TEST_CASE("manifests derive the run id from config, seed, and input digests") {
    const std::string in1 = kFixtures + "/tmp_in1.txt";
    {
        std::ofstream out(in1);
        out << "contenu";
    }
    const auto a = make_manifest("retrieve", "cfg", {in1}, 3);
    const auto b = make_manifest("retrieve", "cfg", {in1}, 3);
    CHECK(a.run_id == b.run_id);  // timestamps differ, identity does not
    CHECK(a.config_digest == digest("cfg"));
    CHECK(a.input_digests.at(in1) == digest("contenu"));

    const auto other_seed = make_manifest("retrieve", "cfg", {in1}, 4);
    CHECK(other_seed.run_id != a.run_id);
    const auto other_cfg = make_manifest("retrieve", "cfg2", {in1}, 3);
    CHECK(other_cfg.run_id != a.run_id);
    {
        std::ofstream out(in1);
        out << "different";
    }
    const auto other_input = make_manifest("retrieve", "cfg", {in1}, 3);
    CHECK(other_input.run_id != a.run_id);
    std::remove(in1.c_str());
}

TEST_CASE("retrieval runs round-trip through disk") {
    RetrievalRunFile run;
    run.run_id = "r1";
    run.engine = "bm25";
    run.k = 5;
    RankedList list;
    list.question_id = 9;
    list.entries = {{4, 2.5}, {1, 1.25}};
    run.results.push_back(list);

    const std::string path = kFixtures + "/tmp_retrieval.json";
    save_retrieval_run(run, path);
    const auto loaded = load_retrieval_run(path);
    CHECK(loaded.run_id == "r1");
    CHECK(loaded.engine == "bm25");
    CHECK(loaded.k == 5);
    REQUIRE(loaded.results.size() == 1);
    CHECK(loaded.results[0] == list);
    std::remove(path.c_str());

    // Malformed file -> SchemaError.
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_retrieval_run(path), SchemaError);
    std::remove(path.c_str());
}

TEST_CASE("answer runs round-trip including marker partitions") {
    AnswerRunFile run;
    run.run_id = "a1";
    run.mode = "few";
    AnswerEntry e;
    e.question_id = 2;
    e.output.answer_text = "Texte de reponse.";
    e.output.markers = {{10, 1}};
    e.output.hallucinated_markers = {{99, 9}};
    e.output.raw = "Texte de reponse.\nRationales: 10§1, 99§9";
    run.entries.push_back(e);

    const std::string path = kFixtures + "/tmp_answers.json";
    save_answer_run(run, path);
    const auto loaded = load_answer_run(path);
    CHECK(loaded.run_id == "a1");
    CHECK(loaded.mode == "few");
    REQUIRE(loaded.entries.size() == 1);
    CHECK(loaded.entries[0].question_id == 2);
    CHECK(loaded.entries[0].output.answer_text == e.output.answer_text);
    CHECK(loaded.entries[0].output.markers == e.output.markers);
    CHECK(loaded.entries[0].output.hallucinated_markers == e.output.hallucinated_markers);
    CHECK(loaded.entries[0].output.raw == e.output.raw);
    std::remove(path.c_str());
}

TEST_CASE("manifests serialize with timestamps kept out of the run id") {
    auto m = make_manifest("evaluate", "cfg", {}, 0);
    m.finished_at = "2000-01-01T00:00:00Z";
    m.outcome = "ok";
    const std::string path = kFixtures + "/tmp_manifest.json";
    save_manifest(m, path);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find(m.run_id) != std::string::npos);
    CHECK(text.find("started_at") != std::string::npos);
    std::remove(path.c_str());
}
