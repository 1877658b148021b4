#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <map>

#include "legalqa/annotate.hpp"
#include "legalqa/error.hpp"

using namespace legalqa;
using namespace legalqa::annotate;

namespace {

corpus::Corpus small_corpus() {
    std::vector<corpus::Article> articles;
    for (std::int64_t id : {1, 2}) {
        corpus::Article a;
        a.id = id;
        a.reference = "Article " + std::to_string(id);
        a.body = "corps";
        for (int p = 1; p <= 4; ++p) {
            a.paragraphs.push_back({id, p, "alinea " + std::to_string(p)});
        }
        articles.push_back(std::move(a));
    }
    return corpus::Corpus(std::move(articles));
}

corpus::Question question_over(std::vector<std::int64_t> articles, std::int64_t id = 1) {
    corpus::Question q;
    q.id = id;
    q.text = "Que faire ?";
    q.answer = "Voici la reponse.";
    q.article_ids = std::move(articles);
    return q;
}

}  // namespace

TEST_CASE("the annotation prompt lists every candidate paragraph with its marker") {
    const auto corp = small_corpus();
    const auto q = question_over({1, 2});
    const auto prompt = build_annotation_prompt(q, q.answer, corp);
    CHECK(prompt.find("Question: Que faire ?") != std::string::npos);
    CHECK(prompt.find("Answer: Voici la reponse.") != std::string::npos);
    for (std::int64_t a : {1, 2}) {
        for (int p = 1; p <= 4; ++p) {
            const auto marker = "[" + std::to_string(a) + "§" + std::to_string(p) + "]";
            CHECK(prompt.find(marker) != std::string::npos);
        }
    }
    CHECK(prompt.find("None") != std::string::npos);
    CHECK_THROWS_AS(build_annotation_prompt(q, "   ", corp), Error);
}

TEST_CASE("parse_annotation handles None, punctuation, and non-candidates") {
    std::set<corpus::ParagraphMarker> candidates = {{1, 1}, {1, 2}, {2, 1}};
    CHECK(parse_annotation("None", candidates).empty());
    CHECK(parse_annotation("  none.  ", candidates).empty());

    const auto got = parse_annotation("1§1, 2§1.", candidates);
    CHECK(got == std::set<corpus::ParagraphMarker>{{1, 1}, {2, 1}});

    std::vector<std::string> warnings;
    const auto dropped = parse_annotation("1§2, 7§9", candidates, &warnings);
    CHECK(dropped == std::set<corpus::ParagraphMarker>{{1, 2}});
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("7§9") != std::string::npos);

    CHECK_THROWS_AS(parse_annotation("je ne sais pas", candidates), ParseError);
}

TEST_CASE("parse_annotation inverts rendering for any candidate subset") {
    std::set<corpus::ParagraphMarker> candidates;
    for (int a = 1; a <= 3; ++a) {
        for (int p = 1; p <= 3; ++p) candidates.insert({a, p});
    }
    for (unsigned mask = 0; mask < 64; ++mask) {
        std::set<corpus::ParagraphMarker> subset;
        unsigned bit = 0;
        for (const auto& m : candidates) {
            if (mask & (1u << (bit % 6))) subset.insert(m);
            ++bit;
        }
        if (subset.empty()) continue;
        std::string rendered;
        for (const auto& m : subset) {
            if (!rendered.empty()) rendered += ", ";
            rendered += corpus::render_marker(m);
        }
        CHECK(parse_annotation(rendered, candidates) == subset);
    }
}

TEST_CASE("baseline_first marks paragraph 1 of every gold article") {
    const auto corp = small_corpus();
    const auto got = baseline_first(question_over({1, 2}), corp);
    CHECK(got == std::set<corpus::ParagraphMarker>{{1, 1}, {2, 1}});
    CHECK_THROWS_AS(baseline_first(question_over({77}), corp), ReferenceError);
}

TEST_CASE("baseline_random is deterministic per seed and in-range") {
    const auto corp = small_corpus();
    const auto q = question_over({1, 2});
    const auto a = baseline_random(q, corp, 5);
    const auto b = baseline_random(q, corp, 5);
    const auto c = baseline_random(q, corp, 6);
    CHECK(a == b);
    CHECK(a.size() == 2);
    for (const auto& m : a) {
        CHECK(m.paragraph_index >= 1);
        CHECK(m.paragraph_index <= 4);
    }
    // Some seed must differ eventually; try a few.
    bool differs = c != a;
    for (std::uint64_t s = 7; !differs && s < 30; ++s) {
        differs = baseline_random(q, corp, s) != a;
    }
    CHECK(differs);
}

TEST_CASE("evaluate_annotator macro-averages and rejects id mismatches") {
    std::map<std::int64_t, std::set<corpus::ParagraphMarker>> gold = {
        {1, {{1, 2}, {1, 3}}},
        {2, {{2, 1}}},
    };
    std::map<std::int64_t, std::set<corpus::ParagraphMarker>> pred = {
        {1, {{1, 1}, {1, 2}}},  // P=R=F1=0.5
        {2, {{2, 1}}},          // perfect
    };
    const auto s = evaluate_annotator(pred, gold);
    CHECK(s.precision == doctest::Approx(0.75));
    CHECK(s.recall == doctest::Approx(0.75));
    CHECK(s.f1 == doctest::Approx(0.75));

    pred.erase(2);
    CHECK_THROWS_AS(evaluate_annotator(pred, gold), Error);
    pred[3] = {};
    CHECK_THROWS_AS(evaluate_annotator(pred, gold), Error);
}

TEST_CASE("annotation runs save and load losslessly") {
    AnnotationRun run;
    run.run_id = "deadbeef";
    AnnotationRecord r;
    r.question_id = 4;
    r.raw = "1§1, 2§3";
    r.parsed_markers = {{1, 1}, {2, 3}};
    r.model_name = "test-model";
    r.cost_tokens = 123;
    run.records.push_back(r);

    const std::string path = std::string(LEGALQA_FIXTURE_DIR) + "/tmp_annotations.json";
    save_annotation_run(run, path);
    const auto loaded = load_annotation_run(path);
    CHECK(loaded.run_id == "deadbeef");
    REQUIRE(loaded.records.size() == 1);
    CHECK(loaded.records[0].question_id == 4);
    CHECK(loaded.records[0].parsed_markers == r.parsed_markers);
    CHECK(loaded.records[0].model_name == "test-model");
    CHECK(loaded.records[0].cost_tokens == 123);
    std::remove(path.c_str());
}
