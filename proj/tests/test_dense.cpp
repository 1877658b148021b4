#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "legalqa/dense.hpp"
#include "legalqa/embedprov.hpp"
#include "legalqa/error.hpp"

using namespace legalqa;
using namespace legalqa::dense;

TEST_CASE("pooling is column-wise mean / max") {
    const std::vector<std::vector<float>> rows = {{1, 2, 3}, {3, 0, 9}};
    CHECK(pool(rows, Pooling::Mean) == std::vector<float>{2, 1, 6});
    CHECK(pool(rows, Pooling::Max) == std::vector<float>{3, 2, 9});
    CHECK_THROWS_AS(pool({}, Pooling::Mean), Error);
}

TEST_CASE("similarity hand values and error cases") {
    const std::vector<float> u = {1, 0, 2};
    const std::vector<float> v = {2, 1, 2};
    CHECK(similarity(u, v, Similarity::Dot) == doctest::Approx(6.0).epsilon(1e-12));
    const double expected = 6.0 / (std::sqrt(5.0) * 3.0);
    CHECK(similarity(u, v, Similarity::Cosine) == doctest::Approx(expected).epsilon(1e-12));
    const std::vector<float> w = {1, 2};
    CHECK_THROWS_AS(similarity(u, w, Similarity::Dot), Error);
    const std::vector<float> zero = {0, 0, 0};
    CHECK_THROWS_AS(similarity(u, zero, Similarity::Cosine), Error);
}

TEST_CASE("store rejects duplicates, wrong dims, and non-finite values") {
    EmbeddingStore store(3);
    store.insert(1, std::vector<float>{1, 0, 0});
    CHECK_THROWS_AS(store.insert(1, std::vector<float>{0, 1, 0}), Error);
    CHECK_THROWS_AS(store.insert(2, std::vector<float>{1, 0}), Error);
    CHECK_THROWS_AS(
        store.insert(3, std::vector<float>{1, 0, std::numeric_limits<float>::quiet_NaN()}),
        Error);
    // Zero vectors are invalid under cosine similarity.
    CHECK_THROWS_AS(store.insert(4, std::vector<float>{0, 0, 0}), Error);
    CHECK(store.contains(1));
    CHECK_FALSE(store.contains(7));
    CHECK_THROWS_AS(store.vector_for(7), Error);
}

TEST_CASE("binary save/load round-trips ids, vectors, and similarity kind") {
    EmbeddingStore store(4, Similarity::Dot);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> val(-2, 2);
    for (std::int64_t id = 10; id < 40; ++id) {
        std::vector<float> v(4);
        for (auto& x : v) x = val(rng);
        store.insert(id, v);
    }
    const std::string path = std::string(LEGALQA_FIXTURE_DIR) + "/tmp_store.bin";
    store.save(path);
    const auto loaded = EmbeddingStore::load(path);
    CHECK(loaded.dim() == 4);
    CHECK(loaded.similarity_kind() == Similarity::Dot);
    CHECK(loaded.ids() == store.ids());
    for (const auto id : store.ids()) {
        const auto a = store.vector_for(id);
        const auto b = loaded.vector_for(id);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    std::remove(path.c_str());
}

TEST_CASE("dense_search equals the serial reference and a brute-force oracle") {
    const std::size_t dim = 24;
    EmbeddingStore store(dim, Similarity::Cosine);
    for (int i = 1; i <= 500; ++i) {
        store.insert(i, embedprov::pseudo_embedding("doc " + std::to_string(i), dim, 1));
    }
    for (int qi = 0; qi < 20; ++qi) {
        const auto q = embedprov::pseudo_embedding("query " + std::to_string(qi), dim, 2);
        const auto par = dense_search(q, store, 10);
        const auto ser = dense_search_serial(q, store, 10);
        CHECK(par.entries == ser.entries);

        // Oracle: score every row via similarity(), sort, truncate.
        std::vector<ScoredDoc> expected;
        for (std::size_t i = 0; i < store.size(); ++i) {
            expected.push_back(
                {store.ids()[i], similarity(q, store.row(i), Similarity::Cosine)});
        }
        sort_and_truncate(expected, 10);
        REQUIRE(par.entries.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(par.entries[i].doc_id == expected[i].doc_id);
            CHECK(par.entries[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
        }
    }
}

TEST_CASE("dense_search tie-breaks by ascending id and handles small stores") {
    EmbeddingStore store(2, Similarity::Cosine);
    store.insert(5, std::vector<float>{1, 0});
    store.insert(2, std::vector<float>{2, 0});  // same direction, same cosine
    const std::vector<float> q = {1, 0};
    const auto got = dense_search(q, store, 10);
    REQUIRE(got.entries.size() == 2);
    CHECK(got.entries[0].doc_id == 2);
    CHECK(got.entries[1].doc_id == 5);
    CHECK_THROWS_AS(dense_search(std::vector<float>{1, 0, 0}, store, 3), Error);
}
