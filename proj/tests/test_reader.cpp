#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <map>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "legalqa/error.hpp"
#include "legalqa/reader.hpp"

using namespace legalqa;
using namespace legalqa::reader;

namespace {

corpus::Article make_article(std::int64_t id, std::vector<std::string> paragraphs) {
    corpus::Article a;
    a.id = id;
    a.reference = "Article " + std::to_string(id);
    int idx = 0;
    for (auto& p : paragraphs) {
        a.paragraphs.push_back({id, ++idx, std::move(p)});
    }
    a.body = "corps";
    return a;
}

corpus::Question make_question(std::int64_t id, std::string text) {
    corpus::Question q;
    q.id = id;
    q.text = std::move(text);
    q.answer = "reponse " + std::to_string(id);
    q.article_ids = {1};
    return q;
}

std::string random_words(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> len(2, 9);
    std::uniform_int_distribution<int> ch('a', 'z');
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        const int l = len(rng);
        for (int j = 0; j < l; ++j) out += static_cast<char>(ch(rng));
    }
    return out;
}

}  // namespace

TEST_CASE("token estimate applies the word multiplier and ceiling") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("un") == 2);                 // ceil(1.47)
    CHECK(estimate_tokens("un deux trois") == 5);      // ceil(4.41)
    CHECK(estimate_tokens(" espaces   multiples ") == 3);
}

TEST_CASE("zero-shot layout is description, provisions, question") {
    PromptSpec spec;
    spec.task_description = "Consigne.";
    spec.token_budget = 10'000;
    const auto art = make_article(9, {"premier alinea", "second alinea"});
    const auto built =
        build_context(spec, {}, {make_provision_context(art)}, make_question(1, "Pourquoi ?"));
    const auto& p = built.prompt;
    CHECK(p.find("Consigne.") == 0);
    const auto art_pos = p.find("Article Article 9:");
    const auto m1 = p.find("[9§1] premier alinea");
    const auto m2 = p.find("[9§2] second alinea");
    const auto q_pos = p.find("Question: Pourquoi ?");
    REQUIRE(art_pos != std::string::npos);
    REQUIRE(m1 != std::string::npos);
    REQUIRE(m2 != std::string::npos);
    REQUIRE(q_pos != std::string::npos);
    CHECK(art_pos < m1);
    CHECK(m1 < m2);
    CHECK(m2 < q_pos);
    CHECK(p.rfind("Answer:") == p.size() - 7);
    CHECK(built.manifest.estimated_tokens <= spec.token_budget);
}

TEST_CASE("demos are dropped before provisions under a tight budget") {
    PromptSpec spec;
    spec.task_description = "Consigne.";
    spec.mode = Mode::FewShot;

    Demonstration d1{{"Article un.\n"}, "Question une tres longue avec beaucoup de mots", "R1"};
    Demonstration d2{{"Article deux.\n"}, "Question deux", "R2"};
    const auto art = make_article(3, {"alinea unique"});

    // Generous budget keeps everything.
    spec.token_budget = 10'000;
    auto full = build_context(spec, {d1, d2}, {make_provision_context(art)},
                              make_question(1, "Q ?"));
    CHECK(full.manifest.included_demos.size() == 2);
    CHECK(full.manifest.dropped_demos == 0);

    // Tight budget: demos go first (least similar = front), provisions stay.
    spec.token_budget = 30;
    auto tight = build_context(spec, {d1, d2}, {make_provision_context(art)},
                               make_question(1, "Q ?"));
    CHECK(tight.manifest.dropped_demos >= 1);
    CHECK(tight.manifest.included_provisions.size() == 1);
    if (tight.manifest.included_demos.size() == 1) {
        CHECK(tight.manifest.included_demos[0].answer == "R2");  // most similar kept
    }

    // Impossible budget: floor error.
    spec.token_budget = 3;
    CHECK_THROWS_AS(build_context(spec, {d1, d2}, {make_provision_context(art)},
                                  make_question(1, "Q ?")),
                    BudgetError);
}

TEST_CASE("one-shot keeps only the most similar demonstration") {
    PromptSpec spec;
    spec.task_description = "D";
    spec.mode = Mode::OneShot;
    spec.token_budget = 10'000;
    Demonstration least{{"P"}, "Q moins", "A moins"};
    Demonstration most{{"P"}, "Q plus", "A plus"};
    const auto built = build_context(spec, {least, most},
                                     {make_provision_context(make_article(1, {"al"}))},
                                     make_question(2, "Q ?"));
    REQUIRE(built.manifest.included_demos.size() == 1);
    CHECK(built.manifest.included_demos[0].answer == "A plus");
}

TEST_CASE("budget property holds over 500 random configurations") {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> budget_dist(5, 400);
    std::uniform_int_distribution<int> demo_count(0, 3);
    std::uniform_int_distribution<int> prov_count(1, 4);
    std::uniform_int_distribution<int> para_count(1, 3);
    std::uniform_int_distribution<int> words(2, 25);

    int fitted = 0, refused = 0;
    for (int t = 0; t < 500; ++t) {
        PromptSpec spec;
        spec.task_description = random_words(rng, words(rng));
        spec.mode = Mode::FewShot;
        spec.token_budget = static_cast<std::size_t>(budget_dist(rng));

        std::vector<Demonstration> demos;
        const int nd = demo_count(rng);
        for (int i = 0; i < nd; ++i) {
            demos.push_back({{random_words(rng, words(rng))}, random_words(rng, words(rng)),
                             random_words(rng, words(rng))});
        }
        std::vector<ProvisionContext> provisions;
        const int np = prov_count(rng);
        for (int i = 0; i < np; ++i) {
            std::vector<std::string> paras;
            const int npar = para_count(rng);
            for (int j = 0; j < npar; ++j) paras.push_back(random_words(rng, words(rng)));
            provisions.push_back(
                make_provision_context(make_article(100 + i, std::move(paras))));
        }
        const auto q = make_question(1, random_words(rng, words(rng)));

        try {
            const auto built = build_context(spec, demos, provisions, q);
            ++fitted;
            CHECK(built.manifest.estimated_tokens <= spec.token_budget);
            CHECK(estimate_tokens(built.prompt) <= spec.token_budget);
            // The manifest reconstructs the prompt byte for byte, also
            // after a JSON round trip.
            CHECK(render_context(built.manifest) == built.prompt);
            const auto round = manifest_from_json(manifest_to_json(built.manifest));
            CHECK(render_context(round) == built.prompt);
        } catch (const BudgetError&) {
            ++refused;
        }
    }
    // Both outcomes must actually occur for the property to mean much.
    CHECK(fitted > 50);
    CHECK(refused > 10);
}

TEST_CASE("demonstration selection excludes q, ranks by similarity, most similar last") {
    corpus::Corpus corp({make_article(1, {"al un"}), make_article(2, {"al deux"}),
                         make_article(3, {"al trois"})});
    std::vector<corpus::Question> pool;
    for (int i = 1; i <= 4; ++i) {
        auto q = make_question(i, "question " + std::to_string(i));
        q.article_ids = {1 + (i - 1) % 3};
        pool.push_back(q);
    }
    const auto target = make_question(2, "cible");
    const auto sims = std::map<std::int64_t, double>{{1, 0.3}, {3, 0.9}, {4, 0.5}};
    const auto demos = select_demonstrations(
        target, pool, 2, [&](const corpus::Question& c) { return sims.at(c.id); }, corp);
    REQUIRE(demos.size() == 2);
    // Picks questions 3 (0.9) and 4 (0.5); most similar last.
    CHECK(demos[0].question == "question 4");
    CHECK(demos[1].question == "question 3");
    CHECK(select_demonstrations(target, pool, 0,
                                [](const corpus::Question&) { return 0.0; }, corp)
              .empty());
}

TEST_CASE("parse_reader_output splits provided from hallucinated markers") {
    const std::set<corpus::ParagraphMarker> provided = {{10, 1}, {10, 2}, {11, 1}};
    const std::string raw =
        "La reponse cite [10§1] et aussi 99§4.\nRationales: 10§1, 11§1.";
    const auto out = parse_reader_output(raw, provided);
    CHECK(out.markers == std::vector<corpus::ParagraphMarker>{{10, 1}, {11, 1}});
    CHECK(out.hallucinated_markers == std::vector<corpus::ParagraphMarker>{{99, 4}});
    // The trailing rationale list is stripped from the answer text.
    CHECK(out.answer_text == "La reponse cite [10§1] et aussi 99§4.");
    CHECK(out.raw == raw);
}

TEST_CASE("a rationale label followed by prose is not stripped") {
    const auto out =
        parse_reader_output("Rationales: see the discussion above 10§1", {{10, 1}});
    CHECK(out.answer_text == "Rationales: see the discussion above 10§1");
    CHECK(out.markers.size() == 1);
}

TEST_CASE("duplicate markers are reported once, in order of first appearance") {
    const auto out = parse_reader_output("2§1 puis 3§1 puis 2§1 encore", {{2, 1}, {3, 1}});
    CHECK(out.markers == std::vector<corpus::ParagraphMarker>{{2, 1}, {3, 1}});
}

TEST_CASE("generate validates sampling parameters and rejects empty completions") {
    struct Fixed : ChatClient {
        std::string reply;
        std::string complete(const ChatRequest&) override { return reply; }
    };
    Fixed client;
    client.reply = "ok";
    GenConfig cfg;
    CHECK(generate("p", cfg, client).text == "ok");

    GenConfig bad_top_p = cfg;
    bad_top_p.top_p = 0.0;
    CHECK_THROWS_AS(generate("p", bad_top_p, client), GenerationError);
    bad_top_p.top_p = 1.5;
    CHECK_THROWS_AS(generate("p", bad_top_p, client), GenerationError);
    GenConfig bad_temp = cfg;
    bad_temp.temperature = -0.1;
    CHECK_THROWS_AS(generate("p", bad_temp, client), GenerationError);

    client.reply.clear();
    CHECK_THROWS_AS(generate("p", cfg, client), GenerationError);
}

TEST_CASE("HTTP chat client sends an OpenAI-shaped request and retries failures") {
    httplib::Server server;
    std::atomic<int> calls{0};
    std::string seen_auth;
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    const int call = ++calls;
                    seen_auth = req.get_header_value("Authorization");
                    if (call == 1) {
                        res.status = 500;
                        return;
                    }
                    const auto body = nlohmann::json::parse(req.body);
                    const auto content =
                        body.at("messages").at(0).at("content").get<std::string>();
                    nlohmann::json out = {
                        {"choices",
                         {{{"message", {{"role", "assistant"},
                                        {"content", "echo: " + content}}}}}}};
                    res.set_content(out.dump(), "application/json");
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    GenConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
    cfg.api_key = "secret";
    cfg.max_retries = 2;
    auto client = make_http_chat_client(cfg);
    const auto result = generate("bonjour", cfg, *client);
    CHECK(result.text == "echo: bonjour");
    CHECK(seen_auth == "Bearer secret");
    CHECK(calls == 2);

    server.stop();
    t.join();
}

TEST_CASE("HTTP chat client gives up after exhausting retries") {
    httplib::Server server;
    server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    GenConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
    cfg.max_retries = 1;
    auto client = make_http_chat_client(cfg);
    CHECK_THROWS_AS(generate("p", cfg, *client), GenerationError);

    server.stop();
    t.join();
}
