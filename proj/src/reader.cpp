#include "legalqa/reader.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "legalqa/error.hpp"

namespace legalqa::reader {
namespace {

using nlohmann::json;

std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (const char c : text) {
        const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

std::string render_provision(const ProvisionContext& p) {
    std::string out = "Article " + p.reference + ":\n";
    for (const auto& [marker, text] : p.paragraphs) {
        out += "[" + corpus::render_marker(marker) + "] " + text + "\n";
    }
    return out;
}

std::string render_demo(const Demonstration& d) {
    std::string out;
    for (const auto& p : d.provision_texts) out += p + "\n";
    out += "Question: " + d.question + "\n";
    out += "Answer: " + d.answer + "\n";
    return out;
}

struct UrlParts {
    std::string host;
    std::string path;
};

}  // namespace

ProvisionContext make_provision_context(const corpus::Article& article) {
    ProvisionContext p;
    p.article_id = article.id;
    p.reference = article.reference;
    for (const auto& para : article.paragraphs) {
        p.paragraphs.emplace_back(corpus::ParagraphMarker{article.id, para.index}, para.text);
    }
    return p;
}

std::size_t estimate_tokens(std::string_view text) {
    return static_cast<std::size_t>(
        std::ceil(static_cast<double>(word_count(text)) * 1.4 * 1.05));
}

std::string render_context(const ContextManifest& m) {
    std::string out = m.task_description + "\n\n";
    for (const auto& d : m.included_demos) out += render_demo(d) + "\n";
    for (const auto& p : m.included_provisions) out += render_provision(p) + "\n";
    out += "Question: " + m.question + "\nAnswer:";
    return out;
}

std::string manifest_to_json(const ContextManifest& m) {
    nlohmann::ordered_json doc;
    doc["task_description"] = m.task_description;
    auto demos = nlohmann::ordered_json::array();
    for (const auto& d : m.included_demos) {
        demos.push_back({{"provisions", d.provision_texts},
                         {"question", d.question},
                         {"answer", d.answer}});
    }
    doc["included_demos"] = std::move(demos);
    auto provisions = nlohmann::ordered_json::array();
    for (const auto& p : m.included_provisions) {
        auto paragraphs = nlohmann::ordered_json::array();
        for (const auto& [marker, text] : p.paragraphs) {
            paragraphs.push_back({{"marker", corpus::render_marker(marker)}, {"text", text}});
        }
        provisions.push_back({{"article_id", p.article_id},
                              {"reference", p.reference},
                              {"paragraphs", std::move(paragraphs)}});
    }
    doc["included_provisions"] = std::move(provisions);
    doc["question"] = m.question;
    doc["dropped_demos"] = m.dropped_demos;
    doc["truncated_paragraphs"] = m.truncated_paragraphs;
    doc["estimated_tokens"] = m.estimated_tokens;
    return doc.dump(2);
}

ContextManifest manifest_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest: malformed JSON: ") + e.what());
    }
    ContextManifest m;
    m.task_description = doc.at("task_description").get<std::string>();
    for (const auto& d : doc.at("included_demos")) {
        Demonstration demo;
        demo.provision_texts = d.at("provisions").get<std::vector<std::string>>();
        demo.question = d.at("question").get<std::string>();
        demo.answer = d.at("answer").get<std::string>();
        m.included_demos.push_back(std::move(demo));
    }
    for (const auto& p : doc.at("included_provisions")) {
        ProvisionContext pc;
        pc.article_id = p.at("article_id").get<std::int64_t>();
        pc.reference = p.at("reference").get<std::string>();
        for (const auto& para : p.at("paragraphs")) {
            pc.paragraphs.emplace_back(corpus::parse_marker(para.at("marker").get<std::string>()),
                                       para.at("text").get<std::string>());
        }
        m.included_provisions.push_back(std::move(pc));
    }
    m.question = doc.at("question").get<std::string>();
    m.dropped_demos = doc.at("dropped_demos").get<std::size_t>();
    m.truncated_paragraphs = doc.at("truncated_paragraphs").get<std::size_t>();
    m.estimated_tokens = doc.at("estimated_tokens").get<std::size_t>();
    return m;
}

BuiltContext build_context(const PromptSpec& spec, std::vector<Demonstration> demos,
                           std::vector<ProvisionContext> provisions,
                           const corpus::Question& question) {
    if (spec.token_budget == 0) throw BudgetError("build_context: token budget must be positive");
    for (const auto& d : demos) {
        if (d.question.empty() || d.answer.empty() || d.provision_texts.empty())
            throw Error("build_context: demonstration with empty field");
    }
    if (provisions.size() > spec.provisions_per_question)
        provisions.resize(spec.provisions_per_question);
    if (spec.mode == Mode::ZeroShot) demos.clear();
    if (spec.mode == Mode::OneShot && demos.size() > 1) {
        // Keep the most similar demonstration (last).
        demos.erase(demos.begin(), demos.end() - 1);
    }

    ContextManifest m;
    m.task_description = spec.task_description;
    m.included_demos = std::move(demos);
    m.included_provisions = std::move(provisions);
    m.question = question.text;

    auto fits = [&]() {
        m.estimated_tokens = estimate_tokens(render_context(m));
        return m.estimated_tokens <= spec.token_budget;
    };

    while (!fits()) {
        if (!m.included_demos.empty()) {
            // Least similar demo is dropped first.
            m.included_demos.erase(m.included_demos.begin());
            ++m.dropped_demos;
            continue;
        }
        // Truncate the lowest-ranked provision's trailing paragraphs.
        auto& provs = m.included_provisions;
        const bool at_floor =
            provs.empty() || (provs.size() == 1 && provs.front().paragraphs.size() <= 1);
        if (at_floor) {
            throw BudgetError(
                "build_context: budget of " + std::to_string(spec.token_budget) +
                " tokens cannot fit the description, question and one provision paragraph");
        }
        provs.back().paragraphs.pop_back();
        ++m.truncated_paragraphs;
        if (provs.back().paragraphs.empty()) provs.pop_back();
    }

    return {render_context(m), std::move(m)};
}

std::vector<Demonstration> select_demonstrations(
    const corpus::Question& q, const std::vector<corpus::Question>& pool, std::size_t n,
    const std::function<double(const corpus::Question&)>& similarity_to_q,
    const corpus::Corpus& corpus_ref) {
    if (n == 0) return {};
    struct Scored {
        double score;
        const corpus::Question* question;
    };
    std::vector<Scored> scored;
    for (const auto& cand : pool) {
        if (cand.id == q.id) continue;
        scored.push_back({similarity_to_q(cand), &cand});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.question->id < b.question->id;
    });
    if (scored.size() > n) scored.resize(n);
    // Most similar last, adjacent to the test question.
    std::reverse(scored.begin(), scored.end());
    std::vector<Demonstration> out;
    for (const auto& s : scored) {
        Demonstration d;
        for (const auto id : s.question->article_ids) {
            d.provision_texts.push_back(
                render_provision(make_provision_context(corpus_ref.at(id))));
        }
        d.question = s.question->text;
        d.answer = s.question->answer;
        out.push_back(std::move(d));
    }
    return out;
}

namespace {

class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(GenConfig config) : config_(std::move(config)) {}

    std::string complete(const ChatRequest& request) override {
        json body;
        auto messages = json::array();
        for (const auto& msg : request.messages) {
            messages.push_back({{"role", msg.role}, {"content", msg.content}});
        }
        body["messages"] = std::move(messages);
        body["temperature"] = request.temperature;
        body["top_p"] = request.top_p;
        body["max_tokens"] = request.max_tokens;
        if (!request.model.empty()) body["model"] = request.model;
        const std::string payload = body.dump();

        std::string last_error;
        auto backoff = std::chrono::milliseconds(100);
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
            httplib::Client client(config_.endpoint);
            client.set_connection_timeout(
                std::chrono::duration_cast<std::chrono::seconds>(config_.timeout));
            client.set_read_timeout(
                std::chrono::duration_cast<std::chrono::seconds>(config_.timeout));
            httplib::Headers headers;
            if (!config_.api_key.empty()) {
                headers.emplace(config_.auth_header, "Bearer " + config_.api_key);
            }
            auto res = client.Post(config_.path, headers, payload, "application/json");
            if (!res) {
                last_error = "transport failure: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status < 200 || res->status >= 300) {
                last_error =
                    "status " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
                continue;
            }
            try {
                const auto doc = json::parse(res->body);
                return doc.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception& e) {
                last_error = std::string("bad response body: ") + e.what();
                continue;
            }
        }
        throw GenerationError("chat completion failed after " +
                              std::to_string(config_.max_retries + 1) +
                              " attempts: " + last_error);
    }

private:
    GenConfig config_;
};

}  // namespace

std::unique_ptr<ChatClient> make_http_chat_client(const GenConfig& config) {
    return std::make_unique<HttpChatClient>(config);
}

GenerationResult generate(const std::string& prompt, const GenConfig& config,
                          ChatClient& client) {
    if (config.top_p <= 0.0 || config.top_p > 1.0)
        throw GenerationError("generate: top_p must be in (0, 1]");
    if (config.temperature < 0.0)
        throw GenerationError("generate: temperature must be >= 0");
    ChatRequest req;
    req.messages.push_back({"user", prompt});
    req.temperature = config.temperature;
    req.top_p = config.top_p;
    req.max_tokens = config.max_new_tokens;
    req.model = config.model;
    const auto start = std::chrono::steady_clock::now();
    auto text = client.complete(req);
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    if (text.empty()) throw GenerationError("generate: service returned an empty completion");
    return {std::move(text), latency};
}

ReaderOutput parse_reader_output(const std::string& raw,
                                 const std::set<corpus::ParagraphMarker>& provided) {
    ReaderOutput out;
    out.raw = raw;

    // Scan for <digits>§<digits>; '§' is the two bytes 0xC2 0xA7.
    std::vector<std::pair<std::size_t, corpus::ParagraphMarker>> found;  // (byte pos, marker)
    static const std::string sep = "§";
    std::size_t pos = 0;
    while ((pos = raw.find(sep, pos)) != std::string::npos) {
        std::size_t id_begin = pos;
        while (id_begin > 0 && std::isdigit(static_cast<unsigned char>(raw[id_begin - 1]))) {
            --id_begin;
        }
        std::size_t idx_end = pos + sep.size();
        while (idx_end < raw.size() && std::isdigit(static_cast<unsigned char>(raw[idx_end]))) {
            ++idx_end;
        }
        if (id_begin < pos && idx_end > pos + sep.size()) {
            const auto text = raw.substr(id_begin, idx_end - id_begin);
            found.emplace_back(id_begin, corpus::parse_marker(text));
        }
        pos += sep.size();
    }

    std::set<corpus::ParagraphMarker> seen;
    for (const auto& [at, marker] : found) {
        if (!seen.insert(marker).second) continue;
        if (provided.count(marker)) {
            out.markers.push_back(marker);
        } else {
            out.hallucinated_markers.push_back(marker);
        }
    }

    // Strip a trailing rationale list ("Rationales: 1§2, 3§4.") if the
    // tail after the label holds nothing but markers and punctuation.
    out.answer_text = raw;
    static const std::string label = "Rationales:";
    const auto label_pos = raw.rfind(label);
    if (label_pos != std::string::npos) {
        const auto tail = raw.substr(label_pos + label.size());
        bool only_markers = true;
        std::size_t i = 0;
        while (i < tail.size()) {
            const unsigned char c = tail[i];
            if (std::isspace(c) || c == ',' || c == '.' || c == ';') {
                ++i;
            } else if (std::isdigit(c)) {
                std::size_t j = i;
                while (j < tail.size() && std::isdigit(static_cast<unsigned char>(tail[j]))) ++j;
                if (tail.compare(j, sep.size(), sep) == 0) {
                    j += sep.size();
                    std::size_t k = j;
                    while (k < tail.size() && std::isdigit(static_cast<unsigned char>(tail[k])))
                        ++k;
                    if (k > j) {
                        i = k;
                        continue;
                    }
                }
                only_markers = false;
                break;
            } else {
                only_markers = false;
                break;
            }
        }
        if (only_markers) {
            auto text = raw.substr(0, label_pos);
            while (!text.empty() &&
                   std::isspace(static_cast<unsigned char>(text.back()))) {
                text.pop_back();
            }
            out.answer_text = std::move(text);
        }
    }
    return out;
}

}  // namespace legalqa::reader
