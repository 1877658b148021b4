#include "legalqa/annotate.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>

#include <json.hpp>

#include "legalqa/error.hpp"

namespace legalqa::annotate {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_none_reply(const std::string& raw) {
    auto t = trim(raw);
    while (!t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == ',')) t.pop_back();
    std::string lower;
    for (const char c : t) lower.push_back(static_cast<char>(std::tolower(c)));
    return lower == "none";
}

}  // namespace

std::string build_annotation_prompt(const corpus::Question& q, const std::string& answer,
                                    const corpus::Corpus& corpus_ref) {
    if (trim(answer).empty())
        throw Error("build_annotation_prompt: answer must be non-empty");
    std::string prompt;
    prompt += "Below are a legal question, its answer, and the paragraphs of the relevant "
              "articles, each tagged with an identifier.\n";
    prompt += "Reply with a comma-separated list of the identifiers of the paragraphs that "
              "contribute to the answer, or \"None\" if no paragraph contributes.\n\n";
    prompt += "Question: " + q.text + "\n";
    prompt += "Answer: " + answer + "\n\n";
    for (const auto id : q.article_ids) {
        const auto& article = corpus_ref.at(id);
        prompt += "Article " + article.reference + ":\n";
        for (const auto& para : article.paragraphs) {
            prompt += "[" + corpus::render_marker({article.id, para.index}) + "] " + para.text +
                      "\n";
        }
        prompt += "\n";
    }
    prompt += "Identifiers:";
    return prompt;
}

std::set<corpus::ParagraphMarker> parse_annotation(
    const std::string& raw, const std::set<corpus::ParagraphMarker>& candidates,
    std::vector<std::string>* warnings) {
    if (is_none_reply(raw)) return {};
    std::set<corpus::ParagraphMarker> out;
    bool any_parsed = false;
    std::size_t begin = 0;
    while (begin <= raw.size()) {
        auto end = raw.find(',', begin);
        if (end == std::string::npos) end = raw.size();
        const auto piece = trim(raw.substr(begin, end - begin));
        begin = end + 1;
        if (piece.empty()) continue;
        std::string cleaned = piece;
        while (!cleaned.empty() && (cleaned.back() == '.' || cleaned.back() == ';'))
            cleaned.pop_back();
        try {
            const auto marker = corpus::parse_marker(cleaned);
            any_parsed = true;
            if (candidates.count(marker)) {
                out.insert(marker);
            } else if (warnings) {
                warnings->push_back("annotation names non-candidate marker " +
                                    corpus::render_marker(marker));
            }
        } catch (const ParseError&) {
            // fall through; counted below
        }
    }
    if (!any_parsed)
        throw ParseError("parse_annotation: nothing parseable in reply: " + raw.substr(0, 200));
    return out;
}

std::set<corpus::ParagraphMarker> baseline_first(const corpus::Question& q,
                                                 const corpus::Corpus& corpus_ref) {
    std::set<corpus::ParagraphMarker> out;
    for (const auto id : q.article_ids) {
        corpus_ref.at(id);  // must resolve
        out.insert({id, 1});
    }
    return out;
}

std::set<corpus::ParagraphMarker> baseline_random(const corpus::Question& q,
                                                  const corpus::Corpus& corpus_ref,
                                                  std::uint64_t seed) {
    std::set<corpus::ParagraphMarker> out;
    // Per-article generator seeded from (seed, question, article) so the
    // pick for one article is independent of the others.
    for (const auto id : q.article_ids) {
        const auto& article = corpus_ref.at(id);
        std::seed_seq seq{seed, static_cast<std::uint64_t>(q.id), static_cast<std::uint64_t>(id)};
        std::mt19937_64 rng(seq);
        std::uniform_int_distribution<std::size_t> pick(0, article.paragraphs.size() - 1);
        out.insert({id, static_cast<int>(pick(rng) + 1)});
    }
    return out;
}

AnnotatorScores evaluate_annotator(
    const std::map<std::int64_t, std::set<corpus::ParagraphMarker>>& predictions,
    const std::map<std::int64_t, std::set<corpus::ParagraphMarker>>& gold) {
    std::vector<std::int64_t> offenders;
    for (const auto& [id, markers] : predictions) {
        if (!gold.count(id)) offenders.push_back(id);
    }
    for (const auto& [id, markers] : gold) {
        if (!predictions.count(id)) offenders.push_back(id);
    }
    if (!offenders.empty()) {
        std::string msg = "evaluate_annotator: question id mismatch:";
        for (const auto id : offenders) msg += " " + std::to_string(id);
        throw Error(msg);
    }
    if (gold.empty()) throw Error("evaluate_annotator: no questions");
    AnnotatorScores s;
    for (const auto& [id, gold_markers] : gold) {
        const auto prf = eval::rationale_f1(predictions.at(id), gold_markers);
        s.precision += prf.precision;
        s.recall += prf.recall;
        s.f1 += prf.f1;
    }
    const auto n = static_cast<double>(gold.size());
    s.precision /= n;
    s.recall /= n;
    s.f1 /= n;
    return s;
}

void save_annotation_run(const AnnotationRun& run, const std::string& path) {
    nlohmann::ordered_json doc;
    doc["run_id"] = run.run_id;
    auto records = nlohmann::ordered_json::array();
    for (const auto& r : run.records) {
        std::vector<std::string> markers;
        for (const auto& m : r.parsed_markers) markers.push_back(corpus::render_marker(m));
        records.push_back({{"question_id", r.question_id},
                           {"raw", r.raw},
                           {"parsed_markers", markers},
                           {"model_name", r.model_name},
                           {"cost_tokens", r.cost_tokens}});
    }
    doc["records"] = std::move(records);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("save_annotation_run: cannot write " + path);
    out << doc.dump(2) << "\n";
}

AnnotationRun load_annotation_run(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_annotation_run: cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("load_annotation_run: malformed " + path + ": " + e.what());
    }
    AnnotationRun out;
    out.run_id = doc.at("run_id").get<std::string>();
    for (const auto& rec : doc.at("records")) {
        AnnotationRecord r;
        r.question_id = rec.at("question_id").get<std::int64_t>();
        r.raw = rec.at("raw").get<std::string>();
        for (const auto& m : rec.at("parsed_markers")) {
            r.parsed_markers.insert(corpus::parse_marker(m.get<std::string>()));
        }
        r.model_name = rec.at("model_name").get<std::string>();
        r.cost_tokens = rec.at("cost_tokens").get<std::int64_t>();
        out.records.push_back(std::move(r));
    }
    return out;
}

}  // namespace legalqa::annotate
