#include "legalqa/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "legalqa/error.hpp"
#include "legalqa/textproc.hpp"

namespace legalqa::corpus {
namespace {

using nlohmann::json;

constexpr std::string_view kMarkerSeparator = "§";  // '§'

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("malformed JSON in " + path + ": " + e.what());
    }
    return doc;
}

std::string require_string(const json& rec, const char* field, const std::string& ctx) {
    if (!rec.contains(field)) throw SchemaError(ctx + ": missing required field '" + field + "'");
    if (!rec[field].is_string()) throw SchemaError(ctx + ": field '" + field + "' must be a string");
    return rec[field].get<std::string>();
}

std::int64_t require_positive_id(const json& rec, const char* field, const std::string& ctx) {
    if (!rec.contains(field)) throw SchemaError(ctx + ": missing required field '" + field + "'");
    if (!rec[field].is_number_integer())
        throw SchemaError(ctx + ": field '" + field + "' must be an integer");
    const auto id = rec[field].get<std::int64_t>();
    if (id <= 0) throw SchemaError(ctx + ": field '" + field + "' must be positive");
    return id;
}

std::optional<std::string> optional_string(const json& rec, const char* field) {
    if (!rec.contains(field) || rec[field].is_null()) return std::nullopt;
    return rec[field].get<std::string>();
}

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

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

bool whitespace_only(std::string_view s) {
    return textproc::normalize(s).empty();
}

Article parse_article(const json& rec) {
    Article a;
    const std::string ctx_id =
        rec.contains("id") && rec["id"].is_number_integer() ? rec["id"].dump() : "?";
    const std::string ctx = "article " + ctx_id;
    a.id = require_positive_id(rec, "id", ctx);
    a.body = require_string(rec, "article", ctx);
    a.description = require_string(rec, "description", ctx);
    a.authority = require_string(rec, "authority", ctx);
    a.reference = require_string(rec, "reference", ctx);
    a.statute = require_string(rec, "statute", ctx);
    a.article_no = require_string(rec, "article_no", ctx);
    a.book = optional_string(rec, "book");
    a.part = optional_string(rec, "part");
    a.act = optional_string(rec, "act");
    a.chapter = optional_string(rec, "chapter");
    a.section = optional_string(rec, "section");
    a.subsection = optional_string(rec, "subsection");
    if (!rec.contains("paragraphs") || !rec["paragraphs"].is_array())
        throw SchemaError(ctx + ": missing required field 'paragraphs'");
    int index = 1;
    for (const auto& p : rec["paragraphs"]) {
        if (!p.is_string()) throw SchemaError(ctx + ": paragraphs must be strings");
        Paragraph para{a.id, index++, p.get<std::string>()};
        if (whitespace_only(para.text))
            throw SchemaError(ctx + ": paragraph " + std::to_string(para.index) + " is empty");
        a.paragraphs.push_back(std::move(para));
    }
    if (a.paragraphs.empty()) throw SchemaError(ctx + ": article has zero paragraphs");
    return a;
}

Question parse_question(const json& rec) {
    Question q;
    const std::string ctx_id =
        rec.contains("id") && rec["id"].is_number_integer() ? rec["id"].dump() : "?";
    const std::string ctx = "question " + ctx_id;
    q.id = require_positive_id(rec, "id", ctx);
    q.text = require_string(rec, "question", ctx);
    q.answer = require_string(rec, "answer", ctx);
    for (const char* field : {"regions", "topics", "article_ids", "paragraph_ids"}) {
        if (!rec.contains(field) || !rec[field].is_array())
            throw SchemaError(ctx + ": missing required field '" + field + "'");
    }
    q.regions = rec["regions"].get<std::vector<std::string>>();
    q.topics = rec["topics"].get<std::vector<std::string>>();
    for (const auto& id : rec["article_ids"]) {
        if (!id.is_number_integer()) throw SchemaError(ctx + ": article_ids must be integers");
        q.article_ids.push_back(id.get<std::int64_t>());
    }
    for (const auto& m : rec["paragraph_ids"]) {
        if (!m.is_string()) throw SchemaError(ctx + ": paragraph_ids must be strings");
        q.paragraph_ids.push_back(parse_marker(m.get<std::string>()));
    }
    return q;
}

// Validates references; throws ReferenceError on failure.
void validate_question(const Question& q, const Corpus& corpus) {
    const std::string ctx = "question " + std::to_string(q.id);
    if (q.article_ids.empty()) throw ReferenceError(ctx + ": article_ids is empty");
    for (const auto id : q.article_ids) {
        if (!corpus.contains(id))
            throw ReferenceError(ctx + ": article " + std::to_string(id) + " not in corpus");
    }
    for (const auto& m : q.paragraph_ids) {
        if (!corpus.contains(m.article_id))
            throw ReferenceError(ctx + ": marker " + render_marker(m) +
                                 " names an unknown article");
        const auto& art = corpus.at(m.article_id);
        if (m.paragraph_index < 1 ||
            static_cast<std::size_t>(m.paragraph_index) > art.paragraphs.size())
            throw ReferenceError(ctx + ": marker " + render_marker(m) +
                                 " names a nonexistent paragraph");
    }
}

// Leading interrogative token -> category. French forms are listed with
// diacritics already stripped (inputs go through normalize()).
const std::map<std::string, QuestionWord>& interrogative_lexicon() {
    static const std::map<std::string, QuestionWord> lex = {
        // Can
        {"can", QuestionWord::Can},
        {"puis", QuestionWord::Can},
        {"peut", QuestionWord::Can},
        {"peux", QuestionWord::Can},
        {"pouvez", QuestionWord::Can},
        {"pouvons", QuestionWord::Can},
        // How
        {"how", QuestionWord::How},
        {"comment", QuestionWord::How},
        // What
        {"what", QuestionWord::What},
        {"que", QuestionWord::What},
        {"qu", QuestionWord::What},
        {"quoi", QuestionWord::What},
        // Must
        {"must", QuestionWord::Must},
        {"dois", QuestionWord::Must},
        {"doit", QuestionWord::Must},
        {"doivent", QuestionWord::Must},
        {"faut", QuestionWord::Must},
        {"devez", QuestionWord::Must},
        // Who
        {"who", QuestionWord::Who},
        {"qui", QuestionWord::Who},
        // Which
        {"which", QuestionWord::Which},
        {"quel", QuestionWord::Which},
        {"quelle", QuestionWord::Which},
        {"quels", QuestionWord::Which},
        {"quelles", QuestionWord::Which},
        // When
        {"when", QuestionWord::When},
        {"quand", QuestionWord::When},
        // Where
        {"where", QuestionWord::Where},
        {"ou", QuestionWord::Where},
        // Why
        {"why", QuestionWord::Why},
        {"pourquoi", QuestionWord::Why},
    };
    return lex;
}

}  // namespace

ParagraphMarker parse_marker(std::string_view s) {
    const auto pos = s.find(kMarkerSeparator);
    if (pos == std::string_view::npos) throw ParseError("marker missing '§': " + std::string(s));
    const auto id_part = s.substr(0, pos);
    const auto idx_part = s.substr(pos + kMarkerSeparator.size());
    ParagraphMarker m;
    auto parse_int = [&](std::string_view part, auto& out) {
        const auto* begin = part.data();
        const auto* end = part.data() + part.size();
        auto [ptr, ec] = std::from_chars(begin, end, out);
        if (ec != std::errc{} || ptr != end)
            throw ParseError("non-numeric marker field in: " + std::string(s));
    };
    parse_int(id_part, m.article_id);
    parse_int(idx_part, m.paragraph_index);
    if (m.article_id < 1 || m.paragraph_index < 1)
        throw ParseError("marker fields must be >= 1: " + std::string(s));
    return m;
}

std::string render_marker(const ParagraphMarker& m) {
    return std::to_string(m.article_id) + std::string(kMarkerSeparator) +
           std::to_string(m.paragraph_index);
}

Corpus::Corpus(std::vector<Article> articles) {
    for (auto& a : articles) {
        if (by_id_.count(a.id))
            throw SchemaError("duplicate article id " + std::to_string(a.id));
        articles_.push_back(a.id);
        by_id_.emplace(a.id, std::move(a));
    }
}

const Article& Corpus::at(std::int64_t id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end())
        throw ReferenceError("unknown article id " + std::to_string(id));
    return it->second;
}

Corpus load_corpus(const std::string& path) {
    const json doc = load_json_file(path);
    if (!doc.is_array()) throw SchemaError(path + ": corpus file must be a JSON array");
    std::vector<Article> articles;
    articles.reserve(doc.size());
    for (const auto& rec : doc) articles.push_back(parse_article(rec));
    return Corpus(std::move(articles));
}

std::vector<Question> load_questions(const std::string& path, const Corpus& corpus, bool strict,
                                     std::vector<std::string>* rejected) {
    const json doc = load_json_file(path);
    if (!doc.is_array()) throw SchemaError(path + ": question file must be a JSON array");
    std::vector<Question> out;
    std::set<std::int64_t> seen_ids;
    for (const auto& rec : doc) {
        try {
            Question q = parse_question(rec);
            if (!seen_ids.insert(q.id).second)
                throw SchemaError("duplicate question id " + std::to_string(q.id));
            validate_question(q, corpus);
            out.push_back(std::move(q));
        } catch (const Error& e) {
            if (strict) throw;
            if (rejected) rejected->push_back(e.what());
        }
    }
    return out;
}

std::string_view to_string(QuestionWord w) {
    switch (w) {
        case QuestionWord::Can: return "Can";
        case QuestionWord::How: return "How";
        case QuestionWord::What: return "What";
        case QuestionWord::Must: return "Must";
        case QuestionWord::Who: return "Who";
        case QuestionWord::Which: return "Which";
        case QuestionWord::When: return "When";
        case QuestionWord::Where: return "Where";
        case QuestionWord::Why: return "Why";
        case QuestionWord::Other: return "Other";
    }
    return "Other";
}

QuestionWord question_word(const Question& q) {
    const auto ts = textproc::tokenize(q.text);
    if (ts.empty()) return QuestionWord::Other;
    const auto& lex = interrogative_lexicon();
    const auto it = lex.find(ts.tokens.front());
    return it == lex.end() ? QuestionWord::Other : it->second;
}

Stats dataset_stats(const Corpus& corpus, const std::vector<Question>& questions) {
    if (questions.empty()) throw Error("dataset_stats: empty question list");
    Stats s;
    s.question_count = questions.size();
    s.article_count = corpus.size();

    std::vector<double> relevant_counts;
    std::set<std::int64_t> referenced;
    double total_evidence_words = 0.0;
    std::size_t under_five = 0;
    for (const auto& q : questions) {
        if (!q.topics.empty()) ++s.topic_counts[q.topics.front()];
        ++s.question_word_counts[std::string(to_string(question_word(q)))];
        relevant_counts.push_back(static_cast<double>(q.article_ids.size()));
        if (q.article_ids.size() < 5) ++under_five;
        std::size_t evidence = 0;
        for (const auto id : q.article_ids) {
            referenced.insert(id);
            evidence += word_count(corpus.at(id).body);
        }
        total_evidence_words += static_cast<double>(evidence);
    }
    s.median_relevant_articles = median(relevant_counts);
    s.share_under_five_relevant =
        static_cast<double>(under_five) / static_cast<double>(questions.size());
    s.mean_evidence_words = total_evidence_words / static_cast<double>(questions.size());

    std::vector<double> article_words;
    for (const auto& [id, a] : corpus.articles()) {
        const auto w = word_count(a.body);
        article_words.push_back(static_cast<double>(w));
        if (w > 500) ++s.articles_over_500_words;
    }
    s.median_article_words = median(std::move(article_words));
    s.referenced_fraction = corpus.size() == 0
                                ? 0.0
                                : static_cast<double>(referenced.size()) /
                                      static_cast<double>(corpus.size());
    return s;
}

}  // namespace legalqa::corpus
