#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace legalqa::corpus {

struct Paragraph {
    std::int64_t article_id = 0;
    int index = 0;  // 1-based position within the article
    std::string text;
};

struct Article {
    std::int64_t id = 0;
    std::string body;
    std::string description;  // concatenated section headings
    std::string authority;
    std::string reference;  // full article name
    std::string statute;
    std::string article_no;
    std::optional<std::string> book;
    std::optional<std::string> part;
    std::optional<std::string> act;
    std::optional<std::string> chapter;
    std::optional<std::string> section;
    std::optional<std::string> subsection;
    std::vector<Paragraph> paragraphs;
};

// Identifier of one paragraph as evidence, rendered "articleId§index".
struct ParagraphMarker {
    std::int64_t article_id = 0;
    int paragraph_index = 0;

    auto operator<=>(const ParagraphMarker&) const = default;
};

ParagraphMarker parse_marker(std::string_view s);
std::string render_marker(const ParagraphMarker& m);

struct Question {
    std::int64_t id = 0;
    std::string text;
    std::string answer;
    std::vector<std::string> regions;
    std::vector<std::string> topics;  // taxonomy path
    std::vector<std::int64_t> article_ids;
    std::vector<ParagraphMarker> paragraph_ids;
};

class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Article> articles);

    std::size_t size() const { return articles_.size(); }
    bool contains(std::int64_t id) const { return by_id_.count(id) != 0; }
    const Article& at(std::int64_t id) const;
    const std::map<std::int64_t, Article>& articles() const { return by_id_; }

private:
    std::vector<std::int64_t> articles_;  // insertion order of ids
    std::map<std::int64_t, Article> by_id_;
};

struct DatasetSplit {
    std::vector<Question> train;
    std::vector<Question> dev;
    std::vector<Question> test;
};

/// Load the corpus file (JSON array of article records). Strict: any
/// schema violation throws SchemaError.
Corpus load_corpus(const std::string& path);

/// Load a question file and validate every reference against the corpus.
/// In strict mode (default) the first invalid question throws; in
/// permissive mode invalid questions are dropped and reported through
/// `rejected` when given.
std::vector<Question> load_questions(const std::string& path, const Corpus& corpus,
                                     bool strict = true,
                                     std::vector<std::string>* rejected = nullptr);

enum class QuestionWord {
    Can,
    How,
    What,
    Must,
    Who,
    Which,
    When,
    Where,
    Why,
    Other,
};

std::string_view to_string(QuestionWord w);

/// Classify by the question's leading interrogative token (normalized,
/// diacritics stripped) against a French+English lexicon.
QuestionWord question_word(const Question& q);

struct Stats {
    std::size_t question_count = 0;
    std::size_t article_count = 0;
    std::map<std::string, std::size_t> topic_counts;  // first taxonomy element
    std::map<std::string, std::size_t> question_word_counts;
    double median_relevant_articles = 0.0;
    double share_under_five_relevant = 0.0;  // fraction with < 5 relevant articles
    double median_article_words = 0.0;
    std::size_t articles_over_500_words = 0;
    double mean_evidence_words = 0.0;  // total words of relevant articles per question
    double referenced_fraction = 0.0;  // corpus articles cited by >= 1 question
};

Stats dataset_stats(const Corpus& corpus, const std::vector<Question>& questions);

}  // namespace legalqa::corpus
