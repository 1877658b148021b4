#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "legalqa/corpus.hpp"
#include "legalqa/ranked.hpp"

namespace legalqa::bm25 {

struct Posting {
    std::int64_t doc_id = 0;
    std::uint32_t term_frequency = 0;

    bool operator==(const Posting&) const = default;
};

// Which article fields get concatenated into the indexed document.
struct FieldSpec {
    bool body = true;
    bool description = true;
};

struct Params {
    double k1 = 1.2;
    double b = 0.75;

    bool operator==(const Params&) const = default;
};

class InvertedIndex {
public:
    InvertedIndex() = default;

    static InvertedIndex build(const corpus::Corpus& corpus, FieldSpec fields = {},
                               Params params = {});

    double score(const std::vector<std::string>& query_tokens, std::int64_t doc_id) const;
    RankedList search(const std::string& query, std::size_t k) const;
    RankedList search_tokens(const std::vector<std::string>& query_tokens, std::size_t k) const;

    /// Top-m ranked docs after removing every gold article of the
    /// question; always disjoint from the gold set.
    std::vector<std::int64_t> mine_hard_negatives(const corpus::Question& question,
                                                  std::size_t m) const;

    std::size_t doc_count() const { return doc_lengths_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    Params params() const { return params_; }
    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
    const std::map<std::int64_t, std::uint32_t>& doc_lengths() const { return doc_lengths_; }

    void save(const std::string& path) const;
    static InvertedIndex load(const std::string& path);

    bool operator==(const InvertedIndex&) const = default;

private:
    double idf(const std::string& term) const;

    std::map<std::string, std::vector<Posting>> postings_;
    std::map<std::int64_t, std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    Params params_;
};

}  // namespace legalqa::bm25
