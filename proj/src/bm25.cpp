#include "legalqa/bm25.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "legalqa/error.hpp"
#include "legalqa/textproc.hpp"

namespace legalqa::bm25 {

using nlohmann::json;

InvertedIndex InvertedIndex::build(const corpus::Corpus& corpus, FieldSpec fields, Params params) {
    if (corpus.size() == 0) throw Error("bm25: cannot index an empty corpus");
    InvertedIndex index;
    index.params_ = params;
    double total_length = 0.0;
    for (const auto& [id, article] : corpus.articles()) {
        std::string text;
        if (fields.body) text += article.body;
        if (fields.description) {
            if (!text.empty()) text += ' ';
            text += article.description;
        }
        const auto tokens = textproc::stemmed_tokens(text);
        std::map<std::string, std::uint32_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, freq] : tf) {
            index.postings_[term].push_back({id, freq});  // ids iterate ascending
        }
        index.doc_lengths_[id] = static_cast<std::uint32_t>(tokens.size());
        total_length += static_cast<double>(tokens.size());
    }
    index.avg_doc_length_ = total_length / static_cast<double>(index.doc_lengths_.size());
    return index;
}

double InvertedIndex::idf(const std::string& term) const {
    const auto it = postings_.find(term);
    const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    const double n = static_cast<double>(doc_count());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double InvertedIndex::score(const std::vector<std::string>& query_tokens,
                            std::int64_t doc_id) const {
    const auto len_it = doc_lengths_.find(doc_id);
    if (len_it == doc_lengths_.end())
        throw Error("bm25: unknown doc id " + std::to_string(doc_id));
    const double len = static_cast<double>(len_it->second);
    const double norm = 1.0 - params_.b + params_.b * len / avg_doc_length_;
    double total = 0.0;
    for (const auto& term : query_tokens) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& list = it->second;
        const auto pit = std::lower_bound(
            list.begin(), list.end(), doc_id,
            [](const Posting& p, std::int64_t id) { return p.doc_id < id; });
        if (pit == list.end() || pit->doc_id != doc_id) continue;
        const double tf = static_cast<double>(pit->term_frequency);
        total += idf(term) * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
    }
    return total;
}

RankedList InvertedIndex::search_tokens(const std::vector<std::string>& query_tokens,
                                        std::size_t k) const {
    RankedList out;
    std::vector<ScoredDoc> scored;
    scored.reserve(doc_count());
    for (const auto& [id, len] : doc_lengths_) {
        scored.push_back({id, score(query_tokens, id)});
    }
    sort_and_truncate(scored, k);
    out.entries = std::move(scored);
    return out;
}

RankedList InvertedIndex::search(const std::string& query, std::size_t k) const {
    return search_tokens(textproc::stemmed_tokens(query), k);
}

std::vector<std::int64_t> InvertedIndex::mine_hard_negatives(const corpus::Question& question,
                                                             std::size_t m) const {
    const std::set<std::int64_t> gold(question.article_ids.begin(), question.article_ids.end());
    const auto ranked = search(question.text, doc_count());
    std::vector<std::int64_t> out;
    for (const auto& entry : ranked.entries) {
        if (gold.count(entry.doc_id)) continue;
        out.push_back(entry.doc_id);
        if (out.size() == m) break;
    }
    return out;
}

void InvertedIndex::save(const std::string& path) const {
    json doc;
    doc["format"] = "legalqa-bm25-index";
    doc["version"] = 1;
    doc["k1"] = params_.k1;
    doc["b"] = params_.b;
    doc["avg_doc_length"] = avg_doc_length_;
    json lengths = json::object();
    for (const auto& [id, len] : doc_lengths_) lengths[std::to_string(id)] = len;
    doc["doc_lengths"] = std::move(lengths);
    json postings = json::object();
    for (const auto& [term, list] : postings_) {
        json arr = json::array();
        for (const auto& p : list) arr.push_back({p.doc_id, p.term_frequency});
        postings[term] = std::move(arr);
    }
    doc["postings"] = std::move(postings);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("bm25: cannot write " + path);
    out << doc.dump();
}

InvertedIndex InvertedIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("bm25: cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("bm25: malformed index file " + path + ": " + e.what());
    }
    if (doc.value("format", "") != "legalqa-bm25-index" || doc.value("version", 0) != 1)
        throw SchemaError("bm25: unrecognized index file " + path);
    InvertedIndex index;
    index.params_.k1 = doc.at("k1").get<double>();
    index.params_.b = doc.at("b").get<double>();
    index.avg_doc_length_ = doc.at("avg_doc_length").get<double>();
    for (const auto& [key, value] : doc.at("doc_lengths").items()) {
        index.doc_lengths_[std::stoll(key)] = value.get<std::uint32_t>();
    }
    for (const auto& [term, list] : doc.at("postings").items()) {
        auto& plist = index.postings_[term];
        for (const auto& pair : list) {
            plist.push_back({pair.at(0).get<std::int64_t>(), pair.at(1).get<std::uint32_t>()});
        }
    }
    return index;
}

}  // namespace legalqa::bm25
