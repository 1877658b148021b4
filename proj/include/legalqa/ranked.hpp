#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace legalqa {

struct ScoredDoc {
    std::int64_t doc_id = 0;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

// Retrieval result for one question, scores non-increasing.
struct RankedList {
    std::int64_t question_id = 0;
    std::vector<ScoredDoc> entries;

    bool operator==(const RankedList&) const = default;
};

// Descending score, ties broken by ascending doc id.
inline bool ranked_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

inline void sort_and_truncate(std::vector<ScoredDoc>& scored, std::size_t k) {
    std::sort(scored.begin(), scored.end(), ranked_before);
    if (scored.size() > k) scored.resize(k);
}

}  // namespace legalqa
