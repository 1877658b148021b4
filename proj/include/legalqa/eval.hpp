#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "legalqa/corpus.hpp"
#include "legalqa/ranked.hpp"

namespace legalqa::eval {

// ---- Retrieval metrics ----

/// |top-k of ranked intersected with gold| / |gold|.
double recall_at_k(const RankedList& ranked, const std::set<std::int64_t>& gold, std::size_t k);

/// 1 / rank of the first relevant doc within the top-k, else 0.
double reciprocal_rank(const RankedList& ranked, const std::set<std::int64_t>& gold,
                       std::size_t k);

struct RetrievalRun {
    struct Entry {
        RankedList ranked;
        std::set<std::int64_t> gold;
    };
    std::vector<Entry> entries;
    std::size_t cutoff = 10;
};

struct RetrievalAggregates {
    double recall_at_k = 0.0;
    double mrr_at_k = 0.0;
};

/// Macro averages over the run's questions at the run cutoff.
RetrievalAggregates aggregate(const RetrievalRun& run);

// ---- METEOR ----

enum class MatchStage { Exact, Stem, Synonym };

struct MatchedPair {
    std::size_t candidate_index = 0;
    std::size_t reference_index = 0;
    MatchStage stage = MatchStage::Exact;

    bool operator==(const MatchedPair&) const = default;
};

struct Alignment {
    std::vector<MatchedPair> pairs;  // sorted by candidate index
    std::size_t chunk_count = 0;
};

struct AlignConfig {
    bool use_stem = true;
    // Symmetric synonym table on normalized tokens; empty by default.
    std::vector<std::pair<std::string, std::string>> synonym_pairs;
    std::size_t exhaustive_limit = 10;  // exact search when both sides <= this
    std::size_t beam_width = 32;        // bounded search beyond the limit
};

/// One-to-one alignment applying stages in order (exact, then stem, then
/// synonyms) to the unmatched residue; among matchings maximal in that
/// stage order, minimizes the chunk count. Exact for short inputs,
/// beam-searched beyond exhaustive_limit.
Alignment align(const std::vector<std::string>& candidate_tokens,
                const std::vector<std::string>& reference_tokens, const AlignConfig& config = {});

/// Recall-weighted harmonic mean F = 10PR / (9P + R) discounted by the
/// fragmentation penalty 0.5 * (chunks / matches)^3.
double meteor(const std::string& candidate, const std::string& reference,
              const AlignConfig& config = {});

// ---- Rationale F1 ----

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

PRF rationale_f1(const std::set<corpus::ParagraphMarker>& predicted,
                 const std::set<corpus::ParagraphMarker>& gold);

// ---- Report ----

struct PerQuestionMetrics {
    std::int64_t question_id = 0;
    std::map<std::string, double> values;  // metric name -> value
};

struct EvalReport {
    std::string run_id;
    std::string config_digest;
    std::map<std::string, double> aggregates;
    std::vector<PerQuestionMetrics> per_question;
};

/// Serialize with stable key ordering; byte-identical for equal inputs.
std::string render_report(const EvalReport& report);
void emit_report(const EvalReport& report, const std::string& path);

}  // namespace legalqa::eval
