#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "legalqa/corpus.hpp"
#include "legalqa/eval.hpp"

namespace legalqa::annotate {

/// Prompt asking the model to pick the paragraphs that support the
/// answer, as a comma-separated marker list or "None". Paragraphs are
/// grouped per gold article, in the question's article order.
std::string build_annotation_prompt(const corpus::Question& q, const std::string& answer,
                                    const corpus::Corpus& corpus);

/// Parse a model reply. "None" (any case, trailing punctuation allowed)
/// yields the empty set. Non-candidate markers are dropped and reported
/// through `warnings` when given.
std::set<corpus::ParagraphMarker> parse_annotation(
    const std::string& raw, const std::set<corpus::ParagraphMarker>& candidates,
    std::vector<std::string>* warnings = nullptr);

/// Marks the first paragraph of every gold article.
std::set<corpus::ParagraphMarker> baseline_first(const corpus::Question& q,
                                                 const corpus::Corpus& corpus);

/// One uniformly random paragraph per gold article, seeded.
std::set<corpus::ParagraphMarker> baseline_random(const corpus::Question& q,
                                                  const corpus::Corpus& corpus,
                                                  std::uint64_t seed);

struct AnnotatorScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Macro-averaged P/R/F1 of predicted marker sets against gold, keyed by
/// question id. Throws when the id sets differ.
AnnotatorScores evaluate_annotator(
    const std::map<std::int64_t, std::set<corpus::ParagraphMarker>>& predictions,
    const std::map<std::int64_t, std::set<corpus::ParagraphMarker>>& gold);

// Stored record of one annotation call.
struct AnnotationRecord {
    std::int64_t question_id = 0;
    std::string raw;
    std::set<corpus::ParagraphMarker> parsed_markers;
    std::string model_name;
    std::int64_t cost_tokens = 0;
};

struct AnnotationRun {
    std::string run_id;
    std::vector<AnnotationRecord> records;
};

void save_annotation_run(const AnnotationRun& run, const std::string& path);
AnnotationRun load_annotation_run(const std::string& path);

}  // namespace legalqa::annotate
