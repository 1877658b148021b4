#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "legalqa/ranked.hpp"
#include "legalqa/reader.hpp"

namespace legalqa::runfile {

/// FNV-1a 64-bit hex digest of a byte string.
std::string digest(std::string_view bytes);
/// Digest of a file's contents.
std::string digest_file(const std::string& path);

// Reproducibility record for one pipeline stage. Timestamps live only
// here; artifact files carry the run_id but no clock values, so reruns
// with identical inputs produce byte-identical artifacts.
struct RunManifest {
    std::string run_id;  // digest of config digest + input digests + seeds
    std::string config_digest;
    std::map<std::string, std::string> input_digests;  // path -> digest
    std::uint64_t seed = 0;
    std::string stage;
    std::string started_at;   // ISO-8601, informational
    std::string finished_at;
    std::string outcome;  // "ok" or an error summary
};

RunManifest make_manifest(const std::string& stage, const std::string& config_text,
                          const std::vector<std::string>& input_paths, std::uint64_t seed);

void save_manifest(const RunManifest& manifest, const std::string& path);

// Retrieval run: one ranked list per question.
struct RetrievalRunFile {
    std::string run_id;
    std::string engine;  // "bm25" or "dense"
    std::size_t k = 0;
    std::vector<RankedList> results;
};

void save_retrieval_run(const RetrievalRunFile& run, const std::string& path);
RetrievalRunFile load_retrieval_run(const std::string& path);

// Answer run: one reader output per question.
struct AnswerEntry {
    std::int64_t question_id = 0;
    reader::ReaderOutput output;
};

struct AnswerRunFile {
    std::string run_id;
    std::string mode;  // "zero" / "one" / "few"
    std::vector<AnswerEntry> entries;
};

void save_answer_run(const AnswerRunFile& run, const std::string& path);
AnswerRunFile load_answer_run(const std::string& path);

}  // namespace legalqa::runfile
