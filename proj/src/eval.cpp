#include "legalqa/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "legalqa/error.hpp"
#include "legalqa/textproc.hpp"

namespace legalqa::eval {
namespace {

// Lexicographic objective: exact matches, stem matches, synonym matches,
// then fewer chunks.
using Key = std::array<long, 4>;

Key key_of(const std::vector<MatchedPair>& pairs, std::size_t chunks) {
    Key k{0, 0, 0, -static_cast<long>(chunks)};
    for (const auto& p : pairs) {
        if (p.stage == MatchStage::Exact) ++k[0];
        else if (p.stage == MatchStage::Stem) ++k[1];
        else ++k[2];
    }
    return k;
}

std::size_t count_chunks(const std::vector<MatchedPair>& pairs) {
    // pairs are sorted by candidate index; a chunk continues when both
    // indices advance by exactly one.
    std::size_t chunks = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const bool continues = i > 0 &&
                               pairs[i].candidate_index == pairs[i - 1].candidate_index + 1 &&
                               pairs[i].reference_index == pairs[i - 1].reference_index + 1;
        if (!continues) ++chunks;
    }
    return chunks;
}

struct PairOptions {
    // For each candidate index, the (reference index, stage) matches.
    std::vector<std::vector<MatchedPair>> options;
};

PairOptions build_options(const std::vector<std::string>& cand,
                          const std::vector<std::string>& ref, const AlignConfig& cfg) {
    std::vector<std::string> cand_stems, ref_stems;
    if (cfg.use_stem) {
        for (const auto& t : cand) cand_stems.push_back(textproc::stem(t));
        for (const auto& t : ref) ref_stems.push_back(textproc::stem(t));
    }
    auto synonym = [&](const std::string& a, const std::string& b) {
        for (const auto& [x, y] : cfg.synonym_pairs) {
            if ((a == x && b == y) || (a == y && b == x)) return true;
        }
        return false;
    };
    PairOptions po;
    po.options.resize(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            std::optional<MatchStage> stage;
            if (cand[i] == ref[j]) {
                stage = MatchStage::Exact;
            } else if (cfg.use_stem && cand_stems[i] == ref_stems[j]) {
                stage = MatchStage::Stem;
            } else if (synonym(cand[i], ref[j])) {
                stage = MatchStage::Synonym;
            }
            if (stage) po.options[i].push_back({i, j, *stage});
        }
    }
    return po;
}

struct ExhaustiveSearch {
    const PairOptions& po;
    std::size_t n_ref;
    std::vector<char> used;
    std::vector<MatchedPair> current;
    std::vector<MatchedPair> best_pairs;
    Key best_key{-1, -1, -1, 0};

    ExhaustiveSearch(const PairOptions& p, std::size_t nr) : po(p), n_ref(nr), used(nr, 0) {}

    void run() { recurse(0); }

    void recurse(std::size_t i) {
        if (i == po.options.size()) {
            const auto k = key_of(current, count_chunks(current));
            if (k > best_key) {
                best_key = k;
                best_pairs = current;
            }
            return;
        }
        // Bound: even matching every remaining candidate exactly cannot
        // beat the best first component.
        long exact_now = 0;
        for (const auto& p : current) {
            if (p.stage == MatchStage::Exact) ++exact_now;
        }
        const long remaining = static_cast<long>(po.options.size() - i);
        if (exact_now + remaining < best_key[0]) return;

        for (const auto& opt : po.options[i]) {
            if (used[opt.reference_index]) continue;
            used[opt.reference_index] = 1;
            current.push_back(opt);
            recurse(i + 1);
            current.pop_back();
            used[opt.reference_index] = 0;
        }
        recurse(i + 1);  // leave candidate i unmatched
    }
};

struct BeamState {
    std::vector<char> used;
    std::vector<MatchedPair> pairs;
    Key key{0, 0, 0, 0};
};

Alignment beam_align(const PairOptions& po, std::size_t n_ref, std::size_t beam_width) {
    std::vector<BeamState> beam(1);
    beam[0].used.assign(n_ref, 0);
    for (std::size_t i = 0; i < po.options.size(); ++i) {
        std::vector<BeamState> next;
        for (const auto& state : beam) {
            next.push_back(state);  // skip candidate i
            for (const auto& opt : po.options[i]) {
                if (state.used[opt.reference_index]) continue;
                BeamState s = state;
                s.used[opt.reference_index] = 1;
                s.pairs.push_back(opt);
                s.key = key_of(s.pairs, count_chunks(s.pairs));
                next.push_back(std::move(s));
            }
        }
        std::sort(next.begin(), next.end(),
                  [](const BeamState& a, const BeamState& b) { return a.key > b.key; });
        if (next.size() > beam_width) next.resize(beam_width);
        beam = std::move(next);
    }
    Alignment out;
    out.pairs = beam.front().pairs;
    out.chunk_count = count_chunks(out.pairs);
    return out;
}

}  // namespace

double recall_at_k(const RankedList& ranked, const std::set<std::int64_t>& gold, std::size_t k) {
    if (gold.empty()) throw Error("recall_at_k: empty gold set");
    if (k < 1) throw Error("recall_at_k: k must be >= 1");
    std::size_t hits = 0;
    const auto limit = std::min(k, ranked.entries.size());
    for (std::size_t i = 0; i < limit; ++i) {
        if (gold.count(ranked.entries[i].doc_id)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double reciprocal_rank(const RankedList& ranked, const std::set<std::int64_t>& gold,
                       std::size_t k) {
    if (k < 1) throw Error("reciprocal_rank: k must be >= 1");
    const auto limit = std::min(k, ranked.entries.size());
    for (std::size_t i = 0; i < limit; ++i) {
        if (gold.count(ranked.entries[i].doc_id)) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
}

RetrievalAggregates aggregate(const RetrievalRun& run) {
    if (run.entries.empty()) throw Error("aggregate: empty run");
    RetrievalAggregates agg;
    for (const auto& e : run.entries) {
        agg.recall_at_k += recall_at_k(e.ranked, e.gold, run.cutoff);
        agg.mrr_at_k += reciprocal_rank(e.ranked, e.gold, run.cutoff);
    }
    const auto n = static_cast<double>(run.entries.size());
    agg.recall_at_k /= n;
    agg.mrr_at_k /= n;
    return agg;
}

Alignment align(const std::vector<std::string>& candidate_tokens,
                const std::vector<std::string>& reference_tokens, const AlignConfig& config) {
    const auto po = build_options(candidate_tokens, reference_tokens, config);
    if (candidate_tokens.size() <= config.exhaustive_limit &&
        reference_tokens.size() <= config.exhaustive_limit) {
        ExhaustiveSearch search(po, reference_tokens.size());
        search.run();
        Alignment out;
        out.pairs = std::move(search.best_pairs);
        out.chunk_count = count_chunks(out.pairs);
        return out;
    }
    return beam_align(po, reference_tokens.size(), config.beam_width);
}

double meteor(const std::string& candidate, const std::string& reference,
              const AlignConfig& config) {
    const auto cand = textproc::tokenize(candidate).tokens;
    const auto ref = textproc::tokenize(reference).tokens;
    if (cand.empty() || ref.empty()) return 0.0;
    const auto alignment = align(cand, ref, config);
    const auto matches = static_cast<double>(alignment.pairs.size());
    if (matches == 0.0) return 0.0;
    const double p = matches / static_cast<double>(cand.size());
    const double r = matches / static_cast<double>(ref.size());
    const double f = 10.0 * p * r / (9.0 * p + r);
    const double frag = static_cast<double>(alignment.chunk_count) / matches;
    const double penalty = 0.5 * frag * frag * frag;
    return (1.0 - penalty) * f;
}

PRF rationale_f1(const std::set<corpus::ParagraphMarker>& predicted,
                 const std::set<corpus::ParagraphMarker>& gold) {
    if (predicted.empty() && gold.empty()) return {1.0, 1.0, 1.0};
    std::size_t inter = 0;
    for (const auto& m : predicted) {
        if (gold.count(m)) ++inter;
    }
    PRF out;
    out.precision =
        predicted.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(predicted.size());
    out.recall = gold.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(gold.size());
    const double denom = out.precision + out.recall;
    out.f1 = denom == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / denom;
    return out;
}

std::string render_report(const EvalReport& report) {
    if (report.per_question.empty()) throw Error("render_report: reports require >= 1 question");
    nlohmann::ordered_json doc;
    doc["run_id"] = report.run_id;
    doc["config_digest"] = report.config_digest;
    nlohmann::ordered_json aggregates;
    for (const auto& [name, value] : report.aggregates) aggregates[name] = value;
    doc["aggregates"] = std::move(aggregates);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : report.per_question) {
        nlohmann::ordered_json r;
        r["question_id"] = row.question_id;
        nlohmann::ordered_json values;
        for (const auto& [name, value] : row.values) values[name] = value;
        r["metrics"] = std::move(values);
        rows.push_back(std::move(r));
    }
    doc["per_question"] = std::move(rows);
    return doc.dump(2) + "\n";
}

void emit_report(const EvalReport& report, const std::string& path) {
    const auto text = render_report(report);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("emit_report: cannot write " + path);
    out << text;
    if (!out) throw OutputError("emit_report: write failed for " + path);
}

}  // namespace legalqa::eval
