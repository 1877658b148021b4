#include "legalqa/runfile.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "legalqa/error.hpp"

namespace legalqa::runfile {
namespace {

using nlohmann::json;

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

json markers_to_json(const std::vector<corpus::ParagraphMarker>& markers) {
    auto arr = json::array();
    for (const auto& m : markers) arr.push_back(corpus::render_marker(m));
    return arr;
}

std::vector<corpus::ParagraphMarker> markers_from_json(const json& arr) {
    std::vector<corpus::ParagraphMarker> out;
    for (const auto& m : arr) out.push_back(corpus::parse_marker(m.get<std::string>()));
    return out;
}

}  // namespace

std::string digest(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("digest_file: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return digest(ss.str());
}

RunManifest make_manifest(const std::string& stage, const std::string& config_text,
                          const std::vector<std::string>& input_paths, std::uint64_t seed) {
    RunManifest m;
    m.stage = stage;
    m.config_digest = digest(config_text);
    std::string combined = m.config_digest + "|" + std::to_string(seed);
    for (const auto& path : input_paths) {
        const auto d = digest_file(path);
        m.input_digests[path] = d;
        combined += "|" + d;
    }
    m.seed = seed;
    m.run_id = digest(combined);
    m.started_at = now_iso8601();
    return m;
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::ordered_json doc;
    doc["run_id"] = manifest.run_id;
    doc["stage"] = manifest.stage;
    doc["config_digest"] = manifest.config_digest;
    doc["input_digests"] = manifest.input_digests;
    doc["seed"] = manifest.seed;
    doc["started_at"] = manifest.started_at;
    doc["finished_at"] = manifest.finished_at;
    doc["outcome"] = manifest.outcome;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("save_manifest: cannot write " + path);
    out << doc.dump(2) << "\n";
}

void save_retrieval_run(const RetrievalRunFile& run, const std::string& path) {
    nlohmann::ordered_json doc;
    doc["run_id"] = run.run_id;
    doc["engine"] = run.engine;
    doc["k"] = run.k;
    auto results = nlohmann::ordered_json::array();
    for (const auto& list : run.results) {
        auto ranking = nlohmann::ordered_json::array();
        for (const auto& e : list.entries) {
            ranking.push_back({{"doc_id", e.doc_id}, {"score", e.score}});
        }
        results.push_back({{"question_id", list.question_id}, {"ranking", std::move(ranking)}});
    }
    doc["results"] = std::move(results);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("save_retrieval_run: cannot write " + path);
    out << doc.dump(2) << "\n";
}

RetrievalRunFile load_retrieval_run(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_retrieval_run: cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("load_retrieval_run: malformed " + path + ": " + e.what());
    }
    RetrievalRunFile run;
    run.run_id = doc.at("run_id").get<std::string>();
    run.engine = doc.at("engine").get<std::string>();
    run.k = doc.at("k").get<std::size_t>();
    for (const auto& r : doc.at("results")) {
        RankedList list;
        list.question_id = r.at("question_id").get<std::int64_t>();
        for (const auto& e : r.at("ranking")) {
            list.entries.push_back(
                {e.at("doc_id").get<std::int64_t>(), e.at("score").get<double>()});
        }
        run.results.push_back(std::move(list));
    }
    return run;
}

void save_answer_run(const AnswerRunFile& run, const std::string& path) {
    nlohmann::ordered_json doc;
    doc["run_id"] = run.run_id;
    doc["mode"] = run.mode;
    auto outputs = nlohmann::ordered_json::array();
    for (const auto& e : run.entries) {
        outputs.push_back({{"question_id", e.question_id},
                           {"answer", e.output.answer_text},
                           {"markers", markers_to_json(e.output.markers)},
                           {"hallucinated_markers",
                            markers_to_json(e.output.hallucinated_markers)},
                           {"raw", e.output.raw}});
    }
    doc["outputs"] = std::move(outputs);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("save_answer_run: cannot write " + path);
    out << doc.dump(2) << "\n";
}

AnswerRunFile load_answer_run(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_answer_run: cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("load_answer_run: malformed " + path + ": " + e.what());
    }
    AnswerRunFile run;
    run.run_id = doc.at("run_id").get<std::string>();
    run.mode = doc.at("mode").get<std::string>();
    for (const auto& o : doc.at("outputs")) {
        AnswerEntry e;
        e.question_id = o.at("question_id").get<std::int64_t>();
        e.output.answer_text = o.at("answer").get<std::string>();
        e.output.markers = markers_from_json(o.at("markers"));
        e.output.hallucinated_markers = markers_from_json(o.at("hallucinated_markers"));
        e.output.raw = o.at("raw").get<std::string>();
        run.entries.push_back(std::move(e));
    }
    return run;
}

}  // namespace legalqa::runfile
