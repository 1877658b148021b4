// legalqa: retrieve-then-read pipeline for long-form statutory QA.
//
// Subcommands: ingest, index, embed, train, retrieve, answer, annotate,
// evaluate. All file formats are documented in the README. Exit codes:
// 0 success, 1 validation error, 2 runtime error, 64 usage error.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "legalqa/annotate.hpp"
#include "legalqa/bm25.hpp"
#include "legalqa/corpus.hpp"
#include "legalqa/dense.hpp"
#include "legalqa/embedprov.hpp"
#include "legalqa/error.hpp"
#include "legalqa/eval.hpp"
#include "legalqa/reader.hpp"
#include "legalqa/runfile.hpp"
#include "legalqa/textproc.hpp"
#include "legalqa/train.hpp"

namespace {

using namespace legalqa;

std::string article_text(const corpus::Article& a) {
    return a.body + " " + a.description;
}

std::string getenv_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value ? value : fallback;
}

// Deterministic offline generator: echoes the first provision paragraph
// and cites its marker, so the pipeline runs without any service.
class MockChatClient final : public reader::ChatClient {
public:
    std::string complete(const reader::ChatRequest& request) override {
        const auto& prompt = request.messages.back().content;
        std::string marker;
        std::string excerpt;
        const auto open = prompt.find("\n[");
        if (open != std::string::npos) {
            const auto close = prompt.find(']', open);
            if (close != std::string::npos) {
                marker = prompt.substr(open + 2, close - open - 2);
                const auto line_end = prompt.find('\n', close);
                excerpt = prompt.substr(close + 2, line_end == std::string::npos
                                                       ? std::string::npos
                                                       : line_end - close - 2);
            }
        }
        std::string out = "According to the cited provisions, " + excerpt;
        if (!marker.empty()) out += "\nRationales: " + marker;
        return out;
    }
};

struct CommonArgs {
    std::string corpus_path;
    std::string questions_path;
};

corpus::Corpus load_corpus_arg(const CommonArgs& args) {
    return corpus::load_corpus(args.corpus_path);
}

// Token-overlap similarity used for demonstration selection when no
// embedding store is supplied.
double token_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::set<std::string> sa(a.begin(), a.end());
    const std::set<std::string> sb(b.begin(), b.end());
    std::size_t inter = 0;
    for (const auto& t : sa) {
        if (sb.count(t)) ++inter;
    }
    const auto uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

int run_ingest(const CommonArgs& args, bool permissive) {
    const auto corp = load_corpus_arg(args);
    std::vector<std::string> rejected;
    const auto questions =
        corpus::load_questions(args.questions_path, corp, !permissive, &rejected);
    const auto stats = corpus::dataset_stats(corp, questions);
    std::cout << "articles: " << stats.article_count << "\n"
              << "questions: " << stats.question_count << "\n"
              << "median relevant articles: " << stats.median_relevant_articles << "\n"
              << "median article words: " << stats.median_article_words << "\n"
              << "referenced fraction: " << stats.referenced_fraction << "\n";
    for (const auto& r : rejected) std::cerr << "dropped: " << r << "\n";
    return 0;
}

int run_index(const CommonArgs& args, const std::string& out, double k1, double b,
              bool body_only) {
    const auto corp = load_corpus_arg(args);
    bm25::FieldSpec fields;
    fields.description = !body_only;
    const auto index = bm25::InvertedIndex::build(corp, fields, {k1, b});
    index.save(out);
    std::cout << "indexed " << index.doc_count() << " documents -> " << out << "\n";
    return 0;
}

struct EmbedArgs {
    std::string provider = "pseudo";
    std::string location;
    std::size_t dim = 16;
    std::uint64_t seed = 0;
    std::string similarity = "cosine";
    std::string articles_out;
    std::string questions_out;
};

std::unique_ptr<embedprov::EmbeddingProvider> make_provider_from(const EmbedArgs& e) {
    embedprov::ProviderConfig cfg;
    cfg.dim = e.dim;
    cfg.seed = e.seed;
    if (e.provider == "pseudo") {
        cfg.kind = embedprov::ProviderConfig::Kind::Pseudo;
    } else if (e.provider == "file") {
        cfg.kind = embedprov::ProviderConfig::Kind::File;
        cfg.location = e.location;
    } else if (e.provider == "remote") {
        cfg.kind = embedprov::ProviderConfig::Kind::Remote;
        cfg.location = e.location.empty() ? getenv_or("LEGALQA_EMBED_ENDPOINT", "") : e.location;
        if (cfg.location.empty())
            throw Error("remote provider needs --location or LEGALQA_EMBED_ENDPOINT");
    } else {
        throw Error("unknown provider kind: " + e.provider);
    }
    return embedprov::make_provider(cfg);
}

int run_embed(const CommonArgs& args, const EmbedArgs& eargs) {
    const auto provider = make_provider_from(eargs);
    const auto sim = eargs.similarity == "dot" ? dense::Similarity::Dot
                                               : dense::Similarity::Cosine;
    if (!eargs.articles_out.empty()) {
        const auto corp = load_corpus_arg(args);
        std::vector<std::int64_t> ids;
        std::vector<std::string> texts;
        for (const auto& [id, article] : corp.articles()) {
            ids.push_back(id);
            texts.push_back(article_text(article));
        }
        const auto vectors = provider->embed_texts(texts);
        dense::EmbeddingStore store(vectors.front().size(), sim);
        for (std::size_t i = 0; i < ids.size(); ++i) store.insert(ids[i], vectors[i]);
        store.save(eargs.articles_out);
        std::cout << "embedded " << ids.size() << " articles -> " << eargs.articles_out << "\n";
    }
    if (!eargs.questions_out.empty()) {
        const auto corp = load_corpus_arg(args);
        const auto questions = corpus::load_questions(args.questions_path, corp);
        std::vector<std::string> texts;
        for (const auto& q : questions) texts.push_back(q.text);
        const auto vectors = provider->embed_texts(texts);
        dense::EmbeddingStore store(vectors.front().size(), sim);
        for (std::size_t i = 0; i < questions.size(); ++i)
            store.insert(questions[i].id, vectors[i]);
        store.save(eargs.questions_out);
        std::cout << "embedded " << questions.size() << " questions -> " << eargs.questions_out
                  << "\n";
    }
    return 0;
}

struct TrainArgs {
    std::string qstore;
    std::string pstore;
    std::string index_path;  // optional, enables BM25 hard negatives
    std::string out;
    train::TrainConfig config;
};

int run_train(const CommonArgs& args, const TrainArgs& targs) {
    const auto corp = load_corpus_arg(args);
    const auto questions = corpus::load_questions(args.questions_path, corp);
    const auto qstore = dense::EmbeddingStore::load(targs.qstore);
    const auto pstore = dense::EmbeddingStore::load(targs.pstore);

    std::optional<bm25::InvertedIndex> index;
    if (!targs.index_path.empty()) index = bm25::InvertedIndex::load(targs.index_path);

    std::vector<train::TrainInstance> data;
    for (const auto& q : questions) {
        std::vector<std::int64_t> negatives;
        if (index && targs.config.hard_negatives_per_query > 0) {
            negatives = index->mine_hard_negatives(q, targs.config.hard_negatives_per_query);
        }
        for (const auto gold : q.article_ids) {
            train::TrainInstance inst;
            inst.question_id = q.id;
            inst.positive_id = gold;
            for (const auto n : negatives) {
                if (n != gold) inst.hard_negative_ids.push_back(n);
            }
            data.push_back(std::move(inst));
        }
    }

    auto initial = train::identity_init(pstore.dim(), pstore.dim(), targs.config.seed);
    const auto result = train::train(std::move(data), qstore, pstore, targs.config,
                                     std::move(initial));
    result.model.save(targs.out, targs.config.seed);
    std::cout << "epoch losses:";
    for (const auto l : result.epoch_losses) std::cout << " " << l;
    std::cout << "\nmodel -> " << targs.out << "\n";
    return 0;
}

struct RetrieveArgs {
    std::string engine = "bm25";
    std::size_t k = 5;
    std::string index_path;
    std::string qstore;
    std::string pstore;
    std::string model_path;  // optional projection checkpoint
    std::string out;
};

int run_retrieve(const CommonArgs& args, const RetrieveArgs& rargs) {
    const auto corp = load_corpus_arg(args);
    const auto questions = corpus::load_questions(args.questions_path, corp);

    std::vector<std::string> inputs{args.corpus_path, args.questions_path};
    std::string config_text = "retrieve|" + rargs.engine + "|" + std::to_string(rargs.k);

    runfile::RetrievalRunFile run;
    run.engine = rargs.engine;
    run.k = rargs.k;

    if (rargs.engine == "bm25") {
        const auto index = bm25::InvertedIndex::load(rargs.index_path);
        inputs.push_back(rargs.index_path);
        for (const auto& q : questions) {
            auto list = index.search(q.text, rargs.k);
            list.question_id = q.id;
            run.results.push_back(std::move(list));
        }
    } else if (rargs.engine == "dense") {
        auto qstore = dense::EmbeddingStore::load(rargs.qstore);
        auto pstore = dense::EmbeddingStore::load(rargs.pstore);
        inputs.push_back(rargs.qstore);
        inputs.push_back(rargs.pstore);
        std::optional<train::ProjectionModel> model;
        if (!rargs.model_path.empty()) {
            model = train::ProjectionModel::load(rargs.model_path);
            inputs.push_back(rargs.model_path);
            // Project both sides with the shared weights.
            dense::EmbeddingStore projected(model->out_dim, pstore.similarity_kind());
            for (std::size_t i = 0; i < pstore.size(); ++i) {
                projected.insert(pstore.ids()[i], model->project(pstore.row(i)));
            }
            pstore = std::move(projected);
        }
        for (const auto& q : questions) {
            std::vector<float> qvec(qstore.vector_for(q.id).begin(),
                                    qstore.vector_for(q.id).end());
            if (model) qvec = model->project(qvec);
            auto list = dense::dense_search(qvec, pstore, rargs.k);
            list.question_id = q.id;
            run.results.push_back(std::move(list));
        }
    } else {
        throw Error("unknown engine: " + rargs.engine);
    }

    auto manifest = runfile::make_manifest("retrieve", config_text, inputs, 0);
    manifest.outcome = "ok";
    run.run_id = manifest.run_id;
    runfile::save_retrieval_run(run, rargs.out);
    runfile::save_manifest(manifest, rargs.out + ".manifest.json");
    std::cout << "retrieved " << run.results.size() << " questions -> " << rargs.out << "\n";
    return 0;
}

struct AnswerArgs {
    std::string mode = "zero";
    std::size_t k = 5;
    std::size_t budget = 8192;
    std::string retrieval_path;
    std::string pool_path;  // training questions for demonstrations
    std::string generator = "http";
    std::string task_description =
        "You are a legal assistant. Answer the question using only the statutory provisions "
        "below. After the answer, list the supporting paragraph markers on a final line "
        "starting with \"Rationales:\".";
    std::size_t demos = 3;
    std::string out;
    reader::GenConfig gen;
};

int run_answer(const CommonArgs& args, const AnswerArgs& aargs) {
    const auto corp = load_corpus_arg(args);
    const auto questions = corpus::load_questions(args.questions_path, corp);
    const auto retrieval = runfile::load_retrieval_run(aargs.retrieval_path);

    std::map<std::int64_t, const RankedList*> ranked_by_q;
    for (const auto& r : retrieval.results) ranked_by_q[r.question_id] = &r;

    std::vector<corpus::Question> pool;
    if (!aargs.pool_path.empty()) pool = corpus::load_questions(aargs.pool_path, corp);

    reader::PromptSpec spec;
    spec.task_description = aargs.task_description;
    spec.provisions_per_question = aargs.k;
    spec.token_budget = aargs.budget;
    std::size_t demo_count = 0;
    if (aargs.mode == "zero") {
        spec.mode = reader::Mode::ZeroShot;
    } else if (aargs.mode == "one") {
        spec.mode = reader::Mode::OneShot;
        demo_count = 1;
    } else if (aargs.mode == "few") {
        spec.mode = reader::Mode::FewShot;
        demo_count = aargs.demos;
    } else {
        throw Error("unknown mode: " + aargs.mode);
    }

    std::unique_ptr<reader::ChatClient> client;
    reader::GenConfig gen = aargs.gen;
    if (aargs.generator == "mock") {
        client = std::make_unique<MockChatClient>();
    } else {
        if (gen.endpoint.empty()) gen.endpoint = getenv_or("LEGALQA_GEN_ENDPOINT", "");
        if (gen.api_key.empty()) gen.api_key = getenv_or("LEGALQA_API_KEY", "");
        if (gen.endpoint.empty())
            throw Error("answer: set LEGALQA_GEN_ENDPOINT or use --generator mock");
        client = reader::make_http_chat_client(gen);
    }

    std::vector<std::string> inputs{args.corpus_path, args.questions_path,
                                    aargs.retrieval_path};
    auto manifest = runfile::make_manifest(
        "answer", "answer|" + aargs.mode + "|" + std::to_string(aargs.k), inputs, 0);

    runfile::AnswerRunFile out_run;
    out_run.run_id = manifest.run_id;
    out_run.mode = aargs.mode;

    for (const auto& q : questions) {
        const auto it = ranked_by_q.find(q.id);
        if (it == ranked_by_q.end())
            throw ReferenceError("answer: no retrieval results for question " +
                                 std::to_string(q.id));
        std::vector<reader::ProvisionContext> provisions;
        for (const auto& entry : it->second->entries) {
            provisions.push_back(reader::make_provision_context(corp.at(entry.doc_id)));
            if (provisions.size() == aargs.k) break;
        }

        std::vector<reader::Demonstration> demos;
        if (demo_count > 0 && !pool.empty()) {
            const auto q_tokens = textproc::stemmed_tokens(q.text);
            demos = reader::select_demonstrations(
                q, pool, demo_count,
                [&](const corpus::Question& cand) {
                    return token_jaccard(q_tokens, textproc::stemmed_tokens(cand.text));
                },
                corp);
        }

        const auto built = reader::build_context(spec, std::move(demos), std::move(provisions),
                                                 q);
        const auto result = reader::generate(built.prompt, gen, *client);

        std::set<corpus::ParagraphMarker> provided;
        for (const auto& p : built.manifest.included_provisions) {
            for (const auto& [marker, text] : p.paragraphs) provided.insert(marker);
        }
        runfile::AnswerEntry entry;
        entry.question_id = q.id;
        entry.output = reader::parse_reader_output(result.text, provided);
        out_run.entries.push_back(std::move(entry));
    }

    manifest.outcome = "ok";
    runfile::save_answer_run(out_run, aargs.out);
    runfile::save_manifest(manifest, aargs.out + ".manifest.json");
    std::cout << "answered " << out_run.entries.size() << " questions -> " << aargs.out << "\n";
    return 0;
}

struct AnnotateArgs {
    std::string annotator = "first";
    std::uint64_t seed = 0;
    std::string out;
    reader::GenConfig gen;
};

int run_annotate(const CommonArgs& args, const AnnotateArgs& aargs) {
    const auto corp = load_corpus_arg(args);
    const auto questions = corpus::load_questions(args.questions_path, corp);

    std::unique_ptr<reader::ChatClient> client;
    reader::GenConfig gen = aargs.gen;
    if (aargs.annotator == "llm") {
        if (gen.endpoint.empty()) gen.endpoint = getenv_or("LEGALQA_GEN_ENDPOINT", "");
        if (gen.api_key.empty()) gen.api_key = getenv_or("LEGALQA_API_KEY", "");
        if (gen.endpoint.empty()) throw Error("annotate --annotator llm needs LEGALQA_GEN_ENDPOINT");
        client = reader::make_http_chat_client(gen);
    }

    auto manifest = runfile::make_manifest("annotate", "annotate|" + aargs.annotator,
                                           {args.corpus_path, args.questions_path}, aargs.seed);
    annotate::AnnotationRun run;
    run.run_id = manifest.run_id;

    for (const auto& q : questions) {
        annotate::AnnotationRecord rec;
        rec.question_id = q.id;
        rec.model_name = aargs.annotator;
        if (aargs.annotator == "first") {
            rec.parsed_markers = annotate::baseline_first(q, corp);
        } else if (aargs.annotator == "random") {
            rec.parsed_markers = annotate::baseline_random(q, corp, aargs.seed);
        } else if (aargs.annotator == "llm") {
            const auto prompt = annotate::build_annotation_prompt(q, q.answer, corp);
            std::set<corpus::ParagraphMarker> candidates;
            for (const auto id : q.article_ids) {
                for (const auto& p : corp.at(id).paragraphs) candidates.insert({id, p.index});
            }
            const auto result = reader::generate(prompt, gen, *client);
            rec.raw = result.text;
            rec.parsed_markers = annotate::parse_annotation(rec.raw, candidates);
        } else {
            throw Error("unknown annotator: " + aargs.annotator);
        }
        run.records.push_back(std::move(rec));
    }

    manifest.outcome = "ok";
    annotate::save_annotation_run(run, aargs.out);
    runfile::save_manifest(manifest, aargs.out + ".manifest.json");
    std::cout << "annotated " << run.records.size() << " questions -> " << aargs.out << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string metrics = "r@k,mrr,meteor,rationale_f1";
    std::size_t k = 10;
    std::string retrieval_path;
    std::string answers_path;
    std::string annotations_path;
    std::string out;
};

int run_evaluate(const CommonArgs& args, const EvaluateArgs& eargs) {
    const auto corp = load_corpus_arg(args);
    const auto questions = corpus::load_questions(args.questions_path, corp);
    std::map<std::int64_t, const corpus::Question*> by_id;
    for (const auto& q : questions) by_id[q.id] = &q;

    std::set<std::string> wanted;
    {
        std::size_t begin = 0;
        while (begin <= eargs.metrics.size()) {
            auto end = eargs.metrics.find(',', begin);
            if (end == std::string::npos) end = eargs.metrics.size();
            if (end > begin) wanted.insert(eargs.metrics.substr(begin, end - begin));
            begin = end + 1;
        }
    }

    eval::EvalReport report;
    std::map<std::int64_t, eval::PerQuestionMetrics> rows;
    std::string run_id_source = "evaluate";
    std::vector<std::string> inputs{args.corpus_path, args.questions_path};

    if ((wanted.count("r@k") || wanted.count("mrr")) && !eargs.retrieval_path.empty()) {
        const auto retrieval = runfile::load_retrieval_run(eargs.retrieval_path);
        inputs.push_back(eargs.retrieval_path);
        run_id_source = retrieval.run_id;
        for (const auto& list : retrieval.results) {
            const auto* q = by_id.at(list.question_id);
            const std::set<std::int64_t> gold(q->article_ids.begin(), q->article_ids.end());
            auto& row = rows[q->id];
            row.question_id = q->id;
            if (wanted.count("r@k"))
                row.values["recall@" + std::to_string(eargs.k)] =
                    eval::recall_at_k(list, gold, eargs.k);
            if (wanted.count("mrr"))
                row.values["rr@" + std::to_string(eargs.k)] =
                    eval::reciprocal_rank(list, gold, eargs.k);
        }
    }

    if ((wanted.count("meteor") || wanted.count("rationale_f1")) && !eargs.answers_path.empty()) {
        const auto answers = runfile::load_answer_run(eargs.answers_path);
        inputs.push_back(eargs.answers_path);
        run_id_source = answers.run_id;
        for (const auto& entry : answers.entries) {
            const auto* q = by_id.at(entry.question_id);
            auto& row = rows[q->id];
            row.question_id = q->id;
            if (wanted.count("meteor"))
                row.values["meteor"] = eval::meteor(entry.output.answer_text, q->answer);
            if (wanted.count("rationale_f1")) {
                const std::set<corpus::ParagraphMarker> pred(entry.output.markers.begin(),
                                                             entry.output.markers.end());
                const std::set<corpus::ParagraphMarker> gold(q->paragraph_ids.begin(),
                                                             q->paragraph_ids.end());
                row.values["rationale_f1"] = eval::rationale_f1(pred, gold).f1;
            }
        }
    }

    if (wanted.count("rationale_f1") && !eargs.annotations_path.empty()) {
        const auto ann = annotate::load_annotation_run(eargs.annotations_path);
        inputs.push_back(eargs.annotations_path);
        run_id_source = ann.run_id;
        for (const auto& rec : ann.records) {
            const auto* q = by_id.at(rec.question_id);
            auto& row = rows[q->id];
            row.question_id = q->id;
            const std::set<corpus::ParagraphMarker> gold(q->paragraph_ids.begin(),
                                                         q->paragraph_ids.end());
            const auto prf = eval::rationale_f1(rec.parsed_markers, gold);
            row.values["annotator_precision"] = prf.precision;
            row.values["annotator_recall"] = prf.recall;
            row.values["annotator_f1"] = prf.f1;
        }
    }

    if (rows.empty()) throw Error("evaluate: nothing to evaluate; supply at least one run file");

    auto manifest = runfile::make_manifest("evaluate", "evaluate|" + eargs.metrics + "|" +
                                                           std::to_string(eargs.k),
                                           inputs, 0);
    report.run_id = manifest.run_id;
    report.config_digest = manifest.config_digest;
    for (const auto& [id, row] : rows) report.per_question.push_back(row);

    // Aggregates are plain means of the per-question values.
    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (const auto& row : report.per_question) {
        for (const auto& [name, value] : row.values) {
            sums[name].first += value;
            sums[name].second += 1;
        }
    }
    for (const auto& [name, sum] : sums) {
        report.aggregates[name] = sum.first / static_cast<double>(sum.second);
    }

    manifest.outcome = "ok";
    eval::emit_report(report, eargs.out);
    runfile::save_manifest(manifest, eargs.out + ".manifest.json");
    for (const auto& [name, value] : report.aggregates) {
        std::cout << name << ": " << value << "\n";
    }
    std::cout << "report -> " << eargs.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retrieve-then-read pipeline for long-form statutory question answering"};
    app.require_subcommand(1);

    CommonArgs common;
    bool permissive = false;

    auto* ingest = app.add_subcommand("ingest", "validate corpus and question files");
    ingest->add_option("--corpus", common.corpus_path)->required();
    ingest->add_option("--questions", common.questions_path)->required();
    ingest->add_flag("--permissive", permissive, "drop invalid records instead of failing");

    auto* index_cmd = app.add_subcommand("index", "build the BM25 index");
    std::string index_out;
    double k1 = 1.2, b = 0.75;
    bool body_only = false;
    index_cmd->add_option("--corpus", common.corpus_path)->required();
    index_cmd->add_option("--out", index_out)->required();
    index_cmd->add_option("--k1", k1);
    index_cmd->add_option("--b", b);
    index_cmd->add_flag("--body-only", body_only, "index article body without the description");

    auto* embed_cmd = app.add_subcommand("embed", "embed articles and/or questions");
    EmbedArgs eargs;
    embed_cmd->add_option("--corpus", common.corpus_path);
    embed_cmd->add_option("--questions", common.questions_path);
    embed_cmd->add_option("--provider", eargs.provider, "pseudo|file|remote");
    embed_cmd->add_option("--location", eargs.location, "file path or endpoint URL");
    embed_cmd->add_option("--dim", eargs.dim);
    embed_cmd->add_option("--seed", eargs.seed);
    embed_cmd->add_option("--similarity", eargs.similarity, "cosine|dot");
    embed_cmd->add_option("--out", eargs.articles_out, "article store output");
    embed_cmd->add_option("--questions-out", eargs.questions_out, "question store output");

    auto* train_cmd = app.add_subcommand("train", "train the projection retriever");
    TrainArgs targs;
    train_cmd->add_option("--corpus", common.corpus_path)->required();
    train_cmd->add_option("--questions", common.questions_path)->required();
    train_cmd->add_option("--qstore", targs.qstore)->required();
    train_cmd->add_option("--pstore", targs.pstore)->required();
    train_cmd->add_option("--index", targs.index_path, "BM25 index for hard negatives");
    train_cmd->add_option("--out", targs.out)->required();
    train_cmd->add_option("--temperature", targs.config.temperature);
    train_cmd->add_option("--batch-size", targs.config.batch_size);
    train_cmd->add_option("--hard-negatives", targs.config.hard_negatives_per_query);
    train_cmd->add_option("--lr", targs.config.learning_rate);
    train_cmd->add_option("--epochs", targs.config.epochs);
    train_cmd->add_option("--seed", targs.config.seed);

    auto* retrieve_cmd = app.add_subcommand("retrieve", "rank provisions per question");
    RetrieveArgs rargs;
    retrieve_cmd->add_option("--corpus", common.corpus_path)->required();
    retrieve_cmd->add_option("--questions", common.questions_path)->required();
    retrieve_cmd->add_option("--engine", rargs.engine, "bm25|dense");
    retrieve_cmd->add_option("--k", rargs.k);
    retrieve_cmd->add_option("--index", rargs.index_path);
    retrieve_cmd->add_option("--qstore", rargs.qstore);
    retrieve_cmd->add_option("--pstore", rargs.pstore);
    retrieve_cmd->add_option("--model", rargs.model_path, "projection checkpoint");
    retrieve_cmd->add_option("--out", rargs.out)->required();

    auto* answer_cmd = app.add_subcommand("answer", "generate answers with rationales");
    AnswerArgs aargs;
    answer_cmd->add_option("--corpus", common.corpus_path)->required();
    answer_cmd->add_option("--questions", common.questions_path)->required();
    answer_cmd->add_option("--retrieval", aargs.retrieval_path)->required();
    answer_cmd->add_option("--mode", aargs.mode, "zero|one|few");
    answer_cmd->add_option("--k", aargs.k);
    answer_cmd->add_option("--budget", aargs.budget);
    answer_cmd->add_option("--pool", aargs.pool_path, "training questions for demonstrations");
    answer_cmd->add_option("--demos", aargs.demos, "demonstrations in few-shot mode");
    answer_cmd->add_option("--generator", aargs.generator, "http|mock");
    answer_cmd->add_option("--task-description", aargs.task_description);
    answer_cmd->add_option("--model-name", aargs.gen.model);
    answer_cmd->add_option("--top-p", aargs.gen.top_p);
    answer_cmd->add_option("--gen-temperature", aargs.gen.temperature);
    answer_cmd->add_option("--max-new-tokens", aargs.gen.max_new_tokens);
    answer_cmd->add_option("--out", aargs.out)->required();

    auto* annotate_cmd = app.add_subcommand("annotate", "paragraph-level rationale annotation");
    AnnotateArgs nargs;
    annotate_cmd->add_option("--corpus", common.corpus_path)->required();
    annotate_cmd->add_option("--questions", common.questions_path)->required();
    annotate_cmd->add_option("--annotator", nargs.annotator, "llm|first|random");
    annotate_cmd->add_option("--seed", nargs.seed);
    annotate_cmd->add_option("--model-name", nargs.gen.model);
    annotate_cmd->add_option("--out", nargs.out)->required();

    auto* evaluate_cmd = app.add_subcommand("evaluate", "compute metrics and emit a report");
    EvaluateArgs vargs;
    evaluate_cmd->add_option("--corpus", common.corpus_path)->required();
    evaluate_cmd->add_option("--questions", common.questions_path)->required();
    evaluate_cmd->add_option("--metrics", vargs.metrics, "comma list: r@k,mrr,meteor,rationale_f1");
    evaluate_cmd->add_option("--k", vargs.k, "retrieval cutoff");
    evaluate_cmd->add_option("--retrieval", vargs.retrieval_path);
    evaluate_cmd->add_option("--answers", vargs.answers_path);
    evaluate_cmd->add_option("--annotations", vargs.annotations_path);
    evaluate_cmd->add_option("--out", vargs.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    try {
        if (*ingest) return run_ingest(common, permissive);
        if (*index_cmd) return run_index(common, index_out, k1, b, body_only);
        if (*embed_cmd) return run_embed(common, eargs);
        if (*train_cmd) return run_train(common, targs);
        if (*retrieve_cmd) return run_retrieve(common, rargs);
        if (*answer_cmd) return run_answer(common, aargs);
        if (*annotate_cmd) return run_annotate(common, nargs);
        if (*evaluate_cmd) return run_evaluate(common, vargs);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ReferenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 64;
}
