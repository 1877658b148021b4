#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "legalqa/corpus.hpp"

namespace legalqa::reader {

enum class Mode { ZeroShot, OneShot, FewShot };

struct PromptSpec {
    std::string task_description;
    Mode mode = Mode::ZeroShot;
    std::size_t provisions_per_question = 5;
    std::size_t token_budget = 8192;
};

struct Demonstration {
    std::vector<std::string> provision_texts;  // rendered gold provisions
    std::string question;
    std::string answer;
};

// One retrieved provision prepared for prompting: every paragraph keeps
// its marker so the model can cite it.
struct ProvisionContext {
    std::int64_t article_id = 0;
    std::string reference;
    std::vector<std::pair<corpus::ParagraphMarker, std::string>> paragraphs;
};

ProvisionContext make_provision_context(const corpus::Article& article);

// Exactly what went into a prompt. Rendering the manifest reproduces the
// prompt byte for byte.
struct ContextManifest {
    std::string task_description;
    std::vector<Demonstration> included_demos;  // least similar first
    std::vector<ProvisionContext> included_provisions;
    std::string question;
    std::size_t dropped_demos = 0;
    std::size_t truncated_paragraphs = 0;
    std::size_t estimated_tokens = 0;
};

std::string render_context(const ContextManifest& manifest);

std::string manifest_to_json(const ContextManifest& manifest);
ContextManifest manifest_from_json(const std::string& text);

/// Word-count based token estimate: ceil(words * 1.4 * 1.05). The 5%
/// margin absorbs tokenizer differences across models.
std::size_t estimate_tokens(std::string_view text);

struct BuiltContext {
    std::string prompt;
    ContextManifest manifest;
};

/// Assemble [description][demos][provisions][question] under the token
/// budget. Demonstrations are dropped (least similar first) before any
/// provision text is truncated; provision paragraphs are then truncated
/// from the tail of the lowest-ranked provision. Throws BudgetError when
/// the description, question and one provision paragraph cannot fit.
BuiltContext build_context(const PromptSpec& spec, std::vector<Demonstration> demos,
                           std::vector<ProvisionContext> provisions,
                           const corpus::Question& question);

/// Top-n pool questions by similarity to q (q itself excluded), ordered
/// least similar first so the strongest demonstration sits next to the
/// test question. Ties broken by ascending question id.
std::vector<Demonstration> select_demonstrations(
    const corpus::Question& q, const std::vector<corpus::Question>& pool, std::size_t n,
    const std::function<double(const corpus::Question&)>& similarity_to_q,
    const corpus::Corpus& corpus);

struct GenConfig {
    double top_p = 0.95;
    double temperature = 0.1;
    int max_new_tokens = 1024;
    std::string model;
    std::string endpoint;       // scheme://host:port
    std::string path = "/v1/chat/completions";
    std::string auth_header = "Authorization";
    std::string api_key;        // sent as "Bearer <key>" when non-empty
    std::chrono::milliseconds timeout{60000};
    int max_retries = 3;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.1;
    double top_p = 0.95;
    int max_tokens = 1024;
    std::string model;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Returns the first choice's text. Throws GenerationError.
    virtual std::string complete(const ChatRequest& request) = 0;
};

std::unique_ptr<ChatClient> make_http_chat_client(const GenConfig& config);

struct GenerationResult {
    std::string text;
    std::chrono::milliseconds latency{0};
};

GenerationResult generate(const std::string& prompt, const GenConfig& config, ChatClient& client);

struct ReaderOutput {
    std::string answer_text;
    std::vector<corpus::ParagraphMarker> markers;               // resolvable
    std::vector<corpus::ParagraphMarker> hallucinated_markers;  // not provided
    std::string raw;
};

/// Extract every marker-shaped substring from the generation; markers in
/// `provided` are evidence, the rest hallucinations. A trailing
/// "Rationales: ..." block is stripped from the answer text.
ReaderOutput parse_reader_output(const std::string& raw,
                                 const std::set<corpus::ParagraphMarker>& provided);

}  // namespace legalqa::reader
