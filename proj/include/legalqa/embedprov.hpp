#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace legalqa::embedprov {

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff{100};  // doubled after each failure
};

struct ProviderConfig {
    enum class Kind { File, Remote, Pseudo };
    Kind kind = Kind::File;
    std::string location;  // path (file) or endpoint URL (remote)
    std::size_t batch_size = 32;
    std::chrono::milliseconds timeout{30000};
    RetryPolicy retry;
    // Pseudo provider parameters.
    std::size_t dim = 16;
    std::uint64_t seed = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// Embeds texts in input order. Output count always equals input
    /// count; all vectors share one dimension. Throws ProviderError.
    virtual std::vector<std::vector<float>> embed_texts(
        const std::vector<std::string>& texts) = 0;
};

/// Precomputed vectors keyed by exact text; deterministic, the test path.
std::unique_ptr<EmbeddingProvider> make_file_provider(const std::string& path);

/// Seeded hash-based pseudo-embeddings, unit-normalized. Deterministic
/// across runs and platforms; lets the full pipeline run with no model.
std::unique_ptr<EmbeddingProvider> make_pseudo_provider(std::size_t dim, std::uint64_t seed);

/// HTTP client for a remote embedding service:
/// POST {"texts": [...]} -> {"vectors": [[...], ...]}.
std::unique_ptr<EmbeddingProvider> make_remote_provider(const ProviderConfig& config);

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config);

/// The deterministic vector the pseudo provider assigns to `text`.
std::vector<float> pseudo_embedding(const std::string& text, std::size_t dim, std::uint64_t seed);

}  // namespace legalqa::embedprov
