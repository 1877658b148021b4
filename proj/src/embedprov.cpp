#include "legalqa/embedprov.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "legalqa/error.hpp"

namespace legalqa::embedprov {
namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

void check_dims(const std::vector<std::vector<float>>& vectors) {
    if (vectors.empty()) return;
    const auto d = vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != d) throw ProviderError("provider returned inconsistent dimensions");
    }
}

class FileProvider final : public EmbeddingProvider {
public:
    explicit FileProvider(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ProviderError("file provider: cannot open " + path);
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw ProviderError("file provider: malformed " + path + ": " + e.what());
        }
        dim_ = doc.at("dim").get<std::size_t>();
        for (const auto& [text, vec] : doc.at("entries").items()) {
            auto v = vec.get<std::vector<float>>();
            if (v.size() != dim_)
                throw ProviderError("file provider: entry dim mismatch in " + path);
            entries_.emplace(text, std::move(v));
        }
    }

    std::vector<std::vector<float>> embed_texts(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw ProviderError("embed_texts: empty input");
        std::vector<std::vector<float>> out;
        out.reserve(texts.size());
        for (const auto& t : texts) {
            const auto it = entries_.find(t);
            if (it == entries_.end())
                throw ProviderError("file provider: no stored vector for text: " + t);
            out.push_back(it->second);
        }
        return out;
    }

private:
    std::size_t dim_ = 0;
    std::map<std::string, std::vector<float>> entries_;
};

class PseudoProvider final : public EmbeddingProvider {
public:
    PseudoProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

    std::vector<std::vector<float>> embed_texts(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw ProviderError("embed_texts: empty input");
        std::vector<std::vector<float>> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(pseudo_embedding(t, dim_, seed_));
        return out;
    }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

struct ParsedUrl {
    std::string host_port;  // scheme://host:port
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start =
        url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class RemoteProvider final : public EmbeddingProvider {
public:
    explicit RemoteProvider(ProviderConfig config) : config_(std::move(config)) {}

    std::vector<std::vector<float>> embed_texts(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw ProviderError("embed_texts: empty input");
        std::vector<std::vector<float>> out;
        for (std::size_t begin = 0; begin < texts.size(); begin += config_.batch_size) {
            const auto end = std::min(begin + config_.batch_size, texts.size());
            const std::vector<std::string> batch(texts.begin() + begin, texts.begin() + end);
            auto vectors = post_batch(batch);
            if (vectors.size() != batch.size())
                throw ProviderError("remote provider returned " + std::to_string(vectors.size()) +
                                    " vectors for " + std::to_string(batch.size()) + " texts");
            for (auto& v : vectors) out.push_back(std::move(v));
        }
        check_dims(out);
        return out;
    }

private:
    std::vector<std::vector<float>> post_batch(const std::vector<std::string>& batch) {
        const auto [host, path] = split_url(config_.location);
        json body;
        body["texts"] = batch;
        const std::string payload = body.dump();
        std::string last_error;
        auto backoff = config_.retry.backoff;
        for (int attempt = 0; attempt <= config_.retry.max_attempts; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
            httplib::Client client(host);
            client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
                config_.timeout));
            client.set_read_timeout(
                std::chrono::duration_cast<std::chrono::seconds>(config_.timeout));
            auto res = client.Post(path, payload, "application/json");
            if (!res) {
                last_error = "transport failure: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status < 200 || res->status >= 300) {
                last_error = "status " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 200);
                continue;
            }
            try {
                return json::parse(res->body).at("vectors").get<std::vector<std::vector<float>>>();
            } catch (const json::exception& e) {
                last_error = std::string("bad response body: ") + e.what();
                continue;
            }
        }
        throw ProviderError("remote provider failed after " +
                            std::to_string(config_.retry.max_attempts + 1) +
                            " attempts: " + last_error);
    }

    ProviderConfig config_;
};

}  // namespace

std::vector<float> pseudo_embedding(const std::string& text, std::size_t dim,
                                    std::uint64_t seed) {
    const std::uint64_t base = fnv1a(text) ^ splitmix64(seed);
    std::vector<float> v(dim);
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const auto bits = splitmix64(base + i);
        // Uniform in [-1, 1), from the top 53 bits.
        const double u = static_cast<double>(bits >> 11) / 9007199254740992.0;
        v[i] = static_cast<float>(2.0 * u - 1.0);
        norm_sq += static_cast<double>(v[i]) * v[i];
    }
    const auto norm = static_cast<float>(std::sqrt(norm_sq));
    for (auto& x : v) x /= norm;
    return v;
}

std::unique_ptr<EmbeddingProvider> make_file_provider(const std::string& path) {
    return std::make_unique<FileProvider>(path);
}

std::unique_ptr<EmbeddingProvider> make_pseudo_provider(std::size_t dim, std::uint64_t seed) {
    return std::make_unique<PseudoProvider>(dim, seed);
}

std::unique_ptr<EmbeddingProvider> make_remote_provider(const ProviderConfig& config) {
    return std::make_unique<RemoteProvider>(config);
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config) {
    switch (config.kind) {
        case ProviderConfig::Kind::File: return make_file_provider(config.location);
        case ProviderConfig::Kind::Remote: return make_remote_provider(config);
        case ProviderConfig::Kind::Pseudo: return make_pseudo_provider(config.dim, config.seed);
    }
    throw ProviderError("unknown provider kind");
}

}  // namespace legalqa::embedprov
