#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "legalqa/ranked.hpp"

namespace legalqa::dense {

enum class Similarity { Dot, Cosine };
enum class Pooling { Mean, Max };

/// Column-wise mean or max over the rows of an n x d matrix.
std::vector<float> pool(const std::vector<std::vector<float>>& token_vectors, Pooling kind);

double similarity(std::span<const float> u, std::span<const float> v, Similarity kind);

// Id-aligned dense vectors, row-major float32.
class EmbeddingStore {
public:
    explicit EmbeddingStore(std::size_t dim, Similarity sim = Similarity::Cosine);

    void insert(std::int64_t id, std::span<const float> vector);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    Similarity similarity_kind() const { return similarity_; }
    const std::vector<std::int64_t>& ids() const { return ids_; }
    std::span<const float> row(std::size_t i) const;
    std::span<const float> vector_for(std::int64_t id) const;
    bool contains(std::int64_t id) const;

    void save(const std::string& path) const;
    static EmbeddingStore load(const std::string& path);

private:
    std::size_t dim_;
    Similarity similarity_;
    std::vector<std::int64_t> ids_;
    std::vector<float> data_;  // row-major, size() * dim_
    std::unordered_map<std::int64_t, std::size_t> index_;
};

/// Exact top-k scan. Ties broken by ascending doc id.
RankedList dense_search(std::span<const float> query, const EmbeddingStore& store, std::size_t k);

/// Serial reference for the OpenMP scan; kept for testing and benchmarks.
RankedList dense_search_serial(std::span<const float> query, const EmbeddingStore& store,
                               std::size_t k);

}  // namespace legalqa::dense
