#include "legalqa/dense.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "legalqa/error.hpp"

namespace legalqa::dense {
namespace {

constexpr char kMagic[8] = {'L', 'Q', 'E', 'M', 'B', '0', '0', '1'};

double dot(std::span<const float> u, std::span<const float> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += static_cast<double>(u[i]) * v[i];
    return acc;
}

double norm(std::span<const float> v) {
    return std::sqrt(dot(v, v));
}

void check_finite(std::span<const float> v) {
    for (const float x : v) {
        if (!std::isfinite(x)) throw Error("dense: non-finite vector entry");
    }
}

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

std::vector<ScoredDoc> score_all(std::span<const float> query, const EmbeddingStore& store) {
    if (query.size() != store.dim())
        throw Error("dense: query dim " + std::to_string(query.size()) + " != store dim " +
                    std::to_string(store.dim()));
    const auto n = store.size();
    std::vector<ScoredDoc> scored(n);
    const auto kind = store.similarity_kind();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        scored[idx] = {store.ids()[idx], similarity(query, store.row(idx), kind)};
    }
    return scored;
}

std::vector<ScoredDoc> score_all_serial(std::span<const float> query,
                                        const EmbeddingStore& store) {
    if (query.size() != store.dim()) throw Error("dense: query/store dim mismatch");
    std::vector<ScoredDoc> scored(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        scored[i] = {store.ids()[i], similarity(query, store.row(i), store.similarity_kind())};
    }
    return scored;
}

}  // namespace

std::vector<float> pool(const std::vector<std::vector<float>>& token_vectors, Pooling kind) {
    if (token_vectors.empty()) throw Error("pool: no token vectors");
    const auto d = token_vectors.front().size();
    for (const auto& row : token_vectors) {
        if (row.size() != d) throw Error("pool: ragged rows");
    }
    std::vector<float> out(d);
    if (kind == Pooling::Mean) {
        std::vector<double> acc(d, 0.0);
        for (const auto& row : token_vectors) {
            for (std::size_t j = 0; j < d; ++j) acc[j] += row[j];
        }
        for (std::size_t j = 0; j < d; ++j)
            out[j] = static_cast<float>(acc[j] / static_cast<double>(token_vectors.size()));
    } else {
        out = token_vectors.front();
        for (const auto& row : token_vectors) {
            for (std::size_t j = 0; j < d; ++j) out[j] = std::max(out[j], row[j]);
        }
    }
    return out;
}

double similarity(std::span<const float> u, std::span<const float> v, Similarity kind) {
    if (u.size() != v.size()) throw Error("similarity: dimension mismatch");
    const double d = dot(u, v);
    if (kind == Similarity::Dot) return d;
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu == 0.0 || nv == 0.0) throw Error("similarity: zero-norm vector under cosine");
    return d / (nu * nv);
}

EmbeddingStore::EmbeddingStore(std::size_t dim, Similarity sim) : dim_(dim), similarity_(sim) {
    if (dim == 0) throw Error("EmbeddingStore: dim must be positive");
}

void EmbeddingStore::insert(std::int64_t id, std::span<const float> vector) {
    if (vector.size() != dim_) throw Error("EmbeddingStore: vector dim mismatch");
    check_finite(vector);
    if (similarity_ == Similarity::Cosine && norm(vector) == 0.0)
        throw Error("EmbeddingStore: zero vector rejected under cosine");
    if (contains(id)) throw Error("EmbeddingStore: duplicate id " + std::to_string(id));
    index_.emplace(id, ids_.size());
    ids_.push_back(id);
    data_.insert(data_.end(), vector.begin(), vector.end());
}

std::span<const float> EmbeddingStore::row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
}

std::span<const float> EmbeddingStore::vector_for(std::int64_t id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw Error("EmbeddingStore: unknown id " + std::to_string(id));
    return row(it->second);
}

bool EmbeddingStore::contains(std::int64_t id) const {
    return index_.count(id) != 0;
}

// Byte layout: magic "LQEMB001", u8 similarity, u32 dim, u64 count,
// count * i64 ids, count * dim * f32 row-major. Little-endian.
void EmbeddingStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("EmbeddingStore: cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, static_cast<std::uint8_t>(similarity_ == Similarity::Cosine ? 1 : 0));
    write_raw(out, static_cast<std::uint32_t>(dim_));
    write_raw(out, static_cast<std::uint64_t>(ids_.size()));
    for (const auto id : ids_) write_raw(out, static_cast<std::int64_t>(id));
    out.write(reinterpret_cast<const char*>(data_.data()),
              static_cast<std::streamsize>(data_.size() * sizeof(float)));
    if (!out) throw OutputError("EmbeddingStore: write failed for " + path);
}

EmbeddingStore EmbeddingStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("EmbeddingStore: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw SchemaError("EmbeddingStore: bad magic in " + path);
    const auto sim = read_raw<std::uint8_t>(in) == 1 ? Similarity::Cosine : Similarity::Dot;
    const auto dim = read_raw<std::uint32_t>(in);
    const auto count = read_raw<std::uint64_t>(in);
    EmbeddingStore store(dim, sim);
    store.ids_.resize(count);
    for (auto& id : store.ids_) id = read_raw<std::int64_t>(in);
    for (std::size_t i = 0; i < store.ids_.size(); ++i) store.index_.emplace(store.ids_[i], i);
    store.data_.resize(count * dim);
    in.read(reinterpret_cast<char*>(store.data_.data()),
            static_cast<std::streamsize>(store.data_.size() * sizeof(float)));
    if (!in) throw SchemaError("EmbeddingStore: truncated file " + path);
    return store;
}

RankedList dense_search(std::span<const float> query, const EmbeddingStore& store, std::size_t k) {
    auto scored = score_all(query, store);
    sort_and_truncate(scored, k);
    return {0, std::move(scored)};
}

RankedList dense_search_serial(std::span<const float> query, const EmbeddingStore& store,
                               std::size_t k) {
    auto scored = score_all_serial(query, store);
    sort_and_truncate(scored, k);
    return {0, std::move(scored)};
}

}  // namespace legalqa::dense
