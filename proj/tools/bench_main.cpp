// Compares the OpenMP dense scan against the serial reference and checks
// they agree, on a synthetic store. Usage: legalqa_bench [n] [dim] [queries]

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "legalqa/dense.hpp"
#include "legalqa/embedprov.hpp"

int main(int argc, char** argv) {
    using namespace legalqa;
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
    const std::size_t dim = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 256;
    const std::size_t queries = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 50;

    dense::EmbeddingStore store(dim, dense::Similarity::Cosine);
    for (std::size_t i = 0; i < n; ++i) {
        store.insert(static_cast<std::int64_t>(i),
                     embedprov::pseudo_embedding("doc-" + std::to_string(i), dim, 7));
    }
    std::vector<std::vector<float>> qs;
    for (std::size_t i = 0; i < queries; ++i) {
        qs.push_back(embedprov::pseudo_embedding("query-" + std::to_string(i), dim, 11));
    }

    using clock = std::chrono::steady_clock;
    const auto k = std::size_t{10};

    auto t0 = clock::now();
    std::vector<RankedList> serial;
    for (const auto& q : qs) serial.push_back(dense::dense_search_serial(q, store, k));
    auto t1 = clock::now();
    std::vector<RankedList> parallel;
    for (const auto& q : qs) parallel.push_back(dense::dense_search(q, store, k));
    auto t2 = clock::now();

    for (std::size_t i = 0; i < queries; ++i) {
        if (serial[i].entries.size() != parallel[i].entries.size()) {
            std::cerr << "MISMATCH at query " << i << "\n";
            return 1;
        }
        for (std::size_t j = 0; j < serial[i].entries.size(); ++j) {
            if (serial[i].entries[j].doc_id != parallel[i].entries[j].doc_id) {
                std::cerr << "MISMATCH at query " << i << " rank " << j << "\n";
                return 1;
            }
        }
    }

    const auto ms = [](auto a, auto b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };
    std::cout << "store: " << n << " x " << dim << ", " << queries << " queries, k=" << k << "\n"
              << "serial:   " << ms(t0, t1) << " ms\n"
              << "parallel: " << ms(t1, t2) << " ms\n"
              << "results identical\n";
    return 0;
}
