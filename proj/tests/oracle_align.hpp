// Independent exhaustive alignment oracle used by the test suites. It
// recomputes match stages straight from the token lists and enumerates
// one-to-one matchings recursively, keeping the lexicographically best
// (exact, stem, synonym, -chunks) tuple. Shares no code with the
// implementation under test.
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "legalqa/eval.hpp"
#include "legalqa/textproc.hpp"

namespace oracle {

struct AlignResult {
    long exact = 0;
    long stem = 0;
    long synonym = 0;
    std::size_t matches = 0;
    std::size_t chunks = 0;
};

inline AlignResult exhaustive_align(const std::vector<std::string>& cand,
                                    const std::vector<std::string>& ref,
                                    const legalqa::eval::AlignConfig& cfg = {}) {
    using legalqa::textproc::stem;

    // stage[i][j]: 0 none, 1 exact, 2 stem, 3 synonym.
    std::vector<std::vector<int>> stage(cand.size(), std::vector<int>(ref.size(), 0));
    for (std::size_t i = 0; i < cand.size(); ++i) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (cand[i] == ref[j]) {
                stage[i][j] = 1;
            } else if (cfg.use_stem && stem(cand[i]) == stem(ref[j])) {
                stage[i][j] = 2;
            } else {
                for (const auto& [x, y] : cfg.synonym_pairs) {
                    if ((cand[i] == x && ref[j] == y) || (cand[i] == y && ref[j] == x)) {
                        stage[i][j] = 3;
                        break;
                    }
                }
            }
        }
    }

    std::array<long, 4> best{-1, -1, -1, 0};
    std::vector<char> used(ref.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> picked;  // (cand, ref), cand ascending
    std::vector<int> picked_stage;
    AlignResult best_result;

    auto evaluate = [&] {
        std::array<long, 4> key{0, 0, 0, 0};
        for (const auto s : picked_stage) {
            if (s == 1) ++key[0];
            else if (s == 2) ++key[1];
            else ++key[2];
        }
        std::size_t chunks = 0;
        for (std::size_t i = 0; i < picked.size(); ++i) {
            const bool continues = i > 0 && picked[i].first == picked[i - 1].first + 1 &&
                                   picked[i].second == picked[i - 1].second + 1;
            if (!continues) ++chunks;
        }
        key[3] = -static_cast<long>(chunks);
        if (key > best) {
            best = key;
            best_result = {key[0], key[1], key[2], picked.size(), chunks};
        }
    };

    // Recursive skip-or-match over candidate indices, pruned by the bound
    // that unmatched candidates cannot raise the exact count above best.
    auto recurse = [&](auto&& self, std::size_t i) -> void {
        if (i == cand.size()) {
            evaluate();
            return;
        }
        long exact_now = 0;
        for (const auto s : picked_stage) {
            if (s == 1) ++exact_now;
        }
        if (exact_now + static_cast<long>(cand.size() - i) < best[0]) return;
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (stage[i][j] == 0 || used[j]) continue;
            used[j] = 1;
            picked.emplace_back(i, j);
            picked_stage.push_back(stage[i][j]);
            self(self, i + 1);
            picked_stage.pop_back();
            picked.pop_back();
            used[j] = 0;
        }
        self(self, i + 1);
    };
    recurse(recurse, 0);
    return best_result;
}

}  // namespace oracle
