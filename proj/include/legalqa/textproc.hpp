#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace legalqa::textproc {

// Byte span [begin, end) of a token in the source string.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct TokenStream {
    std::vector<std::string> tokens;
    std::vector<TokenSpan> source_offsets;

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }
};

/// Lowercase, strip combining diacritics (Latin-1 supplement and
/// Latin Extended-A), collapse whitespace runs to single spaces, trim.
std::string normalize(std::string_view text);

/// Split into alphanumeric tokens. Tokens are normalized; offsets point
/// into the original (unnormalized) byte string. Apostrophes split
/// clitics: "l'état" yields ["l", "etat"].
TokenStream tokenize(std::string_view text);

/// Light French suffix stripper: plural/feminine endings and a short
/// ordered list of derivational suffixes, iterated to a fixpoint so the
/// result is idempotent. Expects a normalized token.
std::string stem(std::string_view token);

/// tokenize + stem in one pass; convenience for BM25 and METEOR.
std::vector<std::string> stemmed_tokens(std::string_view text);

}  // namespace legalqa::textproc
