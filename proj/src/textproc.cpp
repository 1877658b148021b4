#include "legalqa/textproc.hpp"

#include <array>
#include <cctype>

namespace legalqa::textproc {
namespace {

struct Decoded {
    char32_t cp;
    std::size_t len;  // bytes consumed; 1 on invalid input (byte passed through)
};

Decoded decode_utf8(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1};
    auto cont = [&](std::size_t k) {
        return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        char32_t cp = (b0 & 0x1Fu) << 6 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
        return {cp, 2};
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        char32_t cp = (b0 & 0x0Fu) << 12 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6 |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
        return {cp, 3};
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        char32_t cp = (b0 & 0x07u) << 18 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12 |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6 |
                      (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
        return {cp, 4};
    }
    return {b0, 1};
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Fold one codepoint to its lowercase, unaccented form. Returns an empty
// string for combining marks (stripped), the folded string otherwise.
// Covers ASCII, Latin-1 supplement and Latin Extended-A, which is all
// that occurs in French legal text.
std::string fold_codepoint(char32_t cp) {
    if (cp < 0x80) {
        return {static_cast<char>(std::tolower(static_cast<int>(cp)))};
    }
    if (cp >= 0x0300 && cp <= 0x036F) return {};  // combining diacritics
    auto in = [cp](char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; };
    if (in(0xC0, 0xC5) || in(0xE0, 0xE5)) return "a";
    if (cp == 0xC7 || cp == 0xE7) return "c";
    if (in(0xC8, 0xCB) || in(0xE8, 0xEB)) return "e";
    if (in(0xCC, 0xCF) || in(0xEC, 0xEF)) return "i";
    if (cp == 0xD1 || cp == 0xF1) return "n";
    if (in(0xD2, 0xD6) || in(0xF2, 0xF6) || cp == 0xD8 || cp == 0xF8) return "o";
    if (in(0xD9, 0xDC) || in(0xF9, 0xFC)) return "u";
    if (cp == 0xDD || cp == 0xFD || cp == 0xFF) return "y";
    if (cp == 0xC6 || cp == 0xE6) return "ae";
    if (cp == 0x152 || cp == 0x153) return "oe";
    if (cp == 0xDF) return "ss";
    if (cp >= 0x100 && cp <= 0x17F) {
        // Latin Extended-A: letter with diacritic; base letter follows a
        // regular pairing (uppercase even, lowercase odd) per block.
        static constexpr std::array<char, 8> bases = {'a', 'c', 'd', 'e', 'g', 'h', 'i', 'j'};
        if (cp <= 0x13F) {
            static constexpr char32_t starts[] = {0x100, 0x106, 0x10E, 0x112, 0x11C, 0x124,
                                                  0x128, 0x134};
            static constexpr char32_t ends[] = {0x105, 0x10D, 0x111, 0x11B, 0x123, 0x127,
                                                0x131, 0x135};
            for (std::size_t k = 0; k < bases.size(); ++k) {
                if (cp >= starts[k] && cp <= ends[k]) return {bases[k]};
            }
        }
        if (cp >= 0x139 && cp <= 0x142) return "l";
        if (cp >= 0x143 && cp <= 0x14B) return "n";
        if (cp >= 0x14C && cp <= 0x151) return "o";
        if (cp >= 0x154 && cp <= 0x159) return "r";
        if (cp >= 0x15A && cp <= 0x161) return "s";
        if (cp >= 0x162 && cp <= 0x167) return "t";
        if (cp >= 0x168 && cp <= 0x173) return "u";
        if (cp == 0x174 || cp == 0x175) return "w";
        if (cp >= 0x176 && cp <= 0x178) return "y";
        if (cp >= 0x179 && cp <= 0x17E) return "z";
    }
    // Anything else passes through unchanged.
    std::string out;
    encode_utf8(cp, out);
    return out;
}

bool is_token_char(char32_t cp) {
    if (cp < 0x80) {
        return std::isalnum(static_cast<int>(cp)) != 0;
    }
    // Accented letters fold to ASCII letters; punctuation like '§' folds
    // to itself and stays non-ASCII.
    const std::string folded = fold_codepoint(cp);
    return !folded.empty() && static_cast<unsigned char>(folded[0]) < 0x80 &&
           std::isalnum(static_cast<unsigned char>(folded[0])) != 0;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// One pass of the suffix stripper. Returns true if the token changed.
bool strip_once(std::string& t) {
    // Plural endings.
    if (t.size() > 3 && (t.back() == 's' || t.back() == 'x')) {
        t.pop_back();
        return true;
    }
    // Ordered derivational suffixes, longest first. The remainder must
    // keep at least 3 characters.
    static constexpr std::string_view suffixes[] = {
        "issement", "issant", "atrice", "ateur", "ation", "ition",
        "ement",    "euse",   "ienne", "ette",  "elle",  "eur",
        "ive",      "ite",    "ien",
    };
    for (const auto suf : suffixes) {
        if (ends_with(t, suf) && t.size() - suf.size() >= 3) {
            t.resize(t.size() - suf.size());
            return true;
        }
    }
    // Final mute 'e'.
    if (t.size() > 4 && t.back() == 'e') {
        t.pop_back();
        return true;
    }
    return false;
}

}  // namespace

std::string normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < text.size();) {
        const auto [cp, len] = decode_utf8(text, i);
        i += len;
        if (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == 0x0C || cp == 0x0B ||
            cp == 0xA0) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out += fold_codepoint(cp);
    }
    return out;
}

TokenStream tokenize(std::string_view text) {
    TokenStream ts;
    std::string current;
    std::size_t token_begin = 0;
    auto flush = [&](std::size_t end) {
        if (!current.empty()) {
            ts.tokens.push_back(current);
            ts.source_offsets.push_back({token_begin, end});
            current.clear();
        }
    };
    for (std::size_t i = 0; i < text.size();) {
        const auto [cp, len] = decode_utf8(text, i);
        if (is_token_char(cp)) {
            if (current.empty()) token_begin = i;
            current += fold_codepoint(cp);
        } else {
            flush(i);
        }
        i += len;
    }
    flush(text.size());
    return ts;
}

std::string stem(std::string_view token) {
    std::string t(token);
    // Iterate to a fixpoint; each pass strictly shortens the token so
    // this terminates and the result is idempotent by construction.
    while (strip_once(t)) {
    }
    return t;
}

std::vector<std::string> stemmed_tokens(std::string_view text) {
    auto ts = tokenize(text);
    std::vector<std::string> out;
    out.reserve(ts.tokens.size());
    for (const auto& t : ts.tokens) out.push_back(stem(t));
    return out;
}

}  // namespace legalqa::textproc
