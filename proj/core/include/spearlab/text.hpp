#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spearlab::text {

/// ASCII-only lowercasing; non-ASCII bytes pass through untouched.
std::string casefold(std::string_view s);

// Corpus-wide tokenizer: casefold, split on whitespace, strip leading and
// trailing ASCII punctuation, drop tokens that become empty. "Coffee" and
// "coffee" are one token; "#hiking" tokenizes as "hiking".
std::vector<std::string> tokenize(std::string_view s);

/// Collapse internal whitespace runs to single spaces and trim.
std::string collapse_ws(std::string_view s);

/// Word n-grams (tokens joined with a single space). n >= 1.
std::vector<std::string> ngrams(const std::vector<std::string>& tokens, size_t n);

}  // namespace spearlab::text
