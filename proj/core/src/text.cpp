#include "spearlab/text.hpp"

#include <cctype>

namespace spearlab::text {

std::string casefold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  return out;
}

namespace {

bool is_ascii_punct(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string folded = casefold(s);
  size_t i = 0;
  const size_t n = folded.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(folded[i])) != 0) ++i;
    size_t start = i;
    while (i < n && std::isspace(static_cast<unsigned char>(folded[i])) == 0) ++i;
    size_t b = start, e = i;
    while (b < e && is_ascii_punct(folded[b])) ++b;
    while (e > b && is_ascii_punct(folded[e - 1])) --e;
    if (e > b) tokens.emplace_back(folded.substr(b, e - b));
  }
  return tokens;
}

std::string collapse_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = true;  // leading whitespace dropped
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      if (!in_ws) out.push_back(' ');
      in_ws = true;
    } else {
      out.push_back(c);
      in_ws = false;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, size_t n) {
  std::vector<std::string> out;
  if (n == 0 || tokens.size() < n) return out;
  out.reserve(tokens.size() - n + 1);
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (size_t j = 1; j < n; ++j) {
      g += ' ';
      g += tokens[i + j];
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace spearlab::text
