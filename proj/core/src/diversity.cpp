#include "spearlab/diversity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "spearlab/errors.hpp"
#include "spearlab/text.hpp"

namespace spearlab::diversity {

namespace {

struct Match {
  size_t a = 0, b = 0, size = 0;
};

// SequenceMatcher-style longest matching block in a[alo,ahi) x b[blo,bhi):
// among maximal blocks, the one starting earliest in a, then earliest in b.
Match longest_match(std::string_view a, std::string_view b,
                    const std::vector<std::vector<size_t>>& b2j,
                    size_t alo, size_t ahi, size_t blo, size_t bhi) {
  Match best{alo, blo, 0};
  std::unordered_map<size_t, size_t> j2len;
  for (size_t i = alo; i < ahi; ++i) {
    std::unordered_map<size_t, size_t> newj2len;
    for (size_t j : b2j[static_cast<unsigned char>(a[i])]) {
      if (j < blo) continue;
      if (j >= bhi) break;
      size_t k = 1;
      if (j > 0) {
        auto it = j2len.find(j - 1);
        if (it != j2len.end()) k = it->second + 1;
      }
      newj2len[j] = k;
      if (k > best.size) best = {i - k + 1, j - k + 1, k};
    }
    j2len.swap(newj2len);
  }
  return best;
}

size_t matched_total(std::string_view a, std::string_view b) {
  std::vector<std::vector<size_t>> b2j(256);
  for (size_t j = 0; j < b.size(); ++j) {
    b2j[static_cast<unsigned char>(b[j])].push_back(j);
  }
  size_t total = 0;
  std::vector<std::array<size_t, 4>> queue{{0, a.size(), 0, b.size()}};
  while (!queue.empty()) {
    auto [alo, ahi, blo, bhi] = queue.back();
    queue.pop_back();
    Match m = longest_match(a, b, b2j, alo, ahi, blo, bhi);
    if (m.size == 0) continue;
    total += m.size;
    if (alo < m.a && blo < m.b) queue.push_back({alo, m.a, blo, m.b});
    if (m.a + m.size < ahi && m.b + m.size < bhi) {
      queue.push_back({m.a + m.size, ahi, m.b + m.size, bhi});
    }
  }
  return total;
}

}  // namespace

double seq_similarity(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t m = matched_total(a, b);
  return 2.0 * static_cast<double>(m) / static_cast<double>(a.size() + b.size());
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t inter = 0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const auto& x : small) inter += large.count(x);
  size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double ttr(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw EmptyInputError("ttr: empty token sequence");
  std::unordered_set<std::string> types(tokens.begin(), tokens.end());
  return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
}

namespace {

template <typename It>
double mtld_pass(It begin, It end, double threshold) {
  size_t len = static_cast<size_t>(std::distance(begin, end));
  double factors = 0.0;
  std::unordered_set<std::string> types;
  size_t tok = 0;
  double running = 1.0;
  for (It it = begin; it != end; ++it) {
    ++tok;
    types.insert(*it);
    running = static_cast<double>(types.size()) / static_cast<double>(tok);
    if (running < threshold) {
      factors += 1.0;
      types.clear();
      tok = 0;
      running = 1.0;
    }
  }
  if (tok > 0) factors += (1.0 - running) / (1.0 - threshold);
  if (factors == 0.0) return static_cast<double>(len);
  return static_cast<double>(len) / factors;
}

}  // namespace

double mtld(const std::vector<std::string>& tokens, double threshold) {
  if (tokens.empty()) throw EmptyInputError("mtld: empty token sequence");
  double fwd = mtld_pass(tokens.begin(), tokens.end(), threshold);
  double rev = mtld_pass(tokens.rbegin(), tokens.rend(), threshold);
  return (fwd + rev) / 2.0;
}

double distinct_n(const std::vector<std::vector<std::string>>& docs, size_t n,
                  DistinctLevel level) {
  if (n == 0) throw EmptyInputError("distinct_n: n must be >= 1");
  if (level == DistinctLevel::corpus) {
    std::unordered_set<std::string> unique;
    size_t total = 0;
    for (const auto& doc : docs) {
      for (auto& g : text::ngrams(doc, n)) {
        unique.insert(std::move(g));
        ++total;
      }
    }
    return total == 0 ? 0.0 : static_cast<double>(unique.size()) / static_cast<double>(total);
  }
  double sum = 0.0;
  size_t counted = 0;
  for (const auto& doc : docs) {
    auto grams = text::ngrams(doc, n);
    if (grams.empty()) continue;
    std::unordered_set<std::string> unique(grams.begin(), grams.end());
    sum += static_cast<double>(unique.size()) / static_cast<double>(grams.size());
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

// ---------------------------------------------------------------------------

std::string_view pos_tag_name(PosTag t) {
  switch (t) {
    case PosTag::NOUN: return "NOUN";
    case PosTag::VERB: return "VERB";
    case PosTag::ADJ: return "ADJ";
    case PosTag::ADV: return "ADV";
    case PosTag::PRON: return "PRON";
    case PosTag::DET: return "DET";
    case PosTag::ADP: return "ADP";
    case PosTag::NUM: return "NUM";
    case PosTag::PUNCT: return "PUNCT";
    case PosTag::OTHER: return "OTHER";
  }
  return "OTHER";
}

std::vector<std::string> pos_tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  };
  for (size_t i = 0; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c) != 0) {
      flush();
    } else if (std::isalnum(c) != 0 || c >= 0x80 ||
               (c == '\'' && !cur.empty())) {  // keep internal apostrophes
      cur.push_back(static_cast<char>(c));
    } else {
      flush();
      tokens.push_back(std::string(1, static_cast<char>(c)));
    }
  }
  flush();
  return tokens;
}

namespace {

const std::unordered_map<std::string, PosTag>& pos_lexicon() {
  static const std::unordered_map<std::string, PosTag> lex = {
      {"i", PosTag::PRON},     {"you", PosTag::PRON},   {"he", PosTag::PRON},
      {"she", PosTag::PRON},   {"it", PosTag::PRON},    {"we", PosTag::PRON},
      {"they", PosTag::PRON},  {"me", PosTag::PRON},    {"him", PosTag::PRON},
      {"her", PosTag::PRON},   {"us", PosTag::PRON},    {"them", PosTag::PRON},
      {"my", PosTag::PRON},    {"your", PosTag::PRON},  {"our", PosTag::PRON},
      {"their", PosTag::PRON}, {"its", PosTag::PRON},   {"who", PosTag::PRON},
      {"the", PosTag::DET},    {"a", PosTag::DET},      {"an", PosTag::DET},
      {"this", PosTag::DET},   {"that", PosTag::DET},   {"these", PosTag::DET},
      {"those", PosTag::DET},  {"each", PosTag::DET},   {"every", PosTag::DET},
      {"some", PosTag::DET},   {"any", PosTag::DET},    {"no", PosTag::DET},
      {"of", PosTag::ADP},     {"in", PosTag::ADP},     {"on", PosTag::ADP},
      {"at", PosTag::ADP},     {"to", PosTag::ADP},     {"from", PosTag::ADP},
      {"with", PosTag::ADP},   {"by", PosTag::ADP},     {"for", PosTag::ADP},
      {"about", PosTag::ADP},  {"into", PosTag::ADP},   {"over", PosTag::ADP},
      {"under", PosTag::ADP},  {"after", PosTag::ADP},  {"before", PosTag::ADP},
      {"is", PosTag::VERB},    {"are", PosTag::VERB},   {"was", PosTag::VERB},
      {"were", PosTag::VERB},  {"be", PosTag::VERB},    {"been", PosTag::VERB},
      {"am", PosTag::VERB},    {"do", PosTag::VERB},    {"does", PosTag::VERB},
      {"did", PosTag::VERB},   {"have", PosTag::VERB},  {"has", PosTag::VERB},
      {"had", PosTag::VERB},   {"will", PosTag::VERB},  {"would", PosTag::VERB},
      {"can", PosTag::VERB},   {"could", PosTag::VERB}, {"should", PosTag::VERB},
      {"may", PosTag::VERB},   {"must", PosTag::VERB},  {"write", PosTag::VERB},
      {"make", PosTag::VERB},  {"send", PosTag::VERB},  {"get", PosTag::VERB},
      {"go", PosTag::VERB},    {"see", PosTag::VERB},   {"take", PosTag::VERB},
      {"not", PosTag::ADV},    {"very", PosTag::ADV},   {"also", PosTag::ADV},
      {"now", PosTag::ADV},    {"here", PosTag::ADV},   {"there", PosTag::ADV},
      {"soon", PosTag::ADV},   {"never", PosTag::ADV},  {"always", PosTag::ADV},
      {"new", PosTag::ADJ},    {"good", PosTag::ADJ},   {"great", PosTag::ADJ},
      {"free", PosTag::ADJ},   {"big", PosTag::ADJ},    {"small", PosTag::ADJ},
      {"last", PosTag::ADJ},   {"next", PosTag::ADJ},   {"urgent", PosTag::ADJ},
  };
  return lex;
}

bool has_suffix(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

PosTag tag_token(const std::string& raw) {
  if (raw.empty()) return PosTag::OTHER;
  bool all_digit = true, any_alpha = false, any_alnum = false;
  for (unsigned char c : raw) {
    if (std::isdigit(c) == 0) all_digit = false;
    if (std::isalpha(c) != 0) any_alpha = true;
    if (std::isalnum(c) != 0) any_alnum = true;
  }
  if (all_digit) return PosTag::NUM;
  if (!any_alnum) return PosTag::PUNCT;
  std::string w = text::casefold(raw);
  auto it = pos_lexicon().find(w);
  if (it != pos_lexicon().end()) return it->second;
  if (has_suffix(w, "ly")) return PosTag::ADV;
  if (has_suffix(w, "ing") || has_suffix(w, "ed") || has_suffix(w, "ize") ||
      has_suffix(w, "ise")) {
    return PosTag::VERB;
  }
  if (has_suffix(w, "ous") || has_suffix(w, "ful") || has_suffix(w, "ive") ||
      has_suffix(w, "able") || has_suffix(w, "ical") || has_suffix(w, "less")) {
    return PosTag::ADJ;
  }
  if (has_suffix(w, "tion") || has_suffix(w, "ness") || has_suffix(w, "ment") ||
      has_suffix(w, "ity") || has_suffix(w, "ship") || has_suffix(w, "ism")) {
    return PosTag::NOUN;
  }
  if (any_alpha) return PosTag::NOUN;
  return PosTag::OTHER;
}

}  // namespace

std::vector<PosTag> CoarseTagger::tag(const std::vector<std::string>& tokens) const {
  std::vector<PosTag> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) tags.push_back(tag_token(t));
  return tags;
}

namespace {

struct GroupPosSets {
  std::set<std::string> patterns;  // full-sentence tag sequences
  std::set<std::string> trigrams;  // pooled POS 3-grams
};

std::vector<std::string> doc_sentence_texts(const corpus::Document& doc) {
  std::vector<std::string> out;
  if (doc.sentences.empty()) {
    out.push_back(doc.body);
  } else {
    for (const auto& s : doc.sentences) out.push_back(s.text);
  }
  return out;
}

std::set<std::string> doc_pos_trigrams(const corpus::Document& doc, const PosTagger& tagger,
                                       std::set<std::string>* patterns) {
  std::set<std::string> trigrams;
  for (const auto& sentence : doc_sentence_texts(doc)) {
    auto tags = tagger.tag(pos_tokenize(sentence));
    std::vector<std::string> names;
    names.reserve(tags.size());
    for (PosTag t : tags) names.emplace_back(pos_tag_name(t));
    if (patterns && !names.empty()) {
      std::string pattern = names[0];
      for (size_t i = 1; i < names.size(); ++i) {
        pattern += ' ';
        pattern += names[i];
      }
      patterns->insert(std::move(pattern));
    }
    for (auto& g : text::ngrams(names, 3)) trigrams.insert(std::move(g));
  }
  return trigrams;
}

GroupPosSets group_pos_sets(const std::vector<corpus::Document>& docs,
                            const PosTagger& tagger) {
  GroupPosSets sets;
  for (const auto& doc : docs) {
    auto tri = doc_pos_trigrams(doc, tagger, &sets.patterns);
    sets.trigrams.insert(tri.begin(), tri.end());
  }
  return sets;
}

}  // namespace

PosPatternStats pos_pattern_stats(const std::vector<corpus::Document>& group_a,
                                  const std::vector<corpus::Document>& group_b,
                                  const PosTagger& tagger) {
  GroupPosSets a = group_pos_sets(group_a, tagger);
  GroupPosSets b = group_pos_sets(group_b, tagger);
  PosPatternStats stats;
  stats.unique_patterns_a = a.patterns.size();
  stats.unique_patterns_b = b.patterns.size();
  stats.pos3_jaccard = jaccard(a.trigrams, b.trigrams);
  return stats;
}

// ---------------------------------------------------------------------------

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

DiversityReport build_report(const std::vector<corpus::Document>& variations,
                             const std::vector<corpus::Document>& seeds,
                             const PosTagger& tagger) {
  DiversityReport report;
  if (variations.empty()) return report;

  std::map<std::string, size_t> seed_index;
  for (size_t i = 0; i < seeds.size(); ++i) seed_index[seeds[i].id] = i;
  auto seed_for = [&](const corpus::Document& var, size_t i) -> const corpus::Document* {
    if (seeds.empty()) return nullptr;
    auto it = var.meta.find("seed_id");
    if (it != var.meta.end()) {
      auto found = seed_index.find(it->second);
      if (found != seed_index.end()) return &seeds[found->second];
    }
    return &seeds[i % seeds.size()];
  };

  std::vector<std::vector<std::string>> var_tokens;
  std::vector<std::set<std::string>> var_token_sets;
  var_tokens.reserve(variations.size());
  for (const auto& v : variations) {
    var_tokens.push_back(text::tokenize(v.body));
    var_token_sets.emplace_back(var_tokens.back().begin(), var_tokens.back().end());
  }

  std::vector<double> sims, j_orig, ttrs, mtlds;
  for (size_t i = 0; i < variations.size(); ++i) {
    const corpus::Document* seed = seed_for(variations[i], i);
    if (seed) {
      sims.push_back(seq_similarity(variations[i].body, seed->body));
      auto toks = text::tokenize(seed->body);
      std::set<std::string> seed_set(toks.begin(), toks.end());
      j_orig.push_back(jaccard(var_token_sets[i], seed_set));
    }
    if (!var_tokens[i].empty()) {
      ttrs.push_back(ttr(var_tokens[i]));
      mtlds.push_back(mtld(var_tokens[i]));
    }
  }
  report.avg_seq_sim = mean_of(sims);
  report.std_seq_sim = sample_std(sims, report.avg_seq_sim);
  report.jaccard_var_orig = mean_of(j_orig);
  report.avg_ttr = mean_of(ttrs);
  report.mtld = mean_of(mtlds);

  double pair_sum = 0.0;
  size_t pair_count = 0;
  for (size_t i = 0; i < var_token_sets.size(); ++i) {
    for (size_t j = i + 1; j < var_token_sets.size(); ++j) {
      pair_sum += jaccard(var_token_sets[i], var_token_sets[j]);
      ++pair_count;
    }
  }
  report.jaccard_var_var = pair_count ? pair_sum / static_cast<double>(pair_count) : 0.0;

  for (size_t n = 1; n <= 3; ++n) {
    report.distinct_corpus[n] = distinct_n(var_tokens, n, DistinctLevel::corpus);
    report.distinct_per_doc[n] = distinct_n(var_tokens, n, DistinctLevel::per_doc);
  }

  PosPatternStats pos = pos_pattern_stats(variations, seeds, tagger);
  report.unique_pos_patterns = pos.unique_patterns_a;
  report.pos_jaccard_var_orig = pos.pos3_jaccard;

  std::vector<std::set<std::string>> var_trigrams;
  var_trigrams.reserve(variations.size());
  for (const auto& v : variations) {
    var_trigrams.push_back(doc_pos_trigrams(v, tagger, nullptr));
  }
  double pos_pair_sum = 0.0;
  size_t pos_pairs = 0;
  for (size_t i = 0; i < var_trigrams.size(); ++i) {
    for (size_t j = i + 1; j < var_trigrams.size(); ++j) {
      pos_pair_sum += jaccard(var_trigrams[i], var_trigrams[j]);
      ++pos_pairs;
    }
  }
  report.pos_jaccard_var_var = pos_pairs ? pos_pair_sum / static_cast<double>(pos_pairs) : 0.0;
  return report;
}

std::string report_to_json(const DiversityReport& report) {
  nlohmann::json j;
  j["avg_seq_sim"] = report.avg_seq_sim;
  j["std_seq_sim"] = report.std_seq_sim;
  j["jaccard_var_var"] = report.jaccard_var_var;
  j["jaccard_var_orig"] = report.jaccard_var_orig;
  j["unique_pos_patterns"] = report.unique_pos_patterns;
  j["avg_ttr"] = report.avg_ttr;
  j["mtld"] = report.mtld;
  nlohmann::json corpus_d = nlohmann::json::object();
  nlohmann::json per_doc_d = nlohmann::json::object();
  for (const auto& [n, v] : report.distinct_corpus) corpus_d[std::to_string(n)] = v;
  for (const auto& [n, v] : report.distinct_per_doc) per_doc_d[std::to_string(n)] = v;
  j["distinct_n"] = {{"corpus", corpus_d}, {"per_doc", per_doc_d}};
  j["pos_jaccard_var_var"] = report.pos_jaccard_var_var;
  j["pos_jaccard_var_orig"] = report.pos_jaccard_var_orig;
  // Slot for externally supplied sentence-embedding coordinates; the
  // toolkit itself ships no embedding model.
  j["embedding_coords"] = nullptr;
  return j.dump(2);
}

}  // namespace spearlab::diversity
