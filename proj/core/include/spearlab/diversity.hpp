#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spearlab/corpus.hpp"

namespace spearlab::diversity {

// Ratcliff/Obershelp similarity 2M/(|a|+|b|): M is the total length of the
// recursive longest-common-contiguous-block decomposition (SequenceMatcher
// semantics, no junk heuristics). 1.0 for two empty strings.
double seq_similarity(std::string_view a, std::string_view b);

/// |a n b| / |a u b|; 1.0 for two empty sets.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Type-token ratio. Throws EmptyInputError on an empty sequence.
double ttr(const std::vector<std::string>& tokens);

// Bidirectional MTLD at the standard 0.72 factor threshold: a factor
// completes when the running TTR drops below the threshold, the trailing
// partial factor contributes (1-TTR_end)/(1-threshold), and a pass with no
// factor mass returns the sequence length. Forward and reverse passes are
// averaged. Throws EmptyInputError on an empty sequence.
double mtld(const std::vector<std::string>& tokens, double threshold = 0.72);

enum class DistinctLevel { corpus, per_doc };

/// Unique n-grams / total n-grams. Per-doc level is the mean over documents
/// that have at least one n-gram.
double distinct_n(const std::vector<std::vector<std::string>>& docs, size_t n,
                  DistinctLevel level);

// ---------------------------------------------------------------------------
// POS machinery (pluggable; the default is a deterministic coarse tagger)

enum class PosTag { NOUN, VERB, ADJ, ADV, PRON, DET, ADP, NUM, PUNCT, OTHER };

std::string_view pos_tag_name(PosTag t);

/// Whitespace split with punctuation runs kept as their own tokens.
std::vector<std::string> pos_tokenize(std::string_view s);

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::vector<PosTag> tag(const std::vector<std::string>& tokens) const = 0;
};

/// Lexicon + suffix heuristics over the coarse 10-tag set.
class CoarseTagger : public PosTagger {
 public:
  std::vector<PosTag> tag(const std::vector<std::string>& tokens) const override;
};

struct PosPatternStats {
  size_t unique_patterns_a = 0;  // distinct full-sentence tag sequences
  size_t unique_patterns_b = 0;
  double pos3_jaccard = 0.0;  // Jaccard between the groups' pooled POS 3-gram sets
};

PosPatternStats pos_pattern_stats(const std::vector<corpus::Document>& group_a,
                                  const std::vector<corpus::Document>& group_b,
                                  const PosTagger& tagger);

// ---------------------------------------------------------------------------

struct DiversityReport {
  double avg_seq_sim = 0.0;   // variation vs its seed
  double std_seq_sim = 0.0;
  double jaccard_var_var = 0.0;    // mean pairwise within variations
  double jaccard_var_orig = 0.0;   // variation vs its seed
  size_t unique_pos_patterns = 0;  // within variations
  double avg_ttr = 0.0;
  double mtld = 0.0;  // mean document MTLD over variations
  std::map<size_t, double> distinct_corpus;   // n -> ratio, over variations
  std::map<size_t, double> distinct_per_doc;  // n -> mean per-document ratio
  double pos_jaccard_var_var = 0.0;   // mean pairwise per-document POS-3-gram Jaccard
  double pos_jaccard_var_orig = 0.0;  // pooled between-group POS-3-gram Jaccard
};

// Pairs each variation with its seed via meta seed_id (falling back to index
// mod |seeds|) and computes the full metric battery. distinct-n is reported
// for n = 1..3.
DiversityReport build_report(const std::vector<corpus::Document>& variations,
                             const std::vector<corpus::Document>& seeds,
                             const PosTagger& tagger);

/// JSON object mirroring DiversityReport field names exactly.
std::string report_to_json(const DiversityReport& report);

}  // namespace spearlab::diversity
