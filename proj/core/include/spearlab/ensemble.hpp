#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spearlab::ensemble {

/// The eight binary evaluation dimensions, in table column order.
inline constexpr std::array<std::string_view, 8> kDimensions = {
    "contextual_relevance", "persuasiveness",        "emotional_manipulation",
    "personalization",      "linguistic_naturalness", "specificity_of_cta",
    "sender_credibility",   "technical_sophistication",
};

constexpr size_t kDimensionCount = kDimensions.size();

int dimension_index(std::string_view name);  // -1 when unknown

/// Per-dimension binary values; nullopt marks N/A (only contextual
/// relevance is expected to be inapplicable, for context-free corpora).
struct ScoreVector {
  std::array<std::optional<int>, kDimensionCount> values{};

  std::optional<int>& operator[](size_t i) { return values[i]; }
  const std::optional<int>& operator[](size_t i) const { return values[i]; }
  size_t trait_count_non_contextual() const;  // dims 1..7 valued 1
};

struct JudgeBallot {
  std::string doc_id;
  std::string judge_id;
  std::optional<int> label;  // single-label ballots (spear / not spear)
  ScoreVector scores;        // dimension ballots
};

struct EnsembleVerdict {
  std::string doc_id;
  // A dimension gets an outcome only when every judge cast 0/1 on it; any
  // N/A ballot makes the dimension N/A for the document.
  std::array<std::optional<int>, kDimensionCount> outcome{};
  std::array<std::pair<int, int>, kDimensionCount> votes{};  // (zeros, ones)
  std::optional<int> label_outcome;
  std::pair<int, int> label_votes{0, 0};
  bool unanimous = true;
};

// Majority vote over one document's ballots. Judge count must be odd and at
// least 3 (EvenJudgeCountError otherwise); with an odd count every present
// dimension has a strict majority.
EnsembleVerdict majority_vote(const std::vector<JudgeBallot>& ballots_for_doc);

/// Groups ballots by doc_id; every document must have exactly one ballot per
/// judge (MissingBallotError otherwise).
std::vector<EnsembleVerdict> vote_all(const std::vector<JudgeBallot>& ballots);

// Cohen's kappa with marginal-product chance agreement; 1.0 for the
// all-identical degenerate case (p_e = 1). Throws LengthMismatchError.
double cohens_kappa(const std::vector<int>& a, const std::vector<int>& b);

/// Mean pairwise Cohen's kappa over >= 3 judges (the implemented reading of
/// a single ensemble agreement figure).
double fleiss_style_pairwise(const std::vector<std::vector<int>>& judges);

struct ValidationResult {
  size_t total = 0;
  size_t correct = 0;
  size_t fp = 0;  // ensemble 1, human 0
  size_t fn = 0;  // ensemble 0, human 1
  double accuracy = 0.0;
};

/// Dimension-level comparison against human consensus; only dimensions
/// present on both sides are compared.
ValidationResult validate_against_humans(const std::vector<EnsembleVerdict>& verdicts,
                                         const std::vector<EnsembleVerdict>& human_consensus);

struct PercentageRow {
  std::string group;
  size_t n_docs = 0;
  std::array<std::optional<double>, kDimensionCount> percent{};  // nullopt = NA
};

/// Percentage of documents meeting each criterion per group; a dimension is
/// NA for a group when no document has it present.
std::vector<PercentageRow> aggregate_percentages(
    const std::vector<EnsembleVerdict>& verdicts,
    const std::map<std::string, std::string>& doc_group);

/// CSV with Table-2 column order; NA cells spelled "NA".
std::string percentages_to_csv(const std::vector<PercentageRow>& rows);

// ---------------------------------------------------------------------------
// Line-delimited JSON ballots: {"doc_id","judge_id","scores":{dim:0|1,...}}
// or {"doc_id","judge_id","label":0|1}; missing/null score keys are N/A.

std::vector<JudgeBallot> read_ballots(const std::filesystem::path& path);
void write_verdicts(const std::filesystem::path& path,
                    const std::vector<EnsembleVerdict>& verdicts);
std::vector<EnsembleVerdict> read_verdicts(const std::filesystem::path& path);

}  // namespace spearlab::ensemble
