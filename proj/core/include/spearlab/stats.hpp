#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spearlab/ensemble.hpp"

namespace spearlab::stats {

// ---------------------------------------------------------------------------
// Special functions (series / continued-fraction implementations; accurate
// to ~1e-10 on tabulated checkpoints, no external stats library).

double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);
/// Survival function of the chi-square distribution with k dof.
double chi_squared_sf(double x, double k);
double regularized_beta(double a, double b, double x);
/// Two-sided p-value for Student's t with (possibly fractional) df.
double student_t_two_sided_p(double t, double df);

// ---------------------------------------------------------------------------

struct Rating {
  std::string email_id;
  bool malicious = false;     // kind: malicious vs benign control
  int suspiciousness = 0;     // 1..5 Likert
  std::array<int, 8> quality{};  // 1..5 each, 0 = not recorded
};

struct ResponseSet {
  std::string participant_id;
  std::string condition;  // e.g. "LLM" or "APWG"
  std::vector<Rating> ratings;
  std::optional<double> knowledge;  // normalized phishing-knowledge score
};

/// Participant-level mean suspiciousness of malicious items minus benign
/// items. Throws EmptyInputError unless both kinds are present.
double detection_gap(const ResponseSet& rs);

struct KruskalResult {
  double h = 0.0;
  double p = 1.0;
};

// Rank-based H with tie correction; p from the chi-square approximation
// with (groups - 1) dof. All-identical values give H = 0, p = 1.
KruskalResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Welch's t with Welch-Satterthwaite df and a two-sided p-value.
WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

/// Complementary CDF over per-document non-contextual trait counts,
/// k = 1..7: fraction of documents with >= k traits.
std::vector<std::pair<int, double>> trait_cdf(const std::vector<ensemble::ScoreVector>& docs);

struct UsageRecord {
  std::string model;
  uint64_t input_tokens = 0;
  uint64_t output_tokens = 0;
  double wall_ms = 0.0;
  bool success = false;
};

struct Pricing {
  double per_million_input = 0.0;
  double per_million_output = 0.0;
};

struct ModelUsageRow {
  std::string model;
  size_t n = 0;
  double avg_input_tokens = 0.0;
  double avg_output_tokens = 0.0;
  double avg_total_tokens = 0.0;
  double avg_wall_ms = 0.0;
  double output_tokens_per_sec = 0.0;  // ratio of means, matching the table arithmetic
  double success_rate = 0.0;           // percent
  std::optional<double> avg_cost = {};  // dollars per call at the given rates
};

/// Dollars for one call: (in * p_in + out * p_out) / 1e6.
double call_cost(double input_tokens, double output_tokens, double per_million_input,
                 double per_million_output);

/// Output tokens per wall-second from per-call means.
double tokens_per_sec(double avg_output_tokens, double avg_wall_ms);

std::vector<ModelUsageRow> throughput_and_cost(const std::vector<UsageRecord>& records,
                                               const std::map<std::string, Pricing>& pricing);

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;  // n-1 denominator; 0 for a single value
  double min = 0.0;
  double max = 0.0;
  size_t n = 0;
};

Summary summarize(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// File plumbing

/// responses.csv: participant_id,condition,email_id,kind,suspiciousness
/// with optional knowledge and q1..q8 columns.
std::vector<ResponseSet> read_responses_csv(const std::filesystem::path& path);

/// usage.csv: model,input_tokens,output_tokens,wall_ms,success
std::vector<UsageRecord> read_usage_csv(const std::filesystem::path& path);

/// pricing file: [model] sections with p_in / p_out dollar rates per million.
std::map<std::string, Pricing> read_pricing(const std::filesystem::path& path);

struct UserStudyReport {
  struct ConditionStats {
    std::string condition;
    size_t participants = 0;
    double mean_malicious_susp = 0.0;
    double mean_benign_susp = 0.0;
    double mean_detection_gap = 0.0;
  };
  std::vector<ConditionStats> conditions;
  KruskalResult malicious_susp_test;  // between conditions
  KruskalResult benign_susp_test;
  KruskalResult detection_gap_test;
  std::optional<WelchResult> knowledge_test;
};

UserStudyReport analyze_user_study(const std::vector<ResponseSet>& responses);
std::string user_study_to_json(const UserStudyReport& report);

std::string usage_table_to_csv(const std::vector<ModelUsageRow>& rows);

}  // namespace spearlab::stats
