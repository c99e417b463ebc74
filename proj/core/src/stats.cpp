#include "spearlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "spearlab/config.hpp"
#include "spearlab/csv.hpp"
#include "spearlab/errors.hpp"
#include "spearlab/util.hpp"

namespace spearlab::stats {

// ---------------------------------------------------------------------------
// Special functions

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;
constexpr double kFpMin = 1e-300;

double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 1; n <= kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double beta_contfrac(double a, double b, double x) {
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw Error("regularized_gamma_p: invalid arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw Error("regularized_gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double chi_squared_sf(double x, double k) {
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(k / 2.0, x / 2.0);
}

double regularized_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_contfrac(a, b, x) / a;
  return 1.0 - bt * beta_contfrac(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) throw Error("student_t_two_sided_p: df must be positive");
  if (t == 0.0) return 1.0;
  return regularized_beta(df / 2.0, 0.5, df / (df + t * t));
}

// ---------------------------------------------------------------------------

double detection_gap(const ResponseSet& rs) {
  double mal_sum = 0.0, ben_sum = 0.0;
  size_t mal_n = 0, ben_n = 0;
  for (const auto& r : rs.ratings) {
    if (r.malicious) {
      mal_sum += r.suspiciousness;
      ++mal_n;
    } else {
      ben_sum += r.suspiciousness;
      ++ben_n;
    }
  }
  if (mal_n == 0 || ben_n == 0) {
    throw EmptyInputError("detection_gap: participant " + rs.participant_id +
                          " needs both malicious and benign ratings");
  }
  return mal_sum / static_cast<double>(mal_n) - ben_sum / static_cast<double>(ben_n);
}

KruskalResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error("kruskal_wallis: need at least 2 groups");
  size_t total = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw EmptyInputError("kruskal_wallis: empty group");
    total += g.size();
  }
  if (total < 3) throw Error("kruskal_wallis: need at least 3 observations");

  struct Obs {
    double value;
    size_t group;
  };
  std::vector<Obs> all;
  all.reserve(total);
  for (size_t g = 0; g < groups.size(); ++g) {
    for (double v : groups[g]) all.push_back({v, g});
  }
  std::sort(all.begin(), all.end(), [](const Obs& a, const Obs& b) { return a.value < b.value; });

  // Average ranks for ties; accumulate the tie correction term.
  std::vector<double> rank_sum(groups.size(), 0.0);
  double tie_term = 0.0;
  size_t i = 0;
  const double n = static_cast<double>(total);
  while (i < all.size()) {
    size_t j = i;
    while (j < all.size() && all[j].value == all[i].value) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    double t = static_cast<double>(j - i);
    if (t > 1.0) tie_term += t * t * t - t;
    for (size_t k = i; k < j; ++k) rank_sum[all[k].group] += avg_rank;
    i = j;
  }

  double h = 0.0;
  for (size_t g = 0; g < groups.size(); ++g) {
    double ng = static_cast<double>(groups[g].size());
    h += rank_sum[g] * rank_sum[g] / ng;
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

  double correction = 1.0 - tie_term / (n * n * n - n);
  KruskalResult result;
  if (correction <= 0.0) {
    // Every observation identical: no between-group effect by convention.
    result.h = 0.0;
    result.p = 1.0;
    return result;
  }
  result.h = h / correction;
  if (result.h < 0.0 && result.h > -1e-12) result.h = 0.0;
  result.p = chi_squared_sf(result.h, static_cast<double>(groups.size() - 1));
  return result;
}

namespace {

std::pair<double, double> mean_var(const std::vector<double>& v) {
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  double var = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
  return {mean, var};
}

}  // namespace

WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw Error("welch_t: each sample needs >= 2 values");
  auto [ma, va] = mean_var(a);
  auto [mb, vb] = mean_var(b);
  if (va == 0.0 && vb == 0.0) throw Error("welch_t: both samples have zero variance");
  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  double se2 = va / na + vb / nb;
  WelchResult r;
  r.t = (ma - mb) / std::sqrt(se2);
  double denom = (va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0);
  r.df = se2 * se2 / denom;
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

std::vector<std::pair<int, double>> trait_cdf(const std::vector<ensemble::ScoreVector>& docs) {
  if (docs.empty()) throw EmptyInputError("trait_cdf: no scored documents");
  std::vector<size_t> counts;
  counts.reserve(docs.size());
  for (const auto& sv : docs) counts.push_back(sv.trait_count_non_contextual());
  std::vector<std::pair<int, double>> out;
  const double n = static_cast<double>(docs.size());
  for (int k = 1; k <= 7; ++k) {
    size_t at_least = 0;
    for (size_t c : counts) {
      if (c >= static_cast<size_t>(k)) ++at_least;
    }
    out.emplace_back(k, static_cast<double>(at_least) / n);
  }
  return out;
}

double call_cost(double input_tokens, double output_tokens, double per_million_input,
                 double per_million_output) {
  return (input_tokens * per_million_input + output_tokens * per_million_output) / 1e6;
}

double tokens_per_sec(double avg_output_tokens, double avg_wall_ms) {
  return avg_output_tokens / (avg_wall_ms / 1000.0);
}

std::vector<ModelUsageRow> throughput_and_cost(const std::vector<UsageRecord>& records,
                                               const std::map<std::string, Pricing>& pricing) {
  if (records.empty()) throw EmptyInputError("throughput_and_cost: no usage records");
  std::map<std::string, std::vector<const UsageRecord*>> by_model;
  for (const auto& r : records) {
    if (r.wall_ms <= 0.0) throw Error("usage record for " + r.model + " has wall_ms <= 0");
    by_model[r.model].push_back(&r);
  }
  std::vector<ModelUsageRow> rows;
  for (const auto& [model, recs] : by_model) {
    ModelUsageRow row;
    row.model = model;
    row.n = recs.size();
    double in_sum = 0.0, out_sum = 0.0, wall_sum = 0.0;
    size_t ok = 0;
    for (const auto* r : recs) {
      in_sum += static_cast<double>(r->input_tokens);
      out_sum += static_cast<double>(r->output_tokens);
      wall_sum += r->wall_ms;
      if (r->success) ++ok;
    }
    double n = static_cast<double>(recs.size());
    row.avg_input_tokens = in_sum / n;
    row.avg_output_tokens = out_sum / n;
    row.avg_total_tokens = row.avg_input_tokens + row.avg_output_tokens;
    row.avg_wall_ms = wall_sum / n;
    row.output_tokens_per_sec = tokens_per_sec(row.avg_output_tokens, row.avg_wall_ms);
    row.success_rate = 100.0 * static_cast<double>(ok) / n;
    auto it = pricing.find(model);
    if (it != pricing.end()) {
      row.avg_cost = call_cost(row.avg_input_tokens, row.avg_output_tokens,
                               it->second.per_million_input, it->second.per_million_output);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw EmptyInputError("summarize: empty sample");
  Summary s;
  s.n = values.size();
  auto [mean, var] = mean_var(values);
  s.mean = mean;
  s.sd = std::sqrt(var);
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
  return s;
}

// ---------------------------------------------------------------------------
// File plumbing

std::vector<ResponseSet> read_responses_csv(const std::filesystem::path& path) {
  csv::Table t = csv::parse(read_file(path));
  int c_pid = t.column("participant_id");
  int c_cond = t.column("condition");
  int c_email = t.column("email_id");
  int c_kind = t.column("kind");
  int c_susp = t.column("suspiciousness");
  int c_know = t.column("knowledge");
  if (c_pid < 0 || c_cond < 0 || c_email < 0 || c_kind < 0 || c_susp < 0) {
    throw Error(
        "responses CSV needs columns participant_id,condition,email_id,kind,suspiciousness");
  }
  std::array<int, 8> c_quality{};
  for (int q = 0; q < 8; ++q) {
    c_quality[static_cast<size_t>(q)] = t.column("q" + std::to_string(q + 1));
  }

  std::map<std::string, ResponseSet> sets;
  std::vector<std::string> order;
  for (const auto& row : t.rows) {
    const std::string& pid = row[static_cast<size_t>(c_pid)];
    auto [it, inserted] = sets.try_emplace(pid);
    if (inserted) {
      it->second.participant_id = pid;
      it->second.condition = row[static_cast<size_t>(c_cond)];
      order.push_back(pid);
    }
    Rating r;
    r.email_id = row[static_cast<size_t>(c_email)];
    const std::string& kind = row[static_cast<size_t>(c_kind)];
    if (kind != "malicious" && kind != "benign") {
      throw Error("rating kind must be malicious or benign, got: " + kind);
    }
    r.malicious = kind == "malicious";
    r.suspiciousness = std::stoi(row[static_cast<size_t>(c_susp)]);
    if (r.suspiciousness < 1 || r.suspiciousness > 5) {
      throw Error("suspiciousness must be a 1..5 Likert value");
    }
    for (size_t q = 0; q < 8; ++q) {
      int col = c_quality[q];
      if (col >= 0 && !row[static_cast<size_t>(col)].empty()) {
        r.quality[q] = std::stoi(row[static_cast<size_t>(col)]);
      }
    }
    it->second.ratings.push_back(std::move(r));
    if (c_know >= 0 && !row[static_cast<size_t>(c_know)].empty()) {
      it->second.knowledge = std::stod(row[static_cast<size_t>(c_know)]);
    }
  }
  std::vector<ResponseSet> out;
  out.reserve(order.size());
  for (const auto& pid : order) out.push_back(std::move(sets[pid]));
  return out;
}

std::vector<UsageRecord> read_usage_csv(const std::filesystem::path& path) {
  csv::Table t = csv::parse(read_file(path));
  int c_model = t.column("model");
  int c_in = t.column("input_tokens");
  int c_out = t.column("output_tokens");
  int c_wall = t.column("wall_ms");
  int c_ok = t.column("success");
  if (c_model < 0 || c_in < 0 || c_out < 0 || c_wall < 0 || c_ok < 0) {
    throw Error("usage CSV needs columns model,input_tokens,output_tokens,wall_ms,success");
  }
  std::vector<UsageRecord> out;
  for (const auto& row : t.rows) {
    UsageRecord r;
    r.model = row[static_cast<size_t>(c_model)];
    r.input_tokens = std::stoull(row[static_cast<size_t>(c_in)]);
    r.output_tokens = std::stoull(row[static_cast<size_t>(c_out)]);
    r.wall_ms = std::stod(row[static_cast<size_t>(c_wall)]);
    const std::string& ok = row[static_cast<size_t>(c_ok)];
    r.success = ok == "1" || ok == "true";
    out.push_back(std::move(r));
  }
  return out;
}

std::map<std::string, Pricing> read_pricing(const std::filesystem::path& path) {
  Config cfg = Config::load(path, /*apply_env=*/false);
  std::map<std::string, Pricing> out;
  for (const auto& [key, value] : cfg.entries()) {
    size_t dot = key.rfind('.');
    if (dot == std::string::npos) continue;
    std::string model = key.substr(0, dot);
    std::string field = key.substr(dot + 1);
    Pricing& p = out[model];
    if (field == "p_in") p.per_million_input = std::stod(value);
    else if (field == "p_out") p.per_million_output = std::stod(value);
  }
  return out;
}

UserStudyReport analyze_user_study(const std::vector<ResponseSet>& responses) {
  if (responses.empty()) throw EmptyInputError("analyze_user_study: no responses");
  std::map<std::string, std::vector<const ResponseSet*>> by_condition;
  for (const auto& rs : responses) by_condition[rs.condition].push_back(&rs);

  UserStudyReport report;
  std::vector<std::vector<double>> mal_groups, ben_groups, gap_groups, know_groups;
  bool all_have_knowledge = true;
  for (const auto& [condition, members] : by_condition) {
    UserStudyReport::ConditionStats cs;
    cs.condition = condition;
    cs.participants = members.size();
    std::vector<double> mal, ben, gap, know;
    for (const auto* rs : members) {
      double mal_sum = 0.0, ben_sum = 0.0;
      size_t mal_n = 0, ben_n = 0;
      for (const auto& r : rs->ratings) {
        if (r.malicious) {
          mal_sum += r.suspiciousness;
          ++mal_n;
        } else {
          ben_sum += r.suspiciousness;
          ++ben_n;
        }
      }
      if (mal_n) mal.push_back(mal_sum / static_cast<double>(mal_n));
      if (ben_n) ben.push_back(ben_sum / static_cast<double>(ben_n));
      if (mal_n && ben_n) gap.push_back(detection_gap(*rs));
      if (rs->knowledge) know.push_back(*rs->knowledge);
      else all_have_knowledge = false;
    }
    cs.mean_malicious_susp = mal.empty() ? 0.0 : summarize(mal).mean;
    cs.mean_benign_susp = ben.empty() ? 0.0 : summarize(ben).mean;
    cs.mean_detection_gap = gap.empty() ? 0.0 : summarize(gap).mean;
    report.conditions.push_back(cs);
    mal_groups.push_back(std::move(mal));
    ben_groups.push_back(std::move(ben));
    gap_groups.push_back(std::move(gap));
    know_groups.push_back(std::move(know));
  }
  if (by_condition.size() >= 2) {
    report.malicious_susp_test = kruskal_wallis(mal_groups);
    report.benign_susp_test = kruskal_wallis(ben_groups);
    report.detection_gap_test = kruskal_wallis(gap_groups);
    if (all_have_knowledge && know_groups.size() == 2 && know_groups[0].size() >= 2 &&
        know_groups[1].size() >= 2) {
      report.knowledge_test = welch_t(know_groups[0], know_groups[1]);
    }
  }
  return report;
}

std::string user_study_to_json(const UserStudyReport& report) {
  nlohmann::json j;
  j["conditions"] = nlohmann::json::array();
  for (const auto& cs : report.conditions) {
    j["conditions"].push_back({{"condition", cs.condition},
                               {"participants", cs.participants},
                               {"mean_malicious_susp", cs.mean_malicious_susp},
                               {"mean_benign_susp", cs.mean_benign_susp},
                               {"mean_detection_gap", cs.mean_detection_gap}});
  }
  auto kw = [](const KruskalResult& r) {
    return nlohmann::json{{"H", r.h}, {"p", r.p}};
  };
  j["malicious_susp_test"] = kw(report.malicious_susp_test);
  j["benign_susp_test"] = kw(report.benign_susp_test);
  j["detection_gap_test"] = kw(report.detection_gap_test);
  if (report.knowledge_test) {
    j["knowledge_test"] = {{"t", report.knowledge_test->t},
                           {"df", report.knowledge_test->df},
                           {"p", report.knowledge_test->p}};
  }
  return j.dump(2);
}

std::string usage_table_to_csv(const std::vector<ModelUsageRow>& rows) {
  std::string out =
      "model,n,avg_input_tokens,avg_output_tokens,avg_total_tokens,avg_wall_ms,"
      "output_tokens_per_sec,success_rate,avg_cost_usd\n";
  for (const auto& r : rows) {
    std::vector<std::string> fields{
        r.model,
        std::to_string(r.n),
        format_double(r.avg_input_tokens, 2),
        format_double(r.avg_output_tokens, 2),
        format_double(r.avg_total_tokens, 2),
        format_double(r.avg_wall_ms, 2),
        format_double(r.output_tokens_per_sec, 2),
        format_double(r.success_rate, 1),
        r.avg_cost ? format_double(*r.avg_cost, 6) : "NA",
    };
    out += csv::join_row(fields);
  }
  return out;
}

}  // namespace spearlab::stats
