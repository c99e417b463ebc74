#include "spearlab/ensemble.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "spearlab/csv.hpp"
#include "spearlab/errors.hpp"
#include "spearlab/util.hpp"

namespace spearlab::ensemble {

using nlohmann::json;

int dimension_index(std::string_view name) {
  for (size_t i = 0; i < kDimensions.size(); ++i) {
    if (kDimensions[i] == name) return static_cast<int>(i);
  }
  return -1;
}

size_t ScoreVector::trait_count_non_contextual() const {
  size_t count = 0;
  for (size_t i = 1; i < kDimensionCount; ++i) {
    if (values[i].has_value() && *values[i] == 1) ++count;
  }
  return count;
}

EnsembleVerdict majority_vote(const std::vector<JudgeBallot>& ballots_for_doc) {
  if (ballots_for_doc.empty()) throw EmptyInputError("majority_vote: no ballots");
  size_t judges = ballots_for_doc.size();
  if (judges % 2 == 0) {
    throw EvenJudgeCountError(
        "majority_vote: judge count must be odd (got " + std::to_string(judges) +
        "); an even panel can tie — use 3 judges as in the annotation pipeline");
  }
  if (judges < 3) throw EvenJudgeCountError("majority_vote: need at least 3 judges");

  EnsembleVerdict verdict;
  verdict.doc_id = ballots_for_doc.front().doc_id;
  for (const auto& b : ballots_for_doc) {
    if (b.doc_id != verdict.doc_id) {
      throw MissingBallotError("majority_vote: ballots span multiple documents");
    }
  }

  for (size_t d = 0; d < kDimensionCount; ++d) {
    int ones = 0, zeros = 0, na = 0;
    for (const auto& b : ballots_for_doc) {
      if (!b.scores[d].has_value()) ++na;
      else if (*b.scores[d] == 1) ++ones;
      else ++zeros;
    }
    verdict.votes[d] = {zeros, ones};
    if (na > 0) {
      verdict.outcome[d] = std::nullopt;  // dimension skipped
      continue;
    }
    verdict.outcome[d] = ones > zeros ? 1 : 0;
    if (ones != 0 && zeros != 0) verdict.unanimous = false;
  }

  int label_ones = 0, label_zeros = 0, label_na = 0;
  for (const auto& b : ballots_for_doc) {
    if (!b.label.has_value()) ++label_na;
    else if (*b.label == 1) ++label_ones;
    else ++label_zeros;
  }
  if (label_na == 0) {
    verdict.label_outcome = label_ones > label_zeros ? 1 : 0;
    verdict.label_votes = {label_zeros, label_ones};
    if (label_ones != 0 && label_zeros != 0) verdict.unanimous = false;
  }
  return verdict;
}

std::vector<EnsembleVerdict> vote_all(const std::vector<JudgeBallot>& ballots) {
  std::set<std::string> judge_ids;
  std::map<std::string, std::vector<JudgeBallot>> by_doc;
  for (const auto& b : ballots) {
    judge_ids.insert(b.judge_id);
    by_doc[b.doc_id].push_back(b);
  }
  std::vector<EnsembleVerdict> verdicts;
  for (auto& [doc_id, doc_ballots] : by_doc) {
    if (doc_ballots.size() != judge_ids.size()) {
      throw MissingBallotError("document " + doc_id + " has " +
                               std::to_string(doc_ballots.size()) + " ballots but " +
                               std::to_string(judge_ids.size()) + " judges are present");
    }
    std::set<std::string> seen;
    for (const auto& b : doc_ballots) {
      if (!seen.insert(b.judge_id).second) {
        throw MissingBallotError("document " + doc_id + " has duplicate ballots from judge " +
                                 b.judge_id);
      }
    }
    // Judge order must not matter; sort for determinism.
    std::sort(doc_ballots.begin(), doc_ballots.end(),
              [](const JudgeBallot& a, const JudgeBallot& b) { return a.judge_id < b.judge_id; });
    verdicts.push_back(majority_vote(doc_ballots));
  }
  return verdicts;
}

double cohens_kappa(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) {
    throw LengthMismatchError("cohens_kappa: sequences of length " + std::to_string(a.size()) +
                              " and " + std::to_string(b.size()));
  }
  if (a.size() < 2) throw EmptyInputError("cohens_kappa: need at least 2 items");
  const double n = static_cast<double>(a.size());
  std::map<int, double> count_a, count_b;
  double agree = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ++count_a[a[i]];
    ++count_b[b[i]];
    if (a[i] == b[i]) ++agree;
  }
  double p_o = agree / n;
  double p_e = 0.0;
  for (const auto& [cat, ca] : count_a) {
    auto it = count_b.find(cat);
    if (it != count_b.end()) p_e += (ca / n) * (it->second / n);
  }
  if (1.0 - p_e == 0.0) return 1.0;  // both raters constant and identical
  return (p_o - p_e) / (1.0 - p_e);
}

double fleiss_style_pairwise(const std::vector<std::vector<int>>& judges) {
  if (judges.size() < 3) throw Error("fleiss_style_pairwise: need >= 3 judges");
  double sum = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < judges.size(); ++i) {
    for (size_t j = i + 1; j < judges.size(); ++j) {
      sum += cohens_kappa(judges[i], judges[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

ValidationResult validate_against_humans(const std::vector<EnsembleVerdict>& verdicts,
                                         const std::vector<EnsembleVerdict>& human_consensus) {
  std::map<std::string, const EnsembleVerdict*> humans;
  for (const auto& h : human_consensus) humans[h.doc_id] = &h;
  ValidationResult result;
  for (const auto& v : verdicts) {
    auto it = humans.find(v.doc_id);
    if (it == humans.end()) {
      throw MissingBallotError("no human consensus for document " + v.doc_id);
    }
    for (size_t d = 0; d < kDimensionCount; ++d) {
      if (!v.outcome[d].has_value() || !it->second->outcome[d].has_value()) continue;
      ++result.total;
      int machine = *v.outcome[d];
      int human = *it->second->outcome[d];
      if (machine == human) ++result.correct;
      else if (machine == 1) ++result.fp;
      else ++result.fn;
    }
  }
  result.accuracy =
      result.total ? static_cast<double>(result.correct) / static_cast<double>(result.total) : 0.0;
  return result;
}

std::vector<PercentageRow> aggregate_percentages(
    const std::vector<EnsembleVerdict>& verdicts,
    const std::map<std::string, std::string>& doc_group) {
  std::map<std::string, std::vector<const EnsembleVerdict*>> groups;
  for (const auto& v : verdicts) {
    auto it = doc_group.find(v.doc_id);
    std::string group = it == doc_group.end() ? "ungrouped" : it->second;
    groups[group].push_back(&v);
  }
  std::vector<PercentageRow> rows;
  for (const auto& [group, members] : groups) {
    PercentageRow row;
    row.group = group;
    row.n_docs = members.size();
    for (size_t d = 0; d < kDimensionCount; ++d) {
      size_t present = 0, ones = 0;
      for (const auto* v : members) {
        if (v->outcome[d].has_value()) {
          ++present;
          if (*v->outcome[d] == 1) ++ones;
        }
      }
      if (present == 0) row.percent[d] = std::nullopt;
      else row.percent[d] = 100.0 * static_cast<double>(ones) / static_cast<double>(present);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string percentages_to_csv(const std::vector<PercentageRow>& rows) {
  std::string out = "source,n";
  for (auto dim : kDimensions) {
    out += ',';
    out += dim;
  }
  out += '\n';
  for (const auto& row : rows) {
    std::vector<std::string> fields{row.group, std::to_string(row.n_docs)};
    for (size_t d = 0; d < kDimensionCount; ++d) {
      fields.push_back(row.percent[d] ? format_double(*row.percent[d], 2) : "NA");
    }
    out += csv::join_row(fields);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<JudgeBallot> read_ballots(const std::filesystem::path& path) {
  std::vector<JudgeBallot> ballots;
  for (const auto& line : split_lines(read_file(path))) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    JudgeBallot b;
    b.doc_id = j.at("doc_id").get<std::string>();
    b.judge_id = j.at("judge_id").get<std::string>();
    if (j.contains("label") && !j["label"].is_null()) {
      int v = j["label"].get<int>();
      if (v != 0 && v != 1) throw Error("ballot label must be 0 or 1");
      b.label = v;
    }
    if (j.contains("scores")) {
      for (auto it = j["scores"].begin(); it != j["scores"].end(); ++it) {
        int d = dimension_index(it.key());
        if (d < 0) throw Error("unknown score dimension: " + it.key());
        if (it.value().is_null()) continue;
        int v = it.value().get<int>();
        if (v != 0 && v != 1) throw Error("score for " + it.key() + " must be 0 or 1");
        b.scores[static_cast<size_t>(d)] = v;
      }
    }
    ballots.push_back(std::move(b));
  }
  return ballots;
}

void write_verdicts(const std::filesystem::path& path,
                    const std::vector<EnsembleVerdict>& verdicts) {
  std::string out;
  for (const auto& v : verdicts) {
    json j;
    j["doc_id"] = v.doc_id;
    json outcome = json::object();
    json votes = json::object();
    for (size_t d = 0; d < kDimensionCount; ++d) {
      std::string key(kDimensions[d]);
      if (v.outcome[d]) outcome[key] = *v.outcome[d];
      else outcome[key] = nullptr;
      votes[key] = {{"zeros", v.votes[d].first}, {"ones", v.votes[d].second}};
    }
    j["outcome"] = outcome;
    j["votes"] = votes;
    if (v.label_outcome) j["label"] = *v.label_outcome;
    j["unanimous"] = v.unanimous;
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<EnsembleVerdict> read_verdicts(const std::filesystem::path& path) {
  std::vector<EnsembleVerdict> verdicts;
  for (const auto& line : split_lines(read_file(path))) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    EnsembleVerdict v;
    v.doc_id = j.at("doc_id").get<std::string>();
    if (j.contains("outcome")) {
      for (auto it = j["outcome"].begin(); it != j["outcome"].end(); ++it) {
        int d = dimension_index(it.key());
        if (d < 0 || it.value().is_null()) continue;
        v.outcome[static_cast<size_t>(d)] = it.value().get<int>();
      }
    }
    if (j.contains("label") && !j["label"].is_null()) {
      v.label_outcome = j["label"].get<int>();
    }
    if (j.contains("unanimous")) v.unanimous = j["unanimous"].get<bool>();
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

}  // namespace spearlab::ensemble
