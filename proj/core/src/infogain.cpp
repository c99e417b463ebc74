#include "spearlab/infogain.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "spearlab/errors.hpp"
#include "spearlab/text.hpp"
#include "spearlab/util.hpp"

namespace spearlab::infogain {

double shannon_entropy(const std::map<std::string, size_t>& counts) {
  size_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  if (total == 0) throw EmptyInputError("shannon_entropy: empty multiset");
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;  // clamp -0.0 from a single symbol
}

double shannon_entropy(const std::vector<std::string>& tokens) {
  std::map<std::string, size_t> counts;
  for (const auto& t : tokens) ++counts[t];
  return shannon_entropy(counts);
}

EntropyCurve normalized_entropy_curve(const UserTimeline& timeline) {
  if (timeline.posts.empty()) {
    throw EmptyInputError("normalized_entropy_curve: empty timeline");
  }
  EntropyCurve curve;
  curve.user_id = timeline.user_id;
  std::map<std::string, size_t> cumulative;
  int k = 0;
  for (const auto& post : timeline.posts) {
    ++k;
    for (const auto& tok : text::tokenize(post.body)) ++cumulative[tok];
    EntropyPoint pt;
    pt.k = k;
    pt.n_unique = cumulative.size();
    pt.h_bits = cumulative.empty() ? 0.0 : shannon_entropy(cumulative);
    // A vocabulary of one token carries zero disorder: log2(1) = 0 would
    // otherwise divide by zero.
    pt.h_norm = pt.n_unique <= 1
                    ? 0.0
                    : pt.h_bits / std::log2(static_cast<double>(pt.n_unique));
    curve.points.push_back(pt);
  }
  return curve;
}

std::vector<AggregatePoint> aggregate_curves(const std::vector<EntropyCurve>& curves) {
  if (curves.empty()) throw EmptyInputError("aggregate_curves: no curves");
  size_t max_k = 0;
  for (const auto& c : curves) max_k = std::max(max_k, c.points.size());
  std::vector<AggregatePoint> out;
  for (size_t k = 1; k <= max_k; ++k) {
    AggregatePoint pt;
    pt.k = static_cast<int>(k);
    double sum = 0.0;
    for (const auto& c : curves) {
      if (c.points.size() >= k) {
        sum += c.points[k - 1].h_norm;
        ++pt.n_users;
      }
    }
    pt.h_mean = pt.n_users ? sum / static_cast<double>(pt.n_users) : 0.0;
    out.push_back(pt);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view entity_label_name(EntityLabel label) {
  switch (label) {
    case EntityLabel::PERSON: return "PERSON";
    case EntityLabel::GPE: return "GPE";
    case EntityLabel::ORG: return "ORG";
    case EntityLabel::LOC: return "LOC";
    case EntityLabel::DATE: return "DATE";
    case EntityLabel::EVENT: return "EVENT";
    case EntityLabel::PRODUCT: return "PRODUCT";
    case EntityLabel::NORP: return "NORP";
  }
  return "PERSON";
}

namespace {

const std::pair<const char*, EntityLabel> kGazetteerFiles[] = {
    {"person.txt", EntityLabel::PERSON}, {"gpe.txt", EntityLabel::GPE},
    {"org.txt", EntityLabel::ORG},       {"loc.txt", EntityLabel::LOC},
    {"event.txt", EntityLabel::EVENT},   {"product.txt", EntityLabel::PRODUCT},
    {"norp.txt", EntityLabel::NORP},
};

const std::regex& date_regex() {
  static const std::regex re(
      R"((january|february|march|april|may|june|july|august|september|october|november|december)\s+\d{1,2}(st|nd|rd|th)?)"
      R"(|\d{1,2}(st|nd|rd|th)?\s+(january|february|march|april|may|june|july|august|september|october|november|december))"
      R"(|(19|20)\d{2})"
      R"(|(last|next|this)\s+(summer|winter|spring|fall|autumn|week|month|year))"
      R"(|(monday|tuesday|wednesday|thursday|friday|saturday|sunday))",
      std::regex::icase);
  return re;
}

}  // namespace

GazetteerExtractor GazetteerExtractor::load(const std::filesystem::path& dir) {
  GazetteerExtractor ex;
  for (const auto& [file, label] : kGazetteerFiles) {
    auto path = dir / file;
    if (!std::filesystem::exists(path)) continue;
    for (const auto& line : split_lines(read_file(path))) {
      std::string entry = trim(line);
      if (entry.empty() || entry[0] == '#') continue;
      ex.add(label, entry);
    }
  }
  return ex;
}

void GazetteerExtractor::add(EntityLabel label, const std::string& surface) {
  std::string key = text::collapse_ws(text::casefold(surface));
  if (key.empty()) return;
  size_t tokens = 1 + static_cast<size_t>(std::count(key.begin(), key.end(), ' '));
  max_tokens_ = std::max(max_tokens_, tokens);
  entries_[key] = label;
}

std::vector<EntityRecord> GazetteerExtractor::extract(const std::string& body) const {
  std::set<EntityRecord> found;
  std::vector<std::string> tokens = text::tokenize(body);
  size_t i = 0;
  while (i < tokens.size()) {
    size_t matched = 0;
    size_t window = std::min(max_tokens_, tokens.size() - i);
    for (size_t n = window; n >= 1; --n) {
      std::string key = tokens[i];
      for (size_t j = 1; j < n; ++j) {
        key += ' ';
        key += tokens[i + j];
      }
      auto it = entries_.find(key);
      if (it != entries_.end()) {
        found.insert({it->second, key});
        matched = n;
        break;
      }
      if (n == 1) break;
    }
    i += matched ? matched : 1;
  }
  std::string folded = text::casefold(body);
  auto begin = std::sregex_iterator(folded.begin(), folded.end(), date_regex());
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    found.insert({EntityLabel::DATE, text::collapse_ws(it->str())});
  }
  return {found.begin(), found.end()};
}

std::vector<EntityGainPoint> entity_gain(const UserTimeline& timeline,
                                         const EntityExtractor& extractor) {
  std::vector<EntityGainPoint> out;
  std::set<EntityRecord> seen;
  std::map<EntityLabel, size_t> by_label;
  int k = 0;
  for (const auto& post : timeline.posts) {
    ++k;
    EntityGainPoint pt;
    pt.k = k;
    for (const auto& rec : extractor.extract(post.body)) {
      if (seen.insert(rec).second) {
        ++pt.new_entities;
        ++by_label[rec.label];
      }
    }
    pt.cumulative_by_label = by_label;
    out.push_back(std::move(pt));
  }
  return out;
}

std::vector<UserTimeline> build_timelines(const std::vector<corpus::Document>& posts,
                                          size_t max_posts) {
  std::map<std::string, std::vector<corpus::Document>> by_user;
  for (const auto& doc : posts) {
    auto it = doc.meta.find("user_id");
    if (it == doc.meta.end()) continue;
    by_user[it->second].push_back(doc);
  }
  std::vector<UserTimeline> timelines;
  for (auto& [user, docs] : by_user) {
    std::stable_sort(docs.begin(), docs.end(),
                     [](const corpus::Document& a, const corpus::Document& b) {
                       auto ta = a.meta.find("timestamp");
                       auto tb = b.meta.find("timestamp");
                       const std::string& sa = ta == a.meta.end() ? a.id : ta->second;
                       const std::string& sb = tb == b.meta.end() ? b.id : tb->second;
                       return sa < sb;  // ISO 8601 sorts lexically
                     });
    if (docs.size() > max_posts) {
      docs.erase(docs.begin(), docs.end() - static_cast<long>(max_posts));
    }
    timelines.push_back({user, std::move(docs)});
  }
  return timelines;
}

}  // namespace spearlab::infogain
