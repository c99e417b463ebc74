#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spearlab/corpus.hpp"

namespace spearlab::infogain {

/// One user's posts, oldest to newest, at most 20 (the most recent ones).
struct UserTimeline {
  std::string user_id;
  std::vector<corpus::Document> posts;
};

struct EntropyPoint {
  int k = 0;             // 1-based post index
  double h_bits = 0.0;   // entropy of the cumulative token multiset
  double h_norm = 0.0;   // h_bits / log2(n_unique); 0 when n_unique <= 1
  size_t n_unique = 0;
};

struct EntropyCurve {
  std::string user_id;
  std::vector<EntropyPoint> points;
};

struct AggregatePoint {
  int k = 0;
  double h_mean = 0.0;  // mean normalized entropy over users with >= k posts
  size_t n_users = 0;
};

/// Base-2 Shannon entropy over an empirical token distribution.
/// Throws EmptyInputError on an empty multiset.
double shannon_entropy(const std::map<std::string, size_t>& counts);
double shannon_entropy(const std::vector<std::string>& tokens);

EntropyCurve normalized_entropy_curve(const UserTimeline& timeline);

std::vector<AggregatePoint> aggregate_curves(const std::vector<EntropyCurve>& curves);

// ---------------------------------------------------------------------------
// Entity analysis

enum class EntityLabel { PERSON, GPE, ORG, LOC, DATE, EVENT, PRODUCT, NORP };

constexpr int kEntityLabelCount = 8;
std::string_view entity_label_name(EntityLabel label);

struct EntityRecord {
  EntityLabel label;
  std::string surface;  // casefolded, whitespace-collapsed

  bool operator<(const EntityRecord& o) const {
    return label != o.label ? label < o.label : surface < o.surface;
  }
  bool operator==(const EntityRecord& o) const {
    return label == o.label && surface == o.surface;
  }
};

class EntityExtractor {
 public:
  virtual ~EntityExtractor() = default;
  virtual std::vector<EntityRecord> extract(const std::string& text) const = 0;
};

// Deterministic default: per-label gazetteer lists (files person.txt,
// gpe.txt, org.txt, loc.txt, event.txt, product.txt, norp.txt; one entry per
// line, matched case-insensitively on up to 3-token windows, longest match
// first) plus regex rules for DATE.
class GazetteerExtractor : public EntityExtractor {
 public:
  static GazetteerExtractor load(const std::filesystem::path& dir);

  void add(EntityLabel label, const std::string& surface);
  std::vector<EntityRecord> extract(const std::string& text) const override;

 private:
  std::map<std::string, EntityLabel> entries_;  // casefolded surface -> label
  size_t max_tokens_ = 1;
};

struct EntityGainPoint {
  int k = 0;
  size_t new_entities = 0;  // |entities(post k) \ entities(posts 1..k-1)|
  std::map<EntityLabel, size_t> cumulative_by_label;
};

std::vector<EntityGainPoint> entity_gain(const UserTimeline& timeline,
                                         const EntityExtractor& extractor);

// ---------------------------------------------------------------------------

/// Groups post documents by meta user_id, sorts each group by timestamp
/// ascending and keeps the 20 most recent posts.
std::vector<UserTimeline> build_timelines(const std::vector<corpus::Document>& posts,
                                          size_t max_posts = 20);

}  // namespace spearlab::infogain
