#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spearlab/corpus.hpp"

namespace spearlab::detector {

struct LabeledDoc {
  corpus::Document doc;
  bool malicious = false;
};

struct DatasetSplit {
  std::vector<LabeledDoc> train, val, test;  // 81 / 9 / 10 stratified
  uint64_t seed = 0;
};

// Stratified per class with half-away-from-zero rounding per split, so
// 3,750 documents land on 3,037/338/375 (+-1 per class). Deterministic
// given the seed. Throws SingleClassInputError when a class is missing.
DatasetSplit split_dataset(const std::vector<LabeledDoc>& docs, uint64_t seed);

struct SubPrompt {
  std::string doc_id;
  int prefix_len = 0;  // k sentences
  std::string text;    // sentences 1..k joined by single spaces
  bool malicious = false;
};

// One sub-prompt per sentence prefix; label k is the OR of sentence labels
// 1..k; text truncated to max_tokens whitespace tokens. Throws
// LabelLengthMismatchError when |labels| != sentence count.
std::vector<SubPrompt> build_subprompts(const corpus::Document& doc,
                                        const std::vector<bool>& sentence_labels,
                                        size_t max_tokens = 256);

// ---------------------------------------------------------------------------

/// Anything that maps text to a maliciousness score in [0,1] with a decision
/// threshold. External detector backends plug in here.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(const std::string& text) const = 0;
  virtual double threshold() const = 0;
};

struct FeatureSpec {
  uint32_t dim_bits = 18;  // 2^18 hashed dimensions, signed
  int char_ngram_min = 3;
  int char_ngram_max = 5;
  bool word_unigrams = true;

  uint32_t dim() const { return 1u << dim_bits; }
  bool operator==(const FeatureSpec& o) const = default;
};

/// L2-normalized signed hashed features. Empty result means the document is
/// degenerate (no tokens, no n-grams).
std::vector<std::pair<uint32_t, double>> featurize(const std::string& text,
                                                   const FeatureSpec& spec);

/// Hashed-n-gram logistic regression. Immutable after training; scoring is
/// a pure function and safe to call concurrently.
class DetectorModel : public Scorer {
 public:
  DetectorModel() = default;
  DetectorModel(FeatureSpec spec, std::vector<double> weights, double bias,
                double threshold);

  double score(const std::string& text) const override;
  double threshold() const override { return threshold_; }
  void set_threshold(double t) { threshold_ = t; }

  const FeatureSpec& feature_spec() const { return spec_; }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  FeatureSpec spec_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  double threshold_ = 0.5;
};

struct TrainConfig {
  uint64_t seed = 1;
  int max_epochs = 20;
  double learning_rate = 0.5;
  double l2 = 1e-6;
  int patience = 2;         // epochs without val-F1 improvement
  double grid_step = 0.001; // threshold tuning granularity
  FeatureSpec features;
};

struct TrainReport {
  int epochs_run = 0;
  double best_val_f1 = 0.0;
  std::vector<std::string> degenerate_doc_ids;  // all-zero feature vectors
};

// SGD on logistic loss with a fixed seed; stops when validation F1 has not
// improved for `patience` epochs and restores the best epoch's weights;
// threshold set by tune_threshold on the validation set. Degenerate
// documents are reported and skipped.
DetectorModel train(const DatasetSplit& split, const TrainConfig& config,
                    TrainReport* report = nullptr);

// Grid search maximizing F1 on the validation set; ties break toward the
// higher threshold (favoring precision). The returned value is a grid point.
double tune_threshold(const Scorer& model, const std::vector<LabeledDoc>& val,
                      double grid_step = 0.001);

struct CategoryMetrics {
  std::string category;
  size_t n = 0;   // malicious items in the category
  size_t tp = 0;
  size_t fn = 0;
  size_t fp = 0;  // benign items carrying the category meta, flagged
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalResult {
  size_t n = 0, tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  std::vector<CategoryMetrics> per_category;
};

/// Standard binary metrics; per-category recall over malicious items grouped
/// by attack_category meta when by_category is set.
EvalResult evaluate(const Scorer& model, const std::vector<LabeledDoc>& test,
                    bool by_category = false);

enum class ScreenMode { full, incremental };

struct ScreenVerdict {
  bool malicious = false;
  double score = 0.0;                  // deciding score
  std::optional<int> flagged_prefix;   // 1-based sentence prefix, incremental mode
  std::vector<double> trace;           // scores in prefix order
};

// Full mode scores the whole document once (as its final sentence prefix,
// so full and incremental agree on the complete text); incremental mode
// scores each sentence prefix in order and stops at the first score >=
// threshold.
ScreenVerdict screen(const Scorer& model, const corpus::Document& doc, ScreenMode mode,
                     size_t max_tokens = 256);

// ---------------------------------------------------------------------------
// Versioned binary container {magic, version, feature_spec, weights, bias,
// threshold}; little-endian; loading refuses mismatched magic or version.

inline constexpr char kModelMagic[4] = {'S', 'L', 'D', 'M'};
inline constexpr uint32_t kModelVersion = 1;

void save_model(const DetectorModel& model, const std::filesystem::path& path);
DetectorModel load_model(const std::filesystem::path& path);

/// "1.<hash>" version string for health reporting.
std::string model_fingerprint(const DetectorModel& model);

/// Labeled docs from a store: meta label=malicious|benign.
std::vector<LabeledDoc> labeled_from_store(const std::vector<corpus::Document>& docs);

}  // namespace spearlab::detector
