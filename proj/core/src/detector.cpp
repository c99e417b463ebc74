#include "spearlab/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "spearlab/errors.hpp"
#include "spearlab/text.hpp"
#include "spearlab/util.hpp"

namespace spearlab::detector {

namespace {

double round_half_away(double x) { return std::floor(x + 0.5); }

}  // namespace

DatasetSplit split_dataset(const std::vector<LabeledDoc>& docs, uint64_t seed) {
  if (docs.size() < 10) throw Error("split_dataset: need at least 10 labeled documents");
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < docs.size(); ++i) {
    (docs[i].malicious ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw SingleClassInputError("split_dataset: both classes must be present");
  }
  if (pos.size() < 3 || neg.size() < 3) {
    throw Error("split_dataset: each class needs at least 3 documents");
  }

  DatasetSplit split;
  split.seed = seed;
  auto take = [&](std::vector<size_t>& idx, uint64_t salt) {
    Rng rng(seed ^ salt);
    rng.shuffle(idx);
    size_t n = idx.size();
    size_t n_test = static_cast<size_t>(round_half_away(0.10 * static_cast<double>(n)));
    size_t n_val = static_cast<size_t>(round_half_away(0.09 * static_cast<double>(n)));
    n_test = std::max<size_t>(1, std::min(n_test, n - 2));
    n_val = std::max<size_t>(1, std::min(n_val, n - n_test - 1));
    for (size_t i = 0; i < n; ++i) {
      const LabeledDoc& d = docs[idx[i]];
      if (i < n_test) split.test.push_back(d);
      else if (i < n_test + n_val) split.val.push_back(d);
      else split.train.push_back(d);
    }
  };
  take(pos, 0x706f73ull);
  take(neg, 0x6e6567ull);
  return split;
}

std::vector<SubPrompt> build_subprompts(const corpus::Document& doc,
                                        const std::vector<bool>& sentence_labels,
                                        size_t max_tokens) {
  if (sentence_labels.size() != doc.sentences.size()) {
    throw LabelLengthMismatchError(
        "build_subprompts: " + std::to_string(sentence_labels.size()) + " labels for " +
        std::to_string(doc.sentences.size()) + " sentences (doc " + doc.id + ")");
  }
  std::vector<SubPrompt> out;
  out.reserve(doc.sentences.size());
  std::string prefix;
  size_t token_count = 0;
  bool any_malicious = false;
  for (size_t k = 0; k < doc.sentences.size(); ++k) {
    any_malicious = any_malicious || sentence_labels[k];
    // Append sentence tokens up to the cap; once full, longer prefixes
    // saturate at the same text.
    if (token_count < max_tokens) {
      size_t i = 0;
      const std::string& s = doc.sentences[k].text;
      while (i < s.size() && token_count < max_tokens) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])) != 0) ++i;
        size_t start = i;
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])) == 0) ++i;
        if (i > start) {
          if (!prefix.empty()) prefix.push_back(' ');
          prefix.append(s, start, i - start);
          ++token_count;
        }
      }
    }
    SubPrompt sp;
    sp.doc_id = doc.id;
    sp.prefix_len = static_cast<int>(k + 1);
    sp.text = prefix;
    sp.malicious = any_malicious;
    out.push_back(std::move(sp));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<uint32_t, double>> featurize(const std::string& body,
                                                   const FeatureSpec& spec) {
  std::unordered_map<uint32_t, double> acc;
  const uint32_t mask = spec.dim() - 1;
  auto add = [&](std::string_view key) {
    uint64_t h = fnv1a(key);
    uint32_t idx = static_cast<uint32_t>(h) & mask;
    double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    acc[idx] += sign;
  };

  if (spec.word_unigrams) {
    for (const auto& tok : text::tokenize(body)) add("w\x1f" + tok);
  }
  std::string folded = text::collapse_ws(text::casefold(body));
  for (int n = spec.char_ngram_min; n <= spec.char_ngram_max; ++n) {
    if (n <= 0 || folded.size() < static_cast<size_t>(n)) continue;
    std::string key = "c\x1f";
    key.resize(2 + static_cast<size_t>(n));
    for (size_t i = 0; i + static_cast<size_t>(n) <= folded.size(); ++i) {
      std::memcpy(key.data() + 2, folded.data() + i, static_cast<size_t>(n));
      add(key);
    }
  }

  std::vector<std::pair<uint32_t, double>> features(acc.begin(), acc.end());
  std::sort(features.begin(), features.end());
  double norm = 0.0;
  for (const auto& [_, v] : features) norm += v * v;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& [_, v] : features) v /= norm;
  }
  // Cancellation can zero an entry; drop for a clean degenerate check.
  features.erase(std::remove_if(features.begin(), features.end(),
                                [](const auto& f) { return f.second == 0.0; }),
                 features.end());
  return features;
}

DetectorModel::DetectorModel(FeatureSpec spec, std::vector<double> weights, double bias,
                             double threshold)
    : spec_(spec), weights_(std::move(weights)), bias_(bias), threshold_(threshold) {}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double dot(const std::vector<double>& w,
           const std::vector<std::pair<uint32_t, double>>& x) {
  double z = 0.0;
  for (const auto& [i, v] : x) z += w[i] * v;
  return z;
}

struct Counts {
  size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

double f1_from(const Counts& c) {
  double denom = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp + c.fn);
  if (denom == 0.0) return 0.0;
  return 2.0 * static_cast<double>(c.tp) / denom;
}

}  // namespace

double DetectorModel::score(const std::string& body) const {
  auto x = featurize(body, spec_);
  return sigmoid(dot(weights_, x) + bias_);
}

DetectorModel train(const DatasetSplit& split, const TrainConfig& config,
                    TrainReport* report) {
  if (split.train.empty()) throw Error("train: empty training set");
  if (split.val.empty()) throw Error("train: empty validation set");

  struct Sample {
    std::vector<std::pair<uint32_t, double>> x;
    bool y;
  };
  std::vector<Sample> train_set;
  std::vector<std::string> degenerate;
  for (const auto& d : split.train) {
    auto x = featurize(d.doc.body, config.features);
    if (x.empty()) {
      degenerate.push_back(d.doc.id);
      continue;
    }
    train_set.push_back({std::move(x), d.malicious});
  }
  if (train_set.empty()) throw Error("train: every training document is degenerate");

  std::vector<Sample> val_set;
  for (const auto& d : split.val) {
    auto x = featurize(d.doc.body, config.features);
    if (x.empty()) {
      degenerate.push_back(d.doc.id);
      continue;
    }
    val_set.push_back({std::move(x), d.malicious});
  }

  std::vector<double> weights(config.features.dim(), 0.0);
  double bias = 0.0;
  std::vector<double> best_weights = weights;
  double best_bias = 0.0;
  double best_f1 = -1.0;
  int since_best = 0;
  int epochs = 0;

  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed);

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    ++epochs;
    rng.shuffle(order);
    for (size_t idx : order) {
      const Sample& s = train_set[idx];
      double p = sigmoid(dot(weights, s.x) + bias);
      double g = p - (s.y ? 1.0 : 0.0);
      for (const auto& [i, v] : s.x) {
        weights[i] -= config.learning_rate * (g * v + config.l2 * weights[i]);
      }
      bias -= config.learning_rate * g;
    }
    Counts c;
    for (const auto& s : val_set) {
      bool pred = sigmoid(dot(weights, s.x) + bias) >= 0.5;
      if (pred && s.y) ++c.tp;
      else if (pred && !s.y) ++c.fp;
      else if (!pred && s.y) ++c.fn;
      else ++c.tn;
    }
    double f1 = f1_from(c);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_weights = weights;
      best_bias = bias;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  DetectorModel model(config.features, std::move(best_weights), best_bias, 0.5);
  model.set_threshold(tune_threshold(model, split.val, config.grid_step));
  if (report) {
    report->epochs_run = epochs;
    report->best_val_f1 = best_f1;
    report->degenerate_doc_ids = std::move(degenerate);
  }
  return model;
}

double tune_threshold(const Scorer& model, const std::vector<LabeledDoc>& val,
                      double grid_step) {
  if (val.empty()) throw Error("tune_threshold: empty validation set");
  bool has_pos = false, has_neg = false;
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(val.size());
  for (const auto& d : val) {
    scored.emplace_back(model.score(d.doc.body), d.malicious);
    (d.malicious ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw SingleClassInputError("tune_threshold: both classes must be present");
  }
  int steps = static_cast<int>(std::llround(1.0 / grid_step));
  double best_t = 0.0;
  double best_f1 = -1.0;
  for (int s = 0; s <= steps; ++s) {
    double t = static_cast<double>(s) * grid_step;
    Counts c;
    for (const auto& [score, y] : scored) {
      bool pred = score >= t;
      if (pred && y) ++c.tp;
      else if (pred && !y) ++c.fp;
      else if (!pred && y) ++c.fn;
      else ++c.tn;
    }
    double f1 = f1_from(c);
    if (f1 >= best_f1) {  // ties break toward the higher threshold
      best_f1 = f1;
      best_t = t;
    }
  }
  return best_t;
}

EvalResult evaluate(const Scorer& model, const std::vector<LabeledDoc>& test,
                    bool by_category) {
  if (test.empty()) throw EmptyInputError("evaluate: empty test set");
  EvalResult r;
  r.n = test.size();
  std::map<std::string, CategoryMetrics> cats;
  for (const auto& d : test) {
    bool pred = model.score(d.doc.body) >= model.threshold();
    if (pred && d.malicious) ++r.tp;
    else if (pred && !d.malicious) ++r.fp;
    else if (!pred && d.malicious) ++r.fn;
    else ++r.tn;
    if (by_category) {
      auto it = d.doc.meta.find("attack_category");
      if (it != d.doc.meta.end()) {
        CategoryMetrics& cm = cats[it->second];
        cm.category = it->second;
        if (d.malicious) {
          ++cm.n;
          if (pred) ++cm.tp;
          else ++cm.fn;
        } else if (pred) {
          ++cm.fp;
        }
      }
    }
  }
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.n);
  r.precision = (r.tp + r.fp) ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = (r.tp + r.fn) ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  for (auto& [_, cm] : cats) {
    cm.precision = (cm.tp + cm.fp) ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp)
                                   : 0.0;
    cm.recall = (cm.tp + cm.fn) ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn)
                                : 0.0;
    cm.f1 = (cm.precision + cm.recall) > 0.0
                ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                : 0.0;
    r.per_category.push_back(cm);
  }
  return r;
}

ScreenVerdict screen(const Scorer& model, const corpus::Document& doc, ScreenMode mode,
                     size_t max_tokens) {
  corpus::Document segmented = doc;
  if (segmented.sentences.empty()) segmented = corpus::segment_sentences(std::move(segmented));
  std::vector<bool> labels(segmented.sentences.size(), false);
  auto subprompts = build_subprompts(segmented, labels, max_tokens);

  ScreenVerdict verdict;
  if (subprompts.empty()) {
    verdict.score = 0.0;
    return verdict;
  }
  if (mode == ScreenMode::full) {
    double s = model.score(subprompts.back().text);
    verdict.score = s;
    verdict.trace.push_back(s);
    verdict.malicious = s >= model.threshold();
    return verdict;
  }
  for (const auto& sp : subprompts) {
    double s = model.score(sp.text);
    verdict.trace.push_back(s);
    verdict.score = s;
    if (s >= model.threshold()) {
      verdict.malicious = true;
      verdict.flagged_prefix = sp.prefix_len;
      return verdict;
    }
  }
  verdict.malicious = false;
  return verdict;
}

// ---------------------------------------------------------------------------

namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(byte()) << (8 * i);
    return v;
  }
  uint64_t u64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(byte()) << (8 * i);
    return v;
  }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  void raw(char* out, size_t n) {
    if (pos_ + n > data_.size()) throw ModelFormatError("model file truncated");
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }

 private:
  uint8_t byte() {
    if (pos_ >= data_.size()) throw ModelFormatError("model file truncated");
    return static_cast<uint8_t>(data_[pos_++]);
  }
  std::string data_;
  size_t pos_ = 0;
};

}  // namespace

void save_model(const DetectorModel& model, const std::filesystem::path& path) {
  std::string out;
  out.append(kModelMagic, 4);
  put_u32(out, kModelVersion);
  const FeatureSpec& spec = model.feature_spec();
  put_u32(out, spec.dim_bits);
  put_u32(out, static_cast<uint32_t>(spec.char_ngram_min));
  put_u32(out, static_cast<uint32_t>(spec.char_ngram_max));
  out.push_back(spec.word_unigrams ? 1 : 0);
  put_f64(out, model.bias());
  put_f64(out, model.threshold());
  put_u64(out, model.weights().size());
  for (double w : model.weights()) put_f64(out, w);
  write_file(path, out);
}

DetectorModel load_model(const std::filesystem::path& path) {
  Reader r(read_file(path));
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kModelMagic, 4) != 0) {
    throw ModelFormatError("not a detector model file: " + path.string());
  }
  uint32_t version = r.u32();
  if (version != kModelVersion) {
    throw ModelFormatError("unsupported model version " + std::to_string(version) +
                           " (expected " + std::to_string(kModelVersion) + ")");
  }
  FeatureSpec spec;
  spec.dim_bits = r.u32();
  spec.char_ngram_min = static_cast<int>(r.u32());
  spec.char_ngram_max = static_cast<int>(r.u32());
  char flag;
  r.raw(&flag, 1);
  spec.word_unigrams = flag != 0;
  double bias = r.f64();
  double threshold = r.f64();
  uint64_t count = r.u64();
  if (count != spec.dim()) throw ModelFormatError("weight count does not match feature spec");
  std::vector<double> weights(count);
  for (auto& w : weights) w = r.f64();
  return DetectorModel(spec, std::move(weights), bias, threshold);
}

std::string model_fingerprint(const DetectorModel& model) {
  uint64_t h = fnv1a(std::string_view("model"));
  for (double w : model.weights()) {
    uint64_t bits;
    std::memcpy(&bits, &w, sizeof(bits));
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(&bits), sizeof(bits)), h);
  }
  return std::to_string(kModelVersion) + "." + to_hex(h).substr(0, 8);
}

std::vector<LabeledDoc> labeled_from_store(const std::vector<corpus::Document>& docs) {
  std::vector<LabeledDoc> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    auto it = doc.meta.find("label");
    if (it == doc.meta.end()) continue;
    if (it->second == "malicious") out.push_back({doc, true});
    else if (it->second == "benign") out.push_back({doc, false});
  }
  return out;
}

}  // namespace spearlab::detector
