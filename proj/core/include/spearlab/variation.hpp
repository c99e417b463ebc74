#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "spearlab/corpus.hpp"

namespace spearlab::variation {

// Intent-relevant pipeline components. Output formatting (4) never takes
// part in variation: surface formatting does not change intent.
enum Component : int {
  kContextualDataAnalysis = 1,
  kAttackContextIntegration = 2,
  kStyleMimicry = 3,
};

std::string_view component_name(int component);

/// A subset of {1,2,3} with at least two members.
class ComponentSet {
 public:
  ComponentSet(std::initializer_list<int> members);
  static ComponentSet from_string(std::string_view s);  // e.g. "1+2"

  bool has(int component) const { return (mask_ & (1u << component)) != 0; }
  int size() const;
  std::vector<int> members() const;
  std::vector<int> ablated() const;  // complement within {1,2,3}
  std::string to_string() const;     // "1+2", "1+2+3"

  bool operator==(const ComponentSet& o) const { return mask_ == o.mask_; }

 private:
  unsigned mask_ = 0;
};

/// Round-robin cycle (1,2), (2,3), (1,3), (1,2,3).
const std::array<ComponentSet, 4>& combo_cycle();

struct VariantRequest {
  std::string seed_id;
  std::string seed_text;
  int index = 1;  // 1-based, <= K
  ComponentSet combo{1, 2};
  std::string instruction;
  std::string diversity_hints;
};

struct Variant {
  std::string text;
  std::string seed_id;
  ComponentSet combo{1, 2};
  int attempts = 1;
};

/// |seeds| * k requests; per seed, combo = cycle[(i-1) mod 4].
std::vector<VariantRequest> schedule(const std::vector<corpus::Document>& seeds, int k = 50);

// Deterministic instruction template: names the kept components, carries an
// ablation directive only when something is ablated, and requests exactly
// one rewritten variation perturbing lexical choice, tone and structure.
std::string build_instruction(const std::string& seed, const ComponentSet& combo,
                              const std::string& hints);

/// Rotating tone/style/perspective directive grid.
std::string diversity_hints_for(int index);

class RewriteBackend {
 public:
  virtual ~RewriteBackend() = default;
  /// Returns a raw payload; blocks are separated by lines equal to "---".
  virtual std::string rewrite(const VariantRequest& request) = 0;
};

// Offline deterministic perturbator (synonym table, sentence rotation, tone
// framing), seeded by (seed_id, index). Total: always yields a parse-valid
// single variation distinct from its seed.
class OfflineRewriteBackend : public RewriteBackend {
 public:
  std::string rewrite(const VariantRequest& request) override;
};

// POSTs {"instruction": ...} as JSON to the configured endpoint and returns
// the response body. Bearer token read from SPEARLAB_HTTP_TOKEN.
class HttpRewriteBackend : public RewriteBackend {
 public:
  explicit HttpRewriteBackend(std::string endpoint);
  std::string rewrite(const VariantRequest& request) override;

 private:
  std::string endpoint_;
};

// Exactly one non-empty variation block, not byte-equal to the seed.
// Returns the block, or nullopt when the payload fails validation.
std::optional<std::string> parse_ok(const std::string& payload, const std::string& seed_text);

/// Throws RetriesExhaustedError after max_retries failed parses.
Variant generate_variant(const VariantRequest& request, RewriteBackend& backend,
                         int max_retries = 5);

struct RunResult {
  std::vector<corpus::Document> variants;
  size_t failures = 0;
};

// Full Algorithm-1 run: schedule, generate, wrap as prompt documents with
// provenance meta (seed_id, combo, attempts, index, label=malicious).
// Failed requests are counted and skipped.
RunResult run(const std::vector<corpus::Document>& seeds, int k, RewriteBackend& backend,
              int max_retries = 5);

}  // namespace spearlab::variation
