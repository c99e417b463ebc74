#pragma once

#include <chrono>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "spearlab/config.hpp"
#include "spearlab/detector.hpp"

namespace spearlab::gateway {

enum class ScreenMode { prompt, incremental };
enum class VerdictKind { allow, block };

struct ScreenRequest {
  std::string session_id;
  std::string text;  // full prompt, or the next fragment of a session
  ScreenMode mode = ScreenMode::prompt;
};

struct ScreenResponse {
  VerdictKind verdict = VerdictKind::allow;
  double score = 0.0;
  std::optional<int> flagged_prefix;      // 1-based sentence index
  std::optional<std::string> policy_applied;  // moderation template id
};

// ---------------------------------------------------------------------------
// Moderation templates

enum class TemplateKind { policy_injection, si_cot };

struct ModerationTemplate {
  std::string id;
  TemplateKind kind = TemplateKind::policy_injection;
  std::string text;  // carries exactly one {{PROMPT}} slot
};

inline constexpr std::string_view kPromptSlot = "{{PROMPT}}";

/// Deterministic slot substitution. Throws MissingSlotError unless the
/// template has exactly one prompt slot.
std::string render_template(const ModerationTemplate& tmpl, const std::string& prompt);

/// Loads *.txt templates; ids are file stems, kind from the id prefix
/// ("policy_injection..." / "si_cot...").
std::vector<ModerationTemplate> load_templates(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Sessions: in-memory, LRU-bounded with idle eviction. A blocked session is
// kept as a terminated tombstone so replays get UnknownSession until the
// entry ages out. The store does not survive restarts.

struct SessionLimits {
  size_t max_sessions = 10000;
  std::chrono::seconds idle_ttl{900};
};

class SessionStore {
 public:
  explicit SessionStore(SessionLimits limits = {}) : limits_(limits) {}

  struct Session {
    std::string id;
    std::string history;
    bool blocked = false;
    std::chrono::steady_clock::time_point last_seen;
    std::mutex mutex;  // serializes fragments for this session
  };

  /// Fetches or creates; evicts idle/overflow entries. Never returns null.
  std::shared_ptr<Session> open(const std::string& id);
  size_t size() const;

 private:
  void evict_locked(std::chrono::steady_clock::time_point now);

  SessionLimits limits_;
  mutable std::mutex mutex_;
  std::list<std::shared_ptr<Session>> lru_;  // front = most recent
  std::map<std::string, std::list<std::shared_ptr<Session>>::iterator> index_;
};

// ---------------------------------------------------------------------------

struct ServiceConfig {
  size_t max_body_bytes = 64 * 1024;
  SessionLimits sessions;
  /// Template id reported on forwarded traffic (empty = none configured).
  std::string policy_template_id;
};

// The screening core, independent of HTTP. Prompt mode scores the whole
// text once; incremental mode appends the fragment to the session history,
// re-segments, screens sentence prefixes in order and blocks at the first
// score >= threshold. Blocked sessions terminate: further fragments throw
// UnknownSessionError. Thread-safe; fragments within one session are
// processed in arrival order.
class ScreeningService {
 public:
  ScreeningService(std::shared_ptr<const detector::DetectorModel> model,
                   ServiceConfig config);

  ScreenResponse screen(const ScreenRequest& request);

  struct Health {
    std::string status;
    std::string model_version;
  };
  Health health() const;

  size_t session_count() const { return sessions_.size(); }

 private:
  std::shared_ptr<const detector::DetectorModel> model_;
  ServiceConfig config_;
  SessionStore sessions_;
  std::string fingerprint_;
};

// ---------------------------------------------------------------------------
// HTTP server: POST /v1/screen, GET /v1/health. JSON bodies; fields exactly
// as in ScreenRequest/ScreenResponse. Oversized payloads get 413, unknown
// sessions 404, malformed requests 400. Blocked text is never forwarded.

struct GatewayConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string model_path;
  std::string templates_dir;
  ServiceConfig service;
};

GatewayConfig gateway_config_from(const spearlab::Config& cfg);

class GatewayServer {
 public:
  GatewayServer(std::shared_ptr<const detector::DetectorModel> model, GatewayConfig config);
  ~GatewayServer();

  /// Binds to config.port (or an ephemeral port when 0) and serves on a
  /// background thread. Returns the bound port.
  int start();
  void stop();
  bool is_running() const;

  ScreeningService& service() { return service_; }

 private:
  struct Impl;
  GatewayConfig config_;
  ScreeningService service_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace spearlab::gateway
