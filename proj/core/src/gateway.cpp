#include "spearlab/gateway.hpp"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "spearlab/errors.hpp"
#include "spearlab/util.hpp"

namespace spearlab::gateway {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Templates

std::string render_template(const ModerationTemplate& tmpl, const std::string& prompt) {
  size_t first = tmpl.text.find(kPromptSlot);
  if (first == std::string::npos) {
    throw MissingSlotError("template " + tmpl.id + " has no " + std::string(kPromptSlot) +
                           " slot");
  }
  if (tmpl.text.find(kPromptSlot, first + 1) != std::string::npos) {
    throw MissingSlotError("template " + tmpl.id + " has more than one prompt slot");
  }
  std::string out = tmpl.text;
  out.replace(first, kPromptSlot.size(), prompt);
  return out;
}

std::vector<ModerationTemplate> load_templates(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("templates directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ModerationTemplate> templates;
  for (const auto& f : files) {
    ModerationTemplate t;
    t.id = f.stem().string();
    if (t.id.rfind("si_cot", 0) == 0) t.kind = TemplateKind::si_cot;
    else if (t.id.rfind("policy_injection", 0) == 0) t.kind = TemplateKind::policy_injection;
    else throw Error("template id must start with policy_injection or si_cot: " + t.id);
    t.text = read_file(f);
    templates.push_back(std::move(t));
  }
  return templates;
}

// ---------------------------------------------------------------------------
// Session store

std::shared_ptr<SessionStore::Session> SessionStore::open(const std::string& id) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto now = std::chrono::steady_clock::now();
  evict_locked(now);
  auto it = index_.find(id);
  if (it != index_.end()) {
    auto session = *it->second;
    lru_.erase(it->second);
    lru_.push_front(session);
    index_[id] = lru_.begin();
    session->last_seen = now;
    return session;
  }
  auto session = std::make_shared<Session>();
  session->id = id;
  session->last_seen = now;
  lru_.push_front(session);
  index_[id] = lru_.begin();
  if (lru_.size() > limits_.max_sessions) {
    index_.erase(lru_.back()->id);
    lru_.pop_back();
  }
  return session;
}

size_t SessionStore::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return lru_.size();
}

void SessionStore::evict_locked(std::chrono::steady_clock::time_point now) {
  while (!lru_.empty() && now - lru_.back()->last_seen > limits_.idle_ttl) {
    index_.erase(lru_.back()->id);
    lru_.pop_back();
  }
}

// ---------------------------------------------------------------------------
// Screening service

ScreeningService::ScreeningService(std::shared_ptr<const detector::DetectorModel> model,
                                   ServiceConfig config)
    : model_(std::move(model)),
      config_(config),
      sessions_(config.sessions),
      fingerprint_(detector::model_fingerprint(*model_)) {}

ScreenResponse ScreeningService::screen(const ScreenRequest& request) {
  if (request.text.size() > config_.max_body_bytes) {
    throw PayloadTooLargeError("fragment of " + std::to_string(request.text.size()) +
                               " bytes exceeds cap of " +
                               std::to_string(config_.max_body_bytes));
  }

  auto to_response = [&](const detector::ScreenVerdict& v) {
    ScreenResponse resp;
    resp.verdict = v.malicious ? VerdictKind::block : VerdictKind::allow;
    resp.score = v.score;
    resp.flagged_prefix = v.flagged_prefix;
    if (!v.malicious && !config_.policy_template_id.empty()) {
      resp.policy_applied = config_.policy_template_id;
    }
    return resp;
  };

  corpus::Document doc;
  doc.source = corpus::Source::prompt;

  if (request.mode == ScreenMode::prompt) {
    doc.body = request.text;
    return to_response(detector::screen(*model_, doc, detector::ScreenMode::full));
  }

  auto session = sessions_.open(request.session_id);
  std::lock_guard<std::mutex> lock(session->mutex);
  if (session->blocked) {
    throw UnknownSessionError("session " + request.session_id +
                              " was terminated by a block verdict");
  }
  if (!session->history.empty()) session->history += '\n';
  session->history += request.text;
  if (session->history.size() > config_.max_body_bytes) {
    session->blocked = true;  // oversized sessions terminate too
    throw PayloadTooLargeError("session history exceeds cap of " +
                               std::to_string(config_.max_body_bytes) + " bytes");
  }
  doc.body = session->history;
  auto verdict = detector::screen(*model_, doc, detector::ScreenMode::incremental);
  if (verdict.malicious) session->blocked = true;
  return to_response(verdict);
}

ScreeningService::Health ScreeningService::health() const {
  return {"ok", fingerprint_};
}

// ---------------------------------------------------------------------------
// HTTP layer

GatewayConfig gateway_config_from(const spearlab::Config& cfg) {
  GatewayConfig g;
  g.host = cfg.get_or("gateway.host", g.host);
  g.port = static_cast<int>(cfg.get_int("gateway.port", g.port));
  g.model_path = cfg.get_or("gateway.model_path", "");
  g.templates_dir = cfg.get_or("gateway.templates_dir", "");
  g.service.max_body_bytes =
      static_cast<size_t>(cfg.get_int("gateway.max_body_bytes",
                                      static_cast<int64_t>(g.service.max_body_bytes)));
  g.service.sessions.max_sessions = static_cast<size_t>(
      cfg.get_int("gateway.max_sessions",
                  static_cast<int64_t>(g.service.sessions.max_sessions)));
  g.service.sessions.idle_ttl =
      std::chrono::seconds(cfg.get_int("gateway.idle_ttl_seconds", 900));
  g.service.policy_template_id = cfg.get_or("gateway.policy_template", "");
  return g;
}

struct GatewayServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

namespace {

ScreenMode mode_from(const std::string& s) {
  if (s == "prompt") return ScreenMode::prompt;
  if (s == "incremental") return ScreenMode::incremental;
  throw Error("mode must be prompt or incremental, got: " + s);
}

json response_json(const ScreenResponse& r) {
  json j;
  j["verdict"] = r.verdict == VerdictKind::block ? "block" : "allow";
  j["score"] = r.score;
  if (r.flagged_prefix) j["flagged_prefix"] = *r.flagged_prefix;
  else j["flagged_prefix"] = nullptr;
  if (r.policy_applied) j["policy_applied"] = *r.policy_applied;
  else j["policy_applied"] = nullptr;
  return j;
}

}  // namespace

GatewayServer::GatewayServer(std::shared_ptr<const detector::DetectorModel> model,
                             GatewayConfig config)
    : config_(std::move(config)),
      service_(std::move(model), config_.service),
      impl_(std::make_unique<Impl>()) {
  impl_->server.set_payload_max_length(config_.service.max_body_bytes * 2);

  impl_->server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    auto h = service_.health();
    res.set_content(json{{"status", h.status}, {"model_version", h.model_version}}.dump(),
                    "application/json");
  });

  impl_->server.Post("/v1/screen", [this](const httplib::Request& req, httplib::Response& res) {
    auto fail = [&](int status, const std::string& error) {
      res.status = status;
      res.set_content(json{{"error", error}}.dump(), "application/json");
    };
    if (req.body.size() > config_.service.max_body_bytes) {
      fail(413, "payload_too_large");
      return;
    }
    ScreenRequest request;
    try {
      json j = json::parse(req.body);
      request.session_id = j.value("session_id", "");
      request.text = j.at("text").get<std::string>();
      request.mode = mode_from(j.value("mode", "prompt"));
      if (request.mode == ScreenMode::incremental && request.session_id.empty()) {
        fail(400, "incremental mode needs a session_id");
        return;
      }
    } catch (const std::exception& e) {
      fail(400, std::string("bad request: ") + e.what());
      return;
    }
    try {
      res.set_content(response_json(service_.screen(request)).dump(), "application/json");
    } catch (const UnknownSessionError& e) {
      fail(404, e.what());
    } catch (const PayloadTooLargeError&) {
      fail(413, "payload_too_large");
    } catch (const std::exception& e) {
      fail(500, e.what());
    }
  });
}

GatewayServer::~GatewayServer() { stop(); }

int GatewayServer::start() {
  if (config_.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(config_.host);
  } else {
    if (!impl_->server.bind_to_port(config_.host, config_.port)) {
      throw Error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    impl_->port = config_.port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void GatewayServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

bool GatewayServer::is_running() const { return impl_ && impl_->server.is_running(); }

}  // namespace spearlab::gateway
