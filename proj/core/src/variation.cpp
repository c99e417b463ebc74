#include "spearlab/variation.hpp"

#include <cctype>
#include <cstdlib>
#include <unordered_map>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "spearlab/errors.hpp"
#include "spearlab/text.hpp"
#include "spearlab/util.hpp"

namespace spearlab::variation {

std::string_view component_name(int component) {
  switch (component) {
    case kContextualDataAnalysis: return "contextual data analysis";
    case kAttackContextIntegration: return "attack context integration";
    case kStyleMimicry: return "style mimicry";
  }
  return "?";
}

ComponentSet::ComponentSet(std::initializer_list<int> members) {
  for (int c : members) {
    if (c < 1 || c > 3) throw Error("component out of range: " + std::to_string(c));
    mask_ |= 1u << c;
  }
  if (size() < 2) throw Error("a component set needs at least two of {1,2,3}");
}

ComponentSet ComponentSet::from_string(std::string_view s) {
  std::initializer_list<int> empty{};
  std::vector<int> members;
  for (char c : s) {
    if (c >= '1' && c <= '3') members.push_back(c - '0');
  }
  if (members.size() == 2) return ComponentSet{members[0], members[1]};
  if (members.size() == 3) return ComponentSet{members[0], members[1], members[2]};
  throw Error("cannot parse component set: " + std::string(s));
}

int ComponentSet::size() const {
  int n = 0;
  for (int c = 1; c <= 3; ++c) {
    if (has(c)) ++n;
  }
  return n;
}

std::vector<int> ComponentSet::members() const {
  std::vector<int> out;
  for (int c = 1; c <= 3; ++c) {
    if (has(c)) out.push_back(c);
  }
  return out;
}

std::vector<int> ComponentSet::ablated() const {
  std::vector<int> out;
  for (int c = 1; c <= 3; ++c) {
    if (!has(c)) out.push_back(c);
  }
  return out;
}

std::string ComponentSet::to_string() const {
  std::string out;
  for (int c : members()) {
    if (!out.empty()) out.push_back('+');
    out += std::to_string(c);
  }
  return out;
}

const std::array<ComponentSet, 4>& combo_cycle() {
  static const std::array<ComponentSet, 4> cycle = {
      ComponentSet{1, 2}, ComponentSet{2, 3}, ComponentSet{1, 3}, ComponentSet{1, 2, 3}};
  return cycle;
}

std::string diversity_hints_for(int index) {
  static const char* tones[] = {"formal", "informal", "persuasive", "neutral"};
  static const char* styles[] = {"narrative", "directive", "descriptive"};
  static const char* perspectives[] = {"first-person", "second-person", "third-person"};
  int i = index - 1;
  std::string hints = "tone=";
  hints += tones[i % 4];
  hints += "; style=";
  hints += styles[(i / 4) % 3];
  hints += "; perspective=";
  hints += perspectives[(i / 12) % 3];
  return hints;
}

std::vector<VariantRequest> schedule(const std::vector<corpus::Document>& seeds, int k) {
  if (seeds.empty()) throw EmptyInputError("schedule: no seeds");
  if (k < 1) throw Error("schedule: k must be >= 1");
  std::vector<VariantRequest> requests;
  requests.reserve(seeds.size() * static_cast<size_t>(k));
  for (const auto& seed : seeds) {
    for (int i = 1; i <= k; ++i) {
      VariantRequest req;
      req.seed_id = seed.id;
      req.seed_text = seed.body;
      req.index = i;
      req.combo = combo_cycle()[static_cast<size_t>((i - 1) % 4)];
      req.diversity_hints = diversity_hints_for(i);
      req.instruction = build_instruction(seed.body, req.combo, req.diversity_hints);
      requests.push_back(std::move(req));
    }
  }
  return requests;
}

std::string build_instruction(const std::string& seed, const ComponentSet& combo,
                              const std::string& hints) {
  std::string inst = "Rewrite the seed prompt below as exactly one new variation.\n";
  inst += "Keep these components intact: ";
  auto members = combo.members();
  for (size_t i = 0; i < members.size(); ++i) {
    if (i) inst += "; ";
    inst += component_name(members[i]);
  }
  inst += ".\n";
  auto ablated = combo.ablated();
  if (!ablated.empty()) {
    inst += "Ablate these components: ";
    for (size_t i = 0; i < ablated.size(); ++i) {
      if (i) inst += "; ";
      inst += component_name(ablated[i]);
    }
    inst += ".\n";
  }
  inst +=
      "Perturb lexical choice, tone, and structure while keeping the result a "
      "single labelable prompt.\n";
  inst += "Diversity hints: " + hints + "\n";
  inst += "Return exactly one variation block.\n";
  inst += "Seed:\n" + seed + "\n";
  return inst;
}

std::optional<std::string> parse_ok(const std::string& payload, const std::string& seed_text) {
  std::vector<std::string> blocks;
  std::string current;
  for (const auto& line : split_lines(payload)) {
    if (trim(line) == "---") {
      if (!trim(current).empty()) blocks.push_back(trim(current));
      current.clear();
    } else {
      current += line;
      current += '\n';
    }
  }
  if (!trim(current).empty()) blocks.push_back(trim(current));
  if (blocks.size() != 1) return std::nullopt;
  if (blocks[0].empty() || blocks[0] == seed_text) return std::nullopt;
  return blocks[0];
}

// ---------------------------------------------------------------------------

namespace {

const std::unordered_map<std::string, std::vector<std::string>>& synonym_table() {
  static const std::unordered_map<std::string, std::vector<std::string>> table = {
      {"write", {"draft", "compose", "put together"}},
      {"message", {"note", "memo", "letter"}},
      {"email", {"mail", "note", "correspondence"}},
      {"send", {"deliver", "forward", "dispatch"}},
      {"quick", {"prompt", "swift", "rapid"}},
      {"quickly", {"promptly", "swiftly", "without delay"}},
      {"important", {"essential", "critical", "pressing"}},
      {"urgent", {"time-sensitive", "pressing", "immediate"}},
      {"please", {"kindly", "do", "please do"}},
      {"check", {"review", "inspect", "look over"}},
      {"verify", {"confirm", "validate", "double-check"}},
      {"account", {"profile", "login", "membership"}},
      {"click", {"open", "follow", "visit"}},
      {"link", {"url", "address", "pointer"}},
      {"recent", {"latest", "newest", "fresh"}},
      {"friend", {"contact", "acquaintance", "peer"}},
      {"details", {"particulars", "specifics", "information"}},
      {"offer", {"deal", "proposal", "opportunity"}},
      {"event", {"gathering", "occasion", "meetup"}},
      {"trip", {"journey", "outing", "excursion"}},
      {"photo", {"picture", "snapshot", "image"}},
      {"great", {"excellent", "wonderful", "superb"}},
      {"new", {"brand-new", "fresh", "recent"}},
      {"share", {"pass along", "post", "circulate"}},
      {"ask", {"request", "invite", "prompt"}},
      {"help", {"assist", "support", "aid"}},
      {"team", {"group", "crew", "staff"}},
      {"project", {"initiative", "effort", "undertaking"}},
      {"meeting", {"sync", "call", "session"}},
      {"tomorrow", {"the next day", "shortly", "soon"}},
      {"today", {"this very day", "right away", "presently"}},
      {"update", {"refresh", "revise", "amend"}},
      {"reference", {"mention", "cite", "point to"}},
      {"style", {"voice", "register", "manner"}},
      {"interest", {"hobby", "passion", "pursuit"}},
      {"interests", {"hobbies", "passions", "pursuits"}},
      {"location", {"place", "area", "locale"}},
      {"personal", {"individual", "private", "tailored"}},
      {"reward", {"prize", "bonus", "perk"}},
      {"limited", {"scarce", "restricted", "exclusive"}},
  };
  return table;
}

std::string apply_synonyms(const std::string& body, Rng& rng) {
  std::string out;
  out.reserve(body.size());
  size_t i = 0;
  while (i < body.size()) {
    unsigned char c = static_cast<unsigned char>(body[i]);
    if (std::isalpha(c) == 0) {
      out.push_back(body[i++]);
      continue;
    }
    size_t start = i;
    while (i < body.size() && std::isalpha(static_cast<unsigned char>(body[i])) != 0) ++i;
    std::string word = body.substr(start, i - start);
    std::string key = text::casefold(word);
    auto it = synonym_table().find(key);
    if (it == synonym_table().end()) {
      out += word;
      continue;
    }
    std::string repl = it->second[rng.bounded(it->second.size())];
    if (std::isupper(static_cast<unsigned char>(word[0])) != 0 && !repl.empty()) {
      repl[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(repl[0])));
    }
    out += repl;
  }
  return out;
}

std::string rotate_sentences(const std::string& body, Rng& rng) {
  auto sentences = corpus::segment_text(body);
  if (sentences.size() < 2) return body;
  size_t shift = rng.bounded(sentences.size());
  if (shift == 0) shift = 1;
  std::string out;
  for (size_t i = 0; i < sentences.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += sentences[(i + shift) % sentences.size()].text;
  }
  return out;
}

std::string tone_framing(const std::string& hints, Rng& rng) {
  // hints look like "tone=formal; style=narrative; perspective=first-person"
  std::string tone = "neutral", style = "directive", perspective = "second-person";
  auto grab = [&](const char* key) -> std::string {
    std::string k = std::string(key) + "=";
    size_t p = hints.find(k);
    if (p == std::string::npos) return "";
    size_t end = hints.find(';', p);
    return trim(hints.substr(p + k.size(), end == std::string::npos ? std::string::npos
                                                                    : end - p - k.size()));
  };
  if (auto t = grab("tone"); !t.empty()) tone = t;
  if (auto s = grab("style"); !s.empty()) style = s;
  if (auto p = grab("perspective"); !p.empty()) perspective = p;
  static const char* frames[] = {
      "Keeping a %TONE% tone and a %STYLE%, %PERSP% framing:",
      "In a %TONE%, %STYLE% register written from a %PERSP% viewpoint:",
      "Recast with %TONE% phrasing, %STYLE% structure, and a %PERSP% voice:",
  };
  std::string frame = frames[rng.bounded(3)];
  auto replace_all = [](std::string s, std::string_view from, std::string_view to) {
    size_t p = 0;
    while ((p = s.find(from, p)) != std::string::npos) {
      s.replace(p, from.size(), to);
      p += to.size();
    }
    return s;
  };
  frame = replace_all(frame, "%TONE%", tone);
  frame = replace_all(frame, "%STYLE%", style);
  frame = replace_all(frame, "%PERSP%", perspective);
  return frame;
}

}  // namespace

std::string OfflineRewriteBackend::rewrite(const VariantRequest& request) {
  Rng rng(fnv1a(request.seed_id + "#" + std::to_string(request.index)));
  std::string body = apply_synonyms(request.seed_text, rng);
  body = rotate_sentences(body, rng);
  // The framing prefix guarantees the variant never byte-equals its seed.
  std::string framed = tone_framing(request.diversity_hints, rng) + " " + body;
  return framed + "\n";
}

HttpRewriteBackend::HttpRewriteBackend(std::string endpoint)
    : endpoint_(std::move(endpoint)) {}

std::string HttpRewriteBackend::rewrite(const VariantRequest& request) {
  // endpoint like http://host:port/path
  std::string url = endpoint_;
  std::string path = "/";
  size_t scheme = url.find("://");
  size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  size_t slash = url.find('/', host_start);
  if (slash != std::string::npos) {
    path = url.substr(slash);
    url = url.substr(0, slash);
  }
  httplib::Client client(url);
  client.set_read_timeout(30, 0);
  httplib::Headers headers;
  if (const char* token = std::getenv("SPEARLAB_HTTP_TOKEN"); token != nullptr) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  nlohmann::json payload = {{"instruction", request.instruction}};
  auto res = client.Post(path, headers, payload.dump(), "application/json");
  if (!res || res->status != 200) {
    throw Error("rewrite backend HTTP error" +
                (res ? " (status " + std::to_string(res->status) + ")" : std::string()));
  }
  return res->body;
}

Variant generate_variant(const VariantRequest& request, RewriteBackend& backend,
                         int max_retries) {
  for (int attempt = 1; attempt <= max_retries; ++attempt) {
    std::string payload = backend.rewrite(request);
    if (auto v = parse_ok(payload, request.seed_text)) {
      Variant variant;
      variant.text = std::move(*v);
      variant.seed_id = request.seed_id;
      variant.combo = request.combo;
      variant.attempts = attempt;
      return variant;
    }
  }
  throw RetriesExhaustedError(
      "no parse-valid variation for seed " + request.seed_id + " index " +
          std::to_string(request.index) + " after " + std::to_string(max_retries) + " attempts",
      max_retries);
}

RunResult run(const std::vector<corpus::Document>& seeds, int k, RewriteBackend& backend,
              int max_retries) {
  RunResult result;
  for (const auto& req : schedule(seeds, k)) {
    try {
      Variant v = generate_variant(req, backend, max_retries);
      corpus::Document doc;
      doc.source = corpus::Source::prompt;
      doc.body = v.text;
      doc.meta["seed_id"] = v.seed_id;
      doc.meta["combo"] = v.combo.to_string();
      doc.meta["attempts"] = std::to_string(v.attempts);
      doc.meta["index"] = std::to_string(req.index);
      doc.meta["label"] = "malicious";
      doc.id = to_hex(fnv1a(v.seed_id + "#" + std::to_string(req.index) + "\x1f" +
                            normalize_lf(doc.body)));
      result.variants.push_back(std::move(doc));
    } catch (const RetriesExhaustedError&) {
      ++result.failures;
    }
  }
  return result;
}

}  // namespace spearlab::variation
