#include "spearlab/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "spearlab/csv.hpp"
#include "spearlab/errors.hpp"
#include "spearlab/text.hpp"
#include "spearlab/util.hpp"

namespace spearlab::corpus {

using nlohmann::json;

std::string_view source_name(Source s) {
  switch (s) {
    case Source::email: return "email";
    case Source::prompt: return "prompt";
    case Source::post: return "post";
  }
  return "prompt";
}

Source source_from_name(std::string_view name) {
  if (name == "email") return Source::email;
  if (name == "prompt") return Source::prompt;
  if (name == "post") return Source::post;
  throw Error("unknown document source: " + std::string(name));
}

const std::vector<std::string> kAttackCategories = {
    "baiting",       "scareware",    "honey_trap",             "quid_pro_quo",
    "tailgating",    "impersonation", "emotional_exploitation",
};

const std::vector<std::string> kContextDimensions = {
    "location", "relationships", "interests", "sentiment", "events",
};

bool is_attack_category(std::string_view v) {
  return std::find(kAttackCategories.begin(), kAttackCategories.end(), v) !=
         kAttackCategories.end();
}

bool is_context_dimension(std::string_view v) {
  return std::find(kContextDimensions.begin(), kContextDimensions.end(), v) !=
         kContextDimensions.end();
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

void validate_meta(const Document& doc) {
  auto it = doc.meta.find("attack_category");
  if (it != doc.meta.end() && !is_attack_category(it->second)) {
    throw Error("document " + doc.id + ": invalid attack_category '" + it->second + "'");
  }
  it = doc.meta.find("context_dimension");
  if (it != doc.meta.end() && !is_context_dimension(it->second)) {
    throw Error("document " + doc.id + ": invalid context_dimension '" + it->second + "'");
  }
}

}  // namespace

std::optional<std::string> RawEmail::header(std::string_view name) const {
  for (const auto& [k, v] : headers) {
    if (iequals(k, name)) return v;
  }
  return std::nullopt;
}

bool RawEmail::has_header(std::string_view name) const {
  return header(name).has_value();
}

// ---------------------------------------------------------------------------

RawEmail parse_rfc5322(std::string_view raw) {
  if (raw.empty()) throw EmptyInputError("parse_rfc5322: empty input");

  RawEmail email;
  size_t pos = 0;
  const size_t n = raw.size();
  bool saw_blank = false;

  while (pos < n) {
    size_t eol = raw.find('\n', pos);
    size_t line_end = (eol == std::string_view::npos) ? n : eol;
    std::string_view line = raw.substr(pos, line_end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    size_t next = (eol == std::string_view::npos) ? n : eol + 1;

    if (line.empty()) {
      saw_blank = true;
      pos = next;
      break;
    }
    if (line[0] == ' ' || line[0] == '\t') {
      // Folded continuation: unfolding removes the CRLF, keeping the WSP.
      if (email.headers.empty()) {
        email.parse_warnings.push_back("continuation line before any header: " +
                                       std::string(trim(line)));
      } else {
        email.headers.back().second += std::string(line);
      }
    } else {
      size_t colon = line.find(':');
      if (colon == std::string_view::npos) {
        email.parse_warnings.push_back("malformed header (no colon): " + std::string(line));
      } else {
        std::string name(line.substr(0, colon));
        std::string_view value = line.substr(colon + 1);
        while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) {
          value.remove_prefix(1);
        }
        email.headers.emplace_back(std::move(name), std::string(value));
      }
    }
    pos = next;
  }

  if (saw_blank) email.body_raw = std::string(raw.substr(pos));
  return email;
}

bool is_reply_or_forward(const RawEmail& email) {
  if (email.has_header("In-Reply-To") || email.has_header("References")) return true;
  auto subject = email.header("Subject");
  if (!subject) return false;
  std::string_view s(*subject);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())) != 0) {
    s.remove_prefix(1);
  }
  size_t i = 0;
  while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i])) != 0) ++i;
  if (i == 0) return false;
  std::string token = text::casefold(s.substr(0, i));
  if (token != "re" && token != "fw" && token != "fwd") return false;
  // Whole-token rule: the prefix only counts when a colon follows, so
  // "REgarding budget" stays an original.
  size_t j = i;
  while (j < s.size() && (s[j] == ' ' || s[j] == '\t')) ++j;
  return j < s.size() && s[j] == ':';
}

std::vector<RawEmail> filter_originals(const std::vector<RawEmail>& emails) {
  std::vector<RawEmail> kept;
  kept.reserve(emails.size());
  for (const auto& e : emails) {
    if (!is_reply_or_forward(e)) kept.push_back(e);
  }
  return kept;
}

// ---------------------------------------------------------------------------

namespace {

// Minimal multipart handling: keep text/plain parts (or parts with no
// Content-Type), skip everything else. Not a full MIME decoder.
std::string select_text_parts(const RawEmail& email) {
  auto ctype = email.header("Content-Type");
  if (!ctype) return email.body_raw;
  std::string folded = text::casefold(*ctype);
  if (folded.find("multipart") == std::string::npos) {
    if (folded.find("text/plain") != std::string::npos ||
        folded.find("text/") == std::string::npos) {
      return email.body_raw;
    }
    return email.body_raw;  // single non-multipart part: keep as-is
  }
  size_t bpos = folded.find("boundary=");
  if (bpos == std::string::npos) return email.body_raw;
  std::string boundary = trim(ctype->substr(bpos + 9));
  if (!boundary.empty() && boundary.front() == '"') {
    size_t close = boundary.find('"', 1);
    boundary = boundary.substr(1, close == std::string::npos ? std::string::npos : close - 1);
  } else {
    size_t semi = boundary.find(';');
    if (semi != std::string::npos) boundary = boundary.substr(0, semi);
  }
  if (boundary.empty()) return email.body_raw;

  std::string marker = "--" + boundary;
  std::vector<std::string> lines = split_lines(email.body_raw);
  std::vector<std::string> kept;
  std::vector<std::string> part;
  bool in_part = false;
  auto flush = [&] {
    if (part.empty()) return;
    std::string joined;
    for (const auto& l : part) {
      joined += l;
      joined += '\n';
    }
    RawEmail sub = parse_rfc5322(joined);
    auto sub_type = sub.header("Content-Type");
    bool is_text = !sub_type || text::casefold(*sub_type).find("text/plain") != std::string::npos;
    if (is_text && !trim(sub.body_raw).empty()) kept.push_back(trim(sub.body_raw));
    part.clear();
  };
  for (const auto& line : lines) {
    if (line.rfind(marker, 0) == 0) {
      if (in_part) flush();
      in_part = line != marker + "--";
      continue;
    }
    if (in_part) part.push_back(line);
  }
  if (in_part) flush();
  if (kept.empty()) return email.body_raw;
  std::string out;
  for (size_t i = 0; i < kept.size(); ++i) {
    if (i) out += "\n\n";
    out += kept[i];
  }
  return out;
}

std::string join_qp_soft_breaks(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '=' && i + 1 < s.size()) {
      if (s[i + 1] == '\n') {
        ++i;
        continue;
      }
      if (s[i + 1] == '\r' && i + 2 < s.size() && s[i + 2] == '\n') {
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string decode_qp_escapes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '=' && i + 2 < s.size()) {
      int hi = hex_digit(s[i + 1]), lo = hex_digit(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

bool is_signature_delimiter(std::string_view line) {
  if (trim(line) == "--") return true;
  size_t run = 0;
  for (char c : line) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) == 0 && std::isspace(u) == 0) {
      if (++run >= 10) return true;
    } else {
      run = 0;
    }
  }
  return false;
}

std::string strip_signature_block(std::string_view body) {
  std::vector<std::string> lines = split_lines(body);
  std::string out;
  for (const auto& line : lines) {
    if (is_signature_delimiter(line)) break;
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace

Document clean_email(const RawEmail& email) {
  std::string body = select_text_parts(email);
  body = join_qp_soft_breaks(body);
  auto cte = email.header("Content-Transfer-Encoding");
  if (cte && text::casefold(trim(*cte)) == "quoted-printable") {
    body = decode_qp_escapes(body);
  }
  body = normalize_lf(body);
  body = strip_signature_block(body);
  body = trim(body);
  if (body.empty()) {
    auto subj = email.header("Subject");
    throw EmptyAfterCleaningError("empty body after cleaning" +
                                  (subj ? " (subject: " + *subj + ")" : std::string()));
  }
  Document doc;
  doc.source = Source::email;
  auto subj = email.header("Subject");
  if (subj && !trim(*subj).empty()) doc.subject = trim(*subj);
  doc.body = body;
  doc.id = document_id(doc.source, doc.subject, doc.body);
  return doc;
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kAbbrevStoplist = {
    "dr.", "mr.", "mrs.", "ms.", "st.", "vs.", "e.g.", "i.e.", "etc.",
};

bool ends_with_abbreviation(std::string_view body, size_t dot_pos) {
  // Token ending at body[dot_pos] == '.'; scan back over letters and dots.
  size_t start = dot_pos;
  while (start > 0) {
    unsigned char c = static_cast<unsigned char>(body[start - 1]);
    if (std::isalpha(c) != 0 || c == '.') --start;
    else break;
  }
  std::string token = text::casefold(body.substr(start, dot_pos - start + 1));
  for (const auto& abbr : kAbbrevStoplist) {
    if (token == abbr) return true;
    // "e.g." scanned back from its last dot includes the whole token already.
  }
  return false;
}

bool is_quote_char(char c) {
  return c == '"' || c == '\'' || c == '(' || c == '[';
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

std::vector<Sentence> segment_text(std::string_view body) {
  std::vector<Sentence> sentences;
  const size_t n = body.size();
  size_t pos = 0;

  auto emit = [&](size_t start, size_t end) {
    // Trim whitespace into the inter-sentence gap.
    while (start < end && std::isspace(static_cast<unsigned char>(body[start])) != 0) ++start;
    while (end > start && std::isspace(static_cast<unsigned char>(body[end - 1])) != 0) --end;
    if (end <= start) return;
    Sentence s;
    s.index = static_cast<int>(sentences.size());
    s.start = start;
    s.end = end;
    s.text = std::string(body.substr(start, end - start));
    sentences.push_back(std::move(s));
  };

  size_t sent_start = 0;
  size_t i = 0;
  while (i < n) {
    char c = body[i];
    if (is_terminator(c)) {
      size_t term_end = i;
      while (term_end + 1 < n && is_terminator(body[term_end + 1])) ++term_end;
      bool abbreviation = (c == '.' && term_end == i && ends_with_abbreviation(body, i));
      if (!abbreviation) {
        if (term_end + 1 >= n) {
          emit(sent_start, n);
          sent_start = n;
          break;
        }
        if (std::isspace(static_cast<unsigned char>(body[term_end + 1])) != 0) {
          size_t next = term_end + 1;
          while (next < n && std::isspace(static_cast<unsigned char>(body[next])) != 0) ++next;
          bool boundary = next >= n;
          if (!boundary) {
            unsigned char nc = static_cast<unsigned char>(body[next]);
            boundary = std::isupper(nc) != 0 || std::isdigit(nc) != 0 ||
                       is_quote_char(static_cast<char>(nc));
          }
          if (boundary) {
            emit(sent_start, term_end + 1);
            sent_start = next;
            i = next;
            continue;
          }
        }
      }
      i = term_end + 1;
      continue;
    }
    if (c == '\n') {
      // A blank line terminates the current sentence.
      size_t j = i + 1;
      while (j < n && (body[j] == ' ' || body[j] == '\t')) ++j;
      if (j < n && body[j] == '\n') {
        emit(sent_start, i);
        while (j < n && std::isspace(static_cast<unsigned char>(body[j])) != 0) ++j;
        sent_start = j;
        i = j;
        continue;
      }
    }
    ++i;
  }
  if (sent_start < n) emit(sent_start, n);
  return sentences;
}

Document segment_sentences(Document doc) {
  doc.sentences = segment_text(doc.body);
  return doc;
}

std::string document_id(Source source, const std::optional<std::string>& subject,
                        std::string_view body) {
  std::string key(source_name(source));
  key.push_back('\x1f');
  if (subject) key += *subject;
  key.push_back('\x1f');
  key += normalize_lf(body);
  return to_hex(fnv1a(key));
}

// ---------------------------------------------------------------------------

std::string to_json_line(const Document& doc) {
  json j;
  j["id"] = doc.id;
  j["source"] = std::string(source_name(doc.source));
  if (doc.subject) j["subject"] = *doc.subject;
  else j["subject"] = nullptr;
  j["body"] = doc.body;
  json sents = json::array();
  for (const auto& s : doc.sentences) {
    sents.push_back({{"index", s.index}, {"start", s.start}, {"end", s.end}, {"text", s.text}});
  }
  j["sentences"] = std::move(sents);
  j["meta"] = doc.meta;
  return j.dump();
}

Document from_json_line(std::string_view line) {
  json j = json::parse(line);
  Document doc;
  doc.id = j.at("id").get<std::string>();
  doc.source = source_from_name(j.at("source").get<std::string>());
  if (j.contains("subject") && !j["subject"].is_null()) {
    doc.subject = j["subject"].get<std::string>();
  }
  doc.body = j.at("body").get<std::string>();
  if (j.contains("sentences")) {
    for (const auto& js : j["sentences"]) {
      Sentence s;
      s.index = js.at("index").get<int>();
      s.start = js.at("start").get<size_t>();
      s.end = js.at("end").get<size_t>();
      s.text = js.at("text").get<std::string>();
      doc.sentences.push_back(std::move(s));
    }
  }
  if (j.contains("meta")) {
    for (auto it = j["meta"].begin(); it != j["meta"].end(); ++it) {
      doc.meta[it.key()] = it.value().get<std::string>();
    }
  }
  validate_meta(doc);
  return doc;
}

void write_store(const std::filesystem::path& p, const std::vector<Document>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    validate_meta(doc);
    out += to_json_line(doc);
    out += '\n';
  }
  write_file(p, out);
}

std::vector<Document> read_store(const std::filesystem::path& p) {
  std::vector<Document> docs;
  for (const auto& line : split_lines(read_file(p))) {
    if (trim(line).empty()) continue;
    docs.push_back(from_json_line(line));
  }
  return docs;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir,
                                                std::string_view ext) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (!ext.empty() && entry.path().extension() != ext) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Appends docs whose id is not already present; counts duplicates.
void append_unique(std::vector<Document>& docs, std::set<std::string>& seen,
                   Document doc, IngestReport* report) {
  if (!seen.insert(doc.id).second) {
    if (report) ++report->duplicates;
    return;
  }
  docs.push_back(std::move(doc));
}

template <typename F>
void parallel_for(size_t count, int jobs, F&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::atomic<size_t> next{0};
  size_t nthreads = std::min<size_t>(static_cast<size_t>(jobs), count);
  for (size_t t = 0; t < nthreads; ++t) {
    workers.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace

std::vector<Document> ingest_email_dir(const std::filesystem::path& dir,
                                       const EmailIngestOptions& opts,
                                       IngestReport* report) {
  auto files = sorted_files(dir, ".eml");
  struct Slot {
    std::optional<Document> doc;
    bool excluded = false;
    bool rejected = false;
    std::vector<std::string> warnings;
  };
  std::vector<Slot> slots(files.size());

  parallel_for(files.size(), opts.jobs, [&](size_t i) {
    Slot& slot = slots[i];
    std::string raw = read_file(files[i]);
    RawEmail email = parse_rfc5322(raw);
    for (const auto& w : email.parse_warnings) {
      slot.warnings.push_back(files[i].filename().string() + ": " + w);
    }
    if (opts.filter_replies && is_reply_or_forward(email)) {
      slot.excluded = true;
      return;
    }
    try {
      Document doc = clean_email(email);
      doc.meta["file"] = files[i].filename().string();
      slot.doc = std::move(doc);
    } catch (const EmptyAfterCleaningError& e) {
      slot.rejected = true;
      slot.warnings.push_back(files[i].filename().string() + ": rejected: " + e.what());
    }
  });

  std::vector<Document> docs;
  std::set<std::string> seen;
  for (auto& slot : slots) {
    if (report) {
      ++report->files_seen;
      if (slot.doc || slot.excluded || slot.rejected) ++report->parsed;
      if (slot.excluded) ++report->excluded_replies;
      if (slot.rejected) ++report->rejected_empty;
      for (auto& w : slot.warnings) report->warnings.push_back(std::move(w));
    }
    if (slot.doc) {
      // The id hashes subject+body only; a file copy is the same document.
      Document doc = std::move(*slot.doc);
      std::string id = document_id(doc.source, doc.subject, doc.body);
      doc.id = id;
      append_unique(docs, seen, std::move(doc), report);
    }
  }
  return docs;
}

std::vector<Document> ingest_prompts(const std::filesystem::path& path,
                                     IngestReport* report) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  auto add_prompt = [&](std::string body, const std::string& origin) {
    body = trim(normalize_lf(body));
    if (body.empty()) {
      if (report) ++report->rejected_empty;
      return;
    }
    Document doc;
    doc.source = Source::prompt;
    doc.body = std::move(body);
    doc.meta["origin"] = origin;
    doc.id = document_id(doc.source, doc.subject, doc.body);
    if (report) ++report->parsed;
    append_unique(docs, seen, std::move(doc), report);
  };

  if (std::filesystem::is_directory(path)) {
    for (const auto& f : sorted_files(path, ".txt")) {
      if (report) ++report->files_seen;
      add_prompt(read_file(f), f.filename().string());
    }
  } else {
    if (report) ++report->files_seen;
    auto lines = split_lines(read_file(path));
    for (size_t i = 0; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      add_prompt(lines[i], path.filename().string() + ":" + std::to_string(i + 1));
    }
  }
  return docs;
}

std::vector<Document> ingest_posts_csv(const std::filesystem::path& file,
                                       IngestReport* report) {
  csv::Table table = csv::parse(read_file(file));
  int c_user = table.column("user_id");
  int c_caption = table.column("caption");
  int c_image = table.column("image_description");
  int c_ts = table.column("timestamp");
  if (c_user < 0 || c_caption < 0 || c_image < 0 || c_ts < 0) {
    throw Error("posts CSV must have columns user_id,caption,image_description,timestamp");
  }
  std::vector<Document> docs;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    if (report) ++report->files_seen;
    std::string caption = trim(row[static_cast<size_t>(c_caption)]);
    std::string image = trim(row[static_cast<size_t>(c_image)]);
    std::string body = caption;
    if (!image.empty()) {
      if (!body.empty()) body += '\n';
      body += image;
    }
    body = trim(normalize_lf(body));
    if (body.empty()) {
      if (report) ++report->rejected_empty;
      continue;
    }
    Document doc;
    doc.source = Source::post;
    doc.body = std::move(body);
    doc.meta["user_id"] = row[static_cast<size_t>(c_user)];
    doc.meta["timestamp"] = row[static_cast<size_t>(c_ts)];
    // Timestamp participates in the id so that identical twin posts at
    // different times remain distinct documents.
    doc.id = to_hex(fnv1a(doc.meta["user_id"] + "\x1f" + doc.meta["timestamp"] + "\x1f" +
                          normalize_lf(doc.body)));
    if (report) ++report->parsed;
    append_unique(docs, seen, std::move(doc), report);
  }
  return docs;
}

}  // namespace spearlab::corpus
