#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spearlab::corpus {

enum class Source { email, prompt, post };

std::string_view source_name(Source s);
Source source_from_name(std::string_view name);

/// The seven attack-type taxonomy values a document's meta may carry.
extern const std::vector<std::string> kAttackCategories;
/// The five contextual dimensions.
extern const std::vector<std::string> kContextDimensions;

bool is_attack_category(std::string_view v);
bool is_context_dimension(std::string_view v);

struct Sentence {
  int index = 0;          // 0-based ordinal
  std::string text;       // equals body.substr(start, end - start)
  size_t start = 0;       // character offsets into body, [start, end)
  size_t end = 0;
};

struct Document {
  std::string id;
  Source source = Source::prompt;
  std::optional<std::string> subject;
  std::string body;
  std::vector<Sentence> sentences;
  std::map<std::string, std::string> meta;
};

struct RawEmail {
  std::vector<std::pair<std::string, std::string>> headers;  // original order
  std::string body_raw;                                      // verbatim bytes
  std::vector<std::string> parse_warnings;

  /// Case-insensitive lookup, first match.
  std::optional<std::string> header(std::string_view name) const;
  bool has_header(std::string_view name) const;
};

// ---------------------------------------------------------------------------
// Parsing and cleaning

/// Splits headers from body at the first empty line and unfolds folded
/// header values. Throws EmptyInputError on an empty byte stream; header
/// lines without a colon become parse_warnings and parsing continues.
RawEmail parse_rfc5322(std::string_view raw);

/// True when the message is a reply or forward: Subject starts with a
/// whole-token "re:"/"fw:"/"fwd:" prefix (case-insensitive) or the message
/// carries In-Reply-To / References headers.
bool is_reply_or_forward(const RawEmail& email);

std::vector<RawEmail> filter_originals(const std::vector<RawEmail>& emails);

// Deterministic cleaner: drops all headers except Subject, selects
// text/plain MIME parts, joins quoted-printable soft line breaks, cuts
// trailing signature/disclaimer blocks at a delimiter line ("--" alone or a
// run of >= 10 consecutive non-alphanumeric, non-space characters).
// Throws EmptyAfterCleaningError when nothing remains.
Document clean_email(const RawEmail& email);

// Rule-based segmentation: {. ! ?} followed by whitespace and an uppercase
// letter, digit or quote ends a sentence, unless the terminating dot closes
// a stoplisted abbreviation (Dr. Mr. Mrs. Ms. St. vs. e.g. i.e. etc.);
// a blank line also terminates. A body with no terminator is one sentence.
Document segment_sentences(Document doc);

std::vector<Sentence> segment_text(std::string_view body);

/// Content-derived id: stable across re-ingestion of identical input.
std::string document_id(Source source, const std::optional<std::string>& subject,
                        std::string_view body);

// ---------------------------------------------------------------------------
// Store IO: UTF-8 line-delimited JSON records
// {id, source, subject, body, sentences[], meta{}}.

std::string to_json_line(const Document& doc);
Document from_json_line(std::string_view line);

void write_store(const std::filesystem::path& p, const std::vector<Document>& docs);
std::vector<Document> read_store(const std::filesystem::path& p);

// ---------------------------------------------------------------------------
// Ingestion

struct IngestReport {
  size_t files_seen = 0;
  size_t parsed = 0;
  size_t excluded_replies = 0;
  size_t rejected_empty = 0;
  size_t duplicates = 0;
  std::vector<std::string> warnings;
};

struct EmailIngestOptions {
  bool filter_replies = true;
  int jobs = 1;
};

std::vector<Document> ingest_email_dir(const std::filesystem::path& dir,
                                       const EmailIngestOptions& opts,
                                       IngestReport* report = nullptr);

/// Directory: one document per *.txt file. Regular file: one document per
/// non-empty line (seed lists).
std::vector<Document> ingest_prompts(const std::filesystem::path& path,
                                     IngestReport* report = nullptr);

/// CSV with header user_id,caption,image_description,timestamp; one row is
/// one post. Body is caption and image description joined by a newline.
std::vector<Document> ingest_posts_csv(const std::filesystem::path& file,
                                       IngestReport* report = nullptr);

}  // namespace spearlab::corpus
