#pragma once
// Query-log ingestion and the text primitives shared by every miner.

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "conceptforge/common.hpp"

namespace conceptforge {

struct ClickedDoc {
  std::string title;
  std::int64_t clicks = 0;

  bool operator==(const ClickedDoc&) const = default;
};

struct QueryLogRecord {
  std::string query;
  std::vector<ClickedDoc> clicked_docs;
  std::optional<std::string> clicked_concept_tag;
  Date date;

  bool operator==(const QueryLogRecord&) const = default;
};

struct LogLineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct QueryLog {
  std::vector<QueryLogRecord> records;
  std::vector<LogLineError> errors;
};

/// Parses one JSONL line. Throws Error naming the offending field.
QueryLogRecord parse_log_line(std::string_view line);
std::string to_jsonl(const QueryLogRecord& rec);

/// Malformed lines land in `errors` with their line number; blank lines are skipped.
QueryLog load_query_log(const std::string& path);
QueryLog parse_query_log(std::string_view contents);
void write_query_log(const std::string& path, const std::vector<QueryLogRecord>& records);

/// NFKC compatibility normalization, case folding, whitespace collapse. Idempotent.
std::string normalize_text(std::string_view raw);

enum class TokenizerMode { whitespace, unigram_char };

TokenizerMode parse_tokenizer_mode(std::string_view name);
std::string_view tokenizer_mode_name(TokenizerMode mode);

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

struct TokenSeq {
  std::vector<std::string> tokens;
  std::vector<Span> offsets;  // byte spans into the tokenized text

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

TokenSeq tokenize(std::string_view text, TokenizerMode mode);

/// Rebuilds source text from offsets; gaps are filled with single spaces.
std::string detokenize(const TokenSeq& ts, std::size_t source_len);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(const std::vector<std::string>& words);
  static StopwordList load(const std::string& path);

  bool contains(std::string_view token) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::set<std::string, std::less<>> entries_;
};

TokenSeq filter_stopwords(const TokenSeq& ts, const StopwordList& sw);

/// Normalize then tokenize.
std::vector<std::string> to_tokens(std::string_view raw, TokenizerMode mode);

/// Renders a token list the way the tokenizer mode would have read it.
std::string join_tokens(const std::vector<std::string>& tokens, TokenizerMode mode);

/// True when `needle` occurs as a contiguous run inside `hay`.
bool contains_span(const std::vector<std::string>& hay, const std::vector<std::string>& needle);
std::size_t count_span(const std::vector<std::string>& hay, const std::vector<std::string>& needle);

}  // namespace conceptforge
