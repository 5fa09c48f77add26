#include "conceptforge/corpus.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>

namespace conceptforge {

using nlohmann::json;

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

QueryLogRecord parse_log_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("record is not a JSON object");

  QueryLogRecord rec;
  auto q = j.find("query");
  if (q == j.end() || !q->is_string()) throw Error("field 'query' missing or not a string");
  rec.query = q->get<std::string>();
  if (normalize_text(rec.query).empty()) throw Error("field 'query' is empty after normalization");

  if (auto docs = j.find("clicked_docs"); docs != j.end() && !docs->is_null()) {
    if (!docs->is_array()) throw Error("field 'clicked_docs' is not an array");
    for (const auto& d : *docs) {
      if (!d.is_array() || d.size() != 2 || !d[0].is_string())
        throw Error("field 'clicked_docs' entries must be [title, clicks]");
      if (!d[1].is_number_integer()) throw Error("field 'clicks' must be an integer");
      auto clicks = d[1].get<std::int64_t>();
      if (clicks < 0) throw Error("field 'clicks' must be non-negative, got " + std::to_string(clicks));
      rec.clicked_docs.push_back({d[0].get<std::string>(), clicks});
    }
  }

  if (auto tag = j.find("clicked_concept_tag"); tag != j.end() && !tag->is_null()) {
    if (!tag->is_string()) throw Error("field 'clicked_concept_tag' must be a string or null");
    rec.clicked_concept_tag = tag->get<std::string>();
  }

  auto date = j.find("date");
  if (date == j.end() || !date->is_string()) throw Error("field 'date' missing or not a string");
  if (!Date::try_parse(date->get<std::string>(), rec.date))
    throw Error("field 'date' is not a valid YYYY-MM-DD day");
  return rec;
}

std::string to_jsonl(const QueryLogRecord& rec) {
  json docs = json::array();
  for (const auto& d : rec.clicked_docs) docs.push_back(json::array({d.title, d.clicks}));
  json j = json::object();
  j["query"] = rec.query;
  j["clicked_docs"] = std::move(docs);
  j["clicked_concept_tag"] = rec.clicked_concept_tag ? json(*rec.clicked_concept_tag) : json(nullptr);
  j["date"] = rec.date.str();
  return j.dump();
}

QueryLog parse_query_log(std::string_view contents) {
  QueryLog log;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    auto end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    auto line = contents.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      log.records.push_back(parse_log_line(line));
    } catch (const Error& e) {
      log.errors.push_back({line_no, e.what()});
    }
  }
  return log;
}

QueryLog load_query_log(const std::string& path) { return parse_query_log(read_file(path)); }

void write_query_log(const std::string& path, const std::vector<QueryLogRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_jsonl(r);
    out += '\n';
  }
  write_file(path, out);
}

std::string normalize_text(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc_cf = icu::Normalizer2::getNFKCCasefoldInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFKC_Casefold normalizer unavailable");

  auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString folded = nfkc_cf->normalize(src, status);
  if (U_FAILURE(status)) throw Error("normalization failed");

  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (int32_t i = 0; i < folded.length();) {
    UChar32 c = folded.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !collapsed.isEmpty();
      continue;
    }
    if (pending_space) collapsed.append(static_cast<UChar>(u' '));
    pending_space = false;
    collapsed.append(c);
  }
  std::string out;
  collapsed.toUTF8String(out);
  return out;
}

TokenizerMode parse_tokenizer_mode(std::string_view name) {
  if (name == "whitespace") return TokenizerMode::whitespace;
  if (name == "unigram-char") return TokenizerMode::unigram_char;
  throw Error("unknown tokenizer '" + std::string(name) + "'");
}

std::string_view tokenizer_mode_name(TokenizerMode mode) {
  return mode == TokenizerMode::whitespace ? "whitespace" : "unigram-char";
}

TokenSeq tokenize(std::string_view text, TokenizerMode mode) {
  TokenSeq ts;
  if (mode == TokenizerMode::whitespace) {
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && is_ascii_space(text[i])) ++i;
      std::size_t b = i;
      while (i < text.size() && !is_ascii_space(text[i])) ++i;
      if (i > b) {
        ts.tokens.emplace_back(text.substr(b, i - b));
        ts.offsets.push_back({b, i});
      }
    }
    return ts;
  }
  auto bounds = utf8_boundaries(text);
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    auto b = bounds[k], e = bounds[k + 1];
    if (e - b == 1 && is_ascii_space(text[b])) continue;
    ts.tokens.emplace_back(text.substr(b, e - b));
    ts.offsets.push_back({b, e});
  }
  return ts;
}

std::string detokenize(const TokenSeq& ts, std::size_t source_len) {
  std::string out(source_len, ' ');
  for (std::size_t i = 0; i < ts.size(); ++i)
    std::copy(ts.tokens[i].begin(), ts.tokens[i].end(), out.begin() + static_cast<std::ptrdiff_t>(ts.offsets[i].begin));
  return out;
}

StopwordList::StopwordList(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    auto n = normalize_text(w);
    if (!n.empty()) entries_.insert(std::move(n));
  }
}

StopwordList StopwordList::load(const std::string& path) { return StopwordList(read_lines(path)); }

bool StopwordList::contains(std::string_view token) const {
  if (entries_.empty()) return false;
  if (entries_.count(token)) return true;
  return entries_.count(normalize_text(token)) > 0;
}

TokenSeq filter_stopwords(const TokenSeq& ts, const StopwordList& sw) {
  TokenSeq out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (sw.contains(ts.tokens[i])) continue;
    out.tokens.push_back(ts.tokens[i]);
    out.offsets.push_back(ts.offsets[i]);
  }
  return out;
}

std::vector<std::string> to_tokens(std::string_view raw, TokenizerMode mode) {
  return tokenize(normalize_text(raw), mode).tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens, TokenizerMode mode) {
  return join(tokens, mode == TokenizerMode::whitespace ? " " : "");
}

std::size_t count_span(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i)
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) ++n;
  return n;
}

bool contains_span(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace conceptforge
