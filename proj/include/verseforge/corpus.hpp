#pragma once

// Lyric and prose ingestion: tokenization, verse segmentation, length
// filtering and per-corpus statistics.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "verseforge/error.hpp"

namespace verseforge {

/// Separator placed between lines in every flat serialization of a verse.
inline constexpr std::string_view kLineBreak = "<nl>";

enum class DocKind { lyrics, news, movies };

inline std::string_view to_string(DocKind kind) {
  switch (kind) {
    case DocKind::lyrics: return "lyrics";
    case DocKind::news: return "news";
    case DocKind::movies: return "movies";
  }
  return "lyrics";
}

inline DocKind parse_doc_kind(std::string_view name) {
  if (name == "lyrics") return DocKind::lyrics;
  if (name == "news") return DocKind::news;
  if (name == "movies") return DocKind::movies;
  throw ConfigError("unknown document kind '" + std::string(name) + "' (expected lyrics, news or movies)");
}

struct Line {
  std::vector<std::string> tokens;

  bool operator==(const Line&) const = default;
};

struct Document {
  std::string id;
  DocKind kind = DocKind::lyrics;
  std::vector<Line> lines;
  std::string raw;
};

struct Verse {
  std::vector<Line> lines;
  std::optional<std::string> source_doc;

  bool operator==(const Verse& other) const { return lines == other.lines; }
};

// ---------------------------------------------------------------------------
// Character classes

/// Characters split off the edges of whitespace-delimited tokens.
inline bool is_detached_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '"': case '(': case ')': case '[': case ']': case '<': case '>':
      return true;
    default:
      return false;
  }
}

/// A token with no letters or digits at all ("?", "...", "--").
inline bool is_punctuation_token(std::string_view token) {
  if (token.empty()) return false;
  return std::none_of(token.begin(), token.end(),
                      [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
}

/// Digits, optionally grouped by internal commas or periods: "4", "1,000", "3.5".
inline bool is_number_token(std::string_view token) {
  if (token.empty()) return false;
  bool prev_digit = false;
  for (std::size_t i = 0; i < token.size(); ++i) {
    const char c = token[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      prev_digit = true;
    } else if ((c == ',' || c == '.') && prev_digit && i + 1 < token.size()) {
      prev_digit = false;
    } else {
      return false;
    }
  }
  return prev_digit;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// ---------------------------------------------------------------------------
// Tokenization

/// Tokenizes a single line: lowercase, whitespace split, edge punctuation
/// detached one character at a time. Apostrophes stay inside tokens.
inline std::vector<std::string> tokenize_line(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    std::string_view word = text.substr(i, j - i);
    i = j;

    std::size_t lo = 0;
    std::size_t hi = word.size();
    while (lo < hi && is_detached_punct(word[lo])) ++lo;
    while (hi > lo && is_detached_punct(word[hi - 1])) --hi;
    for (std::size_t k = 0; k < lo; ++k) tokens.emplace_back(1, word[k]);
    if (hi > lo) tokens.push_back(to_lower(word.substr(lo, hi - lo)));
    for (std::size_t k = hi; k < word.size(); ++k) tokens.emplace_back(1, word[k]);
  }
  return tokens;
}

/// Splits on newlines and tokenizes each line; lines without tokens are dropped.
inline std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto tokens = tokenize_line(text.substr(start, end - start));
    if (!tokens.empty()) lines.push_back(Line{std::move(tokens)});
    start = end + 1;
  }
  return lines;
}

inline Document make_document(std::string id, DocKind kind, std::string raw) {
  Document doc{std::move(id), kind, {}, std::move(raw)};
  doc.lines = tokenize(doc.raw);
  return doc;
}

inline std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

/// "a b <nl> c d" form used by every JSON-lines interface.
inline std::string to_flat_text(const std::vector<Line>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) {
      out += ' ';
      out += kLineBreak;
      out += ' ';
    }
    out += join(lines[i].tokens);
  }
  return out;
}

/// Inverse of `to_flat_text`: splits on the line-break symbol and tokenizes
/// each segment. Segments without tokens are dropped.
inline Verse parse_flat_text(std::string_view text) {
  Verse verse;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(kLineBreak, start);
    if (end == std::string_view::npos) end = text.size();
    auto tokens = tokenize_line(text.substr(start, end - start));
    if (!tokens.empty()) verse.lines.push_back(Line{std::move(tokens)});
    start = end + kLineBreak.size();
    if (end == text.size()) break;
  }
  return verse;
}

inline std::vector<std::string> flatten(const std::vector<Line>& lines) {
  std::vector<std::string> out;
  for (const auto& line : lines) out.insert(out.end(), line.tokens.begin(), line.tokens.end());
  return out;
}

inline std::size_t token_count(const std::vector<Line>& lines) {
  std::size_t n = 0;
  for (const auto& line : lines) n += line.tokens.size();
  return n;
}

inline std::size_t token_count(const Document& doc) { return token_count(doc.lines); }

// ---------------------------------------------------------------------------
// Segmentation and filtering

/// Groups consecutive non-blank raw lines into verses, discarding verses with
/// fewer than `min_lines` lines.
inline std::vector<Verse> split_verses(const Document& lyric, std::size_t min_lines = 4) {
  if (lyric.kind != DocKind::lyrics) throw Error("split_verses expects a lyrics document, got " + std::string(to_string(lyric.kind)));
  std::vector<Verse> verses;
  Verse current;
  current.source_doc = lyric.id;
  auto flush = [&] {
    if (!current.lines.empty() && current.lines.size() >= min_lines) verses.push_back(current);
    current.lines.clear();
  };
  std::string_view raw = lyric.raw;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    auto tokens = tokenize_line(raw.substr(start, end - start));
    if (tokens.empty()) {
      flush();
    } else {
      current.lines.push_back(Line{std::move(tokens)});
    }
    start = end + 1;
  }
  flush();
  return verses;
}

/// Keeps documents whose token count lies in [min_tok, max_tok].
inline std::vector<Document> filter_by_length(const std::vector<Document>& docs, std::size_t min_tok, std::size_t max_tok) {
  if (min_tok > max_tok) throw Error("filter_by_length: min_tok exceeds max_tok");
  std::vector<Document> kept;
  for (const auto& doc : docs) {
    const auto t = token_count(doc);
    if (t >= min_tok && t <= max_tok) kept.push_back(doc);
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Statistics

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Population mean and standard deviation of integer counts. Computed from
/// exact integer moments, so the result does not depend on input order.
inline MeanStd mean_std(const std::vector<std::uint64_t>& xs) {
  if (xs.empty()) return {};
  unsigned __int128 sum = 0;
  unsigned __int128 sum_sq = 0;
  for (auto x : xs) {
    sum += x;
    sum_sq += static_cast<unsigned __int128>(x) * x;
  }
  const auto n = static_cast<unsigned __int128>(xs.size());
  const unsigned __int128 numer = n * sum_sq - sum * sum;  // n^2 * variance, never negative
  const double nd = static_cast<double>(xs.size());
  return {static_cast<double>(sum) / nd, std::sqrt(static_cast<double>(numer)) / nd};
}

struct CorpusStats {
  std::size_t n_docs = 0;
  MeanStd sentences_per_doc;
  MeanStd tokens_per_doc;
  MeanStd tokens_per_sentence;  // pooled over every sentence of the corpus
};

inline CorpusStats corpus_stats(const std::vector<Document>& docs) {
  if (docs.empty()) throw Error("empty corpus");
  std::vector<std::uint64_t> sentences, tokens, per_sentence;
  for (const auto& doc : docs) {
    sentences.push_back(doc.lines.size());
    tokens.push_back(token_count(doc));
    for (const auto& line : doc.lines) per_sentence.push_back(line.tokens.size());
  }
  return {docs.size(), mean_std(sentences), mean_std(tokens), mean_std(per_sentence)};
}

inline Document verse_document(const Verse& verse, std::string id) {
  Document doc;
  doc.id = std::move(id);
  doc.kind = DocKind::lyrics;
  doc.lines = verse.lines;
  for (const auto& line : verse.lines) {
    doc.raw += join(line.tokens);
    doc.raw += '\n';
  }
  return doc;
}

// ---------------------------------------------------------------------------
// File loading

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace detail

/// One document per file; a directory is read in filename order.
inline std::vector<Document> load_lyrics(const std::filesystem::path& path) {
  std::vector<Document> docs;
  if (std::filesystem::is_directory(path)) {
    for (const auto& file : detail::sorted_files(path)) {
      docs.push_back(make_document(file.filename().string(), DocKind::lyrics, read_file(file)));
    }
  } else {
    docs.push_back(make_document(path.filename().string(), DocKind::lyrics, read_file(path)));
  }
  return docs;
}

/// Prose corpora: one document per non-blank line of a file, or one
/// document per file when `path` is a directory.
inline std::vector<Document> load_prose(const std::filesystem::path& path, DocKind kind) {
  std::vector<Document> docs;
  if (std::filesystem::is_directory(path)) {
    for (const auto& file : detail::sorted_files(path)) {
      docs.push_back(make_document(file.filename().string(), kind, read_file(file)));
    }
    return docs;
  }
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t n = 0;
  const auto stem = path.filename().string();
  while (std::getline(in, line)) {
    ++n;
    if (tokenize_line(line).empty()) continue;
    docs.push_back(make_document(stem + ":" + std::to_string(n), kind, line));
  }
  return docs;
}

}  // namespace verseforge
