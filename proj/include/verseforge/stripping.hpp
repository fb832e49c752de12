#pragma once

// Content-word extraction and the three noise schemes applied to it before
// conditioning a generator.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "verseforge/corpus.hpp"
#include "verseforge/error.hpp"
#include "verseforge/random.hpp"

namespace verseforge {

enum class NoiseKind { none, shuffle, drop, synonym };

inline std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::shuffle: return "shuffle";
    case NoiseKind::drop: return "drop";
    case NoiseKind::synonym: return "synonym";
  }
  return "none";
}

inline NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "none") return NoiseKind::none;
  if (name == "shuffle") return NoiseKind::shuffle;
  if (name == "drop") return NoiseKind::drop;
  if (name == "synonym") return NoiseKind::synonym;
  throw ConfigError("unknown noise '" + std::string(name) + "' (expected shuffle, drop, synonym or none)");
}

class StopwordSet {
 public:
  StopwordSet() = default;
  StopwordSet(std::initializer_list<std::string> words) {
    for (const auto& w : words) words_.insert(to_lower(w));
  }

  void insert(std::string_view word) { words_.insert(to_lower(word)); }
  bool contains(const std::string& word) const { return words_.count(word) != 0; }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// One word per line; blank lines and lines starting with '#' are skipped.
inline StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  StopwordSet set;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = tokenize_line(line);
    if (tokens.empty() || tokens.front().starts_with('#')) continue;
    set.insert(tokens.front());
  }
  return set;
}

/// Stopwords, numbers and punctuation never survive stripping.
inline bool is_content_token(const std::string& token, const StopwordSet& stopwords) {
  return !token.empty() && !is_punctuation_token(token) && !is_number_token(token) && !stopwords.contains(token);
}

struct NoiseConfig {
  double drop_rate = 0.20;
  double synonym_rate = 0.20;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(drop_rate >= 0.0 && drop_rate <= 1.0)) throw ConfigError("drop_rate must lie in [0,1]");
    if (!(synonym_rate >= 0.0 && synonym_rate <= 1.0)) throw ConfigError("synonym_rate must lie in [0,1]");
  }
};

class SynonymLexicon {
 public:
  /// Adds single-word synonyms of `word`, skipping the word itself and
  /// multi-word entries.
  void add(std::string_view word, const std::vector<std::string>& synonyms) {
    const auto key = to_lower(word);
    auto& list = entries_[key];
    for (const auto& raw : synonyms) {
      auto syn = to_lower(raw);
      if (syn.empty() || syn == key) continue;
      if (syn.find_first_of(" _\t") != std::string::npos) continue;
      if (std::find(list.begin(), list.end(), syn) == list.end()) list.push_back(std::move(syn));
    }
    if (list.empty()) entries_.erase(key);
  }

  const std::vector<std::string>* find(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
  }

  /// Copy without synonyms that stripping would have removed.
  SynonymLexicon content_only(const StopwordSet& stopwords) const {
    SynonymLexicon out;
    for (const auto& [word, syns] : entries_) {
      std::vector<std::string> kept;
      for (const auto& s : syns) {
        if (is_content_token(s, stopwords)) kept.push_back(s);
      }
      out.add(word, kept);
    }
    return out;
  }

  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

/// `word<TAB>syn1,syn2,...` per line.
inline SynonymLexicon load_synonyms(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  SynonymLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with('#')) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected word<TAB>synonyms", lineno);
    std::vector<std::string> syns;
    std::stringstream rest(line.substr(tab + 1));
    std::string syn;
    while (std::getline(rest, syn, ',')) {
      const auto b = syn.find_first_not_of(' ');
      const auto e = syn.find_last_not_of(' ');
      if (b != std::string::npos) syns.push_back(syn.substr(b, e - b + 1));
    }
    lex.add(line.substr(0, tab), syns);
  }
  return lex;
}

struct ContentWords {
  std::vector<std::vector<std::string>> lines;
  std::string provenance;
  NoiseKind noise = NoiseKind::none;
  std::uint64_t seed = 0;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& l : lines) n += l.size();
    return n;
  }
};

/// Filters every line in place; lines left without tokens stay as empty lines.
inline ContentWords extract_content_words(const Document& doc, const StopwordSet& stopwords) {
  ContentWords cw;
  cw.provenance = doc.id;
  cw.lines.reserve(doc.lines.size());
  for (const auto& line : doc.lines) {
    auto& out = cw.lines.emplace_back();
    for (const auto& tok : line.tokens) {
      if (is_content_token(tok, stopwords)) out.push_back(tok);
    }
  }
  return cw;
}

namespace detail {

/// floor(rate * n), tolerant of products such as 0.29 * 100 = 28.999999...
inline std::size_t noise_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
}

struct FlatIndex {
  std::size_t line;
  std::size_t pos;
};

inline std::vector<FlatIndex> flat_positions(const ContentWords& cw) {
  std::vector<FlatIndex> flat;
  for (std::size_t l = 0; l < cw.lines.size(); ++l) {
    for (std::size_t p = 0; p < cw.lines[l].size(); ++p) flat.push_back({l, p});
  }
  return flat;
}

}  // namespace detail

/// Permutes each line independently.
inline ContentWords noise_shuffle(ContentWords cw, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& line : cw.lines) rng.shuffle(line);
  cw.noise = NoiseKind::shuffle;
  cw.seed = seed;
  return cw;
}

/// Removes exactly floor(drop_rate * n) tokens chosen uniformly over the whole document.
inline ContentWords noise_drop(ContentWords cw, const NoiseConfig& cfg) {
  cfg.validate();
  const auto flat = detail::flat_positions(cw);
  Rng rng(cfg.seed);
  const auto chosen = rng.sample_indices(flat.size(), detail::noise_count(cfg.drop_rate, flat.size()));
  std::vector<std::vector<bool>> removed(cw.lines.size());
  for (std::size_t l = 0; l < cw.lines.size(); ++l) removed[l].assign(cw.lines[l].size(), false);
  for (auto i : chosen) removed[flat[i].line][flat[i].pos] = true;
  for (std::size_t l = 0; l < cw.lines.size(); ++l) {
    std::vector<std::string> kept;
    for (std::size_t p = 0; p < cw.lines[l].size(); ++p) {
      if (!removed[l][p]) kept.push_back(std::move(cw.lines[l][p]));
    }
    cw.lines[l] = std::move(kept);
  }
  cw.noise = NoiseKind::drop;
  cw.seed = cfg.seed;
  return cw;
}

/// Replaces floor(synonym_rate * n) uniformly chosen tokens with a random
/// synonym; chosen tokens without synonyms are left as they are.
inline ContentWords noise_synonym(ContentWords cw, const SynonymLexicon& lex, const NoiseConfig& cfg) {
  cfg.validate();
  const auto flat = detail::flat_positions(cw);
  Rng rng(cfg.seed);
  const auto chosen = rng.sample_indices(flat.size(), detail::noise_count(cfg.synonym_rate, flat.size()));
  for (auto i : chosen) {
    auto& tok = cw.lines[flat[i].line][flat[i].pos];
    const auto* syns = lex.find(tok);
    if (syns == nullptr || syns->empty()) continue;
    tok = (*syns)[rng.below(syns->size())];
  }
  cw.noise = NoiseKind::synonym;
  cw.seed = cfg.seed;
  return cw;
}

/// Applies exactly one noise scheme, seeded with `seed`.
inline ContentWords apply_noise(ContentWords cw, NoiseKind kind, const NoiseConfig& cfg, std::uint64_t seed,
                                const SynonymLexicon* synonyms = nullptr) {
  NoiseConfig seeded = cfg;
  seeded.seed = seed;
  switch (kind) {
    case NoiseKind::none:
      cw.seed = seed;
      return cw;
    case NoiseKind::shuffle:
      return noise_shuffle(std::move(cw), seed);
    case NoiseKind::drop:
      return noise_drop(std::move(cw), seeded);
    case NoiseKind::synonym:
      if (synonyms == nullptr) throw ConfigError("synonym noise requires a synonym lexicon");
      return noise_synonym(std::move(cw), *synonyms, seeded);
  }
  return cw;
}

/// Strip + noise a batch. Each document draws from its own stream derived
/// from `cfg.seed` and its id, so the result is independent of `threads`.
inline std::vector<ContentWords> strip_documents(const std::vector<Document>& docs, const StopwordSet& stopwords,
                                                 NoiseKind kind, const NoiseConfig& cfg,
                                                 const SynonymLexicon* synonyms = nullptr, unsigned threads = 1) {
  cfg.validate();
  std::vector<ContentWords> out(docs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < docs.size(); i = next++) {
      out[i] = apply_noise(extract_content_words(docs[i], stopwords), kind, cfg, derive_seed(cfg.seed, docs[i].id),
                           synonyms);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(docs.size(), 1))));
  if (threads == 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  return out;
}

/// Content words flattened with the line-break symbol; empty lines are omitted.
inline std::string content_source_text(const ContentWords& cw) {
  std::string out;
  for (const auto& line : cw.lines) {
    if (line.empty()) continue;
    if (!out.empty()) {
      out += ' ';
      out += kLineBreak;
      out += ' ';
    }
    out += join(line);
  }
  return out;
}

/// Writes one JSON-lines record {"source": ..., "target": ...} and returns it.
inline std::string emit_training_pair(const ContentWords& cw, const Verse& target, std::ostream& out) {
  nlohmann::ordered_json record;
  record["source"] = content_source_text(cw);
  record["target"] = to_flat_text(target.lines);
  const auto line = record.dump();
  out << line << '\n';
  if (!out) throw IoError("failed writing training pair");
  return line;
}

}  // namespace verseforge
