#pragma once

// Rhyme enhancement: mask line-final words, ask a masked-word predictor for
// replacements, and substitute where that lengthens the end rhyme of a pair
// of adjacent lines.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "verseforge/corpus.hpp"
#include "verseforge/error.hpp"
#include "verseforge/metrics.hpp"
#include "verseforge/phonetics.hpp"

namespace verseforge {

inline constexpr std::string_view kMaskToken = "<mask>";

struct PredictorQuery {
  std::vector<std::string> tokens;  ///< flattened verse, lines joined by "<nl>"
  std::size_t mask_index = 0;
  std::size_t k = 200;

  bool operator==(const PredictorQuery&) const = default;
};

struct Candidate {
  std::string token;
  double score = 0.0;

  bool operator==(const Candidate&) const = default;
};

using CandidateList = std::vector<Candidate>;

/// Anything that ranks replacements for the masked position. Identical
/// queries must yield identical lists.
class MaskedPredictor {
 public:
  virtual ~MaskedPredictor() = default;
  virtual CandidateList predict(const PredictorQuery& query) const = 0;
};

enum class EnhanceMode { first_improvement, best_of_k };

inline EnhanceMode parse_enhance_mode(std::string_view name) {
  if (name == "first" || name == "first_improvement") return EnhanceMode::first_improvement;
  if (name == "best" || name == "best_of_k") return EnhanceMode::best_of_k;
  throw ConfigError("unknown enhance mode '" + std::string(name) + "' (expected first or best)");
}

inline std::string_view to_string(EnhanceMode mode) {
  return mode == EnhanceMode::first_improvement ? "first" : "best";
}

struct EnhanceConfig {
  std::size_t k = 200;
  EnhanceMode mode = EnhanceMode::first_improvement;
  std::unordered_set<std::string> deny_list;
  bool exclude_identical = true;

  void validate() const {
    if (k < 1) throw ConfigError("enhance k must be >= 1");
  }
};

/// One lowercase word per line.
inline std::unordered_set<std::string> load_deny_list(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = tokenize_line(line);
    if (!tokens.empty() && !tokens.front().starts_with('#')) words.insert(tokens.front());
  }
  return words;
}

/// Index of the line's rhyme word: the last token that is not punctuation,
/// or the last token when the line is all punctuation.
inline std::size_t rhyme_position(const Line& line) {
  if (line.tokens.empty()) throw Error("cannot mask empty line");
  for (std::size_t t = line.tokens.size(); t-- > 0;) {
    if (!is_punctuation_token(line.tokens[t])) return t;
  }
  return line.tokens.size() - 1;
}

/// Whole verse flattened with "<nl>" separators, line `line`'s rhyme word masked.
inline PredictorQuery mask_text(const Verse& verse, std::size_t line, std::size_t k = 200) {
  if (line >= verse.lines.size()) throw Error("mask_text: line index " + std::to_string(line) + " out of range");
  if (verse.lines[line].tokens.empty()) throw Error("cannot mask empty line");
  const std::size_t masked = rhyme_position(verse.lines[line]);
  PredictorQuery query;
  query.k = k;
  for (std::size_t l = 0; l < verse.lines.size(); ++l) {
    if (l) query.tokens.emplace_back(kLineBreak);
    for (std::size_t t = 0; t < verse.lines[l].tokens.size(); ++t) {
      if (l == line && t == masked) {
        query.mask_index = query.tokens.size();
        query.tokens.emplace_back(kMaskToken);
      } else {
        query.tokens.push_back(verse.lines[l].tokens[t]);
      }
    }
  }
  return query;
}

inline bool is_alphabetic_word(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

struct Replacement {
  std::string token;
  std::size_t rhyme_length = 0;
};

/// Best replacement for the last word of line `tgt_idx`, scored by its rhyme
/// length against the last word of line `src_idx`. Returns the original word
/// and its rhyme length when no candidate improves on it.
inline Replacement get_rhyming_replacement(const Verse& verse, std::size_t src_idx, std::size_t tgt_idx,
                                           const PredictorQuery& query, const MaskedPredictor& predictor,
                                           const EnhanceConfig& cfg, const Lexicon& lex) {
  cfg.validate();
  const auto& src_line = verse.lines.at(src_idx);
  const auto& tgt_line = verse.lines.at(tgt_idx);
  const std::string& src = src_line.tokens.at(rhyme_position(src_line));
  const std::string& tgt = tgt_line.tokens.at(rhyme_position(tgt_line));
  const std::size_t rl_orig = rhyme_length(src, tgt, lex, cfg.exclude_identical);

  CandidateList preds;
  const auto context = "predictor query (mask_index=" + std::to_string(query.mask_index) + ", line " +
                       std::to_string(tgt_idx) + "): ";
  try {
    preds = predictor.predict(query);
  } catch (const RetryableError& e) {
    throw RetryableError(context + e.what());
  } catch (const ProtocolError& e) {
    throw ProtocolError(context + e.what());
  } catch (const std::exception& e) {
    throw Error(context + e.what());
  }
  if (preds.size() > cfg.k) preds.resize(cfg.k);

  Replacement best{tgt, rl_orig};
  for (const auto& cand : preds) {
    const auto token = to_lower(cand.token);
    if (!is_alphabetic_word(token) || token == tgt || cfg.deny_list.count(token)) continue;
    const auto rl = rhyme_length(token, src, lex, cfg.exclude_identical);
    if (rl <= best.rhyme_length) continue;
    best = {token, rl};
    if (cfg.mode == EnhanceMode::first_improvement) break;
  }
  return best;
}

struct TokenPosition {
  std::size_t line = 0;
  std::size_t token = 0;

  bool operator==(const TokenPosition&) const = default;
};

struct EnhanceResult {
  Verse verse;
  std::vector<TokenPosition> replaced;
};

/// Processes disjoint adjacent line pairs (0,1), (2,3), ...; a trailing
/// unpaired line is left alone. At most one rhyme word changes per pair.
inline EnhanceResult enhance_verse(const Verse& input, const MaskedPredictor& predictor, const EnhanceConfig& cfg,
                                   const Lexicon& lex) {
  cfg.validate();
  if (input.lines.empty()) throw Error("enhance_verse: verse has no lines");
  EnhanceResult result{input, {}};
  Verse& v = result.verse;
  for (std::size_t i = 0; i + 1 < v.lines.size(); i += 2) {
    const auto mask_first = mask_text(v, i, cfg.k);
    const auto mask_second = mask_text(v, i + 1, cfg.k);
    const auto first = get_rhyming_replacement(v, i + 1, i, mask_first, predictor, cfg, lex);
    const auto second = get_rhyming_replacement(v, i, i + 1, mask_second, predictor, cfg, lex);
    if (second.rhyme_length >= first.rhyme_length) {
      const auto pos = rhyme_position(v.lines[i + 1]);
      auto& last = v.lines[i + 1].tokens[pos];
      if (last != second.token) {
        last = second.token;
        result.replaced.push_back({i + 1, pos});
      }
    } else {
      const auto pos = rhyme_position(v.lines[i]);
      auto& last = v.lines[i].tokens[pos];
      if (last != first.token) {
        last = first.token;
        result.replaced.push_back({i, pos});
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Predictors

/// Fixed candidate list for every query; used for fixtures and tests.
class StaticPredictor : public MaskedPredictor {
 public:
  explicit StaticPredictor(CandidateList candidates) : candidates_(std::move(candidates)) {}

  CandidateList predict(const PredictorQuery& query) const override {
    CandidateList out(candidates_.begin(),
                      candidates_.begin() + static_cast<std::ptrdiff_t>(std::min(query.k, candidates_.size())));
    return out;
  }

 private:
  CandidateList candidates_;
};

/// Ranks the corpus vocabulary by line-final frequency plus a tenth of
/// overall frequency. Context is ignored.
class CorpusPredictor : public MaskedPredictor {
 public:
  explicit CorpusPredictor(const std::vector<Verse>& verses) {
    // Scores are kept as 10 * final + total so ties compare exactly.
    std::map<std::string, std::uint64_t> weight;
    bool any = false;
    for (const auto& verse : verses) {
      for (const auto& line : verse.lines) {
        for (std::size_t t = 0; t < line.tokens.size(); ++t) {
          any = true;
          weight[line.tokens[t]] += 1 + (t + 1 == line.tokens.size() ? 10 : 0);
        }
      }
    }
    if (!any) throw Error("corpus predictor: empty corpus");
    ranking_.reserve(weight.size());
    for (const auto& [word, w] : weight) ranking_.push_back({word, static_cast<double>(w) / 10.0});
    std::stable_sort(ranking_.begin(), ranking_.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  }

  CandidateList predict(const PredictorQuery& query) const override {
    const auto n = std::min(query.k, ranking_.size());
    return CandidateList(ranking_.begin(), ranking_.begin() + static_cast<std::ptrdiff_t>(n));
  }

  const CandidateList& ranking() const noexcept { return ranking_; }

 private:
  CandidateList ranking_;  // descending score, lexicographic within ties
};

inline std::unique_ptr<MaskedPredictor> build_corpus_predictor(const std::vector<Verse>& verses) {
  return std::make_unique<CorpusPredictor>(verses);
}

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
};

namespace detail {

inline std::string excerpt(const std::string& body, std::size_t n = 200) {
  return body.size() <= n ? body : body.substr(0, n) + "...";
}

inline CandidateList parse_candidates(const std::string& body, std::size_t k) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw ProtocolError("response is not JSON: " + excerpt(body));
  }
  if (!doc.is_object() || !doc.contains("candidates") || !doc["candidates"].is_array()) {
    throw ProtocolError("response lacks a candidates array: " + excerpt(body));
  }
  CandidateList out;
  for (const auto& item : doc["candidates"]) {
    if (!item.is_object() || !item.contains("token") || !item["token"].is_string() || !item.contains("score") ||
        !item["score"].is_number()) {
      throw ProtocolError("malformed candidate entry: " + excerpt(body));
    }
    out.push_back({item["token"].get<std::string>(), item["score"].get<double>()});
  }
  if (out.size() > k) {
    throw ProtocolError("response has " + std::to_string(out.size()) + " candidates, more than k=" + std::to_string(k) +
                        ": " + excerpt(body));
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].score > out[i - 1].score) throw ProtocolError("candidates not sorted by descending score: " + excerpt(body));
  }
  return out;
}

}  // namespace detail

/// POSTs `query` to `<endpoint>/predict`. Connection failures and 5xx replies
/// are retried with exponential backoff; exhausting the attempts throws
/// RetryableError. Any reply that breaks the wire contract throws ProtocolError.
inline CandidateList remote_predict(const std::string& endpoint, const PredictorQuery& query,
                                    const RetryPolicy& retry = {}) {
  nlohmann::json payload{{"tokens", query.tokens}, {"mask_index", query.mask_index}, {"k", query.k}};
  const auto body = payload.dump();

  httplib::Client client(endpoint);
  if (!client.is_valid()) throw ConfigError("invalid predictor endpoint '" + endpoint + "'");
  client.set_connection_timeout(std::chrono::seconds(5));
  client.set_read_timeout(std::chrono::seconds(30));

  std::string last_failure;
  auto backoff = retry.initial_backoff;
  for (int attempt = 1; attempt <= retry.attempts; ++attempt) {
    auto res = client.Post("/predict", body, "application/json");
    if (!res) {
      last_failure = "connection error: " + httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
    } else if (res->status != 200) {
      throw ProtocolError("HTTP " + std::to_string(res->status) + ": " + detail::excerpt(res->body));
    } else {
      return detail::parse_candidates(res->body, query.k);
    }
    if (attempt < retry.attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw RetryableError("predictor at " + endpoint + " failed after " + std::to_string(retry.attempts) +
                       " attempts (" + last_failure + ")");
}

class RemotePredictor : public MaskedPredictor {
 public:
  explicit RemotePredictor(std::string endpoint, RetryPolicy retry = {})
      : endpoint_(std::move(endpoint)), retry_(retry) {}

  CandidateList predict(const PredictorQuery& query) const override { return remote_predict(endpoint_, query, retry_); }

 private:
  std::string endpoint_;
  RetryPolicy retry_;
};

}  // namespace verseforge
