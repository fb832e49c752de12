#pragma once

// Rhyme length, rhyme density, unigram overlap, repetition score and
// corpus-level BLEU.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "verseforge/corpus.hpp"
#include "verseforge/error.hpp"
#include "verseforge/phonetics.hpp"

namespace verseforge {

struct RhymeConfig {
  std::size_t window = 15;  ///< preceding words compared against each word
  bool exclude_identical = true;

  void validate() const {
    if (window < 1) throw ConfigError("rhyme window must be >= 1");
  }
};

/// Length of the longest common suffix of two vowel sequences.
inline std::size_t common_suffix(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t k = 0;
  while (k < a.size() && k < b.size() && a[a.size() - 1 - k] == b[b.size() - 1 - k]) ++k;
  return k;
}

/// Longest common suffix of the two words' vowel sequences; 0 for identical
/// tokens unless `exclude_identical` is off.
inline std::size_t rhyme_length(std::string_view w1, std::string_view w2, const Lexicon& lex,
                                bool exclude_identical = true) {
  if (exclude_identical && w1 == w2) return 0;
  return common_suffix(word_vowels(w1, lex), word_vowels(w2, lex));
}

/// Words that take part in rhyme density: every non-punctuation token, in order.
inline std::vector<std::string> rhyme_words(const std::vector<Line>& lines) {
  std::vector<std::string> words;
  for (const auto& line : lines) {
    for (const auto& tok : line.tokens) {
      if (!is_punctuation_token(tok)) words.push_back(tok);
    }
  }
  return words;
}

/// Per-word longest vowel match L(i) against the previous `cfg.window` words.
/// Matches run backwards through the verse-wide vowel stream, so they may
/// span several words.
inline std::vector<std::size_t> word_rhyme_lengths(const std::vector<std::string>& words, const Lexicon& lex,
                                                   const RhymeConfig& cfg = {}) {
  cfg.validate();
  // Intern vowel symbols so the inner comparison is integral.
  std::unordered_map<std::string, int> ids;
  std::vector<int> stream;
  std::vector<std::size_t> lengths;
  lengths.reserve(words.size());

  struct Recent {
    const std::string* token;
    std::size_t end;
  };
  std::deque<Recent> recent;

  for (const auto& word : words) {
    const std::size_t start = stream.size();
    for (const auto& v : word_vowels(word, lex)) {
      stream.push_back(ids.try_emplace(v, static_cast<int>(ids.size())).first->second);
    }
    const std::size_t end = stream.size();

    std::size_t best = 0;
    if (end > start) {
      for (const auto& prev : recent) {
        if (cfg.exclude_identical && *prev.token == word) continue;
        std::size_t k = 0;
        while (k < prev.end && stream[end - 1 - k] == stream[prev.end - 1 - k]) ++k;
        best = std::max(best, k);
      }
    }
    lengths.push_back(best);

    recent.push_back({&word, end});
    if (recent.size() > cfg.window) recent.pop_front();
  }
  return lengths;
}

/// Mean of L(i) over the verse's words; 0 for an empty verse.
inline double rhyme_density(const std::vector<Line>& lines, const Lexicon& lex, const RhymeConfig& cfg = {}) {
  const auto words = rhyme_words(lines);
  if (words.empty()) return 0.0;
  const auto lengths = word_rhyme_lengths(words, lex, cfg);
  std::size_t total = 0;
  for (auto l : lengths) total += l;
  return static_cast<double>(total) / static_cast<double>(lengths.size());
}

inline double rhyme_density(const Verse& verse, const Lexicon& lex, const RhymeConfig& cfg = {}) {
  return rhyme_density(verse.lines, lex, cfg);
}

namespace detail {

inline std::set<std::string> unique_content(const std::vector<std::string>& tokens) {
  std::set<std::string> out;
  for (const auto& t : tokens) {
    if (!is_punctuation_token(t)) out.insert(t);
  }
  return out;
}

inline double overlap_sets(const std::set<std::string>& x, const std::set<std::string>& y) {
  if (y.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : y) shared += x.count(t);
  return static_cast<double>(shared) / static_cast<double>(y.size());
}

}  // namespace detail

/// |unique(y) ∩ unique(x)| / |unique(y)|, punctuation ignored; 0 when y has no words.
inline double unigram_overlap(const std::vector<std::string>& x, const std::vector<std::string>& y) {
  return detail::overlap_sets(detail::unique_content(x), detail::unique_content(y));
}

/// Average overlap of each line with the rest of the verse concatenated.
inline double repetition_score(const std::vector<Line>& lines) {
  if (lines.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::string> rest;
    for (std::size_t j = 0; j < lines.size(); ++j) {
      if (j != i) rest.insert(rest.end(), lines[j].tokens.begin(), lines[j].tokens.end());
    }
    total += unigram_overlap(rest, lines[i].tokens);
  }
  return total / static_cast<double>(lines.size());
}

inline double repetition_score(const Verse& verse) { return repetition_score(verse.lines); }

/// A verse with its reranking score; `score()` is always `rd() - rep()`.
class ScoredVerse {
 public:
  ScoredVerse() = default;
  ScoredVerse(Verse verse, double rd, double rep) : verse_(std::move(verse)), rd_(rd), rep_(rep), score_(rd - rep) {}

  static ScoredVerse compute(Verse verse, const Lexicon& lex, const RhymeConfig& cfg = {}) {
    const double rd = rhyme_density(verse, lex, cfg);
    const double rep = repetition_score(verse);
    return ScoredVerse(std::move(verse), rd, rep);
  }

  const Verse& verse() const noexcept { return verse_; }
  double rd() const noexcept { return rd_; }
  double rep() const noexcept { return rep_; }
  double score() const noexcept { return score_; }

 private:
  Verse verse_;
  double rd_ = 0.0;
  double rep_ = 0.0;
  double score_ = 0.0;
};

// ---------------------------------------------------------------------------
// BLEU

struct BleuResult {
  double bleu = 0.0;  ///< 0..100
  std::array<double, 4> precisions{};
  double brevity_penalty = 0.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

namespace detail {

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace detail

/// Corpus BLEU-4 with a single reference per candidate and no smoothing.
inline BleuResult corpus_bleu(const std::vector<std::vector<std::string>>& candidates,
                              const std::vector<std::vector<std::string>>& references) {
  if (candidates.size() != references.size()) {
    throw Error("corpus_bleu: " + std::to_string(candidates.size()) + " candidates vs " +
                std::to_string(references.size()) + " references");
  }
  if (candidates.empty()) throw Error("corpus_bleu: empty corpus");

  BleuResult result;
  std::array<std::size_t, 4> matched{};
  std::array<std::size_t, 4> total{};
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    result.candidate_length += candidates[s].size();
    result.reference_length += references[s].size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto cand = detail::ngram_counts(candidates[s], n);
      const auto ref = detail::ngram_counts(references[s], n);
      for (const auto& [gram, count] : cand) {
        auto it = ref.find(gram);
        matched[n - 1] += it == ref.end() ? 0 : std::min(count, it->second);
        total[n - 1] += count;
      }
    }
  }

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    result.precisions[n] = total[n] == 0 ? 0.0 : static_cast<double>(matched[n]) / static_cast<double>(total[n]);
    if (matched[n] == 0) {
      zero = true;
    } else {
      log_sum += std::log(result.precisions[n]);
    }
  }
  const double c = static_cast<double>(result.candidate_length);
  const double r = static_cast<double>(result.reference_length);
  result.brevity_penalty = c == 0.0 ? 0.0 : (c > r ? 1.0 : std::exp(1.0 - r / c));
  result.bleu = zero ? 0.0 : 100.0 * result.brevity_penalty * std::exp(log_sum / 4.0);
  return result;
}

}  // namespace verseforge
