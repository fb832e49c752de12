#pragma once

// Pronunciation lookup over a CMUdict-format lexicon, with an orthographic
// fallback for unknown words, and projection onto vowel sequences.

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "verseforge/corpus.hpp"
#include "verseforge/error.hpp"

namespace verseforge {

struct Pronunciation {
  std::vector<std::string> phonemes;

  bool operator==(const Pronunciation&) const = default;
};

/// Prefix of the synthetic vowel symbols produced for unknown words.
inline constexpr std::string_view kFallbackVowelPrefix = "V:";

inline bool is_vowel(std::string_view symbol) {
  static constexpr std::array<std::string_view, 15> kVowels = {
      "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW"};
  if (symbol.starts_with(kFallbackVowelPrefix)) return true;
  return std::find(kVowels.begin(), kVowels.end(), symbol) != kVowels.end();
}

/// Removes a trailing stress digit: "UW1" -> "UW". Idempotent.
inline std::string strip_stress(std::string_view symbol) {
  while (!symbol.empty() && std::isdigit(static_cast<unsigned char>(symbol.back()))) symbol.remove_suffix(1);
  return std::string(symbol);
}

class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::string source) : source_(std::move(source)) {}

  /// Adds `word` unless it is already present; the first pronunciation wins.
  bool insert(std::string_view word, Pronunciation pron) {
    return entries_.try_emplace(to_lower(word), std::move(pron)).second;
  }

  const Pronunciation* find(std::string_view word) const {
    auto it = entries_.find(std::string(word));
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::string& source() const noexcept { return source_; }

 private:
  std::unordered_map<std::string, Pronunciation> entries_;
  std::string source_;
};

namespace detail {

inline bool valid_phoneme(std::string_view sym) {
  if (sym.empty() || !std::isupper(static_cast<unsigned char>(sym.front()))) return false;
  bool in_digits = false;
  for (char c : sym) {
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (in_digits) return false;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      in_digits = true;
    } else {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Parses CMUdict text: `WORD  PH1 PH2 ...`. Lines starting with ";;;" are
/// comments, `WORD(n)` variants are ignored, stress digits are stripped.
inline Lexicon parse_lexicon(std::istream& in, std::string source = {}) {
  Lexicon lex(std::move(source));
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.starts_with(";;;")) continue;
    std::istringstream fields(raw);
    std::string word;
    if (!(fields >> word)) continue;
    if (word.back() == ')') {
      if (word.find('(') == std::string::npos) throw ParseError("malformed variant marker in '" + word + "'", lineno);
      continue;
    }
    Pronunciation pron;
    std::string sym;
    while (fields >> sym) {
      if (!detail::valid_phoneme(sym)) throw ParseError("invalid phoneme '" + sym + "' for " + word, lineno);
      pron.phonemes.push_back(strip_stress(sym));
    }
    if (pron.phonemes.empty()) throw ParseError("entry '" + word + "' has no phonemes", lineno);
    lex.insert(word, std::move(pron));
  }
  return lex;
}

inline Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read lexicon " + path.string());
  return parse_lexicon(in, path.string());
}

/// One `V:<run>` symbol per maximal run of vowel letters. `y` counts as a
/// vowel except in first position.
inline Pronunciation fallback_transcription(std::string_view word) {
  Pronunciation pron;
  std::string run;
  auto vowel_letter = [&](std::size_t i) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(word[i])));
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || (c == 'y' && i != 0);
  };
  for (std::size_t i = 0; i <= word.size(); ++i) {
    if (i < word.size() && vowel_letter(i)) {
      run += static_cast<char>(std::tolower(static_cast<unsigned char>(word[i])));
    } else if (!run.empty()) {
      pron.phonemes.push_back(std::string(kFallbackVowelPrefix) + run);
      run.clear();
    }
  }
  return pron;
}

inline Pronunciation transcribe(std::string_view word, const Lexicon& lex) {
  if (const auto* hit = lex.find(word)) return *hit;
  return fallback_transcription(word);
}

inline std::vector<std::string> word_vowels(std::string_view word, const Lexicon& lex) {
  std::vector<std::string> vowels;
  for (auto& sym : transcribe(word, lex).phonemes) {
    if (is_vowel(sym)) vowels.push_back(std::move(sym));
  }
  return vowels;
}

struct VowelSeq {
  std::vector<std::string> vowels;
  /// marks[i] = number of vowels up to and including word i.
  std::vector<std::size_t> word_end_marks;
};

inline VowelSeq vowel_sequence(const std::vector<std::string>& words, const Lexicon& lex) {
  VowelSeq seq;
  seq.word_end_marks.reserve(words.size());
  for (const auto& w : words) {
    auto v = word_vowels(w, lex);
    seq.vowels.insert(seq.vowels.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    seq.word_end_marks.push_back(seq.vowels.size());
  }
  return seq;
}

}  // namespace verseforge
