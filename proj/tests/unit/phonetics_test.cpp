#include "verseforge/phonetics.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace verseforge {
namespace {

using Symbols = std::vector<std::string>;

Lexicon lex_from(const std::string& text) {
  std::istringstream in(text);
  return parse_lexicon(in, "inline");
}

TEST(LoadLexicon, ParsesEntriesAndStripsStress) {
  auto lex = lex_from("FOOD  F UW1 D\nYOU  Y UW1\n");
  ASSERT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.find("food")->phonemes, (Symbols{"F", "UW", "D"}));
  EXPECT_EQ(lex.find("you")->phonemes, (Symbols{"Y", "UW"}));
}

TEST(LoadLexicon, EmptyFile) { EXPECT_EQ(lex_from("").size(), 0u); }

TEST(LoadLexicon, SkipsCommentsAndVariants) {
  auto lex = lex_from(";;; header\nTHE  DH AH0\nTHE(2)  DH IY0\n\n");
  ASSERT_EQ(lex.size(), 1u);
  EXPECT_EQ(lex.find("the")->phonemes, (Symbols{"DH", "AH"}));
}

TEST(LoadLexicon, FirstListedWins) {
  auto lex = lex_from("READ  R IY1 D\nREAD  R EH1 D\n");
  EXPECT_EQ(lex.find("read")->phonemes, (Symbols{"R", "IY", "D"}));
}

TEST(LoadLexicon, MalformedLineReportsLineNumber) {
  try {
    lex_from("FOOD  F UW1 D\nBROKEN\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(lex_from("BAD  f uw\n"), ParseError);
}

TEST(LoadLexicon, MissingFile) { EXPECT_THROW(load_lexicon("/nonexistent/dict"), IoError); }

TEST(LoadLexicon, BundledSample) {
  auto lex = load_lexicon(VERSEFORGE_DATA_DIR "/cmudict_sample.dict");
  EXPECT_GT(lex.size(), 100u);
  EXPECT_EQ(lex.find("beginners")->phonemes, (Symbols{"B", "IH", "G", "IH", "N", "ER", "Z"}));
}

TEST(StripStress, Idempotent) {
  EXPECT_EQ(strip_stress("UW1"), "UW");
  EXPECT_EQ(strip_stress(strip_stress("UW1")), "UW");
  EXPECT_EQ(strip_stress("K"), "K");
}

TEST(Transcribe, LexiconHit) {
  auto lex = lex_from("FOOD  F UW1 D\n");
  EXPECT_EQ(transcribe("food", lex).phonemes, (Symbols{"F", "UW", "D"}));
}

TEST(Transcribe, FallbackRuns) {
  Lexicon empty;
  EXPECT_EQ(transcribe("zyzzx", empty).phonemes, (Symbols{"V:y"}));
  EXPECT_TRUE(transcribe("hmm", empty).phonemes.empty());
  EXPECT_EQ(transcribe("yeah", empty).phonemes, (Symbols{"V:ea"}));
  EXPECT_EQ(transcribe("rogaine", empty).phonemes, (Symbols{"V:o", "V:ai", "V:e"}));
  EXPECT_EQ(transcribe("playin'", empty).phonemes, (Symbols{"V:ayi"}));
}

TEST(Transcribe, Pure) {
  auto lex = lex_from("FOOD  F UW1 D\n");
  EXPECT_EQ(transcribe("rogaine", lex), transcribe("rogaine", lex));
  EXPECT_EQ(transcribe("food", lex), transcribe("food", lex));
}

TEST(VowelClass, ArpabetAndFallback) {
  EXPECT_TRUE(is_vowel("UW"));
  EXPECT_TRUE(is_vowel("ER"));
  EXPECT_TRUE(is_vowel("V:oo"));
  EXPECT_FALSE(is_vowel("F"));
  EXPECT_FALSE(is_vowel("Y"));
}

TEST(VowelSequence, Examples) {
  auto lex = load_lexicon(VERSEFORGE_DATA_DIR "/cmudict_sample.dict");
  auto one = vowel_sequence({"you"}, lex);
  EXPECT_EQ(one.vowels, (Symbols{"UW"}));
  EXPECT_EQ(one.word_end_marks, (std::vector<std::size_t>{1}));

  auto none = vowel_sequence({}, lex);
  EXPECT_TRUE(none.vowels.empty());
  EXPECT_TRUE(none.word_end_marks.empty());

  auto two = vowel_sequence({"no", "shame"}, lex);
  EXPECT_EQ(two.vowels, (Symbols{"OW", "EY"}));
  EXPECT_EQ(two.word_end_marks, (std::vector<std::size_t>{1, 2}));
}

TEST(VowelSequence, VowellessWordMarksCurrentPosition) {
  auto lex = lex_from("YOU  Y UW1\n");
  auto seq = vowel_sequence({"you", "hmm", "you"}, lex);
  EXPECT_EQ(seq.vowels, (Symbols{"UW", "UW"}));
  EXPECT_EQ(seq.word_end_marks, (std::vector<std::size_t>{1, 1, 2}));
}

TEST(VowelSequence, FallbackNeverMatchesDictionaryVowels) {
  auto lex = lex_from("YOU  Y UW1\n");
  auto seq = vowel_sequence({"you", "zoo"}, lex);
  EXPECT_EQ(seq.vowels, (Symbols{"UW", "V:oo"}));
}

}  // namespace
}  // namespace verseforge
