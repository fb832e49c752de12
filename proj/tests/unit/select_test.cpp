#include "verseforge/select.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace verseforge {
namespace {

const Lexicon& lexicon() {
  static const Lexicon lex = load_lexicon(VERSEFORGE_DATA_DIR "/cmudict_sample.dict");
  return lex;
}

Hypothesis hyp(std::size_t rank, const std::string& text) {
  Hypothesis h;
  h.generator_rank = rank;
  h.verse = parse_flat_text(text);
  return h;
}

std::vector<Document> toy_docs() {
  std::ifstream in(VERSEFORGE_TEST_DATA_DIR "/tfidf_toy.oracle.json");
  auto oracle = nlohmann::json::parse(in);
  std::vector<Document> docs;
  for (const auto& d : oracle["docs"]) {
    docs.push_back(make_document("d" + std::to_string(docs.size()), DocKind::lyrics, d.get<std::string>()));
  }
  return docs;
}

TEST(ParseHypotheses, JsonLines) {
  std::istringstream in(R"({"rank": 0, "text": "where were you <nl> no food"})"
                        "\n\n"
                        R"({"rank": 1, "text": "x"})"
                        "\n");
  auto hyps = parse_hypotheses(in);
  ASSERT_EQ(hyps.size(), 2u);
  EXPECT_EQ(hyps[0].verse.lines.size(), 2u);
  EXPECT_EQ(hyps[1].generator_rank, 1u);
  std::istringstream bad(R"({"rank": "zero", "text": "x"})");
  EXPECT_THROW(parse_hypotheses(bad), ParseError);
  std::istringstream junk("not json");
  EXPECT_THROW(parse_hypotheses(junk), ParseError);
}

TEST(Rerank, SingleHypothesis) {
  auto best = rerank({hyp(3, "bat cat")}, lexicon());
  EXPECT_EQ(best.generator_rank, 3u);
  EXPECT_DOUBLE_EQ(best.scored.rd(), 0.5);
}

TEST(Rerank, RepetitionPenaltyDecides) {
  // Both streams are AE AE AE AE, so RD is 1.5 for each; A repeats its lines (rep 1).
  auto best = rerank({hyp(0, "bat cat <nl> bat cat"), hyp(1, "bat cat <nl> hat mat")}, lexicon());
  EXPECT_EQ(best.generator_rank, 1u);
  EXPECT_DOUBLE_EQ(best.scored.rd(), 1.5);
  EXPECT_DOUBLE_EQ(best.scored.score(), 1.5);
}

TEST(Rerank, ArithmeticOracle) {
  ScoredVerse a(Verse{}, 1.0, 0.2), b(Verse{}, 0.9, 0.0);
  EXPECT_LT(a.score(), b.score());
}

TEST(Rerank, TiesGoToLowestRank) {
  auto best = rerank({hyp(5, "bat cat"), hyp(2, "bat cat"), hyp(9, "bat cat")}, lexicon());
  EXPECT_EQ(best.generator_rank, 2u);
}

TEST(Rerank, Errors) {
  EXPECT_THROW(rerank({}, lexicon()), Error);
  EXPECT_THROW(rerank({hyp(1, "a"), hyp(1, "b")}, lexicon()), Error);
}

TEST(Rerank, ArgmaxAndPermutationInvariance) {
  const std::vector<std::string> vocab = {"bat", "cat", "food", "you", "rain", "plane", "gold", "told", "slow", "show"};
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1), count(1, 8), lines(1, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Hypothesis> batch;
    const auto n = count(gen);
    for (std::size_t r = 0; r < n; ++r) {
      std::string text;
      for (std::size_t l = lines(gen); l > 0; --l) {
        for (int w = 0; w < 3; ++w) text += vocab[word(gen)] + " ";
        if (l > 1) text += "<nl> ";
      }
      batch.push_back(hyp(r * 2 + 1, text));
    }
    const auto best = rerank(batch, lexicon());
    for (const auto& h : batch) {
      const auto s = rhyme_density(h.verse, lexicon()) - repetition_score(h.verse);
      EXPECT_GE(best.scored.score(), s);
    }
    auto shuffled = batch;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    EXPECT_EQ(rerank(shuffled, lexicon()).generator_rank, best.generator_rank);
  }
}

TEST(Index, SingleDocIsDegenerate) {
  auto index = build_index({make_document("only", DocKind::news, "gold chain")});
  EXPECT_TRUE(index.vectors[0].empty());
  auto hits = retrieve(index, make_document("q", DocKind::news, "gold chain"));
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].similarity, 0.0);
}

TEST(Index, DisjointDocsAreOrthogonal) {
  auto index = build_index({make_document("a", DocKind::news, "gold chain"), make_document("b", DocKind::news, "slow rain")});
  EXPECT_EQ(dot(index.vectors[0], index.vectors[1]), 0.0);
  for (const auto& hit : retrieve(index, make_document("q", DocKind::news, "money talks"), 2)) {
    EXPECT_EQ(hit.similarity, 0.0);
  }
}

TEST(Index, StopwordsExcludedAndMinDf) {
  StopwordSet stop{"the"};
  auto index = build_index({make_document("a", DocKind::news, "the gold"), make_document("b", DocKind::news, "the rain rain")},
                           stop);
  EXPECT_EQ(index.vocabulary.count("the"), 0u);
  auto pruned = build_index(toy_docs(), {}, 2);
  EXPECT_EQ(pruned.vocabulary.size(), 3u);  // gold, cash, money
  EXPECT_THROW(build_index({}), Error);
}

TEST(Index, Deterministic) {
  auto a = build_index(toy_docs());
  auto b = build_index(toy_docs());
  ASSERT_EQ(a.vectors.size(), b.vectors.size());
  for (std::size_t i = 0; i < a.vectors.size(); ++i) {
    ASSERT_EQ(a.vectors[i].size(), b.vectors[i].size());
    for (std::size_t j = 0; j < a.vectors[i].size(); ++j) {
      EXPECT_EQ(a.vectors[i][j].dim, b.vectors[i][j].dim);
      EXPECT_EQ(a.vectors[i][j].weight, b.vectors[i][j].weight);
    }
  }
}

TEST(Retrieve, SelfQuery) {
  auto docs = toy_docs();
  auto index = build_index(docs);
  for (const auto& d : docs) {
    auto hits = retrieve(index, d);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].id, d.id);
    EXPECT_NEAR(hits[0].similarity, 1.0, 1e-9);
  }
}

TEST(Retrieve, MatchesTfidfOracle) {
  std::ifstream in(VERSEFORGE_TEST_DATA_DIR "/tfidf_toy.oracle.json");
  auto oracle = nlohmann::json::parse(in);
  auto index = build_index(toy_docs());
  for (const auto& q : oracle["queries"]) {
    auto hits = retrieve(index, make_document("q", DocKind::news, q["query"].get<std::string>()), 3);
    ASSERT_EQ(hits.size(), 3u);
    for (std::size_t r = 0; r < 3; ++r) {
      const auto expected = q["ranking"][r].get<std::size_t>();
      EXPECT_EQ(hits[r].doc, expected) << q["query"];
      EXPECT_NEAR(hits[r].similarity, q["similarities"][expected].get<double>(), 1e-12);
    }
  }
}

TEST(Retrieve, TiesKeepInsertionOrder) {
  auto index = build_index({make_document("a", DocKind::news, "x"), make_document("b", DocKind::news, "y"),
                            make_document("c", DocKind::news, "z")});
  auto hits = retrieve(index, make_document("q", DocKind::news, "nothing"), 3);
  EXPECT_EQ(hits[0].id, "a");
  EXPECT_EQ(hits[1].id, "b");
  EXPECT_EQ(hits[2].id, "c");
}

TEST(Retrieve, SimilarityInUnitInterval) {
  std::vector<Document> docs;
  for (const auto& d : load_lyrics(VERSEFORGE_DATA_DIR "/sample_lyrics")) {
    for (const auto& v : split_verses(d, 1)) docs.push_back(verse_document(v, "v" + std::to_string(docs.size())));
  }
  auto index = build_index(docs);
  for (const auto& d : docs) {
    for (const auto& h : retrieve(index, d, docs.size())) {
      EXPECT_GE(h.similarity, 0.0);
      EXPECT_LE(h.similarity, 1.0 + 1e-12);
    }
  }
}

TEST(Persistence, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "verseforge_index_test";
  std::filesystem::remove_all(dir);
  auto index = build_index(toy_docs());
  save_index(index, dir);
  auto loaded = load_index(dir);
  EXPECT_EQ(loaded.vocabulary, index.vocabulary);
  EXPECT_EQ(loaded.document_frequency, index.document_frequency);
  auto query = make_document("q", DocKind::news, "money flow");
  auto a = retrieve(index, query, 3);
  auto b = retrieve(loaded, query, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].text, b[i].text);
    EXPECT_EQ(a[i].similarity, b[i].similarity);
  }
  EXPECT_THROW(load_index(dir / "missing"), IoError);
}

TEST(Embedding, AveragedWordVectors) {
  WordVectors wv;
  wv.add("gold", {1.0, 0.0});
  wv.add("chain", {1.0, 0.0});
  wv.add("rain", {0.0, 1.0});
  auto index = build_embedding_index({make_document("a", DocKind::news, "gold chain"),
                                      make_document("b", DocKind::news, "slow rain")},
                                     wv);
  auto hits = retrieve(index, tokenize("gold"), 2);
  EXPECT_EQ(hits[0].id, "a");
  EXPECT_NEAR(hits[0].similarity, 1.0, 1e-12);
  EXPECT_NEAR(hits[1].similarity, 0.0, 1e-12);
}

TEST(Embedding, LoadFile) {
  const auto path = std::filesystem::temp_directory_path() / "verseforge_vectors.txt";
  std::ofstream(path) << "gold 1 0 0\nrain 0 1 0\n";
  auto wv = WordVectors::load(path);
  EXPECT_EQ(wv.dim(), 3u);
  std::ofstream(path) << "gold 1 0 0\nrain 0 1\n";
  EXPECT_THROW(WordVectors::load(path), ParseError);
}

}  // namespace
}  // namespace verseforge
