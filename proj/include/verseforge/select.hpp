#pragma once

// Hypothesis reranking and nearest-neighbour retrieval baselines.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "verseforge/corpus.hpp"
#include "verseforge/error.hpp"
#include "verseforge/metrics.hpp"
#include "verseforge/phonetics.hpp"
#include "verseforge/stripping.hpp"

namespace verseforge {

/// Beam width the hypotheses usually come from; any batch size is accepted.
inline constexpr std::size_t kDefaultBatchSize = 24;

struct Hypothesis {
  Verse verse;
  std::size_t generator_rank = 0;  ///< 0 is the generator's top hypothesis
  ScoredVerse scored;
};

/// JSON-lines, one {"rank": int, "text": "... <nl> ..."} per line.
inline std::vector<Hypothesis> parse_hypotheses(std::istream& in) {
  std::vector<Hypothesis> hyps;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!obj.is_object() || !obj.contains("rank") || !obj["rank"].is_number_integer() || obj["rank"].get<long long>() < 0 ||
        !obj.contains("text") || !obj["text"].is_string()) {
      throw ParseError("hypothesis needs a non-negative integer \"rank\" and a string \"text\"", lineno);
    }
    Hypothesis h;
    h.generator_rank = obj["rank"].get<std::size_t>();
    h.verse = parse_flat_text(obj["text"].get<std::string>());
    hyps.push_back(std::move(h));
  }
  return hyps;
}

/// Scores every hypothesis in place.
inline void score_hypotheses(std::vector<Hypothesis>& hyps, const Lexicon& lex, const RhymeConfig& cfg = {}) {
  for (auto& h : hyps) h.scored = ScoredVerse::compute(h.verse, lex, cfg);
}

/// The hypothesis maximising RD - rep; ties go to the lowest generator rank.
inline Hypothesis rerank(std::vector<Hypothesis> hyps, const Lexicon& lex, const RhymeConfig& cfg = {}) {
  if (hyps.empty()) throw Error("rerank: no hypotheses");
  std::set<std::size_t> ranks;
  for (const auto& h : hyps) {
    if (!ranks.insert(h.generator_rank).second) {
      throw Error("rerank: duplicate generator rank " + std::to_string(h.generator_rank));
    }
  }
  score_hypotheses(hyps, lex, cfg);
  const auto best = std::max_element(hyps.begin(), hyps.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.scored.score() != b.scored.score()) return a.scored.score() < b.scored.score();
    return a.generator_rank > b.generator_rank;
  });
  return *best;
}

// ---------------------------------------------------------------------------
// TF-IDF retrieval

struct SparseEntry {
  std::size_t dim = 0;
  double weight = 0.0;
};

using SparseVector = std::vector<SparseEntry>;  // sorted by dim

inline double dot(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].dim < b[j].dim) {
      ++i;
    } else if (b[j].dim < a[i].dim) {
      ++j;
    } else {
      sum += a[i++].weight * b[j++].weight;
    }
  }
  return sum;
}

inline void normalize(SparseVector& v) {
  double norm = 0.0;
  for (const auto& e : v) norm += e.weight * e.weight;
  if (norm == 0.0) return;
  norm = std::sqrt(norm);
  for (auto& e : v) e.weight /= norm;
}

struct IndexedDoc {
  std::string id;
  std::string text;  ///< flat "<nl>" form
};

struct RetrievalIndex {
  std::vector<IndexedDoc> documents;
  std::vector<SparseVector> vectors;
  std::map<std::string, std::size_t> vocabulary;  ///< term -> dimension
  std::vector<std::size_t> document_frequency;    ///< per dimension
  StopwordSet stopwords;

  double idf(std::size_t dim) const {
    return std::log(static_cast<double>(documents.size()) / static_cast<double>(document_frequency.at(dim)));
  }
};

namespace detail {

inline std::vector<std::string> index_terms(const std::vector<Line>& lines, const StopwordSet& stopwords) {
  std::vector<std::string> terms;
  for (const auto& line : lines) {
    for (const auto& tok : line.tokens) {
      if (!is_punctuation_token(tok) && !stopwords.contains(tok)) terms.push_back(tok);
    }
  }
  return terms;
}

inline SparseVector tfidf_vector(const RetrievalIndex& index, const std::vector<std::string>& terms) {
  std::map<std::size_t, std::size_t> tf;
  for (const auto& t : terms) {
    auto it = index.vocabulary.find(t);
    if (it != index.vocabulary.end()) ++tf[it->second];
  }
  SparseVector v;
  for (const auto& [dim, count] : tf) {
    const double w = static_cast<double>(count) * index.idf(dim);
    if (w != 0.0) v.push_back({dim, w});
  }
  normalize(v);
  return v;
}

}  // namespace detail

/// TF-IDF (raw term count x log(N/df)) over non-stopword terms, L2-normalised.
/// Terms seen in fewer than `min_df` documents are left out of the vocabulary.
inline RetrievalIndex build_index(const std::vector<Document>& docs, const StopwordSet& stopwords = {},
                                  std::size_t min_df = 1) {
  if (docs.empty()) throw Error("build_index: empty corpus");
  RetrievalIndex index;
  index.stopwords = stopwords;
  std::vector<std::vector<std::string>> doc_terms;
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    index.documents.push_back({doc.id, to_flat_text(doc.lines)});
    auto terms = detail::index_terms(doc.lines, stopwords);
    for (const auto& t : std::set<std::string>(terms.begin(), terms.end())) ++df[t];
    doc_terms.push_back(std::move(terms));
  }
  for (const auto& [term, count] : df) {
    if (count < min_df) continue;
    index.vocabulary.emplace(term, index.document_frequency.size());
    index.document_frequency.push_back(count);
  }
  for (const auto& terms : doc_terms) index.vectors.push_back(detail::tfidf_vector(index, terms));
  return index;
}

struct RetrievalHit {
  std::size_t doc = 0;
  std::string id;
  std::string text;
  double similarity = 0.0;
};

namespace detail {

template <typename Similarity>
std::vector<RetrievalHit> top_k(const std::vector<IndexedDoc>& docs, std::size_t k, Similarity&& sim) {
  std::vector<RetrievalHit> hits;
  hits.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) hits.push_back({i, docs[i].id, docs[i].text, sim(i)});
  std::stable_sort(hits.begin(), hits.end(),
                   [](const RetrievalHit& a, const RetrievalHit& b) { return a.similarity > b.similarity; });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

}  // namespace detail

/// Top-k documents by cosine similarity; ties keep insertion order.
inline std::vector<RetrievalHit> retrieve(const RetrievalIndex& index, const std::vector<Line>& query, std::size_t k = 1) {
  const auto q = detail::tfidf_vector(index, detail::index_terms(query, index.stopwords));
  return detail::top_k(index.documents, k, [&](std::size_t i) { return dot(q, index.vectors[i]); });
}

inline std::vector<RetrievalHit> retrieve(const RetrievalIndex& index, const Document& query, std::size_t k = 1) {
  return retrieve(index, query.lines, k);
}

// Persistence: vocab.tsv (term, dim, df), vectors.tsv (id, dim:weight ...),
// documents.jsonl (id, text).

inline void save_index(const RetrievalIndex& index, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream vocab(dir / "vocab.tsv");
  std::ofstream vectors(dir / "vectors.tsv");
  std::ofstream docs(dir / "documents.jsonl");
  if (!vocab || !vectors || !docs) throw IoError("cannot write index to " + dir.string());
  for (const auto& [term, dim] : index.vocabulary) {
    vocab << term << '\t' << dim << '\t' << index.document_frequency[dim] << '\n';
  }
  char buf[64];
  for (std::size_t i = 0; i < index.documents.size(); ++i) {
    vectors << index.documents[i].id;
    for (const auto& e : index.vectors[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", e.weight);
      vectors << '\t' << e.dim << ':' << buf;
    }
    vectors << '\n';
    docs << nlohmann::ordered_json{{"id", index.documents[i].id}, {"text", index.documents[i].text}}.dump() << '\n';
  }
  if (!vocab || !vectors || !docs) throw IoError("failed writing index to " + dir.string());
}

inline RetrievalIndex load_index(const std::filesystem::path& dir, const StopwordSet& stopwords = {}) {
  RetrievalIndex index;
  index.stopwords = stopwords;
  {
    std::istringstream in(read_file(dir / "vocab.tsv"));
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::pair<std::size_t, std::size_t>> dims;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream fields(line);
      std::string term;
      std::size_t dim = 0, df = 0;
      if (!std::getline(fields, term, '\t') || !(fields >> dim >> df)) throw ParseError("vocab.tsv: malformed", lineno);
      index.vocabulary.emplace(term, dim);
      dims.emplace_back(dim, df);
    }
    index.document_frequency.assign(dims.size(), 0);
    for (auto [dim, df] : dims) {
      if (dim >= dims.size()) throw ParseError("vocab.tsv: dimension " + std::to_string(dim) + " out of range");
      index.document_frequency[dim] = df;
    }
  }
  {
    std::istringstream in(read_file(dir / "documents.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto obj = nlohmann::json::parse(line);
      index.documents.push_back({obj.at("id").get<std::string>(), obj.at("text").get<std::string>()});
    }
  }
  {
    std::istringstream in(read_file(dir / "vectors.tsv"));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream fields(line);
      std::string id, pair;
      std::getline(fields, id, '\t');
      SparseVector v;
      while (std::getline(fields, pair, '\t')) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) throw ParseError("vectors.tsv: expected dim:weight", lineno);
        v.push_back({std::stoul(pair.substr(0, colon)), std::stod(pair.substr(colon + 1))});
      }
      index.vectors.push_back(std::move(v));
    }
  }
  if (index.vectors.size() != index.documents.size()) throw ParseError("index: vectors and documents disagree in count");
  return index;
}

// ---------------------------------------------------------------------------
// Dense retrieval over externally supplied word vectors

class WordVectors {
 public:
  /// Text format: `word v1 ... vd` per line, all rows the same width.
  static WordVectors load(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    WordVectors wv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream fields(line);
      std::string word;
      if (!(fields >> word)) continue;
      std::vector<double> v;
      double x;
      while (fields >> x) v.push_back(x);
      if (v.empty()) throw ParseError("word vector for '" + word + "' is empty", lineno);
      if (wv.dim_ == 0) wv.dim_ = v.size();
      if (v.size() != wv.dim_) throw ParseError("inconsistent vector width", lineno);
      wv.vectors_.emplace(to_lower(word), std::move(v));
    }
    return wv;
  }

  void add(const std::string& word, std::vector<double> v) {
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_) throw Error("inconsistent vector width");
    vectors_.emplace(word, std::move(v));
  }

  /// Average of known word vectors, L2-normalised; zero when nothing is known.
  std::vector<double> embed(const std::vector<std::string>& words) const {
    std::vector<double> sum(dim_, 0.0);
    for (const auto& w : words) {
      auto it = vectors_.find(w);
      if (it == vectors_.end()) continue;
      for (std::size_t d = 0; d < dim_; ++d) sum[d] += it->second[d];
    }
    const double norm = std::sqrt(std::inner_product(sum.begin(), sum.end(), sum.begin(), 0.0));
    if (norm > 0.0) {
      for (auto& x : sum) x /= norm;
    }
    return sum;
  }

  std::size_t dim() const noexcept { return dim_; }

 private:
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::size_t dim_ = 0;
};

struct EmbeddingIndex {
  std::vector<IndexedDoc> documents;
  std::vector<std::vector<double>> vectors;
  const WordVectors* words = nullptr;
  StopwordSet stopwords;
};

inline EmbeddingIndex build_embedding_index(const std::vector<Document>& docs, const WordVectors& words,
                                            const StopwordSet& stopwords = {}) {
  if (docs.empty()) throw Error("build_embedding_index: empty corpus");
  EmbeddingIndex index{{}, {}, &words, stopwords};
  for (const auto& doc : docs) {
    index.documents.push_back({doc.id, to_flat_text(doc.lines)});
    index.vectors.push_back(words.embed(detail::index_terms(doc.lines, stopwords)));
  }
  return index;
}

inline std::vector<RetrievalHit> retrieve(const EmbeddingIndex& index, const std::vector<Line>& query, std::size_t k = 1) {
  const auto q = index.words->embed(detail::index_terms(query, index.stopwords));
  return detail::top_k(index.documents, k, [&](std::size_t i) {
    return std::inner_product(q.begin(), q.end(), index.vectors[i].begin(), 0.0);
  });
}

}  // namespace verseforge
