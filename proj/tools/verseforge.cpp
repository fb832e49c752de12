// verseforge command-line front end. Every subcommand writes JSON or
// JSON-lines to stdout; failures go to stderr as a JSON object.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "verseforge/verseforge.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace verseforge;

namespace {

struct Globals {
  std::string config_path;
  std::string lexicon;
  std::string stopwords;
};

PipelineConfig bundled_defaults() {
  PipelineConfig cfg;
  const fs::path data = VERSEFORGE_DATA_DIR;
  cfg.lexicon_path = (data / "cmudict_sample.dict").string();
  cfg.stopwords_path = (data / "stopwords_en.txt").string();
  cfg.predictor_corpus_path = (data / "sample_lyrics").string();
  return cfg;
}

/// Bundled defaults, then the config file, then global flags.
PipelineConfig base_config(const Globals& g) {
  auto cfg = bundled_defaults();
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("VERSEFORGE_CONFIG")) path = env;
  }
  if (!path.empty()) cfg = load_config(path, cfg);
  if (!g.lexicon.empty()) cfg.lexicon_path = g.lexicon;
  if (!g.stopwords.empty()) cfg.stopwords_path = g.stopwords;
  return cfg;
}

std::vector<Document> load_inputs(const std::vector<std::string>& paths, DocKind kind) {
  std::vector<Document> docs;
  for (const auto& p : paths) {
    auto loaded = kind == DocKind::lyrics ? load_lyrics(p) : load_prose(p, kind);
    docs.insert(docs.end(), loaded.begin(), loaded.end());
  }
  return docs;
}

/// Lyrics become one document per verse; prose documents pass through.
std::vector<Document> units(const std::vector<Document>& docs, std::size_t min_lines) {
  std::vector<Document> out;
  for (const auto& doc : docs) {
    if (doc.kind != DocKind::lyrics) {
      out.push_back(doc);
      continue;
    }
    std::size_t i = 0;
    for (const auto& v : split_verses(doc, min_lines)) out.push_back(verse_document(v, doc.id + "#" + std::to_string(i++)));
  }
  return out;
}

std::vector<Verse> verses_of(const std::vector<Document>& docs, std::size_t min_lines) {
  std::vector<Verse> out;
  for (const auto& d : docs) {
    auto vs = split_verses(d, min_lines);
    out.insert(out.end(), vs.begin(), vs.end());
  }
  return out;
}

ordered_json stats_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

ordered_json positions_json(const std::vector<TokenPosition>& ps) {
  auto arr = ordered_json::array();
  for (const auto& p : ps) arr.push_back({p.line, p.token});
  return arr;
}

void print(const ordered_json& j) { std::cout << j.dump() << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verseforge: content-conditioned rap lyric toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file (default: $VERSEFORGE_CONFIG)");
  app.add_option("--lexicon", g.lexicon, "CMUdict-format pronunciation lexicon");
  app.add_option("--stopwords", g.stopwords, "stopword list, one word per line");

  std::string kind_name = "lyrics";
  std::size_t min_lines = 4;

  // corpus stats / corpus split
  auto* corpus = app.add_subcommand("corpus", "corpus inspection");
  corpus->require_subcommand(1);
  std::vector<std::string> stats_inputs;
  std::optional<std::size_t> min_tok, max_tok;
  auto* stats = corpus->add_subcommand("stats", "document, sentence and token statistics");
  stats->add_option("inputs", stats_inputs, "files or directories")->required();
  stats->add_option("--kind", kind_name, "lyrics, news or movies");
  stats->add_option("--min-lines", min_lines, "drop verses shorter than this");
  stats->add_option("--min-tok", min_tok, "drop documents with fewer tokens");
  stats->add_option("--max-tok", max_tok, "drop documents with more tokens");

  std::vector<std::string> split_inputs;
  auto* split = corpus->add_subcommand("split", "split lyrics into verses (JSON-lines)");
  split->add_option("inputs", split_inputs, "lyric files or directories")->required();
  split->add_option("--min-lines", min_lines, "drop verses shorter than this");

  // strip / pair
  std::vector<std::string> strip_inputs;
  std::string noise_name = "shuffle";
  std::uint64_t seed = 0;
  std::string synonyms_path;
  unsigned threads = 1;
  auto add_strip_options = [&](CLI::App* cmd) {
    cmd->add_option("--input", strip_inputs, "input files or directories")->required();
    cmd->add_option("--kind", kind_name, "lyrics, news or movies");
    cmd->add_option("--noise", noise_name, "shuffle, drop, synonym or none");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--synonyms", synonyms_path, "synonym lexicon (word<TAB>syn,syn)");
    cmd->add_option("--threads", threads, "worker threads");
    cmd->add_option("--min-lines", min_lines, "drop verses shorter than this");
  };
  auto* strip = app.add_subcommand("strip", "extract noised content words (JSON-lines)");
  add_strip_options(strip);
  auto* pair = app.add_subcommand("pair", "emit {source, target} training pairs for lyric verses");
  add_strip_options(pair);

  // analyze
  std::string analyze_input, analyze_source, analyze_reference;
  std::size_t window = 15;
  auto* analyze = app.add_subcommand("analyze", "rd, rep, overlap and BLEU per verse");
  analyze->add_option("--input", analyze_input, "lyrics file, verses separated by blank lines")->required();
  analyze->add_option("--source", analyze_source, "input text for the overlap score");
  analyze->add_option("--reference", analyze_reference, "reference verses (aligned) for BLEU");
  analyze->add_option("--window", window, "rhyme lookback window in words");

  // enhance
  std::string enhance_input, predictor_name, endpoint, mode_name, deny_path, predictor_corpus;
  std::optional<std::size_t> k_opt;
  auto* enhance = app.add_subcommand("enhance", "rhyme enhancement of line-final words");
  enhance->add_option("--input", enhance_input, "lyrics file, verses separated by blank lines")->required();
  enhance->add_option("--predictor", predictor_name, "corpus or remote");
  enhance->add_option("--endpoint", endpoint, "remote predictor base URL");
  enhance->add_option("--k", k_opt, "candidates to consider");
  enhance->add_option("--mode", mode_name, "first or best");
  enhance->add_option("--deny", deny_path, "deny list, one word per line");
  enhance->add_option("--corpus", predictor_corpus, "lyrics for the corpus predictor");

  // rerank
  std::string hypotheses_path;
  auto* rerank_cmd = app.add_subcommand("rerank", "pick the hypothesis maximising RD - rep");
  rerank_cmd->add_option("--hypotheses", hypotheses_path, "JSON-lines {rank, text}")->required();
  rerank_cmd->add_option("--window", window, "rhyme lookback window in words");

  // retrieve
  std::string index_dir, query_path, vectors_path;
  std::vector<std::string> retrieve_corpus;
  std::size_t top_k = 1;
  std::size_t min_df = 1;
  auto* retrieve_cmd = app.add_subcommand("retrieve", "nearest-neighbour retrieval baseline");
  retrieve_cmd->add_option("--index-dir", index_dir, "persisted TF-IDF index directory");
  retrieve_cmd->add_option("--query", query_path, "query text file")->required();
  retrieve_cmd->add_option("--k", top_k, "results to return");
  retrieve_cmd->add_option("--corpus", retrieve_corpus, "build the index from these files first");
  retrieve_cmd->add_option("--kind", kind_name, "kind of --corpus documents");
  retrieve_cmd->add_option("--min-df", min_df, "minimum document frequency");
  retrieve_cmd->add_option("--vectors", vectors_path, "word vectors; use averaged embeddings instead of TF-IDF");

  // pipeline
  std::vector<std::string> pipeline_inputs;
  bool summary = false;
  auto* pipeline = app.add_subcommand("pipeline", "strip, noise, select, enhance and report");
  pipeline->add_option("--input", pipeline_inputs, "input files")->required();
  pipeline->add_option("--kind", kind_name, "lyrics, news or movies");
  pipeline->add_option("--hypotheses", hypotheses_path, "generator hypotheses for the (single) input");
  pipeline->add_option("--noise", noise_name, "shuffle, drop, synonym or none");
  pipeline->add_option("--seed", seed, "random seed");
  pipeline->add_option("--synonyms", synonyms_path, "synonym lexicon");
  pipeline->add_option("--predictor", predictor_name, "corpus or remote");
  pipeline->add_option("--endpoint", endpoint, "remote predictor base URL");
  pipeline->add_option("--k", k_opt, "candidates to consider");
  pipeline->add_option("--mode", mode_name, "first or best");
  pipeline->add_option("--deny", deny_path, "deny list");
  pipeline->add_option("--corpus", predictor_corpus, "lyrics for the corpus predictor");
  pipeline->add_option("--min-lines", min_lines, "drop verses shorter than this");
  pipeline->add_flag("--summary", summary, "print a mean ± std table instead of per-input JSON");

  CLI11_PARSE(app, argc, argv);

  std::string stage = "config";
  try {
    auto cfg = base_config(g);
    if (pipeline->parsed() || strip->parsed() || pair->parsed()) {
      if (strip->parsed() || pair->parsed() || pipeline->count("--noise")) cfg.noise = parse_noise_kind(noise_name);
      if (strip->parsed() || pair->parsed() || pipeline->count("--seed")) cfg.seed = seed;
      if (!synonyms_path.empty()) cfg.synonyms_path = synonyms_path;
    }
    if (!predictor_name.empty()) cfg.predictor = parse_predictor_kind(predictor_name);
    if (!endpoint.empty()) cfg.endpoint = endpoint;
    if (k_opt) cfg.enhance_k = *k_opt;
    if (!mode_name.empty()) cfg.enhance_mode = parse_enhance_mode(mode_name);
    if (!deny_path.empty()) cfg.deny_path = deny_path;
    if (!predictor_corpus.empty()) cfg.predictor_corpus_path = predictor_corpus;
    if ((analyze->parsed() && analyze->count("--window")) || (rerank_cmd->parsed() && rerank_cmd->count("--window"))) {
      cfg.rhyme.window = window;
    }
    const auto kind = parse_doc_kind(kind_name);

    if (stats->parsed()) {
      stage = "corpus";
      auto docs = units(load_inputs(stats_inputs, kind), min_lines);
      if (min_tok || max_tok) docs = filter_by_length(docs, min_tok.value_or(0), max_tok.value_or(SIZE_MAX));
      const auto s = corpus_stats(docs);
      print({{"n_docs", s.n_docs},
             {"sentences_per_doc", stats_json(s.sentences_per_doc)},
             {"tokens_per_doc", stats_json(s.tokens_per_doc)},
             {"tokens_per_sentence", stats_json(s.tokens_per_sentence)}});
      return 0;
    }

    if (split->parsed()) {
      stage = "corpus";
      for (const auto& doc : load_inputs(split_inputs, DocKind::lyrics)) {
        std::size_t i = 0;
        for (const auto& v : split_verses(doc, min_lines)) {
          print({{"id", doc.id + "#" + std::to_string(i++)},
                 {"source_doc", doc.id},
                 {"lines", v.lines.size()},
                 {"text", to_flat_text(v.lines)}});
        }
      }
      return 0;
    }

    if (strip->parsed() || pair->parsed()) {
      stage = "strip";
      cfg.noise_config().validate();
      const auto stop = load_stopwords(cfg.stopwords_path);
      std::optional<SynonymLexicon> syn;
      if (!cfg.synonyms_path.empty()) syn = load_synonyms(cfg.synonyms_path).content_only(stop);
      const auto docs = units(load_inputs(strip_inputs, pair->parsed() ? DocKind::lyrics : kind), min_lines);
      const auto cws = strip_documents(docs, stop, cfg.noise, cfg.noise_config(), syn ? &*syn : nullptr, threads);
      for (std::size_t i = 0; i < docs.size(); ++i) {
        if (pair->parsed()) {
          emit_training_pair(cws[i], Verse{docs[i].lines, docs[i].id}, std::cout);
        } else {
          print({{"id", docs[i].id},
                 {"noise", to_string(cws[i].noise)},
                 {"seed", cws[i].seed},
                 {"source", content_source_text(cws[i])},
                 {"lines", cws[i].lines}});
        }
      }
      return 0;
    }

    if (analyze->parsed()) {
      stage = "analyze";
      const auto lex = load_lexicon(cfg.lexicon_path);
      const auto verses = verses_of(load_lyrics(analyze_input), 1);
      std::optional<std::vector<std::string>> source;
      if (!analyze_source.empty()) source = flatten(tokenize(read_file(analyze_source)));
      std::optional<std::vector<Verse>> refs;
      if (!analyze_reference.empty()) {
        refs = verses_of(load_lyrics(analyze_reference), 1);
        if (refs->size() != verses.size()) {
          throw Error("reference has " + std::to_string(refs->size()) + " verses, input has " +
                      std::to_string(verses.size()));
        }
      }
      for (std::size_t i = 0; i < verses.size(); ++i) {
        ordered_json row;
        row["rd"] = rhyme_density(verses[i], lex, cfg.rhyme);
        row["rep"] = repetition_score(verses[i]);
        row["overlap"] = source ? ordered_json(unigram_overlap(*source, flatten(verses[i].lines))) : ordered_json(nullptr);
        row["bleu"] = refs ? ordered_json(corpus_bleu({flatten(verses[i].lines)}, {flatten((*refs)[i].lines)}).bleu)
                           : ordered_json(nullptr);
        print(row);
      }
      return 0;
    }

    if (enhance->parsed()) {
      stage = "enhance";
      cfg.noise = NoiseKind::none;
      auto res = load_resources(cfg);
      for (const auto& v : verses_of(load_lyrics(enhance_input), 1)) {
        auto out = enhance_verse(v, *res.predictor, res.enhance, res.lexicon);
        print({{"text", to_flat_text(out.verse.lines)},
               {"replaced", positions_json(out.replaced)},
               {"rd_before", rhyme_density(v, res.lexicon, cfg.rhyme)},
               {"rd_after", rhyme_density(out.verse, res.lexicon, cfg.rhyme)}});
      }
      return 0;
    }

    if (rerank_cmd->parsed()) {
      stage = "rerank";
      const auto lex = load_lexicon(cfg.lexicon_path);
      std::ifstream in(hypotheses_path);
      if (!in) throw IoError("cannot read " + hypotheses_path);
      const auto best = rerank(parse_hypotheses(in), lex, cfg.rhyme);
      print({{"rank", best.generator_rank},
             {"text", to_flat_text(best.verse.lines)},
             {"rd", best.scored.rd()},
             {"rep", best.scored.rep()},
             {"score", best.scored.score()}});
      return 0;
    }

    if (retrieve_cmd->parsed()) {
      stage = "retrieve";
      const auto stop = load_stopwords(cfg.stopwords_path);
      const auto query = tokenize(read_file(query_path));
      std::vector<RetrievalHit> hits;
      if (!vectors_path.empty()) {
        if (retrieve_corpus.empty()) throw ConfigError("--vectors requires --corpus");
        const auto wv = WordVectors::load(vectors_path);
        const auto index = build_embedding_index(units(load_inputs(retrieve_corpus, kind), min_lines), wv, stop);
        hits = retrieve(index, query, top_k);
      } else {
        RetrievalIndex index;
        if (!retrieve_corpus.empty()) {
          index = build_index(units(load_inputs(retrieve_corpus, kind), min_lines), stop, min_df);
          if (!index_dir.empty()) save_index(index, index_dir);
        } else if (!index_dir.empty()) {
          index = load_index(index_dir, stop);
        } else {
          throw ConfigError("retrieve needs --index-dir or --corpus");
        }
        hits = retrieve(index, query, top_k);
      }
      auto arr = ordered_json::array();
      for (const auto& h : hits) arr.push_back({{"id", h.id}, {"text", h.text}, {"similarity", h.similarity}});
      print({{"query", to_flat_text(query)}, {"hits", arr}});
      return 0;
    }

    if (pipeline->parsed()) {
      auto res = load_resources(cfg);
      std::optional<std::vector<Hypothesis>> hyps;
      if (!hypotheses_path.empty()) {
        if (pipeline_inputs.size() != 1) throw ConfigError("--hypotheses applies to a single --input");
        std::ifstream in(hypotheses_path);
        if (!in) throw IoError("cannot read " + hypotheses_path);
        hyps = parse_hypotheses(in);
      }
      std::vector<Report> reports;
      for (const auto& doc : load_inputs(pipeline_inputs, kind)) {
        stage = "pipeline";
        auto out = run_pipeline(doc, res, hyps);
        if (!summary) {
          print({{"id", doc.id},
                 {"content", content_source_text(out.content)},
                 {"verse", to_flat_text(out.verse.lines)},
                 {"report", to_json(out.report)}});
        }
        reports.push_back(std::move(out.report));
      }
      if (summary) std::cout << serve_report(reports);
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << ordered_json{{"error", e.cause()}, {"stage", e.stage()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << ordered_json{{"error", e.what()}, {"stage", stage}}.dump() << '\n';
    return 1;
  }
  return 0;
}
