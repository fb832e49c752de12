#pragma once

// End-to-end wiring: strip -> noise -> select -> enhance -> report, plus the
// JSON configuration it runs from.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "verseforge/corpus.hpp"
#include "verseforge/enhance.hpp"
#include "verseforge/error.hpp"
#include "verseforge/metrics.hpp"
#include "verseforge/phonetics.hpp"
#include "verseforge/select.hpp"
#include "verseforge/stripping.hpp"

namespace verseforge {

enum class PredictorKind { corpus, remote };

inline PredictorKind parse_predictor_kind(std::string_view name) {
  if (name == "corpus") return PredictorKind::corpus;
  if (name == "remote") return PredictorKind::remote;
  throw ConfigError("unknown predictor '" + std::string(name) + "' (expected corpus or remote)");
}

struct PipelineConfig {
  std::string lexicon_path;
  std::string stopwords_path;
  std::string synonyms_path;
  std::string deny_path;
  std::string predictor_corpus_path;  ///< lyrics used to build the corpus predictor
  NoiseKind noise = NoiseKind::shuffle;
  std::uint64_t seed = 0;
  double drop_rate = 0.20;
  double synonym_rate = 0.20;
  RhymeConfig rhyme;
  std::size_t enhance_k = 200;
  EnhanceMode enhance_mode = EnhanceMode::first_improvement;
  PredictorKind predictor = PredictorKind::corpus;
  std::string endpoint;

  NoiseConfig noise_config() const { return {drop_rate, synonym_rate, seed}; }
};

namespace detail {

inline const std::vector<std::string>& top_level_keys() {
  static const std::vector<std::string> keys = {
      "lexicon_path", "stopwords_path", "synonyms_path", "deny_path", "predictor_corpus_path", "noise", "seed",
      "drop_rate",    "synonym_rate",   "rhyme",         "enhance",   "predictor",             "endpoint"};
  return keys;
}

inline void reject_unknown(const nlohmann::json& obj, const std::vector<std::string>& valid, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(valid.begin(), valid.end(), key) == valid.end()) {
      throw ConfigError("unknown config key '" + where + key + "'; valid keys: " + join(valid, ", "));
    }
  }
}

inline const nlohmann::json* field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline std::string get_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config key '" + key + "': expected string");
  return v.get<std::string>();
}

inline std::uint64_t get_count(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("config key '" + key + "': expected non-negative integer");
  return v.get<std::uint64_t>();
}

inline double get_real(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "': expected number");
  return v.get<double>();
}

inline bool get_bool(const nlohmann::json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("config key '" + key + "': expected boolean");
  return v.get<bool>();
}

}  // namespace detail

/// Applies the keys present in `obj` on top of `cfg`.
inline PipelineConfig config_from_json(const nlohmann::json& obj, PipelineConfig cfg = {}) {
  using namespace detail;
  if (!obj.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(obj, top_level_keys(), "");

  if (auto* v = field(obj, "lexicon_path")) cfg.lexicon_path = get_string(*v, "lexicon_path");
  if (auto* v = field(obj, "stopwords_path")) cfg.stopwords_path = get_string(*v, "stopwords_path");
  if (auto* v = field(obj, "synonyms_path")) cfg.synonyms_path = get_string(*v, "synonyms_path");
  if (auto* v = field(obj, "deny_path")) cfg.deny_path = get_string(*v, "deny_path");
  if (auto* v = field(obj, "predictor_corpus_path")) cfg.predictor_corpus_path = get_string(*v, "predictor_corpus_path");
  if (auto* v = field(obj, "noise")) cfg.noise = parse_noise_kind(get_string(*v, "noise"));
  if (auto* v = field(obj, "seed")) cfg.seed = get_count(*v, "seed");
  if (auto* v = field(obj, "drop_rate")) cfg.drop_rate = get_real(*v, "drop_rate");
  if (auto* v = field(obj, "synonym_rate")) cfg.synonym_rate = get_real(*v, "synonym_rate");
  if (auto* v = field(obj, "predictor")) cfg.predictor = parse_predictor_kind(get_string(*v, "predictor"));
  if (auto* v = field(obj, "endpoint")) cfg.endpoint = get_string(*v, "endpoint");
  if (auto* v = field(obj, "rhyme")) {
    if (!v->is_object()) throw ConfigError("config key 'rhyme': expected object");
    reject_unknown(*v, {"window", "exclude_identical"}, "rhyme.");
    if (auto* w = field(*v, "window")) cfg.rhyme.window = get_count(*w, "rhyme.window");
    if (auto* w = field(*v, "exclude_identical")) cfg.rhyme.exclude_identical = get_bool(*w, "rhyme.exclude_identical");
  }
  if (auto* v = field(obj, "enhance")) {
    if (!v->is_object()) throw ConfigError("config key 'enhance': expected object");
    reject_unknown(*v, {"k", "mode"}, "enhance.");
    if (auto* w = field(*v, "k")) cfg.enhance_k = get_count(*w, "enhance.k");
    if (auto* w = field(*v, "mode")) cfg.enhance_mode = parse_enhance_mode(get_string(*w, "enhance.mode"));
  }
  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig defaults = {}) {
  const auto text = read_file(path);
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(obj, std::move(defaults));
}

/// Checks cross-field invariants and that every referenced file exists.
inline void validate(const PipelineConfig& cfg) {
  auto require_file = [](const std::string& path, const char* key) {
    if (path.empty()) throw ConfigError(std::string(key) + " is required");
    if (!std::filesystem::exists(path)) throw ConfigError(std::string(key) + ": no such file '" + path + "'");
  };
  auto optional_file = [&](const std::string& path, const char* key) {
    if (!path.empty()) require_file(path, key);
  };
  cfg.rhyme.validate();
  cfg.noise_config().validate();
  if (cfg.enhance_k < 1) throw ConfigError("enhance.k must be >= 1");
  if (cfg.predictor == PredictorKind::remote && cfg.endpoint.empty()) {
    throw ConfigError("predictor 'remote' requires an endpoint");
  }
  require_file(cfg.lexicon_path, "lexicon_path");
  require_file(cfg.stopwords_path, "stopwords_path");
  optional_file(cfg.synonyms_path, "synonyms_path");
  optional_file(cfg.deny_path, "deny_path");
  if (cfg.noise == NoiseKind::synonym && cfg.synonyms_path.empty()) {
    throw ConfigError("noise 'synonym' requires synonyms_path");
  }
  if (cfg.predictor == PredictorKind::corpus) require_file(cfg.predictor_corpus_path, "predictor_corpus_path");
}

/// Everything a pipeline run reads, loaded once.
struct PipelineResources {
  PipelineConfig config;
  Lexicon lexicon;
  StopwordSet stopwords;
  std::optional<SynonymLexicon> synonyms;
  EnhanceConfig enhance;
  std::unique_ptr<MaskedPredictor> predictor;
};

inline PipelineResources load_resources(const PipelineConfig& cfg) {
  validate(cfg);
  PipelineResources res;
  res.config = cfg;
  res.lexicon = load_lexicon(cfg.lexicon_path);
  res.stopwords = load_stopwords(cfg.stopwords_path);
  if (!cfg.synonyms_path.empty()) res.synonyms = load_synonyms(cfg.synonyms_path).content_only(res.stopwords);
  res.enhance.k = cfg.enhance_k;
  res.enhance.mode = cfg.enhance_mode;
  res.enhance.exclude_identical = cfg.rhyme.exclude_identical;
  if (!cfg.deny_path.empty()) res.enhance.deny_list = load_deny_list(cfg.deny_path);
  if (cfg.predictor == PredictorKind::remote) {
    res.predictor = std::make_unique<RemotePredictor>(cfg.endpoint);
  } else {
    std::vector<Verse> verses;
    for (const auto& doc : load_lyrics(cfg.predictor_corpus_path)) {
      auto vs = split_verses(doc, 1);
      verses.insert(verses.end(), vs.begin(), vs.end());
    }
    res.predictor = build_corpus_predictor(verses);
  }
  return res;
}

struct Report {
  double rd_before = 0.0;
  double rd_after = 0.0;
  double rep = 0.0;
  std::optional<double> overlap_vs_input;
  std::vector<TokenPosition> replaced_positions;
};

inline nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["rd_before"] = r.rd_before;
  j["rd_after"] = r.rd_after;
  j["rep"] = r.rep;
  j["overlap_vs_input"] = r.overlap_vs_input ? nlohmann::ordered_json(*r.overlap_vs_input) : nlohmann::ordered_json(nullptr);
  auto positions = nlohmann::ordered_json::array();
  for (const auto& p : r.replaced_positions) positions.push_back({p.line, p.token});
  j["replaced_positions"] = positions;
  return j;
}

struct PipelineOutput {
  ContentWords content;
  Verse selected;  ///< before enhancement
  Verse verse;     ///< final
  Report report;
};

/// Runs one document through every stage. Failures surface as StageError
/// naming the stage.
inline PipelineOutput run_pipeline(const Document& input, const PipelineResources& res,
                                   const std::optional<std::vector<Hypothesis>>& hypotheses = std::nullopt) {
  const auto& cfg = res.config;
  PipelineOutput out;
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };

  out.content = stage("strip", [&] {
    if (input.lines.empty()) throw Error("empty input");
    return extract_content_words(input, res.stopwords);
  });
  out.content = stage("noise", [&] {
    return apply_noise(std::move(out.content), cfg.noise, cfg.noise_config(), derive_seed(cfg.seed, input.id),
                       res.synonyms ? &*res.synonyms : nullptr);
  });
  out.selected = stage("select", [&] {
    if (hypotheses) return rerank(*hypotheses, res.lexicon, cfg.rhyme).verse;
    Verse trivial;
    trivial.source_doc = input.id;
    for (const auto& line : out.content.lines) {
      if (!line.empty()) trivial.lines.push_back(Line{line});
    }
    if (trivial.lines.empty()) throw Error("no content words survived stripping");
    return trivial;
  });
  auto enhanced = stage("enhance", [&] { return enhance_verse(out.selected, *res.predictor, res.enhance, res.lexicon); });
  out.verse = std::move(enhanced.verse);

  out.report.rd_before = rhyme_density(out.selected, res.lexicon, cfg.rhyme);
  out.report.rd_after = rhyme_density(out.verse, res.lexicon, cfg.rhyme);
  out.report.rep = repetition_score(out.verse);
  out.report.overlap_vs_input = unigram_overlap(flatten(input.lines), flatten(out.verse.lines));
  out.report.replaced_positions = std::move(enhanced.replaced);
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

inline MeanStd mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

struct ReportSummary {
  std::size_t n = 0;
  std::optional<MeanStd> overlap;  ///< absent when no report carries an overlap
  MeanStd rd_before;
  MeanStd rd_after;
  MeanStd rep;
};

/// Mean and population std of every report column. Overlap is averaged over
/// the reports that have one.
inline ReportSummary summarize(const std::vector<Report>& reports) {
  if (reports.empty()) throw Error("summarize: no reports");
  std::vector<double> overlap, before, after, rep;
  for (const auto& r : reports) {
    if (r.overlap_vs_input) overlap.push_back(*r.overlap_vs_input);
    before.push_back(r.rd_before);
    after.push_back(r.rd_after);
    rep.push_back(r.rep);
  }
  ReportSummary s;
  s.n = reports.size();
  if (!overlap.empty()) s.overlap = mean_std(overlap);
  s.rd_before = mean_std(before);
  s.rd_after = mean_std(after);
  s.rep = mean_std(rep);
  return s;
}

inline std::string format_mean_std(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", m.mean, m.std);
  return buf;
}

/// Table with one header row and one value row: n, Overlap, RD, RD before
/// enhancement, rep. Missing columns print "-".
inline std::string serve_report(const std::vector<Report>& reports) {
  const auto s = summarize(reports);
  std::ostringstream out;
  out << "| n | Overlap | RD | RD (no RE) | rep |\n";
  out << "|---|---------|----|------------|-----|\n";
  out << "| " << s.n << " | " << (s.overlap ? format_mean_std(*s.overlap) : "-") << " | " << format_mean_std(s.rd_after)
      << " | " << format_mean_std(s.rd_before) << " | " << format_mean_std(s.rep) << " |\n";
  return out.str();
}

}  // namespace verseforge
