#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "typoprobe/text.hpp"

namespace typoprobe {

// Bad command line, configuration or input location.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"texts", "", "directory of verse text files, one <doculect_id>.txt per doculect"},
      {"metadata", "", "doculect metadata TSV"},
      {"output", "out", "output directory for caches and results"},
      {"annotations", "", "directory of source annotations, one <doculect_id>.tsv per source doculect"},
      {"embeddings", "", "directory of source token embeddings, one <doculect_id>.tsv per source doculect"},
      {"concept_lexicon", "", "TSV language, lemma, concept"},
      {"wordlists", "", "TSV iso639_3, concept, form used for the lexical baseline"},
      {"database", "", "typological database TSV with binary feature columns"},
      {"groups", "", "groups of mutually exclusive database features"},
      {"feature_map", "", "TSV database feature, projected feature"},
      {"representations", "", "representation file to probe; defaults to the lexical baseline"},
      {"features", "", "comma-separated database features to probe; empty probes all"},
      {"train_labels", "database", "training labels: database or projected"},
      {"mode", "sound", "cross-validation policy: sound or naive"},
      {"eq1", "full", "alignment score null model: full or paper"},
      {"seed", "1", "master seed for every stochastic stage"},
      {"jobs", "1", "worker threads"},
      {"canonical_threshold", "0.8", "share of doculects a verse needs to be canonical"},
      {"coverage", "0.8", "share of canonical verses a doculect needs to be kept"},
      {"subword_max_length", "0", "longest subword in code points; 0 is unlimited"},
      {"min_joint", "2", "fewest shared verses for a subword pair to be scored"},
      {"projection_threshold", "0.2", "share of available sources a projected label needs"},
      {"paradigm_cut", "0.3", "mean pairwise distance that stops paradigm clustering"},
      {"pairs_per_pos", "1000", "form pairs sampled per part of speech for affixation"},
      {"min_paradigms", "50", "paradigms a part of speech needs to count as inflected"},
      {"min_concepts", "30", "concepts a word list needs for the lexical baseline"},
      {"max_cross_pairs", "10000", "cross-concept pairs before the lexical distance samples"},
      {"svd_dim", "100", "dimension of the lexical baseline representation"},
      {"n_samples", "401", "Monte Carlo samples per probe"},
      {"min_families", "50", "families the evaluation labels must span"},
      {"C", "0.001", "inverse regularization strength of the probe"},
  };
  return keys;
}

// Flat `key = value` configuration. Relative paths resolve against the
// directory of the file they came from.
class Config {
 public:
  Config() {
    for (const auto& k : config_keys()) values_[k.name] = k.default_value;
  }

  static Config from_file(const std::string& path) {
    Config c;
    c.read(path);
    return c;
  }

  void read(const std::string& path) {
    if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path);
    auto in = text::open_input(path);
    const auto base = std::filesystem::absolute(path).parent_path();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = std::string(text::trim(text::strip_cr(line)));
      if (t.empty() || t[0] == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ParseError(path, lineno, "expected key = value");
      const auto key = std::string(text::trim(std::string_view(t).substr(0, eq)));
      const auto value = std::string(text::trim(std::string_view(t).substr(eq + 1)));
      try {
        set(key, value, base);
      } catch (const UsageError& e) {
        throw ParseError(path, lineno, e.what());
      }
    }
  }

  // `key=value` from the command line; paths resolve against the working directory.
  void set_assignment(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("expected key=value, got '" + kv + "'");
    set(std::string(text::trim(std::string_view(kv).substr(0, eq))), std::string(text::trim(std::string_view(kv).substr(eq + 1))));
  }

  void set(const std::string& key, const std::string& value, const std::filesystem::path& base = {}) {
    if (!values_.count(key)) throw UsageError("unknown configuration key '" + key + "'");
    values_[key] = value;
    if (is_path(key) && !value.empty()) {
      std::filesystem::path p(value);
      if (p.is_relative() && !base.empty()) p = base / p;
      values_[key] = p.lexically_normal().string();
    }
  }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error("unknown configuration key '" + key + "'");
    return it->second;
  }

  const std::string& required_path(const std::string& key) const {
    const auto& v = str(key);
    if (v.empty()) throw UsageError("configuration key '" + key + "' is required");
    if (!std::filesystem::exists(v)) throw UsageError(key + ": no such file or directory: " + v);
    return v;
  }

  std::string optional_path(const std::string& key) const {
    const auto& v = str(key);
    if (!v.empty() && !std::filesystem::exists(v)) throw UsageError(key + ": no such file or directory: " + v);
    return v;
  }

  double real(const std::string& key, double lo, double hi, bool lo_open = false) const {
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(str(key), &used);
      if (used != str(key).size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw UsageError(key + ": not a number: '" + str(key) + "'");
    }
    if (v > hi || v < lo || (lo_open && v == lo))
      throw UsageError(key + " = " + str(key) + " is outside " + (lo_open ? "(" : "[") + text::format_double(lo) + ", " +
                       text::format_double(hi) + "]");
    return v;
  }

  std::uint64_t count(const std::string& key, std::uint64_t lo = 0) const {
    const auto& s = str(key);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw UsageError(key + ": not a non-negative integer: '" + s + "'");
    std::uint64_t v = 0;
    try {
      v = std::stoull(s);
    } catch (const std::exception&) {
      throw UsageError(key + ": integer out of range: '" + s + "'");
    }
    if (v < lo) throw UsageError(key + " must be at least " + std::to_string(lo));
    return v;
  }

  std::string choice(const std::string& key, const std::vector<std::string>& allowed) const {
    const auto& v = str(key);
    for (const auto& a : allowed)
      if (v == a) return v;
    std::string msg = key + " must be one of";
    for (const auto& a : allowed) msg += " " + a;
    throw UsageError(msg + ", got '" + v + "'");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& part : text::split(str(key), ','))
      if (auto t = text::trim(part); !t.empty()) out.emplace_back(t);
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static bool is_path(const std::string& key) {
    static const std::set<std::string> paths = {"texts",    "metadata",    "output", "annotations",    "embeddings",
                                                "concept_lexicon", "wordlists", "database", "groups", "feature_map",
                                                "representations"};
    return paths.count(key) != 0;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace typoprobe
