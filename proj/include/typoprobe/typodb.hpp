#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "typoprobe/corpus.hpp"
#include "typoprobe/features.hpp"

namespace typoprobe {

enum class LabelKind { database, projected };
enum class LabelKey { language, doculect };

inline std::string to_string(LabelKind k) { return k == LabelKind::database ? "database" : "projected"; }

struct LabelSource {
  LabelKind kind = LabelKind::database;
  std::string feature;
  LabelKey keyed_by = LabelKey::language;
  std::map<std::string, int> labels;

  // Language-keyed labels apply to every doculect of the language.
  std::optional<int> label_for(const DoculectInfo& d) const {
    const auto& key = keyed_by == LabelKey::language ? d.iso639_3 : d.doculect_id;
    auto it = labels.find(key);
    if (it == labels.end()) return std::nullopt;
    return it->second;
  }
};

using LabelSet = std::map<std::string, LabelSource>;  // feature -> source

struct FeatureGroup {
  std::string name;
  std::vector<std::string> members;
};

// TSV with an `iso639_3` column followed by one column per feature, cells in
// {0, 1, NA}. Empty cells count as NA.
inline LabelSet load_database(const std::string& path) {
  auto in = text::open_input(path);
  LabelSet out;
  std::vector<std::string> header;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    auto f = text::split(line, '\t');
    if (header.empty()) {
      if (f[0] != "iso639_3") throw ParseError(path, lineno, "first header column must be iso639_3");
      if (f.size() < 2) throw ParseError(path, lineno, "no feature columns");
      header = f;
      for (std::size_t k = 1; k < f.size(); ++k) {
        if (out.count(f[k])) throw ParseError(path, lineno, "duplicate feature column '" + f[k] + "'");
        out[f[k]] = LabelSource{LabelKind::database, f[k], LabelKey::language, {}};
      }
      continue;
    }
    if (f.size() != header.size())
      throw ParseError(path, lineno, "expected " + std::to_string(header.size()) + " columns, got " + std::to_string(f.size()));
    if (f[0].empty()) throw ParseError(path, lineno, "empty iso639_3 code");
    if (!seen.insert(f[0]).second) throw ParseError(path, lineno, "duplicate language '" + f[0] + "'");
    for (std::size_t k = 1; k < f.size(); ++k) {
      const auto v = text::trim(f[k]);
      if (v == "NA" || v.empty()) continue;
      if (v != "0" && v != "1") throw ParseError(path, lineno, "non-binary value '" + f[k] + "' for " + header[k]);
      out[header[k]].labels[f[0]] = v == "1" ? 1 : 0;
    }
  }
  if (header.empty()) throw ParseError(path, lineno, "empty database file");
  return out;
}

// One group per line: `name\tmember\tmember...`; `#` lines are comments.
inline std::vector<FeatureGroup> read_groups(const std::string& path) {
  auto in = text::open_input(path);
  std::vector<FeatureGroup> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (text::trim(line).empty() || line[0] == '#') continue;
    auto f = text::split(line, '\t');
    if (f.size() < 3) throw ParseError(path, lineno, "a group needs a name and at least two members");
    out.push_back({f[0], std::vector<std::string>(f.begin() + 1, f.end())});
  }
  return out;
}

// Keeps a language's labels for the group's features only if exactly one of
// them is 1; otherwise the language is dropped from every member.
inline void filter_mutually_exclusive(LabelSet& sources, const FeatureGroup& group) {
  if (group.members.size() < 2) throw Error("feature group '" + group.name + "' has fewer than two members");
  std::set<std::string> languages;
  for (const auto& m : group.members) {
    auto it = sources.find(m);
    if (it == sources.end()) throw Error("feature group '" + group.name + "' names unknown feature '" + m + "'");
    for (const auto& [lang, _] : it->second.labels) languages.insert(lang);
  }
  for (const auto& lang : languages) {
    int true_count = 0;
    for (const auto& m : group.members) {
      auto it = sources.at(m).labels.find(lang);
      if (it != sources.at(m).labels.end() && it->second == 1) ++true_count;
    }
    if (true_count == 1) continue;
    for (const auto& m : group.members) sources.at(m).labels.erase(lang);
  }
}

inline void filter_mutually_exclusive(LabelSet& sources, const std::vector<FeatureGroup>& groups) {
  for (const auto& g : groups) filter_mutually_exclusive(sources, g);
}

// Projected labels, keyed by doculect, one source per matrix feature.
inline LabelSet attach_projected_labels(const FeatureMatrix& m) {
  LabelSet out;
  for (const auto& f : m.features) out[f] = LabelSource{LabelKind::projected, f, LabelKey::doculect, {}};
  for (const auto& [doculect, cells] : m.rows)
    for (const auto& [f, cell] : cells)
      if (cell.value && out.count(f)) out[f].labels[doculect] = *cell.value;
  return out;
}

}  // namespace typoprobe
