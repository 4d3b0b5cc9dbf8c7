#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "typoprobe/text.hpp"

namespace typoprobe {

using VerseId = std::string;
using Tokens = std::vector<std::string>;

enum class Role { source, target };

inline std::string to_string(Role r) { return r == Role::source ? "source" : "target"; }

// Genealogical and areal metadata for one translation. Probing only needs
// this part of a Doculect.
struct DoculectInfo {
  std::string doculect_id;
  std::string iso639_3;
  std::string family;
  std::string macroarea;
  std::set<std::string> contacts;  // iso639_3 codes
  Role role = Role::target;
  bool preferred = false;
};

struct Doculect {
  DoculectInfo info;
  std::map<VerseId, Tokens> verses;

  const std::string& id() const { return info.doculect_id; }
};

struct Corpus {
  std::vector<Doculect> doculects;
  std::set<VerseId> canonical;  // empty until computed

  const Doculect* find(const std::string& doculect_id) const {
    for (const auto& d : doculects)
      if (d.id() == doculect_id) return &d;
    return nullptr;
  }
};

// Reads one verse-text file: `<verse id>\t<space separated tokens>` per line,
// `#` lines are comments. Lines without tokens are treated as untranslated.
inline std::map<VerseId, Tokens> read_verse_text(const std::string& path) {
  auto in = text::open_input(path);
  std::map<VerseId, Tokens> verses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path, lineno, "missing tab after verse id");
    VerseId id(text::trim(std::string_view(line).substr(0, tab)));
    if (id.empty()) throw ParseError(path, lineno, "empty verse id");
    auto tokens = text::split_ws(std::string_view(line).substr(tab + 1));
    if (verses.count(id)) throw ParseError(path, lineno, "duplicate verse id '" + id + "'");
    if (tokens.empty()) continue;
    verses.emplace(std::move(id), std::move(tokens));
  }
  return verses;
}

inline void write_verse_text(const std::string& path, const std::map<VerseId, Tokens>& verses) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (const auto& [id, tokens] : verses) {
    out << id << '\t';
    for (std::size_t i = 0; i < tokens.size(); ++i) out << (i ? " " : "") << tokens[i];
    out << '\n';
  }
}

inline bool parse_bool(const std::string& s, const std::string& file, std::size_t line) {
  if (s == "1" || s == "true" || s == "yes" || s == "True") return true;
  if (s == "0" || s == "false" || s == "no" || s == "False" || s.empty()) return false;
  throw ParseError(file, line, "not a boolean: '" + s + "'");
}

// Metadata TSV with columns doculect_id, iso639_3, glottolog_family,
// macroarea, contacts, role, preferred. A header row is optional.
inline std::map<std::string, DoculectInfo> read_metadata(const std::string& path) {
  auto in = text::open_input(path);
  std::map<std::string, DoculectInfo> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    auto f = text::split(line, '\t');
    if (f[0] == "doculect_id") continue;
    if (f.size() != 7) throw ParseError(path, lineno, "expected 7 columns, got " + std::to_string(f.size()));
    DoculectInfo info;
    info.doculect_id = f[0];
    info.iso639_3 = f[1];
    info.family = f[2];
    info.macroarea = f[3];
    if (f[4] != "_" && f[4] != "-")
      for (auto& c : text::split(f[4], ','))
        if (auto t = text::trim(c); !t.empty()) info.contacts.emplace(t);
    if (f[5] == "source")
      info.role = Role::source;
    else if (f[5] == "target")
      info.role = Role::target;
    else
      throw ParseError(path, lineno, "role must be source or target, got '" + f[5] + "'");
    info.preferred = parse_bool(f[6], path, lineno);
    if (info.doculect_id.empty()) throw ParseError(path, lineno, "empty doculect_id");
    if (!out.emplace(info.doculect_id, info).second)
      throw ParseError(path, lineno, "duplicate doculect_id '" + info.doculect_id + "'");
  }
  return out;
}

inline void write_metadata(const std::string& path, const std::vector<DoculectInfo>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "doculect_id\tiso639_3\tglottolog_family\tmacroarea\tcontacts\trole\tpreferred\n";
  for (const auto& r : rows) {
    std::string contacts;
    for (const auto& c : r.contacts) contacts += (contacts.empty() ? "" : ",") + c;
    out << r.doculect_id << '\t' << r.iso639_3 << '\t' << r.family << '\t' << r.macroarea << '\t'
        << (contacts.empty() ? "_" : contacts) << '\t' << to_string(r.role) << '\t' << (r.preferred ? 1 : 0)
        << '\n';
  }
}

// The doculect id of a text file is its file name without extension.
inline std::string doculect_id_from_path(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

inline Corpus load_corpus(const std::vector<std::string>& text_paths, const std::string& metadata_path) {
  const auto meta = read_metadata(metadata_path);
  Corpus corpus;
  std::vector<std::string> missing;
  std::set<std::string> seen;
  for (const auto& path : text_paths) {
    const auto id = doculect_id_from_path(path);
    if (!seen.insert(id).second) throw Error("duplicate doculect id '" + id + "' from " + path);
    auto it = meta.find(id);
    if (it == meta.end()) {
      missing.push_back(id);
      continue;
    }
    Doculect d;
    d.info = it->second;
    d.verses = read_verse_text(path);
    corpus.doculects.push_back(std::move(d));
  }
  if (!missing.empty()) {
    std::string msg = "doculects missing from metadata " + metadata_path + ":";
    for (const auto& m : missing) msg += " " + m;
    throw Error(msg);
  }
  return corpus;
}

// Verses present in at least threshold * (number of doculects) doculects.
inline std::set<VerseId> canonical_verses(const Corpus& corpus, double threshold = 0.8) {
  std::unordered_map<VerseId, std::size_t> counts;
  for (const auto& d : corpus.doculects)
    for (const auto& [id, _] : d.verses) ++counts[id];
  const double needed = threshold * static_cast<double>(corpus.doculects.size());
  std::set<VerseId> out;
  for (const auto& [id, c] : counts)
    if (static_cast<double>(c) + 1e-9 >= needed) out.insert(id);
  return out;
}

inline double coverage(const Doculect& d, const std::set<VerseId>& canonical) {
  if (canonical.empty()) return 0.0;
  std::size_t covered = 0;
  for (const auto& v : canonical) covered += d.verses.count(v);
  return static_cast<double>(covered) / static_cast<double>(canonical.size());
}

// Drops doculects covering less than `min_coverage` of the canonical verses.
// The boundary is inclusive.
inline Corpus filter_translations(const Corpus& corpus, double min_coverage = 0.8) {
  if (corpus.canonical.empty()) throw Error("filter_translations: canonical verse set not computed");
  Corpus out;
  out.canonical = corpus.canonical;
  const auto n = static_cast<double>(corpus.canonical.size());
  for (const auto& d : corpus.doculects) {
    std::size_t covered = 0;
    for (const auto& v : corpus.canonical) covered += d.verses.count(v);
    if (static_cast<double>(covered) + 1e-9 >= min_coverage * n) out.doculects.push_back(d);
  }
  return out;
}

// Verse ids that are canonical and translated in both doculects.
inline std::vector<VerseId> shared_verses(const Doculect& a, const Doculect& b, const std::set<VerseId>& canonical) {
  std::vector<VerseId> out;
  for (const auto& [id, _] : a.verses)
    if (b.verses.count(id) && (canonical.empty() || canonical.count(id))) out.push_back(id);
  return out;
}

}  // namespace typoprobe
