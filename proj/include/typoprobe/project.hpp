#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "typoprobe/align.hpp"
#include "typoprobe/corpus.hpp"

namespace typoprobe {

inline constexpr std::array<std::string_view, 17> kUniversalPos = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

inline bool is_universal_pos(std::string_view tag) {
  return std::find(kUniversalPos.begin(), kUniversalPos.end(), tag) != kUniversalPos.end();
}

struct AnnotatedToken {
  std::string form;
  std::string lemma;
  std::string upos;
  std::uint32_t head = 0;  // 1-based position in the verse, 0 = root
  std::string deprel;
  std::vector<std::string> concepts;
};

using Embedding = std::vector<double>;

// Annotations of one source translation, verse by verse. Token positions
// line up with the doculect's verse tokens.
struct SourceAnnotation {
  std::string doculect_id;
  std::map<VerseId, std::vector<AnnotatedToken>> verses;
};

struct ProjectedToken {
  std::string form;
  std::optional<std::string> upos;
  std::optional<std::uint32_t> head;  // 1-based, 0 = root
  std::optional<std::string> deprel;
  std::optional<std::string> concept_id;
  std::optional<Embedding> embedding;
};

struct ProjectedDoculect {
  std::string doculect_id;
  std::map<VerseId, std::vector<ProjectedToken>> verses;
};

// Tokens of one source aligned into a target, plus what that source knows
// about them. `embeddings` maps a verse to per-token optional vectors.
struct ProjectionSource {
  const Doculect* doculect = nullptr;
  const SourceAnnotation* annotation = nullptr;
  const Alignment* alignment = nullptr;  // source -> target
  const std::map<VerseId, std::vector<std::optional<Embedding>>>* embeddings = nullptr;
};

struct ProjectionOptions {
  double threshold = 0.2;  // share of available sources that must agree
};

// Concept lexicon: (language, lemma) -> concepts.
using ConceptLexicon = std::map<std::pair<std::string, std::string>, std::set<std::string>>;

// Picks the unique plurality label of `candidates` if it has at least
// threshold * n_sources_available votes. Each candidate entry is one vote.
inline std::optional<std::string> project_label(const std::vector<std::string>& candidates,
                                                std::size_t n_sources_available, double threshold = 0.2) {
  if (n_sources_available == 0 || candidates.empty()) return std::nullopt;
  std::map<std::string, std::size_t> votes;
  for (const auto& c : candidates) ++votes[c];
  const std::string* best = nullptr;
  std::size_t best_votes = 0;
  bool tie = false;
  for (const auto& [label, n] : votes) {
    if (n > best_votes) {
      best = &label;
      best_votes = n;
      tie = false;
    } else if (n == best_votes) {
      tie = true;
    }
  }
  if (tie) return std::nullopt;
  if (static_cast<double>(best_votes) + 1e-9 < threshold * static_cast<double>(n_sources_available)) return std::nullopt;
  return *best;
}

namespace detail {

// target position -> source positions aligned to it, for one verse.
inline std::vector<std::vector<std::uint32_t>> inverse_links(const Alignment& a, const VerseId& verse,
                                                             std::size_t target_len) {
  std::vector<std::vector<std::uint32_t>> inv(target_len);
  auto it = a.links.find(verse);
  if (it == a.links.end()) return inv;
  for (const auto& l : it->second)
    if (l.tgt < target_len) inv[l.tgt].push_back(l.src);
  return inv;
}

inline bool source_has_verse(const ProjectionSource& s, const VerseId& verse) {
  return s.doculect->verses.count(verse) != 0;
}

inline const std::vector<AnnotatedToken>& annotated_verse(const ProjectionSource& s, const VerseId& verse) {
  auto it = s.annotation->verses.find(verse);
  if (it == s.annotation->verses.end())
    throw Error("annotation of " + s.annotation->doculect_id + " lacks verse " + verse);
  if (it->second.size() != s.doculect->verses.at(verse).size())
    throw Error("annotation of " + s.annotation->doculect_id + " verse " + verse + " has " +
                std::to_string(it->second.size()) + " tokens, text has " +
                std::to_string(s.doculect->verses.at(verse).size()));
  return it->second;
}

inline void add_unique(std::vector<std::string>& votes, std::set<std::string>& seen, std::string label) {
  if (seen.insert(label).second) votes.push_back(std::move(label));
}

inline ProjectedDoculect empty_projection(const Doculect& target) {
  ProjectedDoculect out;
  out.doculect_id = target.id();
  for (const auto& [verse, tokens] : target.verses) {
    auto& pt = out.verses[verse];
    pt.resize(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) pt[i].form = tokens[i];
  }
  return out;
}

}  // namespace detail

// Projects UPOS tags and (head, label) pairs. A source votes at most once for
// a given label on a given target token. Heads are voted jointly with their
// label; no tree constraint is imposed.
inline void project_pos_and_deps(const Doculect& target, const std::vector<ProjectionSource>& sources,
                                 ProjectedDoculect& out, const ProjectionOptions& opts = {}) {
  if (sources.empty()) throw Error("project_pos_and_deps: no sources");
  for (const auto& [verse, tokens] : target.verses) {
    const auto n = tokens.size();
    std::vector<std::vector<std::string>> pos_votes(n), dep_votes(n);
    std::size_t available = 0;
    for (const auto& s : sources) {
      if (!detail::source_has_verse(s, verse)) continue;
      ++available;
      const auto& ann = detail::annotated_verse(s, verse);
      const auto inv = detail::inverse_links(*s.alignment, verse, n);
      for (std::size_t t = 0; t < n; ++t) {
        std::set<std::string> seen_pos, seen_dep;
        for (auto x : inv[t]) {
          if (x >= ann.size()) continue;
          const auto& tok = ann[x];
          detail::add_unique(pos_votes[t], seen_pos, tok.upos);
          if (tok.head == 0) {
            detail::add_unique(dep_votes[t], seen_dep, "0\t" + tok.deprel);
          } else if (auto t_head = s.alignment->target_of(verse, tok.head - 1); t_head && *t_head != t) {
            detail::add_unique(dep_votes[t], seen_dep, std::to_string(*t_head + 1) + "\t" + tok.deprel);
          }
        }
      }
    }
    auto& proj = out.verses[verse];
    proj.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      proj[t].form = tokens[t];
      proj[t].upos = project_label(pos_votes[t], available, opts.threshold);
      if (auto dep = project_label(dep_votes[t], available, opts.threshold)) {
        const auto tab = dep->find('\t');
        proj[t].head = static_cast<std::uint32_t>(std::stoul(dep->substr(0, tab)));
        proj[t].deprel = dep->substr(tab + 1);
      } else {
        proj[t].head.reset();
        proj[t].deprel.reset();
      }
    }
  }
}

inline ProjectedDoculect project_pos_and_deps(const Doculect& target, const std::vector<ProjectionSource>& sources,
                                              const ProjectionOptions& opts = {}) {
  auto out = detail::empty_projection(target);
  project_pos_and_deps(target, sources, out, opts);
  return out;
}

// Concepts of a source token: its lemma's lexicon entries for the source
// language plus any concepts given directly in the annotation.
inline std::set<std::string> token_concepts(const AnnotatedToken& tok, const std::string& language,
                                            const ConceptLexicon& lexicon) {
  std::set<std::string> out(tok.concepts.begin(), tok.concepts.end());
  if (auto it = lexicon.find({language, tok.lemma}); it != lexicon.end()) out.insert(it->second.begin(), it->second.end());
  return out;
}

// Majority vote over the concepts of aligned source tokens. A lemma with
// several concepts puts each of them up as a separate candidate.
inline void project_concepts(const Doculect& target, const std::vector<ProjectionSource>& sources,
                             const ConceptLexicon& lexicon, ProjectedDoculect& out, const ProjectionOptions& opts = {}) {
  if (sources.empty()) throw Error("project_concepts: no sources");
  for (const auto& [verse, tokens] : target.verses) {
    const auto n = tokens.size();
    std::vector<std::vector<std::string>> votes(n);
    std::size_t available = 0;
    for (const auto& s : sources) {
      if (!detail::source_has_verse(s, verse)) continue;
      ++available;
      const auto& ann = detail::annotated_verse(s, verse);
      const auto inv = detail::inverse_links(*s.alignment, verse, n);
      for (std::size_t t = 0; t < n; ++t) {
        std::set<std::string> seen;
        for (auto x : inv[t])
          if (x < ann.size())
            for (const auto& c : token_concepts(ann[x], s.doculect->info.iso639_3, lexicon))
              detail::add_unique(votes[t], seen, c);
      }
    }
    auto& proj = out.verses[verse];
    proj.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      proj[t].form = tokens[t];
      proj[t].concept_id = project_label(votes[t], available, opts.threshold);
    }
  }
}

inline ProjectedDoculect project_concepts(const Doculect& target, const std::vector<ProjectionSource>& sources,
                                          const ConceptLexicon& lexicon, const ProjectionOptions& opts = {}) {
  auto out = detail::empty_projection(target);
  project_concepts(target, sources, lexicon, out, opts);
  return out;
}

// Unweighted mean of the vectors of every aligned source token, across all
// sources.
inline void project_embeddings(const Doculect& target, const std::vector<ProjectionSource>& sources,
                               ProjectedDoculect& out) {
  std::optional<std::size_t> dim;
  for (const auto& [verse, tokens] : target.verses) {
    const auto n = tokens.size();
    std::vector<Embedding> sum(n);
    std::vector<std::size_t> count(n, 0);
    for (const auto& s : sources) {
      if (!s.embeddings || !detail::source_has_verse(s, verse)) continue;
      auto ev = s.embeddings->find(verse);
      if (ev == s.embeddings->end()) continue;
      const auto inv = detail::inverse_links(*s.alignment, verse, n);
      for (std::size_t t = 0; t < n; ++t)
        for (auto x : inv[t]) {
          if (x >= ev->second.size() || !ev->second[x]) continue;
          const auto& vec = *ev->second[x];
          if (!dim) dim = vec.size();
          if (vec.size() != *dim)
            throw Error("project_embeddings: dimension " + std::to_string(vec.size()) + " from " + s.doculect->id() +
                        " does not match " + std::to_string(*dim));
          if (sum[t].empty()) sum[t].assign(vec.size(), 0.0);
          for (std::size_t k = 0; k < vec.size(); ++k) sum[t][k] += vec[k];
          ++count[t];
        }
    }
    auto& proj = out.verses[verse];
    proj.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      proj[t].form = tokens[t];
      if (count[t] == 0) {
        proj[t].embedding.reset();
        continue;
      }
      for (auto& x : sum[t]) x /= static_cast<double>(count[t]);
      proj[t].embedding = std::move(sum[t]);
    }
  }
}

inline ProjectedDoculect project_embeddings(const Doculect& target, const std::vector<ProjectionSource>& sources) {
  auto out = detail::empty_projection(target);
  project_embeddings(target, sources, out);
  return out;
}

// ---------------------------------------------------------------------------
// File formats

// Annotation blocks: `# verse = <id>` followed by tab-separated token lines
// `idx form lemma upos head deprel concepts` (concepts comma-separated or
// `_`), blocks separated by blank lines.
inline SourceAnnotation read_annotation(const std::string& path, std::string doculect_id = {}) {
  auto in = text::open_input(path);
  SourceAnnotation ann;
  ann.doculect_id = doculect_id.empty() ? doculect_id_from_path(path) : std::move(doculect_id);
  std::string line;
  std::size_t lineno = 0;
  std::vector<AnnotatedToken>* current = nullptr;
  std::vector<std::size_t> head_lines;
  auto finish = [&] {
    if (!current) return;
    for (std::size_t i = 0; i < current->size(); ++i)
      if ((*current)[i].head > current->size())
        throw ParseError(path, head_lines[i], "head " + std::to_string((*current)[i].head) + " outside verse");
    current = nullptr;
    head_lines.clear();
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (text::trim(line).empty()) {
      finish();
      continue;
    }
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (line.rfind("# verse", 0) == 0 && eq != std::string::npos) {
        finish();
        const VerseId id(text::trim(std::string_view(line).substr(eq + 1)));
        if (ann.verses.count(id)) throw ParseError(path, lineno, "duplicate verse '" + id + "'");
        current = &ann.verses[id];
      }
      continue;
    }
    if (!current) throw ParseError(path, lineno, "token line outside a verse block");
    auto f = text::split(line, '\t');
    if (f.size() != 7) throw ParseError(path, lineno, "expected 7 columns, got " + std::to_string(f.size()));
    if (text::parse_int(f[0], path, lineno) != static_cast<long long>(current->size() + 1))
      throw ParseError(path, lineno, "token index out of sequence");
    AnnotatedToken tok;
    tok.form = f[1];
    tok.lemma = f[2];
    tok.upos = f[3];
    if (!is_universal_pos(tok.upos)) throw ParseError(path, lineno, "unknown UPOS tag '" + tok.upos + "'");
    const auto head = text::parse_int(f[4], path, lineno);
    if (head < 0) throw ParseError(path, lineno, "negative head");
    tok.head = static_cast<std::uint32_t>(head);
    tok.deprel = f[5];
    if (f[6] != "_")
      for (auto& c : text::split(f[6], ','))
        if (!c.empty()) tok.concepts.push_back(c);
    current->push_back(std::move(tok));
    head_lines.push_back(lineno);
  }
  finish();
  return ann;
}

inline void write_annotation(const std::string& path, const SourceAnnotation& ann) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (const auto& [verse, toks] : ann.verses) {
    out << "# verse = " << verse << '\n';
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const auto& t = toks[i];
      std::string concepts;
      for (const auto& c : t.concepts) concepts += (concepts.empty() ? "" : ",") + c;
      out << i + 1 << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.head << '\t' << t.deprel << '\t'
          << (concepts.empty() ? "_" : concepts) << '\n';
    }
    out << '\n';
  }
}

// Projected output in the annotation layout: lemma is always `_`, missing
// fields are `_`.
inline void write_projection(const std::string& path, const ProjectedDoculect& p) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (const auto& [verse, toks] : p.verses) {
    out << "# verse = " << verse << '\n';
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const auto& t = toks[i];
      out << i + 1 << '\t' << t.form << "\t_\t" << t.upos.value_or("_") << '\t'
          << (t.head ? std::to_string(*t.head) : "_") << '\t' << t.deprel.value_or("_") << '\t' << t.concept_id.value_or("_")
          << '\n';
    }
    out << '\n';
  }
}

inline ProjectedDoculect read_projection(const std::string& path, std::string doculect_id = {}) {
  auto in = text::open_input(path);
  ProjectedDoculect p;
  p.doculect_id = doculect_id.empty() ? doculect_id_from_path(path) : std::move(doculect_id);
  std::string line;
  std::size_t lineno = 0;
  std::vector<ProjectedToken>* current = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (text::trim(line).empty()) {
      current = nullptr;
      continue;
    }
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (line.rfind("# verse", 0) == 0 && eq != std::string::npos)
        current = &p.verses[VerseId(text::trim(std::string_view(line).substr(eq + 1)))];
      continue;
    }
    if (!current) throw ParseError(path, lineno, "token line outside a verse block");
    auto f = text::split(line, '\t');
    if (f.size() != 7) throw ParseError(path, lineno, "expected 7 columns, got " + std::to_string(f.size()));
    ProjectedToken t;
    t.form = f[1];
    if (f[3] != "_") t.upos = f[3];
    if (f[4] != "_") t.head = static_cast<std::uint32_t>(text::parse_int(f[4], path, lineno));
    if (f[5] != "_") t.deprel = f[5];
    if (f[6] != "_") t.concept_id = f[6];
    current->push_back(std::move(t));
  }
  return p;
}

// Embedding rows: `verse_id\ttoken_idx\tfloat...` with 0-based token_idx.
inline std::map<VerseId, std::vector<std::optional<Embedding>>> read_embeddings(const std::string& path) {
  auto in = text::open_input(path);
  std::map<VerseId, std::vector<std::optional<Embedding>>> out;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> dim;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    auto f = text::split(line, '\t');
    if (f.size() < 3) throw ParseError(path, lineno, "expected verse, token index and at least one value");
    const auto idx = text::parse_int(f[1], path, lineno);
    if (idx < 0) throw ParseError(path, lineno, "negative token index");
    Embedding e;
    for (std::size_t k = 2; k < f.size(); ++k) e.push_back(text::parse_double(f[k], path, lineno));
    if (dim && *dim != e.size()) throw ParseError(path, lineno, "inconsistent embedding dimension");
    dim = e.size();
    auto& row = out[f[0]];
    if (row.size() <= static_cast<std::size_t>(idx)) row.resize(idx + 1);
    row[idx] = std::move(e);
  }
  return out;
}

inline void write_embeddings(const std::string& path, const ProjectedDoculect& p) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (const auto& [verse, toks] : p.verses)
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (!toks[i].embedding) continue;
      out << verse << '\t' << i;
      for (double x : *toks[i].embedding) out << '\t' << text::format_double(x);
      out << '\n';
    }
}

// Lexicon TSV: `language\tlemma\tconcept_id`.
inline ConceptLexicon read_concept_lexicon(const std::string& path) {
  auto in = text::open_input(path);
  ConceptLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    auto f = text::split(line, '\t');
    if (f.size() != 3) throw ParseError(path, lineno, "expected 3 columns");
    lex[{f[0], f[1]}].insert(f[2]);
  }
  return lex;
}

}  // namespace typoprobe
