#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "typoprobe/levenshtein.hpp"
#include "typoprobe/project.hpp"
#include "typoprobe/random.hpp"

namespace typoprobe {

// Concept classes that restrict the dependent of a word-order relation.
enum class RestrictedClass { none, adj_core, num_2_9 };

struct ConceptClasses {
  std::set<std::string> adj_core{"STRONG", "HIGH", "GOOD", "BAD", "SMALL", "BIG", "NEW", "YOUNG", "OLD", "BEAUTIFUL"};
  std::set<std::string> num_2_9{"TWO", "THREE", "FOUR", "FIVE", "SIX", "SEVEN", "EIGHT", "NINE"};
};

struct WordOrderSpec {
  std::string name;
  std::set<std::string> dependent_pos;  // ignored when `restricted` is set
  RestrictedClass restricted = RestrictedClass::none;
  std::string relation;
  std::set<std::string> head_pos;
};

inline const std::vector<WordOrderSpec>& default_word_order_specs() {
  static const std::vector<WordOrderSpec> specs = {
      {"obj_verb", {"NOUN", "PROPN"}, RestrictedClass::none, "obj", {"VERB"}},
      {"obl_verb", {"NOUN", "PROPN"}, RestrictedClass::none, "obl", {"VERB"}},
      {"subj_verb", {"NOUN", "PROPN"}, RestrictedClass::none, "nsubj", {"VERB"}},
      {"adj_noun", {}, RestrictedClass::adj_core, "amod", {"NOUN"}},
      {"rel_noun", {"VERB"}, RestrictedClass::none, "acl", {"NOUN"}},
      {"num_noun", {}, RestrictedClass::num_2_9, "nummod", {"NOUN"}},
      {"adp_noun", {"ADP"}, RestrictedClass::none, "case", {"NOUN"}},
  };
  return specs;
}

inline const std::vector<std::string>& affix_feature_names() {
  static const std::vector<std::string> names = {"prefixing", "suffixing"};
  return names;
}

inline bool restricted_class_filter(const ProjectedToken& tok, RestrictedClass cls, const ConceptClasses& classes = {}) {
  if (cls == RestrictedClass::none) return true;
  if (!tok.concept_id) return false;
  const auto& set = cls == RestrictedClass::adj_core ? classes.adj_core : classes.num_2_9;
  return set.count(*tok.concept_id) != 0;
}

struct RatioCount {
  std::size_t head_initial = 0;
  std::size_t total = 0;
};

inline RatioCount head_initial_counts(const ProjectedDoculect& p, const WordOrderSpec& spec,
                                      const ConceptClasses& classes = {}) {
  RatioCount c;
  for (const auto& [_, toks] : p.verses)
    for (std::size_t d = 0; d < toks.size(); ++d) {
      const auto& dep = toks[d];
      if (!dep.deprel || *dep.deprel != spec.relation || !dep.head || *dep.head == 0 || *dep.head > toks.size())
        continue;
      const auto h = *dep.head - 1;
      const auto& head = toks[h];
      if (!head.upos || !spec.head_pos.count(*head.upos)) continue;
      if (spec.restricted != RestrictedClass::none) {
        if (!restricted_class_filter(dep, spec.restricted, classes)) continue;
      } else if (!dep.upos || !spec.dependent_pos.count(*dep.upos)) {
        continue;
      }
      ++c.total;
      if (h < d) ++c.head_initial;
    }
  return c;
}

// Share of matching dependency instances whose head precedes the dependent.
inline std::optional<double> head_initial_ratio(const ProjectedDoculect& p, const WordOrderSpec& spec,
                                                const ConceptClasses& classes = {}) {
  const auto c = head_initial_counts(p, spec, classes);
  if (c.total == 0) return std::nullopt;
  return static_cast<double>(c.head_initial) / static_cast<double>(c.total);
}

inline int binarize_ratio(double ratio) { return ratio > 0.5 ? 1 : 0; }

// ---------------------------------------------------------------------------
// Paradigms

struct Paradigm {
  std::string doculect_id;
  std::string concept_id;
  std::string pos;
  std::vector<std::string> forms;  // sorted
};

struct ParadigmOptions {
  double max_mean_distance = 0.3;
  std::size_t min_long_form = 5;  // some form must have at least this many code points
};

namespace detail {

inline double mean_pairwise(const std::vector<std::size_t>& members, const std::vector<std::vector<double>>& dist) {
  if (members.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j, ++n) sum += dist[members[i]][members[j]];
  return sum / static_cast<double>(n);
}

}  // namespace detail

// Average-linkage agglomerative clustering, cut before the first merge that
// would give a cluster with mean pairwise distance >= max_mean_distance.
inline std::vector<std::vector<std::string>> cluster_forms(const std::vector<std::string>& forms,
                                                           double max_mean_distance = 0.3) {
  const std::size_t n = forms.size();
  std::vector<std::u32string> cps;
  for (const auto& f : forms) cps.push_back(text::to_u32(f));
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist[i][j] = dist[j][i] = nld(cps[i], cps[j], NldNorm::sum_len);

  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
  while (clusters.size() > 1) {
    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double sum = 0.0;
        for (auto x : clusters[a])
          for (auto y : clusters[b]) sum += dist[x][y];
        const double link = sum / static_cast<double>(clusters[a].size() * clusters[b].size());
        if (link < best) {
          best = link;
          best_a = a;
          best_b = b;
        }
      }
    auto merged = clusters[best_a];
    merged.insert(merged.end(), clusters[best_b].begin(), clusters[best_b].end());
    if (detail::mean_pairwise(merged, dist) >= max_mean_distance) break;
    clusters[best_a] = std::move(merged);
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& c : clusters) {
    std::vector<std::string> f;
    for (auto i : c) f.push_back(forms[i]);
    std::sort(f.begin(), f.end());
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Per concept, the PoS most often projected together with it (ties go to the
// alphabetically first tag); its distinct forms are clustered into partial
// paradigms. Only NOUN and VERB concepts yield paradigms.
inline std::vector<Paradigm> extract_paradigms(const ProjectedDoculect& p, const ParadigmOptions& opts = {}) {
  std::map<std::string, std::map<std::string, std::size_t>> pos_counts;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> forms;
  for (const auto& [_, toks] : p.verses)
    for (const auto& t : toks) {
      if (!t.concept_id || !t.upos) continue;
      ++pos_counts[*t.concept_id][*t.upos];
      forms[{*t.concept_id, *t.upos}].insert(t.form);
    }
  std::vector<Paradigm> out;
  for (const auto& [concept_id, counts] : pos_counts) {
    std::string pos;
    std::size_t best = 0;
    for (const auto& [tag, c] : counts)
      if (c > best) {
        best = c;
        pos = tag;
      }
    if (pos != "NOUN" && pos != "VERB") continue;
    const auto& fs = forms[{concept_id, pos}];
    if (fs.size() < 2) continue;
    for (auto& cluster : cluster_forms({fs.begin(), fs.end()}, opts.max_mean_distance)) {
      if (cluster.size() < 2) continue;
      const bool has_long = std::any_of(cluster.begin(), cluster.end(),
                                        [&](const std::string& f) { return text::length(f) >= opts.min_long_form; });
      if (!has_long) continue;
      out.push_back({p.doculect_id, concept_id, pos, std::move(cluster)});
    }
  }
  return out;
}

inline std::size_t paradigm_count(const std::vector<Paradigm>& paradigms, const std::string& pos) {
  return static_cast<std::size_t>(
      std::count_if(paradigms.begin(), paradigms.end(), [&](const Paradigm& x) { return x.pos == pos; }));
}

inline bool has_inflection(const std::vector<Paradigm>& paradigms, const std::string& pos, std::size_t min_paradigms = 50) {
  return paradigm_count(paradigms, pos) >= min_paradigms;
}

// ---------------------------------------------------------------------------
// Affixation

enum class AffixClass { prefix, suffix, neither };

// Prefixing if every edit position is in the first half of both words,
// suffixing if every one is in the second half. A position p of a word of
// length L is in the first half iff p < L/2. The pair is put in a canonical
// order first so the result does not depend on argument order.
inline AffixClass classify_pair(const std::string& w1, const std::string& w2) {
  const bool swap = w2 < w1;
  const auto a = text::to_u32(swap ? w2 : w1);
  const auto b = text::to_u32(swap ? w1 : w2);
  const auto script = edit_script(a, b);
  if (script.empty()) return AffixClass::neither;
  bool all_first = true, all_second = true;
  auto check = [&](std::size_t pos, std::size_t len) {
    if (2 * pos < len)
      all_second = false;
    else
      all_first = false;
  };
  for (const auto& e : script) {
    check(e.pos_a, a.size());
    check(e.pos_b, b.size());
  }
  if (all_first) return AffixClass::prefix;
  if (all_second) return AffixClass::suffix;
  return AffixClass::neither;
}

struct AffixCounts {
  std::size_t prefix = 0;
  std::size_t suffix = 0;
  std::size_t neither = 0;

  std::size_t total() const { return prefix + suffix + neither; }
  double prefix_share() const { return total() ? static_cast<double>(prefix) / static_cast<double>(total()) : 0.0; }
  double suffix_share() const { return total() ? static_cast<double>(suffix) / static_cast<double>(total()) : 0.0; }
  double neither_share() const { return total() ? static_cast<double>(neither) / static_cast<double>(total()) : 0.0; }

  AffixCounts& operator+=(const AffixCounts& o) {
    prefix += o.prefix;
    suffix += o.suffix;
    neither += o.neither;
    return *this;
  }
};

struct AffixProfile {
  std::string doculect_id;
  std::map<std::string, AffixCounts> per_pos;
};

// Samples `pairs_per_pos` within-paradigm pairs per PoS, pooled over all
// paradigms of that PoS: without replacement when enough pairs exist,
// with replacement otherwise.
inline AffixProfile affixation_profile(const std::vector<Paradigm>& paradigms, std::size_t pairs_per_pos,
                                       std::uint64_t seed, const std::string& doculect_id = {}) {
  AffixProfile profile;
  profile.doculect_id = doculect_id.empty() && !paradigms.empty() ? paradigms.front().doculect_id : doculect_id;
  std::map<std::string, std::vector<std::pair<const std::string*, const std::string*>>> pairs;
  for (const auto& p : paradigms)
    for (std::size_t i = 0; i < p.forms.size(); ++i)
      for (std::size_t j = i + 1; j < p.forms.size(); ++j) pairs[p.pos].emplace_back(&p.forms[i], &p.forms[j]);
  for (auto& [pos, list] : pairs) {
    auto g = rng::stream(seed, profile.doculect_id + '\t' + pos);
    auto& counts = profile.per_pos[pos];
    auto tally = [&](const std::pair<const std::string*, const std::string*>& pr) {
      switch (classify_pair(*pr.first, *pr.second)) {
        case AffixClass::prefix: ++counts.prefix; break;
        case AffixClass::suffix: ++counts.suffix; break;
        case AffixClass::neither: ++counts.neither; break;
      }
    };
    if (list.size() >= pairs_per_pos) {
      for (std::size_t k = 0; k < pairs_per_pos; ++k) {
        const auto r = k + rng::uniform_index(g, list.size() - k);
        std::swap(list[k], list[r]);
        tally(list[k]);
      }
    } else {
      for (std::size_t k = 0; k < pairs_per_pos; ++k) tally(list[rng::uniform_index(g, list.size())]);
    }
  }
  return profile;
}

enum class AffixLabel { prefixing, suffixing };

// Prefixing when prefixed pairs are at least half of the affixed pairs.
inline std::optional<AffixLabel> affixation_label(const AffixCounts& c) {
  if (c.prefix + c.suffix == 0) return std::nullopt;
  return 2 * c.prefix >= c.prefix + c.suffix ? AffixLabel::prefixing : AffixLabel::suffixing;
}

// Counts summed over the PoS that show inflection.
inline AffixCounts inflected_affix_counts(const AffixProfile& profile, const std::vector<Paradigm>& paradigms,
                                          std::size_t min_paradigms = 50) {
  AffixCounts sum;
  for (const auto& [pos, c] : profile.per_pos)
    if (has_inflection(paradigms, pos, min_paradigms)) sum += c;
  return sum;
}

// ---------------------------------------------------------------------------
// Feature matrix

struct FeatureCell {
  std::optional<int> value;
  std::optional<double> ratio;
};

struct FeatureMatrix {
  std::vector<std::string> features;
  std::map<std::string, std::map<std::string, FeatureCell>> rows;  // doculect -> feature -> cell

  std::optional<int> value(const std::string& doculect, const std::string& feature) const {
    auto r = rows.find(doculect);
    if (r == rows.end()) return std::nullopt;
    auto c = r->second.find(feature);
    return c == r->second.end() ? std::nullopt : c->second.value;
  }
};

struct FeatureOptions {
  std::vector<WordOrderSpec> specs = default_word_order_specs();
  ConceptClasses classes;
  ParadigmOptions paradigm;
  std::size_t pairs_per_pos = 1000;
  std::size_t min_paradigms = 50;
  std::uint64_t seed = 1;
};

struct DoculectFeatures {
  std::map<std::string, FeatureCell> cells;
  std::vector<Paradigm> paradigms;
  AffixProfile profile;
};

inline DoculectFeatures derive_features(const ProjectedDoculect& p, const FeatureOptions& opts = {}) {
  DoculectFeatures out;
  for (const auto& spec : opts.specs) {
    FeatureCell cell;
    cell.ratio = head_initial_ratio(p, spec, opts.classes);
    if (cell.ratio) cell.value = binarize_ratio(*cell.ratio);
    out.cells[spec.name] = cell;
  }
  out.paradigms = extract_paradigms(p, opts.paradigm);
  out.profile = affixation_profile(out.paradigms, opts.pairs_per_pos, opts.seed, p.doculect_id);
  const auto counts = inflected_affix_counts(out.profile, out.paradigms, opts.min_paradigms);
  FeatureCell pre, suf;
  if (const auto label = affixation_label(counts)) {
    const double affixed = static_cast<double>(counts.prefix + counts.suffix);
    pre.ratio = static_cast<double>(counts.prefix) / affixed;
    suf.ratio = static_cast<double>(counts.suffix) / affixed;
    pre.value = *label == AffixLabel::prefixing ? 1 : 0;
    suf.value = 1 - *pre.value;
  }
  out.cells["prefixing"] = pre;
  out.cells["suffixing"] = suf;
  return out;
}

inline std::vector<std::string> feature_names(const FeatureOptions& opts = {}) {
  std::vector<std::string> names;
  for (const auto& s : opts.specs) names.push_back(s.name);
  for (const auto& n : affix_feature_names()) names.push_back(n);
  return names;
}

inline FeatureMatrix build_feature_matrix(const std::map<std::string, DoculectFeatures>& per_doculect,
                                          const FeatureOptions& opts = {}) {
  FeatureMatrix m;
  m.features = feature_names(opts);
  for (const auto& [id, f] : per_doculect) m.rows[id] = f.cells;
  return m;
}

// TSV: doculect_id, then `<feature>` (0/1/NA) and `<feature>.ratio` per feature.
inline void write_feature_matrix(const std::string& path, const FeatureMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "doculect_id";
  for (const auto& f : m.features) out << '\t' << f << '\t' << f << ".ratio";
  out << '\n';
  for (const auto& [id, cells] : m.rows) {
    out << id;
    for (const auto& f : m.features) {
      auto it = cells.find(f);
      const FeatureCell cell = it == cells.end() ? FeatureCell{} : it->second;
      out << '\t' << (cell.value ? std::to_string(*cell.value) : "NA") << '\t'
          << (cell.ratio ? text::format_double(*cell.ratio) : "NA");
    }
    out << '\n';
  }
}

inline FeatureMatrix read_feature_matrix(const std::string& path) {
  auto in = text::open_input(path);
  FeatureMatrix m;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (line.empty()) continue;
    auto f = text::split(line, '\t');
    if (header.empty()) {
      if (f.empty() || f[0] != "doculect_id") throw ParseError(path, lineno, "header must start with doculect_id");
      header = f;
      for (std::size_t k = 1; k < f.size(); ++k)
        if (f[k].size() < 6 || f[k].compare(f[k].size() - 6, 6, ".ratio") != 0) m.features.push_back(f[k]);
      continue;
    }
    if (f.size() != header.size()) throw ParseError(path, lineno, "expected " + std::to_string(header.size()) + " columns");
    auto& row = m.rows[f[0]];
    for (std::size_t k = 1; k < f.size(); ++k) {
      const auto& col = header[k];
      const bool is_ratio = col.size() >= 6 && col.compare(col.size() - 6, 6, ".ratio") == 0;
      const auto feature = is_ratio ? col.substr(0, col.size() - 6) : col;
      auto& cell = row[feature];
      if (f[k] == "NA") continue;
      if (is_ratio) {
        cell.ratio = text::parse_double(f[k], path, lineno);
      } else {
        if (f[k] != "0" && f[k] != "1") throw ParseError(path, lineno, "feature value must be 0, 1 or NA");
        cell.value = f[k] == "1" ? 1 : 0;
      }
    }
  }
  if (header.empty()) throw ParseError(path, 0, "empty feature matrix");
  return m;
}

}  // namespace typoprobe
