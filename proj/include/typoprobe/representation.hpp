#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "typoprobe/corpus.hpp"
#include "typoprobe/text.hpp"

namespace typoprobe {

// Fixed-dimension vectors keyed by doculect id or ISO 639-3 code.
struct RepresentationSet {
  std::string id;
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>> vectors;

  void add(const std::string& key, std::vector<double> v) {
    if (vectors.empty() && dim == 0) dim = v.size();
    if (v.size() != dim)
      throw Error("representation '" + key + "' has dimension " + std::to_string(v.size()) + ", expected " +
                  std::to_string(dim));
    for (double x : v)
      if (!std::isfinite(x)) throw Error("representation '" + key + "' has a non-finite entry");
    vectors[key] = std::move(v);
  }

  // Vector for a doculect: its own id first, then its language code.
  const std::vector<double>* lookup(const DoculectInfo& d) const {
    if (auto it = vectors.find(d.doculect_id); it != vectors.end()) return &it->second;
    if (auto it = vectors.find(d.iso639_3); it != vectors.end()) return &it->second;
    return nullptr;
  }
};

// File layout: `#dim k` header, then `id\tfloat...` rows.
inline RepresentationSet read_representations(const std::string& path, std::string set_id = {}) {
  auto in = text::open_input(path);
  RepresentationSet r;
  r.id = set_id.empty() ? doculect_id_from_path(path) : std::move(set_id);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(std::move(line));
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto f = text::split_ws(std::string_view(line).substr(1));
      if (f.size() == 2 && f[0] == "dim") {
        const auto k = text::parse_int(f[1], path, lineno);
        if (k <= 0) throw ParseError(path, lineno, "dimension must be positive");
        r.dim = static_cast<std::size_t>(k);
        header = true;
      }
      continue;
    }
    if (!header) throw ParseError(path, lineno, "missing '#dim k' header");
    auto f = text::split(line, '\t');
    if (f.size() != r.dim + 1)
      throw ParseError(path, lineno, "expected " + std::to_string(r.dim) + " values, got " + std::to_string(f.size() - 1));
    if (r.vectors.count(f[0])) throw ParseError(path, lineno, "duplicate id '" + f[0] + "'");
    std::vector<double> v;
    v.reserve(r.dim);
    for (std::size_t k = 1; k < f.size(); ++k) {
      v.push_back(text::parse_double(f[k], path, lineno));
      if (!std::isfinite(v.back())) throw ParseError(path, lineno, "non-finite value");
    }
    r.vectors.emplace(f[0], std::move(v));
  }
  if (!header) throw ParseError(path, lineno, "missing '#dim k' header");
  return r;
}

inline void write_representations(const std::string& path, const RepresentationSet& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "#dim " << r.dim << '\n';
  for (const auto& [key, v] : r.vectors) {
    out << key;
    for (double x : v) out << '\t' << text::format_double(x);
    out << '\n';
  }
}

}  // namespace typoprobe
