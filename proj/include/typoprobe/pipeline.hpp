#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "typoprobe/align.hpp"
#include "typoprobe/config.hpp"
#include "typoprobe/corpus.hpp"
#include "typoprobe/features.hpp"
#include "typoprobe/lexsim.hpp"
#include "typoprobe/parallel.hpp"
#include "typoprobe/probe.hpp"
#include "typoprobe/project.hpp"
#include "typoprobe/report.hpp"
#include "typoprobe/representation.hpp"
#include "typoprobe/subword.hpp"
#include "typoprobe/typodb.hpp"

namespace typoprobe {

namespace fs = std::filesystem;

// Stage bookkeeping: `<output>/manifest.json` maps each completed stage to the
// hash of everything it depends on and the files it produced.
class Manifest {
 public:
  explicit Manifest(fs::path output) : path_(std::move(output) / "manifest.json") {
    if (fs::exists(path_)) {
      std::ifstream in(path_);
      try {
        data_ = Json::parse(in);
      } catch (const nlohmann::json::exception&) {
        data_ = Json::object();
      }
    }
    if (!data_.is_object()) data_ = Json::object();
    if (!data_.contains("stages")) data_["stages"] = Json::object();
  }

  std::optional<std::string> hash(const std::string& stage) const {
    const auto& s = data_["stages"];
    if (!s.contains(stage)) return std::nullopt;
    return s[stage]["hash"].get<std::string>();
  }

  void record(const std::string& stage, const std::string& hash, std::vector<std::string> outputs) {
    std::sort(outputs.begin(), outputs.end());
    data_["stages"][stage] = {{"hash", hash}, {"outputs", outputs}};
    save();
  }

  void erase(const std::string& stage) {
    data_["stages"].erase(stage);
    save();
  }

  const fs::path& path() const { return path_; }

 private:
  void save() const {
    fs::create_directories(path_.parent_path());
    write_json(path_.string(), data_);
  }

  fs::path path_;
  Json data_;
};

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Content hash of a file, or of every regular file below a directory.
inline std::uint64_t content_hash(const std::string& path, std::uint64_t h = rng::hash("")) {
  if (path.empty()) return rng::hash("<none>", h);
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::recursive_directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    h = rng::hash(fs::relative(f, fs::is_directory(path) ? fs::path(path) : f.parent_path()).string(), h);
    h = rng::hash(content, h);
  }
  return h;
}

struct StageReport {
  std::string stage;
  bool reused = false;
  std::string message;
};

class Pipeline {
 public:
  explicit Pipeline(Config config, std::ostream* log = &std::cerr) : config_(std::move(config)), log_(log) {
    output_ = config_.str("output");
    if (output_.empty()) throw UsageError("configuration key 'output' is required");
    fs::create_directories(output_);
    manifest_.emplace(output_);
    jobs_ = config_.count("jobs", 1);
    seed_ = config_.count("seed");
  }

  const fs::path& output() const { return output_; }
  const Manifest& manifest() const { return *manifest_; }

  // ---- ingest ------------------------------------------------------------

  StageReport ingest() {
    const auto texts = config_.required_path("texts");
    const auto metadata = config_.required_path("metadata");
    const double threshold = config_.real("canonical_threshold", 0.0, 1.0, true);
    const double coverage_min = config_.real("coverage", 0.0, 1.0);
    const auto h = stage_hash("ingest", {"canonical_threshold", "coverage"}, {texts, metadata});
    if (auto r = reuse("ingest", h)) return *r;

    const auto dir = stage_dir("ingest");
    auto corpus = load_corpus(text_files(texts), metadata);
    if (corpus.doculects.empty()) throw UsageError("texts: no .txt files in " + texts);
    corpus.canonical = canonical_verses(corpus, threshold);
    const auto kept = filter_translations(corpus, coverage_min);

    std::ostringstream canon;
    for (const auto& v : kept.canonical) canon << v << '\n';
    write_text_atomic((dir / "canonical.txt").string(), canon.str());
    std::ostringstream rows;
    rows << "doculect_id\tiso639_3\tfamily\tmacroarea\trole\tpreferred\tcoverage\n";
    for (const auto& d : kept.doculects)
      rows << d.id() << '\t' << d.info.iso639_3 << '\t' << d.info.family << '\t' << d.info.macroarea << '\t'
           << to_string(d.info.role) << '\t' << (d.info.preferred ? "1" : "0") << '\t'
           << text::format_double(coverage(d, kept.canonical)) << '\n';
    write_text_atomic((dir / "doculects.tsv").string(), rows.str());
    manifest_->record("ingest", h, {"ingest/canonical.txt", "ingest/doculects.tsv"});
    return done("ingest", std::to_string(kept.doculects.size()) + " of " + std::to_string(corpus.doculects.size()) +
                              " doculects kept, " + std::to_string(kept.canonical.size()) + " canonical verses");
  }

  // Retained doculects restricted to the canonical verses.
  Corpus load_ingested() const {
    require("ingest");
    const auto dir = output_ / "ingest";
    std::vector<std::string> ids;
    {
      auto in = text::open_input((dir / "doculects.tsv").string());
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line))
        if (!line.empty()) ids.push_back(text::split(line, '\t')[0]);
    }
    std::vector<std::string> paths;
    for (const auto& id : ids) paths.push_back((fs::path(config_.required_path("texts")) / (id + ".txt")).string());
    auto corpus = load_corpus(paths, config_.required_path("metadata"));
    auto in = text::open_input((dir / "canonical.txt").string());
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) corpus.canonical.insert(line);
    return corpus;
  }

  // ---- subwords ----------------------------------------------------------

  StageReport subwords() {
    const auto h = stage_hash("subwords", {"subword_max_length"}, {}, {"ingest"});
    if (auto r = reuse("subwords", h)) return *r;
    const auto corpus = load_ingested();
    const auto dir = stage_dir("subwords");
    const auto opts = subword_options();
    std::vector<std::string> outputs(corpus.doculects.size());
    parallel_for(corpus.doculects.size(), jobs_, [&](std::size_t i) {
      const auto& d = corpus.doculects[i];
      const auto vocab = extract_subwords(d, opts);
      const auto file = dir / (d.id() + ".tsv");
      atomic_write(file, [&](const std::string& tmp) { write_vocab(tmp, vocab, occurrence_sets(d, vocab, corpus.canonical)); });
      outputs[i] = "subwords/" + d.id() + ".tsv";
    });
    manifest_->record("subwords", h, outputs);
    return done("subwords", std::to_string(outputs.size()) + " vocabularies");
  }

  // ---- align -------------------------------------------------------------

  StageReport align() {
    const auto annotations = config_.required_path("annotations");
    const auto eq1 = config_.choice("eq1", {"full", "paper"});
    const auto h = stage_hash("align", {"eq1", "min_joint", "subword_max_length"}, {annotations}, {"subwords"});
    if (auto r = reuse("align", h)) return *r;
    require("subwords");
    const auto corpus = load_ingested();
    const auto [sources, targets] = roles(corpus, annotations);
    if (sources.empty()) throw UsageError("align: no source doculect has an annotation file in " + annotations);
    if (targets.empty()) throw UsageError("align: no target doculects");

    // A changed configuration invalidates earlier pair files.
    const auto dir = output_ / "align";
    const auto stamp = dir / ".config";
    if (fs::exists(dir) && (!fs::exists(stamp) || read_all(stamp.string()) != h)) fs::remove_all(dir);
    fs::create_directories(dir);
    write_text_atomic(stamp.string(), h);

    const auto opts = subword_options();
    std::vector<SubwordVocab> vocabs(corpus.doculects.size());
    parallel_for(corpus.doculects.size(), jobs_, [&](std::size_t i) { vocabs[i] = extract_subwords(corpus.doculects[i], opts); });
    AlignOptions aopts;
    aopts.mode = eq1 == "paper" ? Eq1Mode::paper_literal : Eq1Mode::full_independence;
    aopts.min_joint = config_.count("min_joint", 1);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (auto s : sources)
      for (auto t : targets) pairs.emplace_back(s, t);
    std::vector<std::string> outputs(pairs.size());
    std::atomic<std::size_t> reused{0};
    parallel_for(pairs.size(), jobs_, [&](std::size_t k) {
      const auto& src = corpus.doculects[pairs[k].first];
      const auto& tgt = corpus.doculects[pairs[k].second];
      const auto name = pair_file(src.id(), tgt.id());
      outputs[k] = "align/" + name;
      if (fs::exists(dir / name)) {
        ++reused;
        return;
      }
      const auto a = align_pair(src, vocabs[pairs[k].first], tgt, vocabs[pairs[k].second], corpus.canonical, aopts);
      atomic_write(dir / name, [&](const std::string& tmp) { write_alignment(tmp, a); });
    });
    outputs.push_back("align/.config");
    manifest_->record("align", h, outputs);
    return done("align", std::to_string(pairs.size()) + " pairs, " + std::to_string(reused.load()) + " resumed");
  }

  // ---- project -----------------------------------------------------------

  StageReport project() {
    const auto annotations = config_.required_path("annotations");
    const auto embeddings = config_.optional_path("embeddings");
    const auto lexicon_path = config_.optional_path("concept_lexicon");
    const double threshold = config_.real("projection_threshold", 0.0, 1.0);
    const auto h = stage_hash("project", {"projection_threshold"}, {annotations, embeddings, lexicon_path}, {"align"});
    if (auto r = reuse("project", h)) return *r;
    require("align");
    const auto corpus = load_ingested();
    const auto [sources, targets] = roles(corpus, annotations);

    std::vector<SourceAnnotation> anns(sources.size());
    std::vector<std::map<VerseId, std::vector<std::optional<Embedding>>>> embs(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const auto& id = corpus.doculects[sources[i]].id();
      anns[i] = read_annotation((fs::path(annotations) / (id + ".tsv")).string(), id);
      if (!embeddings.empty()) {
        const auto f = fs::path(embeddings) / (id + ".tsv");
        if (fs::exists(f)) embs[i] = read_embeddings(f.string());
      }
    }
    const auto lexicon = lexicon_path.empty() ? ConceptLexicon{} : read_concept_lexicon(lexicon_path);
    const auto dir = stage_dir("project");
    ProjectionOptions popts;
    popts.threshold = threshold;

    std::vector<std::string> outputs;
    std::vector<std::vector<std::string>> per_target(targets.size());
    parallel_for(targets.size(), jobs_, [&](std::size_t k) {
      const auto& tgt = corpus.doculects[targets[k]];
      std::vector<Alignment> aligns(sources.size());
      std::vector<ProjectionSource> ps;
      for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto& src = corpus.doculects[sources[i]];
        aligns[i] = read_alignment((output_ / "align" / pair_file(src.id(), tgt.id())).string());
        ps.push_back({&src, &anns[i], &aligns[i], embeddings.empty() ? nullptr : &embs[i]});
      }
      auto p = project_pos_and_deps(tgt, ps, popts);
      project_concepts(tgt, ps, lexicon, p, popts);
      atomic_write(dir / (tgt.id() + ".tsv"), [&](const std::string& tmp) { write_projection(tmp, p); });
      per_target[k].push_back("project/" + tgt.id() + ".tsv");
      if (!embeddings.empty()) {
        project_embeddings(tgt, ps, p);
        atomic_write(dir / (tgt.id() + ".emb.tsv"), [&](const std::string& tmp) { write_embeddings(tmp, p); });
        per_target[k].push_back("project/" + tgt.id() + ".emb.tsv");
      }
    });
    for (auto& v : per_target) outputs.insert(outputs.end(), v.begin(), v.end());
    manifest_->record("project", h, outputs);
    return done("project", std::to_string(targets.size()) + " target doculects");
  }

  std::vector<ProjectedDoculect> load_projections() const {
    require("project");
    std::vector<ProjectedDoculect> out;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(output_ / "project")) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && name.size() > 4 && name.ends_with(".tsv") && !name.ends_with(".emb.tsv") &&
          !name.ends_with(".tmp"))
        files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(read_projection(f.string()));
    return out;
  }

  // ---- features ----------------------------------------------------------

  FeatureOptions feature_options() const {
    FeatureOptions o;
    o.paradigm.max_mean_distance = config_.real("paradigm_cut", 0.0, 1.0, true);
    o.pairs_per_pos = config_.count("pairs_per_pos", 1);
    o.min_paradigms = config_.count("min_paradigms");
    o.seed = seed_;
    return o;
  }

  StageReport features() {
    const auto opts = feature_options();
    const auto h = stage_hash("features", {"paradigm_cut", "pairs_per_pos", "min_paradigms", "seed"}, {}, {"project"});
    if (auto r = reuse("features", h)) return *r;
    const auto projected = load_projections();
    std::vector<DoculectFeatures> derived(projected.size());
    parallel_for(projected.size(), jobs_, [&](std::size_t i) { derived[i] = derive_features(projected[i], opts); });
    std::map<std::string, DoculectFeatures> per;
    for (std::size_t i = 0; i < projected.size(); ++i) per[projected[i].doculect_id] = std::move(derived[i]);
    const auto matrix = build_feature_matrix(per, opts);
    const auto dir = stage_dir("features");
    atomic_write(dir / "matrix.tsv", [&](const std::string& tmp) { write_feature_matrix(tmp, matrix); });
    manifest_->record("features", h, {"features/matrix.tsv"});
    return done("features", std::to_string(matrix.rows.size()) + " doculects x " + std::to_string(matrix.features.size()) +
                                " features");
  }

  // ---- lexsim ------------------------------------------------------------

  // Word lists come from the `wordlists` file when given, otherwise from the
  // projected concepts of the corpus.
  StageReport lexsim() {
    const auto wordlists = config_.optional_path("wordlists");
    const std::vector<std::string> upstream = wordlists.empty() ? std::vector<std::string>{"project"} : std::vector<std::string>{};
    const auto h = stage_hash("lexsim", {"min_concepts", "max_cross_pairs", "svd_dim", "seed"}, {wordlists}, upstream);
    if (auto r = reuse("lexsim", h)) return *r;

    std::map<std::string, WordList> lists;
    if (!wordlists.empty()) {
      lists = read_wordlists(wordlists);
    } else {
      for (const auto& p : load_projections()) lists[p.doculect_id] = projected_wordlist(p);
    }
    lists = complete_wordlists(std::move(lists), config_.count("min_concepts", 2));
    if (lists.size() < 2)
      throw UsageError("lexsim: fewer than two word lists with at least " + config_.str("min_concepts") + " concepts");
    std::vector<WordList> v;
    for (auto& [_, wl] : lists) v.push_back(std::move(wl));
    LexsimOptions lopts;
    lopts.max_cross_pairs = config_.count("max_cross_pairs", 1);
    lopts.seed = seed_;
    const auto dm = distance_matrix(v, lopts, jobs_);
    const auto k = std::min<std::size_t>(config_.count("svd_dim", 1), v.size());
    const auto reps = truncated_svd(dm, k, "lexical");
    const auto dir = stage_dir("lexsim");
    atomic_write(dir / "distances.tsv", [&](const std::string& tmp) { write_distance_matrix(tmp, dm); });
    atomic_write(dir / "lexical.tsv", [&](const std::string& tmp) { write_representations(tmp, reps); });
    manifest_->record("lexsim", h, {"lexsim/distances.tsv", "lexsim/lexical.tsv"});
    return done("lexsim", std::to_string(v.size()) + " word lists, dimension " + std::to_string(k));
  }

  // ---- probe -------------------------------------------------------------

  ProbeConfig probe_config() const {
    ProbeConfig c;
    c.policy = config_.choice("mode", {"sound", "naive"}) == "sound" ? IndependencePolicy::sound() : IndependencePolicy::naive();
    c.n_samples = config_.count("n_samples", 1);
    c.min_families = config_.count("min_families", 1);
    c.logreg.C = config_.real("C", 0.0, 1e12, true);
    c.seed = seed_;
    c.jobs = jobs_;
    return c;
  }

  std::string representations_path() const {
    if (!config_.str("representations").empty()) return config_.required_path("representations");
    if (!manifest_->hash("lexsim")) throw UsageError("probe: set 'representations' or run the lexsim stage first");
    return (output_ / "lexsim" / "lexical.tsv").string();
  }

  // Directory holding the results of one probe configuration.
  fs::path probe_dir() const {
    const auto reps = read_representations(representations_path());
    return output_ / "probe" / (safe_name(reps.id) + "." + config_.str("mode") + "." + config_.str("train_labels"));
  }

  StageReport probe() {
    const auto reps_path = representations_path();
    const auto database = config_.required_path("database");
    const auto metadata = config_.required_path("metadata");
    const auto groups_path = config_.optional_path("groups");
    const auto map_path = config_.optional_path("feature_map");
    const auto train_kind = config_.choice("train_labels", {"database", "projected"});
    const auto cfg = probe_config();
    const bool have_matrix = manifest_->hash("features").has_value();
    std::vector<std::string> upstream;
    if (have_matrix) upstream.push_back("features");
    const auto h = stage_hash("probe",
                              {"mode", "train_labels", "features", "n_samples", "min_families", "C", "seed"},
                              {reps_path, database, metadata, groups_path, map_path}, upstream);
    const auto stage = "probe:" + probe_dir().lexically_relative(output_).string();
    if (auto r = reuse(stage, h)) return *r;

    const auto reps = read_representations(reps_path);
    const auto sidecar = read_representation_sidecar(reps_path);
    std::vector<DoculectInfo> doculects;
    for (auto& [_, d] : read_metadata(metadata)) doculects.push_back(std::move(d));
    auto db = load_database(database);
    if (!groups_path.empty()) filter_mutually_exclusive(db, read_groups(groups_path));

    std::map<std::string, std::string> feature_map;  // database -> projected
    if (!map_path.empty()) feature_map = read_feature_map(map_path);
    LabelSet projected;
    if (have_matrix) projected = attach_projected_labels(read_feature_matrix((output_ / "features" / "matrix.tsv").string()));
    auto projected_for = [&](const std::string& f) -> const LabelSource* {
      auto m = feature_map.find(f);
      const auto name = m == feature_map.end() ? f : m->second;
      auto it = projected.find(name);
      return it == projected.end() ? nullptr : &it->second;
    };
    if (train_kind == "projected" && !have_matrix) throw UsageError("probe: projected training labels need the features stage");

    std::vector<std::string> features = config_.list("features");
    if (features.empty())
      for (const auto& [f, _] : db) features.push_back(f);
    for (const auto& f : features)
      if (!db.count(f)) throw UsageError("probe: feature '" + f + "' is not in " + database);

    const auto dir = probe_dir();
    if (fs::exists(dir)) fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<const LabelSource*> candidates;
    for (const auto& [_, s] : db) candidates.push_back(&s);

    std::string plot = plot_tsv_header();
    std::vector<std::string> outputs;
    std::size_t skipped = 0;
    for (const auto& f : features) {
      const auto& gold = db.at(f);
      const auto* proj = projected_for(f);
      if (train_kind == "projected" && !proj) throw UsageError("probe: no projected feature for '" + f + "'");
      const auto& train = train_kind == "projected" ? *proj : gold;
      const auto result = run_probe(reps, doculects, train, gold, cfg);
      ProbeAnalysis analysis;
      if (proj) analysis.projection_f1 = projection_reference_f1(doculects, gold, *proj);
      if (result.status == "ok") {
        const auto modes = mode_predictions(result);
        if (proj && !triple_intersection(doculects, gold, *proj, modes).empty()) {
          analysis.confusion = confusion3(doculects, gold, *proj, modes);
          analysis.agreement = agreement_subset_f1(doculects, gold, *proj, modes);
        }
        analysis.explanations = best_explained_by(doculects, modes, gold, candidates);
      } else {
        ++skipped;
      }
      const auto name = safe_name(f) + ".json";
      write_json((dir / name).string(), probe_result_json(result, analysis, sidecar));
      outputs.push_back((dir / name).lexically_relative(output_).string());
      plot += plot_tsv_row(result, analysis);
      log("probe", f + ": " + result.status +
                       (result.status == "ok" ? " family F1 " + text::format_double(result.aggregate.family.f1) : ""));
    }
    write_text_atomic((dir / "plot.tsv").string(), plot);
    outputs.push_back((dir / "plot.tsv").lexically_relative(output_).string());
    manifest_->record(stage, h, outputs);
    return done(stage, std::to_string(features.size()) + " features, " + std::to_string(skipped) + " skipped");
  }

  std::vector<StageReport> run_all() {
    std::vector<StageReport> out;
    out.push_back(ingest());
    out.push_back(subwords());
    out.push_back(align());
    out.push_back(project());
    out.push_back(features());
    if (!config_.str("wordlists").empty() || has_concepts()) out.push_back(lexsim());
    if (!config_.str("database").empty()) out.push_back(probe());
    return out;
  }

  static std::string pair_file(const std::string& src, const std::string& tgt) { return src + "__" + tgt + ".tsv"; }

  static std::string safe_name(std::string s) {
    for (auto& c : s)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
    return s;
  }

 private:
  static std::vector<std::string> text_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw UsageError("texts: not a directory: " + dir);
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".txt") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  static std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }

  static std::map<std::string, std::string> read_feature_map(const std::string& path) {
    auto in = text::open_input(path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = text::strip_cr(std::move(line));
      if (text::trim(line).empty() || line[0] == '#') continue;
      const auto f = text::split(line, '\t');
      if (f.size() != 2) throw ParseError(path, lineno, "expected database feature and projected feature");
      out[f[0]] = f[1];
    }
    return out;
  }

  template <typename Writer>
  static void atomic_write(const fs::path& path, Writer&& write) {
    const auto tmp = path.string() + ".tmp";
    write(tmp);
    fs::rename(tmp, path);
  }

  SubwordOptions subword_options() const {
    SubwordOptions o;
    o.max_length = config_.count("subword_max_length");
    return o;
  }

  // Source doculects with an annotation file, and target doculects.
  static std::pair<std::vector<std::size_t>, std::vector<std::size_t>> roles(const Corpus& corpus,
                                                                           const std::string& annotations) {
    std::vector<std::size_t> sources, targets;
    for (std::size_t i = 0; i < corpus.doculects.size(); ++i) {
      const auto& d = corpus.doculects[i];
      if (d.info.role == Role::source) {
        if (fs::exists(fs::path(annotations) / (d.id() + ".tsv"))) sources.push_back(i);
      } else {
        targets.push_back(i);
      }
    }
    return {sources, targets};
  }

  bool has_concepts() const {
    if (!config_.str("concept_lexicon").empty()) return true;
    const auto annotations = config_.str("annotations");
    if (annotations.empty() || !fs::exists(annotations)) return false;
    for (const auto& e : fs::directory_iterator(annotations)) {
      if (!e.is_regular_file()) continue;
      for (const auto& [_, toks] : read_annotation(e.path().string()).verses)
        for (const auto& t : toks)
          if (!t.concepts.empty()) return true;
    }
    return false;
  }

  std::string stage_hash(const std::string& stage, const std::vector<std::string>& keys,
                         const std::vector<std::string>& inputs, const std::vector<std::string>& upstream = {}) const {
    auto h = rng::hash(stage);
    for (const auto& k : keys) h = rng::hash(k + "=" + config_.str(k), h);
    for (const auto& in : inputs) h = content_hash(in, h);
    for (const auto& u : upstream) {
      const auto uh = manifest_->hash(u);
      if (!uh) throw UsageError(stage + ": stage '" + u + "' has not been run");
      h = rng::hash(*uh, h);
    }
    return hex64(h);
  }

  void require(const std::string& stage) const {
    if (!manifest_->hash(stage)) throw UsageError("stage '" + stage + "' has not been run");
  }

  std::optional<StageReport> reuse(const std::string& stage, const std::string& hash) {
    if (manifest_->hash(stage) != hash) return std::nullopt;
    log(stage, "up to date");
    return StageReport{stage, true, "up to date"};
  }

  fs::path stage_dir(const std::string& stage) {
    manifest_->erase(stage);
    const auto dir = output_ / stage;
    fs::create_directories(dir);
    return dir;
  }

  StageReport done(const std::string& stage, const std::string& message) {
    log(stage, message);
    return {stage, false, message};
  }

  void log(const std::string& stage, const std::string& message) const {
    if (log_) *log_ << "[" << stage << "] " << message << '\n';
  }

  Config config_;
  std::ostream* log_;
  fs::path output_;
  std::optional<Manifest> manifest_;
  std::size_t jobs_ = 1;
  std::uint64_t seed_ = 1;
};

}  // namespace typoprobe
