#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "typoprobe/probe.hpp"

namespace typoprobe {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json metrics_json(const Metrics& m) { return Json{{"accuracy", m.accuracy}, {"f1", m.f1}}; }

inline Json ids_json(const std::vector<const DoculectInfo*>& pool, const std::vector<std::uint32_t>& idx) {
  Json out = Json::array();
  for (auto i : idx) out.push_back(pool[i]->doculect_id);
  return out;
}

inline Json predictions_json(const std::vector<Prediction>& preds) {
  Json out = Json::object();
  for (const auto& p : preds) out[p.doculect->doculect_id] = p.predicted;
  return out;
}

}  // namespace detail

// Analyses attached to a probe report when projected labels are available.
struct ProbeAnalysis {
  std::optional<Confusion3> confusion;
  std::optional<AgreementF1> agreement;
  std::optional<double> projection_f1;  // projected labels scored against the gold labels
  std::optional<ExplanationRanking> explanations;
};

// Family-weighted mean F1 of projected labels against gold on their overlap.
inline std::optional<double> projection_reference_f1(const std::vector<DoculectInfo>& doculects, const LabelSource& gold,
                                                     const LabelSource& projected) {
  std::vector<Prediction> preds;
  for (const auto& d : doculects) {
    const auto g = gold.label_for(d);
    const auto p = projected.label_for(d);
    if (g && p) preds.push_back({&d, *g, *p});
  }
  if (preds.empty()) return std::nullopt;
  return weighted_metrics(preds, Weighting::family).f1;
}

inline Json config_json(const ProbeConfig& c) {
  return Json{{"seed", c.seed},
              {"policy",
               {{"mode", to_string(c.policy.mode)},
                {"use_family", c.policy.use_family},
                {"use_macroarea", c.policy.use_macroarea},
                {"use_contact", c.policy.use_contact}}},
              {"n_samples", c.n_samples},
              {"min_families", c.min_families},
              {"C", c.logreg.C},
              {"gradient_tolerance", c.logreg.gradient_tolerance},
              {"max_iterations", c.logreg.max_iterations},
              {"decision_threshold", 0.5}};
}

// Deterministic JSON document for one probe run. `metadata` carries the
// representation sidecar when one was found.
inline Json probe_result_json(const ProbeResult& r, const ProbeAnalysis& analysis = {}, const Json& metadata = nullptr) {
  Json j;
  j["feature"] = r.feature;
  j["representation_id"] = r.representation_id;
  if (!metadata.is_null()) j["representation_metadata"] = metadata;
  j["train_labels"] = r.train_kind;
  j["eval_labels"] = r.eval_kind;
  j["status"] = r.status;
  if (!r.reason.empty()) j["reason"] = r.reason;
  j["config"] = config_json(r.config);
  j["eval_families"] = r.eval_families;
  j["test_pool_size"] = r.test_pool.size();
  j["train_pool_size"] = r.train_pool.size();
  j["excluded"] = r.excluded;

  Json samples = Json::array();
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    const auto& smp = r.samples[s];
    Json o;
    o["index"] = s;
    o["n_test"] = smp.predictions.size();
    o["skipped_no_training"] = detail::ids_json(r.test_pool, smp.fold.skipped);
    o["skipped_single_class"] = smp.single_class;
    if (!smp.predictions.empty()) {
      o["family"] = detail::metrics_json(smp.family);
      o["language"] = detail::metrics_json(smp.language);
      o["baseline_family"] = detail::metrics_json(smp.baseline_family);
      o["baseline_language"] = detail::metrics_json(smp.baseline_language);
    }
    o["predictions"] = detail::predictions_json(smp.predictions);
    o["baseline_predictions"] = detail::predictions_json(smp.baseline);
    samples.push_back(std::move(o));
  }
  j["samples"] = std::move(samples);

  if (r.status == "ok") {
    const auto& a = r.aggregate;
    j["aggregate"] = {{"family", detail::metrics_json(a.family)},
                      {"language", detail::metrics_json(a.language)},
                      {"baseline_family", detail::metrics_json(a.baseline_family)},
                      {"baseline_language", detail::metrics_json(a.baseline_language)},
                      {"baseline_p99_family", detail::metrics_json(a.baseline_p99_family)},
                      {"baseline_p99_language", detail::metrics_json(a.baseline_p99_language)}};
    j["mode_predictions"] = mode_predictions(r);
  }

  if (analysis.projection_f1) j["projection_reference_f1"] = *analysis.projection_f1;
  if (analysis.confusion) {
    Json c = Json::array();
    for (int g = 0; g < 2; ++g)
      for (int p = 0; p < 2; ++p)
        for (int k = 0; k < 2; ++k)
          c.push_back({{"gold", g}, {"projected", p}, {"predicted", k}, {"percent", (*analysis.confusion)[g][p][k]}});
    j["confusion3"] = std::move(c);
  }
  if (analysis.agreement) {
    const auto& a = *analysis.agreement;
    j["agreement_subset"] = {{"f1_all", a.f1_all},
                             {"f1_agreeing", a.f1_agreeing ? Json(*a.f1_agreeing) : Json(nullptr)},
                             {"n_all", a.n_all},
                             {"n_agreeing", a.n_agreeing}};
  }
  if (analysis.explanations) {
    Json ranked = Json::array();
    for (const auto& e : analysis.explanations->ranked)
      ranked.push_back({{"feature", e.feature}, {"f1", e.f1}, {"reference_f1", e.reference_f1}, {"n", e.n}});
    j["best_explained_by"] = {{"ranked", std::move(ranked)}, {"skipped", analysis.explanations->skipped}};
  }
  return j;
}

// Writes via a temporary file and rename so readers never see partial output.
inline void write_text_atomic(const std::string& path, const std::string& content) {
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    if (!out) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json(const std::string& path, const Json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

inline std::string plot_tsv_header() {
  return "feature\trepresentation_id\ttrain_labels\tmode\tstatus\tfamily_f1\tbaseline_p99_family_f1\tprojection_reference_f1\n";
}

// One plot row; NA marks values that do not exist for this run.
inline std::string plot_tsv_row(const ProbeResult& r, const ProbeAnalysis& analysis = {}) {
  const bool ok = r.status == "ok";
  std::string row = r.feature + '\t' + r.representation_id + '\t' + r.train_kind + '\t' + to_string(r.config.policy.mode) +
                    '\t' + r.status + '\t';
  row += ok ? text::format_double(r.aggregate.family.f1) : "NA";
  row += '\t';
  row += ok ? text::format_double(r.aggregate.baseline_p99_family.f1) : "NA";
  row += '\t';
  row += analysis.projection_f1 ? text::format_double(*analysis.projection_f1) : "NA";
  return row + '\n';
}

// Sidecar JSON written next to a representation file by external trainers:
// `<file>.json`, or the file name with its extension replaced by `.json`.
inline Json read_representation_sidecar(const std::string& reps_path) {
  std::filesystem::path p(reps_path);
  for (auto candidate : {std::filesystem::path(reps_path + ".json"), std::filesystem::path(p).replace_extension(".json")}) {
    if (candidate == p || !std::filesystem::exists(candidate)) continue;
    std::ifstream in(candidate);
    try {
      return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error("invalid JSON in " + candidate.string() + ": " + e.what());
    }
  }
  return nullptr;
}

}  // namespace typoprobe
