#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "typoprobe/corpus.hpp"
#include "typoprobe/logreg.hpp"
#include "typoprobe/parallel.hpp"
#include "typoprobe/random.hpp"
#include "typoprobe/representation.hpp"
#include "typoprobe/typodb.hpp"

namespace typoprobe {

enum class PolicyMode { sound, naive };

inline std::string to_string(PolicyMode m) { return m == PolicyMode::sound ? "sound" : "naive"; }

struct IndependencePolicy {
  bool use_family = true;
  bool use_macroarea = true;
  bool use_contact = true;
  PolicyMode mode = PolicyMode::sound;

  static IndependencePolicy sound() { return {}; }
  static IndependencePolicy naive() { return {false, false, false, PolicyMode::naive}; }
  static IndependencePolicy of(PolicyMode m) { return m == PolicyMode::sound ? sound() : naive(); }
};

// Whether `b` may be used to train a classifier tested on `a`.
inline bool independent(const DoculectInfo& a, const DoculectInfo& b, const IndependencePolicy& policy) {
  if (a.doculect_id == b.doculect_id) return false;
  if (policy.mode == PolicyMode::naive) return true;
  for (const auto* d : {&a, &b}) {
    if (policy.use_family && d->family.empty()) throw Error("doculect " + d->doculect_id + " has no family");
    if (policy.use_macroarea && d->macroarea.empty()) throw Error("doculect " + d->doculect_id + " has no macroarea");
    if (policy.use_contact && d->iso639_3.empty()) throw Error("doculect " + d->doculect_id + " has no language code");
  }
  if (policy.use_family && a.family == b.family) return false;
  if (policy.use_macroarea && a.macroarea == b.macroarea) return false;
  if (policy.use_contact && (a.contacts.count(b.iso639_3) || b.contacts.count(a.iso639_3))) return false;
  return true;
}

// Indices into the test pool and, per test doculect, into the training pool.
struct FoldSample {
  std::vector<std::uint32_t> test;
  std::vector<std::vector<std::uint32_t>> train;  // parallel to `test`
  std::vector<std::uint32_t> skipped;             // test doculects with no training family
};

namespace detail {

inline std::map<std::string, std::vector<std::uint32_t>> by_family(const std::vector<const DoculectInfo*>& pool) {
  std::map<std::string, std::vector<std::uint32_t>> out;
  for (std::uint32_t i = 0; i < pool.size(); ++i) out[pool[i]->family].push_back(i);
  return out;
}

}  // namespace detail

// One uniformly drawn test doculect per family; for each, one uniformly drawn
// independent training doculect from every family that has one.
inline FoldSample sample_fold(const std::vector<const DoculectInfo*>& test_pool,
                              const std::vector<const DoculectInfo*>& train_pool, const IndependencePolicy& policy,
                              rng::Engine& g) {
  FoldSample fold;
  const auto test_families = detail::by_family(test_pool);
  const auto train_families = detail::by_family(train_pool);
  for (const auto& [_, members] : test_families) fold.test.push_back(members[rng::uniform_index(g, members.size())]);
  std::vector<std::vector<std::uint32_t>> train;
  std::vector<std::uint32_t> kept;
  std::vector<std::uint32_t> candidates;
  for (auto t : fold.test) {
    std::vector<std::uint32_t> chosen;
    for (const auto& [_, members] : train_families) {
      candidates.clear();
      for (auto m : members)
        if (independent(*test_pool[t], *train_pool[m], policy)) candidates.push_back(m);
      if (!candidates.empty()) chosen.push_back(candidates[rng::uniform_index(g, candidates.size())]);
    }
    if (chosen.empty()) {
      fold.skipped.push_back(t);
      continue;
    }
    kept.push_back(t);
    train.push_back(std::move(chosen));
  }
  fold.test = std::move(kept);
  fold.train = std::move(train);
  return fold;
}

inline FoldSample sample_fold(const std::vector<const DoculectInfo*>& pool, const IndependencePolicy& policy,
                              rng::Engine& g) {
  return sample_fold(pool, pool, policy, g);
}

// ---------------------------------------------------------------------------
// Metrics

enum class Weighting { family, language };

struct Prediction {
  const DoculectInfo* doculect = nullptr;
  int gold = 0;
  int predicted = 0;
};

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;  // mean over classes present in gold or predictions
};

// Weights giving every family (or language) unit total weight.
inline std::vector<double> unit_group_weights(const std::vector<Prediction>& preds, Weighting w) {
  std::map<std::string, std::size_t> counts;
  auto key = [&](const Prediction& p) { return w == Weighting::family ? p.doculect->family : p.doculect->iso639_3; };
  for (const auto& p : preds) ++counts[key(p)];
  std::vector<double> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(1.0 / static_cast<double>(counts[key(p)]));
  return out;
}

inline Metrics weighted_metrics(const std::vector<Prediction>& preds, Weighting weighting = Weighting::family) {
  if (preds.empty()) throw Error("weighted_metrics: no predictions");
  const auto w = unit_group_weights(preds, weighting);
  double total = 0.0, correct = 0.0;
  double tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    total += w[i];
    if (p.gold == p.predicted) {
      correct += w[i];
      tp[p.gold] += w[i];
    } else {
      fp[p.predicted] += w[i];
      fn[p.gold] += w[i];
    }
  }
  Metrics m;
  m.accuracy = correct / total;
  double f1_sum = 0.0;
  int classes = 0;
  for (int c = 0; c < 2; ++c) {
    const double denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom <= 0.0) continue;
    f1_sum += 2 * tp[c] / denom;
    ++classes;
  }
  m.f1 = f1_sum / classes;
  return m;
}

// Linear interpolation between closest ranks.
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

// ---------------------------------------------------------------------------
// Probing

struct ProbeConfig {
  IndependencePolicy policy;
  std::size_t n_samples = 401;
  std::size_t min_families = 50;
  LogregOptions logreg;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct SampleResult {
  FoldSample fold;
  std::vector<Prediction> predictions;
  std::vector<Prediction> baseline;
  std::vector<std::string> single_class;  // test doculects skipped for a one-class training set
  Metrics family, language, baseline_family, baseline_language;
};

struct Aggregate {
  Metrics family, language;
  Metrics baseline_family, baseline_language;
  Metrics baseline_p99_family, baseline_p99_language;
};

struct ProbeResult {
  std::string feature;
  std::string representation_id;
  std::string train_kind;
  std::string eval_kind;
  ProbeConfig config;
  std::string status = "ok";  // ok | skipped
  std::string reason;
  std::size_t eval_families = 0;
  std::vector<const DoculectInfo*> test_pool;
  std::vector<const DoculectInfo*> train_pool;
  std::vector<std::string> excluded;  // labeled doculects without a representation
  std::vector<SampleResult> samples;
  Aggregate aggregate;
};

namespace detail {

inline Eigen::MatrixXd gather(const RepresentationSet& reps, const std::vector<const DoculectInfo*>& pool,
                              const std::vector<std::uint32_t>& idx) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(reps.dim));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& v = *reps.lookup(*pool[idx[r]]);
    for (std::size_t k = 0; k < reps.dim; ++k) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v[k];
  }
  return X;
}

inline Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Aggregate aggregate(const std::vector<const SampleResult*>& samples) {
  Aggregate a;
  std::vector<double> bfa, bff, bla, blf;
  const double n = static_cast<double>(samples.size());
  for (const auto* sp : samples) {
    const auto& s = *sp;
    a.family.accuracy += s.family.accuracy / n;
    a.family.f1 += s.family.f1 / n;
    a.language.accuracy += s.language.accuracy / n;
    a.language.f1 += s.language.f1 / n;
    a.baseline_family.accuracy += s.baseline_family.accuracy / n;
    a.baseline_family.f1 += s.baseline_family.f1 / n;
    a.baseline_language.accuracy += s.baseline_language.accuracy / n;
    a.baseline_language.f1 += s.baseline_language.f1 / n;
    bfa.push_back(s.baseline_family.accuracy);
    bff.push_back(s.baseline_family.f1);
    bla.push_back(s.baseline_language.accuracy);
    blf.push_back(s.baseline_language.f1);
  }
  if (!samples.empty()) {
    a.baseline_p99_family = {percentile(bfa, 99), percentile(bff, 99)};
    a.baseline_p99_language = {percentile(bla, 99), percentile(blf, 99)};
  }
  return a;
}

}  // namespace detail

// Cross-validated probe: `train` labels fit the classifiers, `eval` labels
// (database kind only) score them. Each sample is paired with a baseline fit
// on the same folds after permuting the training labels.
inline ProbeResult run_probe(const RepresentationSet& reps, const std::vector<DoculectInfo>& doculects,
                             const LabelSource& train, const LabelSource& eval, const ProbeConfig& config = {}) {
  if (eval.kind != LabelKind::database) throw Error("run_probe: projected labels cannot be used as evaluation gold");
  ProbeResult res;
  res.feature = eval.feature;
  res.representation_id = reps.id;
  res.train_kind = to_string(train.kind);
  res.eval_kind = to_string(eval.kind);
  res.config = config;

  std::set<std::string> families;
  for (const auto& d : doculects) {
    const bool in_eval = eval.label_for(d).has_value();
    const bool in_train = train.label_for(d).has_value();
    if (!in_eval && !in_train) continue;
    if (!reps.lookup(d)) {
      res.excluded.push_back(d.doculect_id);
      continue;
    }
    if (in_eval) {
      res.test_pool.push_back(&d);
      families.insert(d.family);
    }
    if (in_train) res.train_pool.push_back(&d);
  }
  res.eval_families = families.size();
  if (families.size() < config.min_families) {
    res.status = "skipped";
    res.reason = "evaluation labels span " + std::to_string(families.size()) + " families, fewer than " +
                 std::to_string(config.min_families);
    return res;
  }

  std::vector<int> test_gold, train_gold;
  for (const auto* d : res.test_pool) test_gold.push_back(*eval.label_for(*d));
  for (const auto* d : res.train_pool) train_gold.push_back(*train.label_for(*d));

  res.samples.resize(config.n_samples);
  parallel_for(config.n_samples, config.jobs, [&](std::size_t s) {
    auto g = rng::stream(config.seed, s);
    auto& out = res.samples[s];
    out.fold = sample_fold(res.test_pool, res.train_pool, config.policy, g);
    for (std::size_t k = 0; k < out.fold.test.size(); ++k) {
      const auto t = out.fold.test[k];
      const auto& idx = out.fold.train[k];
      std::vector<int> y;
      for (auto i : idx) y.push_back(train_gold[i]);
      const bool both = std::count(y.begin(), y.end(), 1) > 0 && std::count(y.begin(), y.end(), 0) > 0;
      // The permutation is drawn regardless so later folds keep their streams.
      auto shuffled = y;
      rng::shuffle(shuffled, g);
      if (!both) {
        out.single_class.push_back(res.test_pool[t]->doculect_id);
        continue;
      }
      const auto X = detail::gather(reps, res.train_pool, idx);
      const auto x = detail::vec(*reps.lookup(*res.test_pool[t]));
      out.predictions.push_back({res.test_pool[t], test_gold[t], fit_logreg(X, y, config.logreg).predict(x)});
      out.baseline.push_back({res.test_pool[t], test_gold[t], fit_logreg(X, shuffled, config.logreg).predict(x)});
    }
    if (out.predictions.empty()) return;
    out.family = weighted_metrics(out.predictions, Weighting::family);
    out.language = weighted_metrics(out.predictions, Weighting::language);
    out.baseline_family = weighted_metrics(out.baseline, Weighting::family);
    out.baseline_language = weighted_metrics(out.baseline, Weighting::language);
  });
  std::vector<const SampleResult*> scored;
  for (const auto& s : res.samples)
    if (!s.predictions.empty()) scored.push_back(&s);
  if (scored.empty()) {
    res.status = "skipped";
    res.reason = "no sample produced a prediction";
    return res;
  }
  res.aggregate = detail::aggregate(scored);
  return res;
}

// Majority prediction per doculect across samples; ties predict 1.
inline std::map<std::string, int> mode_predictions(const ProbeResult& result) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> votes;  // (zeros, ones)
  for (const auto& s : result.samples)
    for (const auto& p : s.predictions) {
      auto& v = votes[p.doculect->doculect_id];
      (p.predicted ? v.second : v.first) += 1;
    }
  std::map<std::string, int> out;
  for (const auto& [id, v] : votes) out[id] = v.second >= v.first ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Analyses over mode predictions

struct TripleLabel {
  const DoculectInfo* doculect;
  int gold, projected, predicted;
};

inline std::vector<TripleLabel> triple_intersection(const std::vector<DoculectInfo>& doculects, const LabelSource& gold,
                                                    const LabelSource& projected,
                                                    const std::map<std::string, int>& predicted) {
  std::vector<TripleLabel> out;
  for (const auto& d : doculects) {
    const auto g = gold.label_for(d);
    const auto p = projected.label_for(d);
    auto it = predicted.find(d.doculect_id);
    if (g && p && it != predicted.end()) out.push_back({&d, *g, *p, it->second});
  }
  return out;
}

using Confusion3 = std::array<std::array<std::array<double, 2>, 2>, 2>;

// Family-weighted percentages M[gold][projected][predicted], summing to 100.
inline Confusion3 confusion3(const std::vector<DoculectInfo>& doculects, const LabelSource& gold,
                             const LabelSource& projected, const std::map<std::string, int>& predicted) {
  const auto triples = triple_intersection(doculects, gold, projected, predicted);
  if (triples.empty()) throw Error("confusion3: no doculect has gold, projected and predicted labels");
  std::vector<Prediction> as_preds;
  for (const auto& t : triples) as_preds.push_back({t.doculect, t.gold, t.predicted});
  const auto w = unit_group_weights(as_preds, Weighting::family);
  double total = 0.0;
  for (double x : w) total += x;
  Confusion3 m{};
  for (std::size_t i = 0; i < triples.size(); ++i)
    m[triples[i].gold][triples[i].projected][triples[i].predicted] += 100.0 * w[i] / total;
  return m;
}

struct AgreementF1 {
  double f1_all = 0.0;
  std::optional<double> f1_agreeing;
  std::size_t n_all = 0;
  std::size_t n_agreeing = 0;
};

// Family-weighted mean F1 of the predictions against gold, on all doculects
// with three labels and on those where projection and prediction agree.
inline AgreementF1 agreement_subset_f1(const std::vector<DoculectInfo>& doculects, const LabelSource& gold,
                                       const LabelSource& projected, const std::map<std::string, int>& predicted) {
  const auto triples = triple_intersection(doculects, gold, projected, predicted);
  if (triples.empty()) throw Error("agreement_subset_f1: no doculect has gold, projected and predicted labels");
  std::vector<Prediction> all, agreeing;
  for (const auto& t : triples) {
    all.push_back({t.doculect, t.gold, t.predicted});
    if (t.projected == t.predicted) agreeing.push_back({t.doculect, t.gold, t.predicted});
  }
  AgreementF1 out;
  out.f1_all = weighted_metrics(all).f1;
  out.n_all = all.size();
  out.n_agreeing = agreeing.size();
  if (!agreeing.empty()) out.f1_agreeing = weighted_metrics(agreeing).f1;
  return out;
}

struct Explanation {
  std::string feature;
  double f1 = 0.0;            // predictions scored against this feature
  double reference_f1 = 0.0;  // predictions scored against the probed feature, same doculects
  std::size_t n = 0;
};

struct ExplanationRanking {
  std::vector<Explanation> ranked;
  std::vector<std::string> skipped;  // candidates without overlap
};

// Scores the mode predictions against each candidate feature on the doculects
// labeled for both the candidate and the probed feature; best F1 first.
inline ExplanationRanking best_explained_by(const std::vector<DoculectInfo>& doculects,
                                            const std::map<std::string, int>& predicted, const LabelSource& probed,
                                            const std::vector<const LabelSource*>& candidates) {
  ExplanationRanking out;
  for (const auto* cand : candidates) {
    std::vector<Prediction> vs_cand, vs_probed;
    for (const auto& d : doculects) {
      auto it = predicted.find(d.doculect_id);
      const auto a = probed.label_for(d);
      const auto b = cand->label_for(d);
      if (it == predicted.end() || !a || !b) continue;
      vs_cand.push_back({&d, *b, it->second});
      vs_probed.push_back({&d, *a, it->second});
    }
    if (vs_cand.empty()) {
      out.skipped.push_back(cand->feature);
      continue;
    }
    out.ranked.push_back({cand->feature, weighted_metrics(vs_cand).f1, weighted_metrics(vs_probed).f1, vs_cand.size()});
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const Explanation& x, const Explanation& y) { return x.f1 > y.f1; });
  return out;
}

}  // namespace typoprobe
