#include <gtest/gtest.h>

#include <cmath>

#include "synthetic.hpp"
#include "typoprobe/align.hpp"

using namespace typoprobe;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

double log_binomial(std::uint64_t n, std::uint64_t k) {
  return std::log(factorial(static_cast<int>(n))) - std::log(factorial(static_cast<int>(k))) -
         std::log(factorial(static_cast<int>(n - k)));
}

std::vector<std::uint64_t> v(std::initializer_list<std::uint64_t> x) { return x; }

}  // namespace

TEST(LogGamma, MatchesLibmOverUsedRange) {
  for (double x = 0.05; x < 20000.0; x *= 1.07) {
    EXPECT_NEAR(log_gamma(x), std::lgamma(x), 1e-10 * std::max(1.0, std::abs(std::lgamma(x)) / 1e4)) << x;
  }
  for (int k = 1; k < 60; ++k) EXPECT_NEAR(log_gamma(k), std::lgamma(static_cast<double>(k)), 1e-10) << k;
}

TEST(DirichletMultinomial, UniformBetaBinomial) {
  // One sequence with 3 successes in 10: 3! 7! / 11!; the count pmf is 1/11.
  EXPECT_NEAR(dm_log_likelihood(v({3, 7})), std::log(factorial(3) * factorial(7) / factorial(11)), 1e-12);
  EXPECT_NEAR(log_binomial(10, 3) + dm_log_likelihood(v({3, 7})), -std::log(11.0), 1e-12);
}

TEST(DirichletMultinomial, EmptyCountsHaveProbabilityOne) {
  EXPECT_NEAR(dm_log_likelihood(v({0, 0, 0, 0})), 0.0, 1e-12);
}

TEST(DirichletMultinomial, HandEvaluatedFourOutcomes) {
  // Gamma(4)/Gamma(6) * 1 * 1 = 6/120
  EXPECT_NEAR(dm_log_likelihood(v({1, 1, 0, 0})), std::log(0.05), 1e-12);
}

TEST(DirichletMultinomial, GeneralAlphas) {
  // Beta-binomial with alpha=(2,3), one success: B(3,3)/B(2,3) = (1/30)/(1/12) = 0.4
  const std::vector<std::uint64_t> counts = {1, 0};
  const std::vector<double> alphas = {2.0, 3.0};
  EXPECT_NEAR(dm_log_likelihood(counts, alphas), std::log(0.4), 1e-12);
}

TEST(DirichletMultinomial, RejectsNonPositiveAlpha) {
  const std::vector<std::uint64_t> counts = {1, 2};
  EXPECT_THROW(dm_log_likelihood(counts, std::vector<double>{1.0, 0.0}), Error);
  EXPECT_THROW(dm_log_likelihood(counts, std::vector<double>{1.0, -1.0}), Error);
  EXPECT_THROW(dm_log_likelihood(counts, std::vector<double>{1.0}), Error);
}

TEST(DirichletMultinomial, NormalizesOverAllOutcomeVectors) {
  for (int n = 0; n <= 6; ++n) {
    double total = 0.0;
    for (int a = 0; a <= n; ++a)
      for (int b = 0; a + b <= n; ++b)
        for (int c = 0; a + b + c <= n; ++c) {
          const int d = n - a - b - c;
          const double coef = factorial(n) / (factorial(a) * factorial(b) * factorial(c) * factorial(d));
          total += coef * std::exp(dm_log_likelihood(v({std::uint64_t(a), std::uint64_t(b), std::uint64_t(c),
                                                         std::uint64_t(d)})));
        }
    EXPECT_NEAR(total, 1.0, 1e-9) << "n=" << n;
  }
}

TEST(DirichletMultinomial, BetaBinomialIdentity) {
  for (std::uint64_t n = 0; n <= 20; ++n)
    for (std::uint64_t k = 0; k <= n; ++k)
      EXPECT_NEAR(log_binomial(n, k) + dm_log_likelihood(v({k, n - k})), -std::log(static_cast<double>(n + 1)), 1e-12);
}

TEST(AlignmentScore, FullIndependenceHandComputed) {
  const auto p = alignment_score({1, 1, 1, 1}, 1, Eq1Mode::full_independence);
  EXPECT_NEAR(p.log_bf, 0.0, 1e-12);
  EXPECT_NEAR(p.score, 0.0, 1e-12);
}

TEST(AlignmentScore, PaperLiteralHandComputed) {
  const auto p = alignment_score({1, 1, 1, 1}, 1, Eq1Mode::paper_literal);
  EXPECT_NEAR(p.log_bf, std::log(0.5), 1e-12);
  EXPECT_NEAR(p.score, std::log(0.5), 1e-12);
}

TEST(AlignmentScore, PriorIsAdditive) {
  rng::Engine g(11);
  for (int i = 0; i < 200; ++i) {
    CooccurrenceStats s;
    s.n = 1 + rng::uniform_index(g, 300);
    s.n_w = rng::uniform_index(g, s.n + 1);
    s.n_u = rng::uniform_index(g, s.n + 1);
    const auto lo = s.n_w + s.n_u > s.n ? s.n_w + s.n_u - s.n : 0;
    s.n_wu = lo + rng::uniform_index(g, std::min(s.n_w, s.n_u) - lo + 1);
    const std::uint64_t V = 1 + rng::uniform_index(g, 5000);
    for (auto mode : {Eq1Mode::paper_literal, Eq1Mode::full_independence}) {
      const auto a = alignment_score(s, V, mode);
      const auto b = alignment_score(s, 2 * V, mode);
      EXPECT_NEAR(a.score - b.score, std::log(2.0), 1e-9);
      EXPECT_DOUBLE_EQ(a.log_bf, b.log_bf);
      EXPECT_LT(b.score, a.score);
    }
    const auto fwd = alignment_score(s, V, Eq1Mode::full_independence);
    const auto rev = alignment_score({s.n, s.n_u, s.n_w, s.n_wu}, V, Eq1Mode::full_independence);
    EXPECT_NEAR(fwd.log_bf, rev.log_bf, 1e-9);
  }
}

TEST(AlignmentScore, PaperLiteralIsAsymmetric) {
  const auto fwd = alignment_score({100, 10, 40, 8}, 10, Eq1Mode::paper_literal);
  const auto rev = alignment_score({100, 40, 10, 8}, 10, Eq1Mode::paper_literal);
  EXPECT_GT(std::abs(fwd.log_bf - rev.log_bf), 1.0);
}

TEST(AlignmentScore, RejectsInconsistentStats) {
  EXPECT_THROW(alignment_score({10, 3, 4, 5}, 10), Error);
  EXPECT_THROW(alignment_score({10, 11, 4, 2}, 10), Error);
  EXPECT_THROW(alignment_score({10, 8, 8, 2}, 10), Error);  // union exceeds n
  EXPECT_THROW(alignment_score({10, 3, 4, 2}, 0), Error);
}

TEST(Thresholds, StatedRule) {
  PairScore p;
  p.score = 1.0;
  p.log_bf = 30;
  p.stats.n_wu = 100;
  EXPECT_FALSE(passes_thresholds(p));
  p.log_bf = 120;
  p.stats.n_wu = 300;
  EXPECT_TRUE(passes_thresholds(p));
  p.score = -0.1;
  p.log_bf = 1e6;
  EXPECT_FALSE(passes_thresholds(p));
}

TEST(AlignPair, SyntheticLexiconIsRecovered) {
  const auto c = typoprobe::testing::make_bijective_corpus(5, 300, 60);
  const auto sv = extract_subwords(c.source);
  const auto tv = extract_subwords(c.target);
  const auto a = align_pair(c.source, sv, c.target, tv);
  std::size_t correct = 0, total = 0;
  for (const auto& [verse, links] : a.links) {
    std::set<std::uint32_t> seen;
    for (const auto& l : links) {
      EXPECT_TRUE(seen.insert(l.src).second) << "two links for one source token";
      ++total;
      correct += c.lexicon.at(c.source.verses.at(verse)[l.src]) == c.target.verses.at(verse)[l.tgt];
    }
  }
  ASSERT_GT(total, 1000u);
  EXPECT_GE(static_cast<double>(correct) / total, 0.9);
}

TEST(AlignPair, UnsharedVerseContributesNothing) {
  auto c = typoprobe::testing::make_bijective_corpus(9, 200, 40);
  c.source.verses["only-src"] = {c.source.verses.begin()->second};
  const auto a = align_pair(c.source, extract_subwords(c.source), c.target, extract_subwords(c.target));
  EXPECT_FALSE(a.links.count("only-src"));
}

TEST(AlignPair, EverythingBelowThresholdGivesEmptyAlignment) {
  Doculect s, t;
  s.info.doculect_id = "s";
  t.info.doculect_id = "t";
  s.verses = {{"1", {"aa", "bb"}}, {"2", {"aa", "bb"}}};
  t.verses = {{"1", {"xx", "yy"}}, {"2", {"xx", "yy"}}};
  const auto a = align_pair(s, extract_subwords(s), t, extract_subwords(t));
  EXPECT_EQ(a.link_count(), 0u);
}

TEST(AlignPair, NoSharedVersesIsAnError) {
  Doculect s, t;
  s.info.doculect_id = "s";
  t.info.doculect_id = "t";
  s.verses = {{"1", {"aa"}}};
  t.verses = {{"2", {"xx"}}};
  EXPECT_THROW(align_pair(s, extract_subwords(s), t, extract_subwords(t)), Error);
}

TEST(AlignPair, EmittedLinksPassThresholds) {
  const auto c = typoprobe::testing::make_bijective_corpus(21, 250, 50);
  const auto sv = extract_subwords(c.source);
  const auto tv = extract_subwords(c.target);
  const auto shared = shared_verses(c.source, c.target, {});
  AlignOptions opts;
  const PairScoreTable table(c.source, sv, c.target, tv, shared, opts);
  const auto a = align_pair(c.source, sv, c.target, tv, {}, opts);
  for (const auto& [verse, links] : a.links)
    for (const auto& l : links) EXPECT_GE(l.score, 0.0);
  EXPECT_GT(table.size(), 0u);
}

TEST(AlignPair, DumpRoundTrip) {
  const auto c = typoprobe::testing::make_bijective_corpus(3, 120, 30);
  const auto a = align_pair(c.source, extract_subwords(c.source), c.target, extract_subwords(c.target));
  const auto path = std::filesystem::temp_directory_path() / "typoprobe-align-roundtrip.tsv";
  write_alignment(path.string(), a);
  const auto b = read_alignment(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(b.source_doculect, "src");
  EXPECT_EQ(b.target_doculect, "tgt");
  EXPECT_EQ(a.links, b.links);
}
