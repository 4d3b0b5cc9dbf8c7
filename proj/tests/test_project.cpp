#include <gtest/gtest.h>

#include "test_util.hpp"
#include "typoprobe/project.hpp"

using namespace typoprobe;
using typoprobe::testing::TempDir;
using typoprobe::testing::write_file;

namespace {

Doculect make_doculect(const std::string& id, const std::string& iso, std::map<VerseId, Tokens> verses) {
  Doculect d;
  d.info.doculect_id = id;
  d.info.iso639_3 = iso;
  d.verses = std::move(verses);
  return d;
}

Alignment identity_alignment(const Doculect& src, const std::string& tgt_id) {
  Alignment a;
  a.source_doculect = src.id();
  a.target_doculect = tgt_id;
  for (const auto& [v, toks] : src.verses)
    for (std::uint32_t i = 0; i < toks.size(); ++i) a.links[v].push_back({i, i, 1.0});
  return a;
}

// "the dog sees cats": DET NOUN VERB NOUN
SourceAnnotation small_annotation(const std::string& id) {
  SourceAnnotation ann;
  ann.doculect_id = id;
  ann.verses["v1"] = {
      {"the", "the", "DET", 2, "det", {}},
      {"dog", "dog", "NOUN", 3, "nsubj", {"DOG"}},
      {"sees", "see", "VERB", 0, "root", {}},
      {"cats", "cat", "NOUN", 3, "obj", {}},
  };
  return ann;
}

}  // namespace

TEST(ProjectLabel, Examples) {
  EXPECT_EQ(project_label({"NOUN", "NOUN", "NOUN", "VERB"}, 10), "NOUN");
  EXPECT_EQ(project_label({"NOUN", "VERB"}, 10), std::nullopt);  // tie
  EXPECT_EQ(project_label({"NOUN"}, 25), std::nullopt);          // 1/25 < 0.2
  EXPECT_EQ(project_label({"NOUN", "NOUN", "NOUN", "NOUN", "NOUN"}, 25), "NOUN");  // exactly 0.2
  EXPECT_EQ(project_label({}, 5), std::nullopt);
  EXPECT_EQ(project_label({"X"}, 0), std::nullopt);
}

TEST(ProjectLabel, CustomThreshold) {
  EXPECT_EQ(project_label({"A", "A", "B"}, 4, 0.5), "A");
  EXPECT_EQ(project_label({"A", "B"}, 4, 0.5), std::nullopt);
}

TEST(Project, IdentityAlignmentReproducesSource) {
  const auto src = make_doculect("s1", "eng", {{"v1", {"the", "dog", "sees", "cats"}}});
  const auto tgt = make_doculect("t1", "xxx", {{"v1", {"the", "dog", "sees", "cats"}}});
  const auto ann = small_annotation("s1");
  const auto al = identity_alignment(src, "t1");
  const auto p = project_pos_and_deps(tgt, {{&src, &ann, &al, nullptr}});
  const auto& toks = p.verses.at("v1");
  ASSERT_EQ(toks.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& a = ann.verses.at("v1")[i];
    EXPECT_EQ(toks[i].form, a.form);
    EXPECT_EQ(toks[i].upos, a.upos);
    EXPECT_EQ(toks[i].head, a.head);
    EXPECT_EQ(toks[i].deprel, a.deprel);
  }
}

TEST(Project, HeadsFollowAlignment) {
  // Target order: cats sees dog the (reversed).
  const auto src = make_doculect("s1", "eng", {{"v1", {"the", "dog", "sees", "cats"}}});
  const auto tgt = make_doculect("t1", "xxx", {{"v1", {"C", "S", "D", "T"}}});
  const auto ann = small_annotation("s1");
  Alignment al{"s1", "t1", {{"v1", {{0, 3, 1}, {1, 2, 1}, {2, 1, 1}, {3, 0, 1}}}}};
  const auto p = project_pos_and_deps(tgt, {{&src, &ann, &al, nullptr}});
  const auto& t = p.verses.at("v1");
  EXPECT_EQ(t[3].upos, "DET");
  EXPECT_EQ(t[3].head, 3u);  // "the" -> "dog" at target position 3 (1-based)
  EXPECT_EQ(t[2].head, 2u);
  EXPECT_EQ(t[1].head, 0u);
  EXPECT_EQ(t[1].deprel, "root");
  EXPECT_EQ(t[0].head, 2u);
  EXPECT_EQ(t[0].deprel, "obj");
}

TEST(Project, UnalignedHeadGivesNoDependency) {
  const auto src = make_doculect("s1", "eng", {{"v1", {"the", "dog", "sees", "cats"}}});
  const auto tgt = make_doculect("t1", "xxx", {{"v1", {"D", "C"}}});
  const auto ann = small_annotation("s1");
  Alignment al{"s1", "t1", {{"v1", {{1, 0, 1}, {3, 1, 1}}}}};
  const auto p = project_pos_and_deps(tgt, {{&src, &ann, &al, nullptr}});
  const auto& t = p.verses.at("v1");
  EXPECT_EQ(t[0].upos, "NOUN");
  EXPECT_FALSE(t[0].head.has_value());
  EXPECT_FALSE(t[1].deprel.has_value());
}

TEST(Project, MajorityAcrossSources) {
  // Five sources; three say NOUN, two say VERB for the single target token.
  std::vector<Doculect> srcs;
  std::vector<SourceAnnotation> anns;
  std::vector<Alignment> als;
  for (int i = 0; i < 5; ++i) {
    const auto id = "s" + std::to_string(i);
    srcs.push_back(make_doculect(id, "eng", {{"v1", {"w"}}}));
    SourceAnnotation a;
    a.doculect_id = id;
    a.verses["v1"] = {{"w", "w", i < 3 ? "NOUN" : "VERB", 0, "root", {}}};
    anns.push_back(a);
    als.push_back(Alignment{id, "t", {{"v1", {{0, 0, 1}}}}});
  }
  const auto tgt = make_doculect("t", "xxx", {{"v1", {"x"}}});
  std::vector<ProjectionSource> ps;
  for (int i = 0; i < 5; ++i) ps.push_back({&srcs[i], &anns[i], &als[i], nullptr});
  EXPECT_EQ(project_pos_and_deps(tgt, ps).verses.at("v1")[0].upos, "NOUN");

  // 2 vs 2 with the fifth unaligned: tie, no label.
  als[2].links.clear();
  EXPECT_FALSE(project_pos_and_deps(tgt, ps).verses.at("v1")[0].upos.has_value());
}

TEST(Project, SourceVotesOncePerLabel) {
  // One source aligns two NOUN tokens into the same target token; another
  // source votes VERB. A single source vote each gives a tie.
  const auto s1 = make_doculect("s1", "eng", {{"v1", {"a", "b"}}});
  const auto s2 = make_doculect("s2", "deu", {{"v1", {"c"}}});
  SourceAnnotation a1{"s1", {{"v1", {{"a", "a", "NOUN", 0, "root", {}}, {"b", "b", "NOUN", 1, "compound", {}}}}}};
  SourceAnnotation a2{"s2", {{"v1", {{"c", "c", "VERB", 0, "root", {}}}}}};
  Alignment l1{"s1", "t", {{"v1", {{0, 0, 1}, {1, 0, 1}}}}};
  Alignment l2{"s2", "t", {{"v1", {{0, 0, 1}}}}};
  const auto tgt = make_doculect("t", "xxx", {{"v1", {"x"}}});
  const auto p = project_pos_and_deps(tgt, {{&s1, &a1, &l1, nullptr}, {&s2, &a2, &l2, nullptr}});
  EXPECT_FALSE(p.verses.at("v1")[0].upos.has_value());
}

TEST(Project, AvailabilityCountsOnlySourcesWithVerse) {
  // Only one of six sources has verse v2; its single vote is 1/1.
  std::vector<Doculect> srcs;
  std::vector<SourceAnnotation> anns;
  std::vector<Alignment> als;
  for (int i = 0; i < 6; ++i) {
    const auto id = "s" + std::to_string(i);
    std::map<VerseId, Tokens> v{{"v1", {"w"}}};
    SourceAnnotation a{id, {{"v1", {{"w", "w", "NOUN", 0, "root", {}}}}}};
    Alignment al{id, "t", {}};
    if (i == 0) {
      v["v2"] = {"z"};
      a.verses["v2"] = {{"z", "z", "ADV", 0, "root", {}}};
      al.links["v2"] = {{0, 0, 1}};
    }
    srcs.push_back(make_doculect(id, "eng", v));
    anns.push_back(a);
    als.push_back(al);
  }
  const auto tgt = make_doculect("t", "xxx", {{"v1", {"x"}}, {"v2", {"y"}}});
  std::vector<ProjectionSource> ps;
  for (int i = 0; i < 6; ++i) ps.push_back({&srcs[i], &anns[i], &als[i], nullptr});
  const auto p = project_pos_and_deps(tgt, ps);
  EXPECT_EQ(p.verses.at("v2")[0].upos, "ADV");
  EXPECT_FALSE(p.verses.at("v1")[0].upos.has_value());  // no links at all
}

TEST(Project, NoSourcesIsError) {
  const auto tgt = make_doculect("t", "xxx", {{"v1", {"x"}}});
  EXPECT_THROW(project_pos_and_deps(tgt, {}), Error);
}

TEST(Project, AnnotationLengthMismatchIsError) {
  const auto src = make_doculect("s1", "eng", {{"v1", {"the", "dog"}}});
  const auto tgt = make_doculect("t1", "xxx", {{"v1", {"x"}}});
  const auto ann = small_annotation("s1");
  const auto al = identity_alignment(src, "t1");
  EXPECT_THROW(project_pos_and_deps(tgt, {{&src, &ann, &al, nullptr}}), Error);
}

TEST(ProjectConcepts, LexiconAndAnnotationColumn) {
  const auto src = make_doculect("s1", "eng", {{"v1", {"the", "dog", "sees", "cats"}}});
  const auto tgt = make_doculect("t1", "xxx", {{"v1", {"a", "b", "c", "d"}}});
  const auto ann = small_annotation("s1");
  const auto al = identity_alignment(src, "t1");
  ConceptLexicon lex{{{"eng", "cat"}, {"CAT"}}, {{"eng", "see"}, {"SEE"}}, {{"deu", "the"}, {"THE"}}};
  const auto p = project_concepts(tgt, {{&src, &ann, &al, nullptr}}, lex);
  const auto& t = p.verses.at("v1");
  EXPECT_FALSE(t[0].concept_id.has_value());  // lexicon entry is for another language
  EXPECT_EQ(t[1].concept_id, "DOG");
  EXPECT_EQ(t[2].concept_id, "SEE");
  EXPECT_EQ(t[3].concept_id, "CAT");
}

TEST(ProjectConcepts, AmbiguousLemmaYieldsEachConcept) {
  // Source 1's lemma maps to {ARM, HAND}; source 2 says HAND. HAND wins 2:1.
  const auto s1 = make_doculect("s1", "eng", {{"v1", {"x"}}});
  const auto s2 = make_doculect("s2", "deu", {{"v1", {"y"}}});
  SourceAnnotation a1{"s1", {{"v1", {{"x", "arm", "NOUN", 0, "root", {}}}}}};
  SourceAnnotation a2{"s2", {{"v1", {{"y", "hand", "NOUN", 0, "root", {}}}}}};
  Alignment l1{"s1", "t", {{"v1", {{0, 0, 1}}}}};
  Alignment l2{"s2", "t", {{"v1", {{0, 0, 1}}}}};
  ConceptLexicon lex{{{"eng", "arm"}, {"ARM", "HAND"}}, {{"deu", "hand"}, {"HAND"}}};
  const auto tgt = make_doculect("t", "xxx", {{"v1", {"z"}}});
  const auto p = project_concepts(tgt, {{&s1, &a1, &l1, nullptr}, {&s2, &a2, &l2, nullptr}}, lex);
  EXPECT_EQ(p.verses.at("v1")[0].concept_id, "HAND");
}

TEST(ProjectEmbeddings, MeanOfAlignedVectors) {
  const auto s1 = make_doculect("s1", "eng", {{"v1", {"a", "b"}}});
  const auto s2 = make_doculect("s2", "deu", {{"v1", {"c"}}});
  std::map<VerseId, std::vector<std::optional<Embedding>>> e1{{"v1", {Embedding{1, 2}, Embedding{3, 4}}}};
  std::map<VerseId, std::vector<std::optional<Embedding>>> e2{{"v1", {Embedding{5, 0}}}};
  Alignment l1{"s1", "t", {{"v1", {{0, 0, 1}, {1, 0, 1}}}}};
  Alignment l2{"s2", "t", {{"v1", {{0, 0, 1}}}}};
  const auto tgt = make_doculect("t", "xxx", {{"v1", {"z", "q"}}});
  const auto p = project_embeddings(tgt, {{&s1, nullptr, &l1, &e1}, {&s2, nullptr, &l2, &e2}});
  const auto& t = p.verses.at("v1");
  ASSERT_TRUE(t[0].embedding.has_value());
  EXPECT_DOUBLE_EQ((*t[0].embedding)[0], 3.0);
  EXPECT_DOUBLE_EQ((*t[0].embedding)[1], 2.0);
  EXPECT_FALSE(t[1].embedding.has_value());
}

TEST(ProjectEmbeddings, DimensionMismatchIsError) {
  const auto s1 = make_doculect("s1", "eng", {{"v1", {"a", "b"}}});
  std::map<VerseId, std::vector<std::optional<Embedding>>> e1{{"v1", {Embedding{1, 2}, Embedding{3}}}};
  Alignment l1{"s1", "t", {{"v1", {{0, 0, 1}, {1, 1, 1}}}}};
  const auto tgt = make_doculect("t", "xxx", {{"v1", {"z", "q"}}});
  EXPECT_THROW(project_embeddings(tgt, {{&s1, nullptr, &l1, &e1}}), Error);
}

TEST(ProjectIO, AnnotationRoundTrip) {
  TempDir dir("proj");
  const auto ann = small_annotation("s1");
  write_annotation(dir.file("s1.conllu"), ann);
  const auto back = read_annotation(dir.file("s1.conllu"));
  EXPECT_EQ(back.doculect_id, "s1");
  ASSERT_EQ(back.verses.at("v1").size(), 4u);
  EXPECT_EQ(back.verses.at("v1")[1].concepts, std::vector<std::string>{"DOG"});
  EXPECT_EQ(back.verses.at("v1")[3].head, 3u);
}

TEST(ProjectIO, AnnotationErrorsCarryLineNumbers) {
  TempDir dir("proj");
  write_file(dir.file("bad.conllu"), "# verse = v1\n1\ta\ta\tNOUN\t0\troot\t_\n2\tb\tb\tFOO\t1\tdet\t_\n");
  try {
    read_annotation(dir.file("bad.conllu"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  write_file(dir.file("head.conllu"), "# verse = v1\n1\ta\ta\tNOUN\t5\troot\t_\n");
  EXPECT_THROW(read_annotation(dir.file("head.conllu")), ParseError);
  write_file(dir.file("cols.conllu"), "# verse = v1\n1\ta\ta\tNOUN\t0\n");
  EXPECT_THROW(read_annotation(dir.file("cols.conllu")), ParseError);
}

TEST(ProjectIO, ProjectionAndEmbeddingRoundTrip) {
  TempDir dir("proj");
  ProjectedDoculect p;
  p.doculect_id = "t";
  p.verses["v1"] = {{"a", "NOUN", 2u, "nsubj", "DOG", Embedding{0.5, -1.25}},
                    {"b", std::nullopt, std::nullopt, std::nullopt, std::nullopt, std::nullopt}};
  write_projection(dir.file("t.conllu"), p);
  write_embeddings(dir.file("t.emb"), p);
  const auto back = read_projection(dir.file("t.conllu"));
  ASSERT_EQ(back.verses.at("v1").size(), 2u);
  EXPECT_EQ(back.verses.at("v1")[0].upos, "NOUN");
  EXPECT_EQ(back.verses.at("v1")[0].head, 2u);
  EXPECT_EQ(back.verses.at("v1")[0].concept_id, "DOG");
  EXPECT_FALSE(back.verses.at("v1")[1].upos.has_value());
  const auto emb = read_embeddings(dir.file("t.emb"));
  ASSERT_EQ(emb.at("v1").size(), 1u);
  EXPECT_EQ(*emb.at("v1")[0], (Embedding{0.5, -1.25}));
}

TEST(ProjectIO, ConceptLexicon) {
  TempDir dir("proj");
  write_file(dir.file("lex.tsv"), "# comment\neng\tarm\tARM\neng\tarm\tHAND\n");
  const auto lex = read_concept_lexicon(dir.file("lex.tsv"));
  EXPECT_EQ(lex.at({"eng", "arm"}), (std::set<std::string>{"ARM", "HAND"}));
  write_file(dir.file("bad.tsv"), "eng\tarm\n");
  EXPECT_THROW(read_concept_lexicon(dir.file("bad.tsv")), ParseError);
}
