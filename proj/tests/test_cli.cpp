#include <gtest/gtest.h>

#include <cstdlib>

#include "json.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"
#include "typoprobe/corpus.hpp"
#include "typoprobe/project.hpp"
#include "typoprobe/representation.hpp"

using namespace typoprobe;
using namespace typoprobe::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const auto cmd = std::string(TYPOPROBE_CLI_PATH) + " " + args + " -q >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Metadata, database and a 2-dimensional representation file for 60
// families, plus a sidecar describing the representation.
struct ProbeFixture {
  TempDir dir{"cli-probe"};

  explicit ProbeFixture(std::size_t families = 60) {
    auto g = rng::stream(5, 0);
    std::vector<DoculectInfo> docs;
    RepresentationSet reps;
    reps.id = "toy";
    std::string db = "iso639_3\tfeat_a\n";
    for (std::size_t f = 0; f < families; ++f) {
      const auto iso = "l" + std::to_string(f);
      docs.push_back({iso + "-txt", iso, "fam" + std::to_string(f), "area" + std::to_string(f % 6), {}, Role::target, false});
      const int label = static_cast<int>(f % 2);
      db += iso + "\t" + std::to_string(label) + "\n";
      reps.add(iso + "-txt", {label ? 1.0 : -1.0, rng::normal(g)});
    }
    write_metadata(dir.file("metadata.tsv"), docs);
    write_file(dir.file("database.tsv"), db);
    write_representations(dir.file("toy.tsv"), reps);
    write_file(dir.file("toy.tsv.json"), R"({"model": "toy", "epochs": 3})");
  }

  std::string args(const std::string& out) const {
    return "--set metadata=" + dir.file("metadata.tsv") + " --set database=" + dir.file("database.tsv") +
           " --set n_samples=21 -o " + dir.file(out) + " probe -r " + dir.file("toy.tsv");
  }

  json result(const std::string& out, const std::string& mode = "sound") const {
    return json::parse(read_file(dir.file(out + "/probe/toy." + mode + ".database/feat_a.json")));
  }
};

// Grammar corpus written as pipeline inputs, with a config file.
struct PipelineFixture {
  TempDir dir{"cli-pipeline"};

  PipelineFixture() {
    const auto gc = make_grammar_corpus(3, 4, 200);
    fs::create_directories(dir.path() / "texts");
    fs::create_directories(dir.path() / "annotations");
    std::vector<DoculectInfo> docs = {gc.source.doculect.info};
    write_verse_text(dir.file("texts/" + gc.source.doculect.id() + ".txt"), gc.source.doculect.verses);
    write_annotation(dir.file("annotations/" + gc.source.doculect.id() + ".tsv"), gc.annotation);
    std::string db = "iso639_3\tfeat_obj\n";
    for (const auto& t : gc.targets) {
      docs.push_back(t.doculect.info);
      write_verse_text(dir.file("texts/" + t.doculect.id() + ".txt"), t.doculect.verses);
      db += t.doculect.info.iso639_3 + "\t" + (t.grammar.at("obj_verb") ? "1" : "0") + "\n";
    }
    write_metadata(dir.file("metadata.tsv"), docs);
    write_file(dir.file("database.tsv"), db);
    write_file(dir.file("feature_map.tsv"), "feat_obj\tobj_verb\n");
    write_file(dir.file("config.txt"),
               "# pipeline inputs\n"
               "texts = texts\nmetadata = metadata.tsv\nannotations = annotations\n"
               "database = database.tsv\nfeature_map = feature_map.tsv\noutput = out\n"
               "n_samples = 11\nmin_concepts = 10\nsvd_dim = 3\n");
  }

  std::string config() const { return "-c " + dir.file("config.txt"); }
};

}  // namespace

TEST(Cli, SameSeedGivesByteIdenticalJson) {
  ProbeFixture fx;
  ASSERT_EQ(run_cli(fx.args("a")), 0);
  ASSERT_EQ(run_cli(fx.args("b") + " --seed 1"), 0);
  EXPECT_EQ(read_file(fx.dir.file("a/probe/toy.sound.database/feat_a.json")),
            read_file(fx.dir.file("b/probe/toy.sound.database/feat_a.json")));
  const auto j = fx.result("a");
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["samples"].size(), 21u);
  EXPECT_EQ(j["representation_metadata"]["model"], "toy");
  EXPECT_DOUBLE_EQ(j["aggregate"]["family"]["f1"].get<double>(), 1.0);
}

TEST(Cli, DifferentSeedChangesFolds) {
  ProbeFixture fx;
  ASSERT_EQ(run_cli(fx.args("a")), 0);
  ASSERT_EQ(run_cli(fx.args("b") + " --seed 2"), 0);
  EXPECT_NE(fx.result("a")["samples"], fx.result("b")["samples"]);
}

TEST(Cli, NaiveModeIsRecorded) {
  ProbeFixture fx;
  ASSERT_EQ(run_cli("--mode naive " + fx.args("a")), 0);
  const auto j = fx.result("a", "naive");
  EXPECT_EQ(j["config"]["policy"]["mode"], "naive");
  EXPECT_FALSE(j["config"]["policy"]["use_family"].get<bool>());
}

TEST(Cli, TooFewFamiliesIsSkippedNotAnError) {
  ProbeFixture fx(20);
  ASSERT_EQ(run_cli(fx.args("a")), 0);
  const auto j = fx.result("a");
  EXPECT_EQ(j["status"], "skipped");
  EXPECT_FALSE(j.contains("aggregate"));
  const auto plot = read_file(fx.dir.file("a/probe/toy.sound.database/plot.tsv"));
  EXPECT_NE(plot.find("\tskipped\tNA\tNA\tNA"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  ProbeFixture fx;
  EXPECT_EQ(run_cli("--set metadata=/nonexistent/meta.tsv --set database=" + fx.dir.file("database.tsv") + " -o " +
                    fx.dir.file("a") + " probe -r " + fx.dir.file("toy.tsv")),
            2);
  EXPECT_EQ(run_cli("--set no_such_key=1 probe"), 2);
  EXPECT_EQ(run_cli("--mode bogus probe"), 2);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("--set C=0 " + fx.args("a")), 2);
  EXPECT_EQ(run_cli(fx.args("a") + " -f missing_feature"), 2);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, MalformedInputExitsTwo) {
  ProbeFixture fx;
  write_file(fx.dir.file("database.tsv"), "iso639_3\tfeat_a\nl0\t7\n");
  EXPECT_EQ(run_cli(fx.args("a")), 2);
}

TEST(Cli, UnchangedInputsAreReused) {
  PipelineFixture fx;
  ASSERT_EQ(run_cli(fx.config() + " ingest"), 0);
  const auto manifest = fx.dir.file("out/manifest.json");
  const auto first = read_file(manifest);
  const auto canonical = read_file(fx.dir.file("out/ingest/canonical.txt"));
  ASSERT_EQ(run_cli(fx.config() + " ingest"), 0);
  EXPECT_EQ(read_file(manifest), first);
  EXPECT_EQ(read_file(fx.dir.file("out/ingest/canonical.txt")), canonical);
  ASSERT_EQ(run_cli(fx.config() + " --set canonical_threshold=0.9 ingest"), 0);
  EXPECT_NE(read_file(manifest), first);
}

TEST(Cli, LaterStageBeforeEarlierExitsTwo) {
  PipelineFixture fx;
  EXPECT_EQ(run_cli(fx.config() + " align"), 2);
}

TEST(Cli, RunAllEndToEnd) {
  PipelineFixture fx;
  ASSERT_EQ(run_cli(fx.config() + " run-all"), 0);
  const auto out = fx.dir.path() / "out";
  EXPECT_TRUE(fs::exists(out / "ingest" / "canonical.txt"));
  EXPECT_TRUE(fs::exists(out / "align" / "src-syn__tgt0-syn.tsv"));
  EXPECT_TRUE(fs::exists(out / "project" / "tgt0-syn.tsv"));
  EXPECT_TRUE(fs::exists(out / "lexsim" / "lexical.tsv"));
  const auto matrix = read_file((out / "features" / "matrix.tsv").string());
  EXPECT_NE(matrix.find("obj_verb"), std::string::npos);
  const auto j = json::parse(read_file((out / "probe" / "lexical.sound.database" / "feat_obj.json").string()));
  EXPECT_EQ(j["status"], "skipped");
  EXPECT_DOUBLE_EQ(j["projection_reference_f1"].get<double>(), 1.0);
  const auto manifest = read_file((out / "manifest.json").string());
  ASSERT_EQ(run_cli(fx.config() + " run-all"), 0);
  EXPECT_EQ(read_file((out / "manifest.json").string()), manifest);
}
