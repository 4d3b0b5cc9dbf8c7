#include <iostream>

#include "CLI11.hpp"
#include "typoprobe/pipeline.hpp"

using namespace typoprobe;

namespace {

std::string key_help() {
  std::string out = "Configuration keys (flat `key = value` file):\n";
  for (const auto& k : config_keys())
    out += "  " + k.name + (k.default_value.empty() ? "" : " [" + k.default_value + "]") + "  " + k.help + "\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Typological feature projection and probing pipeline"};
  app.footer(key_help());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> assignments;
  std::optional<std::uint64_t> seed, jobs;
  std::string mode, eq1, output, representations, feature, train_labels;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "configuration file");
  app.add_option("--set", assignments, "override a configuration key (key=value), repeatable");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--jobs", jobs, "worker threads");
  app.add_option("--mode", mode, "cross-validation policy")->check(CLI::IsMember({"sound", "naive"}));
  app.add_option("--eq1", eq1, "alignment score null model")->check(CLI::IsMember({"paper", "full"}));
  app.add_option("-o,--output", output, "output directory");
  app.add_flag("-q,--quiet", quiet, "no progress messages");

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"ingest", "load texts and metadata, compute canonical verses, filter translations"},
      {"subwords", "extract per-doculect subword vocabularies"},
      {"align", "align every source doculect with every target doculect"},
      {"project", "project part of speech, dependencies, concepts and embeddings"},
      {"features", "derive word order and affixation features"},
      {"lexsim", "lexical distance matrix and truncated SVD representations"},
      {"probe", "cross-validated probing of representations for database features"},
      {"run-all", "run every stage in order"},
  };
  for (const auto& [name, help] : stages) {
    auto* sub = app.add_subcommand(name, help);
    if (name == "probe" || name == "run-all") {
      sub->add_option("-r,--representations", representations, "representation file");
      sub->add_option("-f,--feature", feature, "database feature(s), comma-separated");
      sub->add_option("-t,--train-labels", train_labels, "training labels")->check(CLI::IsMember({"database", "projected"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Config config;
    if (!config_path.empty()) config.read(config_path);
    for (const auto& a : assignments) config.set_assignment(a);
    if (seed) config.set("seed", std::to_string(*seed));
    if (jobs) config.set("jobs", std::to_string(*jobs));
    if (!mode.empty()) config.set("mode", mode);
    if (!eq1.empty()) config.set("eq1", eq1);
    if (!output.empty()) config.set("output", output);
    if (!representations.empty()) config.set("representations", representations);
    if (!feature.empty()) config.set("features", feature);
    if (!train_labels.empty()) config.set("train_labels", train_labels);

    Pipeline pipeline(config, quiet ? nullptr : &std::cerr);
    const auto* sub = app.get_subcommands().front();
    const auto name = sub->get_name();
    if (name == "ingest") pipeline.ingest();
    else if (name == "subwords") pipeline.subwords();
    else if (name == "align") pipeline.align();
    else if (name == "project") pipeline.project();
    else if (name == "features") pipeline.features();
    else if (name == "lexsim") pipeline.lexsim();
    else if (name == "probe") pipeline.probe();
    else pipeline.run_all();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
