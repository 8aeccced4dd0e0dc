#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "specnet/errors.hpp"
#include "specnet/experiment.hpp"

namespace {

using Command = std::function<void(const specnet::ExperimentConfig&)>;

struct Subcommand {
  const char* name;
  const char* help;
  Command run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral embeddings by orthogonalization-free mini-batch optimization"};
  app.require_subcommand(1);

  const Subcommand table[] = {
      {"gen-data", "Generate a dataset and write points.csv", specnet::cmd_gen_data},
      {"build-graph", "Build the affinity graph and write graph.coo", specnet::cmd_build_graph},
      {"solve-la", "Run the mini-batch eigensolver", specnet::cmd_solve_la},
      {"train-nn", "Train a spectral network", specnet::cmd_train_nn},
      {"eval", "Evaluate a trained network checkpoint", specnet::cmd_eval},
  };

  std::string config_file;
  std::map<std::string, std::string> overrides;
  Command chosen;
  for (const Subcommand& sc : table) {
    CLI::App* sub = app.add_subcommand(sc.name, sc.help);
    sub->add_option("--config", config_file, "key = value configuration file");
    for (const std::string& key : specnet::ExperimentConfig::keys()) {
      sub->add_option_function<std::string>(
          "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
          "override '" + key + "'");
    }
    sub->callback([&chosen, run = sc.run] { chosen = run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return specnet::exit_code(specnet::ErrorCategory::kConfig);
  }

  try {
    specnet::ExperimentConfig cfg;
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    chosen(cfg);
  } catch (const specnet::Error& e) {
    std::cerr << "error: " << specnet::to_string(e.category()) << ": " << e.what() << '\n';
    return specnet::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
