#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "specnet/data.hpp"
#include "specnet/pencil.hpp"
#include "specnet/schemes.hpp"
#include "specnet/solver.hpp"

namespace specnet {

/// Flat key=value experiment configuration with a fixed key list.
/// Unknown keys are rejected; values are validated by validate().
class ExperimentConfig {
 public:
  ExperimentConfig();

  /// Canonical key order (also the order of the echo file).
  static const std::vector<std::string>& keys();

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  /// Reads "key = value" lines; '#' starts a comment.
  void load_file(const std::filesystem::path& path);
  void write_echo(const std::filesystem::path& path) const;

  /// Parses every key; throws ConfigError naming the first bad one.
  void validate() const;

  std::string str(const std::string& key) const { return get(key); }
  long long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<long long> integer_list(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

struct Dataset {
  PointCloud points;
  std::string name;
};

/// Training (test = false) or test split described by the config.
Dataset load_dataset(const ExperimentConfig& cfg, bool test);

/// Affinity for a point cloud per the graph keys (graph=file reads graph_file).
SparseSym build_graph(const ExperimentConfig& cfg, const Dataset& data, bool test);

/// Bandwidth and threshold after resolving "auto".
double resolved_sigma(const ExperimentConfig& cfg, Index n);
double resolved_threshold(const ExperimentConfig& cfg);

/// Subcommands. Each writes into out_dir and echoes the effective config.
void cmd_gen_data(const ExperimentConfig& cfg);
void cmd_build_graph(const ExperimentConfig& cfg);
void cmd_solve_la(const ExperimentConfig& cfg);
void cmd_train_nn(const ExperimentConfig& cfg);
void cmd_eval(const ExperimentConfig& cfg);

/// Process exit code for an error category.
int exit_code(ErrorCategory category) noexcept;

}  // namespace specnet
