#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lidkit/eval.hpp"
#include "lidkit/features.hpp"
#include "lidkit/model.hpp"

namespace lidkit::cli {

inline constexpr const char* kToolkitVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kIoError = 3,
};

/// Everything a pipeline invocation can be configured with. Populated from
/// an optional flat `key=value` file, then overridden by flags.
struct PipelineConfig {
  FeatureConfig features;
  TrainConfig training;
  std::string input = "-";
  std::string output;
  std::string model;
  std::string hierarchy;
  std::string label_map;
  std::string base_set;
  std::string out_dir;
  double theta = 0.0;
  std::string scenario = "unknown";
  SkewFactors skew;
  std::size_t k = 1;
};

/// Parses a flat `key=value` config (blank lines and '#' comments allowed)
/// into `config`. Keys are the long flag names without dashes. Throws
/// ValidationError on unknown keys or malformed values.
void apply_config_text(const std::string& text, PipelineConfig& config);

/// `label:factor` pairs separated by commas, e.g. "bod:100,eng:10".
SkewFactors parse_skew(const std::string& spec);

/// Rewrites single-dash long flags (`-minCount`) into `--minCount`.
std::vector<std::string> normalize_flags(std::vector<std::string> args);

/// Runs the command line `args` (args[0] is the program name) with the
/// given standard streams; returns the process exit code.
int run(std::vector<std::string> args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace lidkit::cli
