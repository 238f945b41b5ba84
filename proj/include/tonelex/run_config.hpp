#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tonelex/ingest.hpp"
#include "tonelex/synth.hpp"

namespace tonelex::cli {

/// Everything a pipeline run needs; populated from a TOML file and
/// --section.key=value command-line overrides (long form only). Every
/// stochastic step takes its seed from here.
struct RunConfig {
  std::filesystem::path input_dir = ".";
  std::filesystem::path out_dir = "out";

  ingest::TrimConfig trim;

  // fit stage
  std::vector<std::string> contexts = {"4.4", "3.4", "4.1", "4.0"};
  int grid_p = 100;
  double ar1_rho = 0.95;
  std::string lexical_factor = "word";  // factor smooth in the context models
  int factor_smooth_k = 4;
  std::string method2_group = "word";
  std::vector<std::string> methods = {"I", "II", "III"};
  std::vector<std::string> withhold;  // AIC comparison: terms to drop one at a time

  // evaluate stage
  double train_frac = 0.8039;
  std::uint64_t split_seed = 1;
  int permutation_reps = 20;
  std::uint64_t permutation_seed = 2;
  std::string nn_candidates = "all";  // or "partition"
  double ridge = 0.0;

  synth::GenConfig gen;
};

/// Parses the supported TOML subset: [section] headers, key = value with
/// strings, integers, floats, booleans and flat arrays, # comments.
RunConfig load_config(const std::filesystem::path& toml_path);

/// Applies one dotted-key override, e.g. ("fit.grid_p", "50") or
/// ("evaluate.nn_candidates", "partition"). Array values are comma lists.
void apply_override(RunConfig& config, const std::string& key,
                    const std::string& value);

}  // namespace tonelex::cli
