// tonelex: pitch-contour modeling and meaning-to-pitch mapping pipeline.
//
// Subcommands: synth, ingest, fit, evaluate, all. Configuration comes from a
// TOML file plus --section.key=value overrides (long form only). The only
// environment variable honored is TONELEX_LOG (quiet|info).

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <iostream>

#include "tonelex/pipeline.hpp"

namespace {

using tonelex::cli::RunConfig;

bool log_enabled() {
  const char* level = std::getenv("TONELEX_LOG");
  return !(level && std::string(level) == "quiet");
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[tonelex] " << msg << "\n";
}

void apply_extra_overrides(RunConfig& config, const std::vector<std::string>& extras) {
  for (const std::string& raw : extras) {
    if (raw.rfind("--", 0) != 0)
      throw tonelex::Error(tonelex::Errc::config_error,
                           "unexpected argument '" + raw + "' (use --key=value)");
    const std::size_t eq = raw.find('=');
    if (eq == std::string::npos)
      throw tonelex::Error(tonelex::Errc::config_error,
                           "override '" + raw + "' must use --key=value form");
    tonelex::cli::apply_override(config, raw.substr(2, eq - 2), raw.substr(eq + 1));
  }
}

struct StageClock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

int run(const std::string& command, const RunConfig& config) {
  nlohmann::json stages;
  nlohmann::json timings;
  auto timed = [&](const std::string& stage, auto&& fn) {
    StageClock clock;
    log_line(stage + " ...");
    stages[stage] = fn(config);
    timings[stage + "_ms"] = clock.ms();
    log_line(stage + " done");
  };

  try {
    if (command == "synth") timed("synth", tonelex::cli::run_synth);
    if (command == "ingest" || command == "all")
      timed("ingest", tonelex::cli::run_ingest);
    if (command == "fit" || command == "all") timed("fit", tonelex::cli::run_fit);
    if (command == "evaluate" || command == "all")
      timed("evaluate", tonelex::cli::run_evaluate);
  } catch (const tonelex::ValidationError& e) {
    std::cerr << "validation failed with " << e.issues().size() << " issue(s):\n";
    for (const auto& issue : e.issues())
      std::cerr << "  [" << tonelex::errc_name(issue.code) << "] "
                << issue.token_id << ": " << issue.detail << "\n";
    return 2;
  } catch (const tonelex::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool input_stage = !stages.contains("ingest") &&
                             (command == "ingest" || command == "all");
    return input_stage ? 2 : 1;
  }

  std::filesystem::create_directories(config.out_dir);
  tonelex::cli::write_run_report(config, stages);
  if (!timings.empty()) {
    std::ofstream out(config.out_dir / "timings.json");
    out << timings.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pitch-contour modeling and meaning-to-pitch mapping pipeline"};
  app.require_subcommand(1);
  app.allow_extras();

  std::string config_path;
  std::vector<CLI::App*> subs;
  for (const char* name : {"synth", "ingest", "fit", "evaluate", "all"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->allow_extras();
    sub->add_option("--config", config_path, "TOML configuration file");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config;
    if (!config_path.empty()) config = tonelex::cli::load_config(config_path);
    CLI::App* active = app.get_subcommands().front();
    apply_extra_overrides(config, active->remaining());
    return run(active->get_name(), config);
  } catch (const tonelex::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
