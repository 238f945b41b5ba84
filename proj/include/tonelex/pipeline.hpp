#pragma once

#include <json.hpp>

#include "tonelex/run_config.hpp"

namespace tonelex::cli {

/// Each stage reads/writes files under the configured directories, returns
/// its run-report section and throws tonelex::Error on failure. Stages
/// communicate through files only, so any stage can be rerun in isolation.

/// Generates the synthetic corpus into input_dir (plus ground_truth.json).
nlohmann::json run_synth(const RunConfig& config);

/// input_dir/{tokens,f0,durations[,embeddings]}.csv -> out_dir/trimmed/* and
/// out_dir/trim_report.json.
nlohmann::json run_ingest(const RunConfig& config);

/// out_dir/trimmed/* -> context models, pitch-vector files
/// (contours_<method>.csv), gold_contours.csv, model_summary.json and, when
/// a withhold list is configured, aic_comparison.json.
nlohmann::json run_fit(const RunConfig& config);

/// Contours + embeddings -> split, mappings, nearest-neighbor evaluation,
/// baselines, prototypes, SVG overlays; writes eval_report.json,
/// prototypes.json/csv and the plot files.
nlohmann::json run_evaluate(const RunConfig& config);

/// Writes out_dir/run_report.json from the executed stage sections.
void write_run_report(const RunConfig& config, const nlohmann::json& stages);

}  // namespace tonelex::cli
