#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tonelex/contour_models.hpp"
#include "tonelex/core.hpp"
#include "tonelex/dlm_map.hpp"

namespace tonelex::synth {

/// Generator knobs. The defaults are the bundled corpus: 20 patterns x 5
/// words, moderate noise, planted prototype words, embeddings that are
/// linearly decodable into contours.
struct GenConfig {
  int n_words = 100;              // >= number of patterns in use
  int tokens_per_word_min = 6;
  int tokens_per_word_max = 12;
  int n_speakers = 10;            // split female/male
  int q_embed = 32;               // >= 26 (20 pattern + 6 deviation directions)
  double word_deviation_sd = 0.12;
  double embed_cluster_sd = 0.05;
  double noise_sd = 0.03;         // sample-level log-f0 noise
  double ar1_rho = 0.6;           // autocorrelation of the sample noise
  double missing_span_prob = 0.25;
  double context_amplitude = 0.03;  // tonal-context contour modulation
  double declination = 0.05;        // gender-specific downtrend
  double sense_deviation_sd = 0.0;  // > 0 gives every 5th word two senses
  // First word of each pattern is placed exactly at the centroid of the
  // pattern's words. Exact placement needs >= 3 words per pattern; with 2
  // the planted word necessarily duplicates the other one.
  bool plant_prototypes = true;
  int grid_p = 100;
  std::uint64_t seed = 12345;

  /// Variant with every nuisance source off: exact recovery is possible.
  GenConfig noiseless() const {
    GenConfig c = *this;
    c.noise_sd = 0.0;
    c.missing_span_prob = 0.0;
    c.context_amplitude = 0.0;
    c.declination = 0.0;
    c.embed_cluster_sd = 0.0;
    return c;
  }
};

struct GroundTruth {
  std::vector<double> grid;
  std::map<std::string, Eigen::VectorXd> word_contour;      // template + deviation
  std::map<std::string, Eigen::VectorXd> word_embedding;    // true centroids
  std::map<std::string, Eigen::VectorXd> pattern_template;  // label -> p-vector
  std::map<std::string, std::string> pattern_of_word;
  std::map<std::string, double> speaker_offset;
  std::map<std::string, std::string> prototype_word;  // pattern -> planted word
};

/// Deterministic under the seed: per-word and per-token generators are
/// derived by key, so output is independent of evaluation order.
std::pair<CorpusDataset, GroundTruth> generate(const GenConfig& config);

/// Writes tokens.csv, f0.csv, durations.csv, embeddings.csv and
/// ground_truth.json in the ingest file schemas.
void write_corpus(const CorpusDataset& dataset, const GroundTruth& truth,
                  const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Recovery scoring against the ground truth
// ---------------------------------------------------------------------------

struct PipelineOutputs {
  const contour_models::ContourSet* method1 = nullptr;
  const contour_models::ContourSet* method2 = nullptr;
  const contour_models::ContourSet* method3 = nullptr;
  const std::map<std::string, Eigen::VectorXd>* word_centroids = nullptr;
  const std::vector<dlm_map::EvalReport>* eval_reports = nullptr;
};

struct OracleReport {
  std::vector<std::string> missing_stages;
  // z-normalized RMSE of recovered rows against the true word contours
  std::optional<double> method1_contour_rmse;
  std::optional<double> method2_contour_rmse;
  std::optional<double> method3_contour_rmse;
  std::optional<double> centroid_displacement;  // mean |empirical - true|
  std::map<std::string, double> test_accuracy;  // per method name
  double chance_nn_accuracy = 0.0;  // counting model: sum of squared word shares
};

OracleReport oracle_check(const CorpusDataset& dataset, const GroundTruth& truth,
                          const PipelineOutputs& outputs);

}  // namespace tonelex::synth
