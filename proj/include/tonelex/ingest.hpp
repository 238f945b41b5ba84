#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tonelex/core.hpp"

namespace tonelex::ingest {

// ---------------------------------------------------------------------------
// Trimming configuration and audit report
// ---------------------------------------------------------------------------

struct TrimConfig {
  int min_tokens_per_word = 6;
  int max_tokens_per_word = 200;
  double outlier_decile = 0.9;
  bool require_both_genders = true;
  std::uint64_t rng_seed = 0;
  /// Consecutive-difference SDs are computed on log f0 (the modeling scale);
  /// set false to use raw Hz instead.
  bool outlier_on_log_f0 = true;
};

struct RemovalRecord {
  std::string token_id;
  std::string reason;  // "Outlier", "TooShort", "MinTokensPerWord", "Cap", "GenderRule"
};

/// Per-rule bookkeeping; removed counts plus retained always reconcile with
/// the input token count. Rules apply in the fixed order
/// outliers -> min word count -> per-word cap -> gender.
struct TrimReport {
  TrimConfig config;
  std::size_t input_tokens = 0;
  std::size_t input_words = 0;
  std::size_t removed_too_short = 0;
  std::size_t removed_outlier = 0;
  std::size_t removed_min_word_count = 0;
  std::size_t removed_cap = 0;
  std::size_t removed_gender_rule = 0;
  std::size_t retained_tokens = 0;
  std::size_t retained_words = 0;
  double outlier_sd_threshold = 0.0;
  std::map<std::string, std::size_t> retained_by_context;  // tokens per tonal context
  std::map<std::string, std::size_t> words_removed_by_rule;
  std::vector<RemovalRecord> removals;  // every removed token, with its rule

  std::size_t removed_total() const {
    return removed_too_short + removed_outlier + removed_min_word_count +
           removed_cap + removed_gender_rule;
  }
};

// ---------------------------------------------------------------------------
// Readers (see README for the file schemas)
// ---------------------------------------------------------------------------

/// tokens.csv. Columns beyond the fixed schema become extension columns
/// (numeric if every value parses as a number, categorical otherwise).
std::vector<TokenRecord> read_tokens(const std::filesystem::path& path);

/// f0.csv (token_id,t_ms,f0_hz; long format, rows of one token contiguous
/// and time-ordered) plus durations.csv (token_id,duration_ms).
std::map<std::string, F0Track> read_f0(const std::filesystem::path& f0_path,
                                       const std::filesystem::path& durations_path);

/// embeddings.csv: token_id followed by q numeric columns; q is data-driven.
EmbeddingMap read_embeddings(const std::filesystem::path& path);

/// Writes tokens.csv, f0.csv, durations.csv and (when present)
/// embeddings.csv into `dir` in the exact schemas the readers accept.
/// Numeric values use 17 significant digits so a round trip is bit-exact.
void write_dataset(const CorpusDataset& dataset, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Trimming pipeline
// ---------------------------------------------------------------------------

struct OutlierResult {
  std::vector<std::string> kept;          // token ids, input order
  std::vector<RemovalRecord> removed;     // Outlier / TooShort
  std::map<std::string, double> diff_sd;  // per-token SD of consecutive diffs
  double threshold = 0.0;                 // decile of the SD distribution
};

/// Removes tracks whose consecutive-difference SD exceeds the given decile
/// of the SD distribution (strict inequality, linear-interpolation
/// quantile). Tracks with fewer than 2 samples are removed as TooShort. The
/// SD uses the n-1 denominator; a track with a single difference gets SD 0.
OutlierResult outlier_filter(const std::map<std::string, F0Track>& tracks,
                             double decile, bool on_log_f0 = true);

/// Applies, in order: outlier filter, minimum tokens per word, per-word cap
/// (seeded uniform sample), and the both-genders rule. Returns the trimmed
/// dataset plus a full audit report. Throws Error(empty_result) when nothing
/// survives.
std::pair<CorpusDataset, TrimReport> trim(const CorpusDataset& dataset,
                                          const TrimConfig& config);

/// Linear-interpolation quantile (R type 7) of an unsorted sample.
double quantile_linear(std::vector<double> values, double q);

}  // namespace tonelex::ingest
