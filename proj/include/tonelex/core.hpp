#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tonelex/errors.hpp"

namespace tonelex {

// ---------------------------------------------------------------------------
// Categorical domain values
// ---------------------------------------------------------------------------

enum class Gender : std::uint8_t { female, male };

Gender parse_gender(std::string_view s);
const char* to_string(Gender g);

/// Syllable tone category for context slots. `pause` marks an adjacent
/// pause instead of a tone; it never occurs inside a word's own pattern.
enum class Tone : std::uint8_t { t0 = 0, t1, t2, t3, t4, pause };

Tone parse_tone(std::string_view s);
std::string to_string(Tone t);

/// Canonical tone pair of a disyllabic word: first syllable carries a full
/// tone (1-4), the second may also be the neutral tone (0). 20 categories.
struct TonePattern {
  int first = 1;   // 1..4
  int second = 0;  // 0..4

  std::string label() const;  // e.g. "T4-T2"
  bool operator==(const TonePattern&) const = default;
  auto operator<=>(const TonePattern&) const = default;
};

TonePattern parse_tone_pattern(std::string_view s);

/// The 20 patterns in canonical order (first tone ascending; second tone
/// 1,2,3,4,0 within each group).
const std::vector<TonePattern>& all_tone_patterns();

/// Pair (preceding tone, following tone); 36 possible levels.
struct TonalContext {
  Tone preceding = Tone::pause;
  Tone following = Tone::pause;

  std::string label() const;  // e.g. "4.4" or "PAUSE.2"
  bool operator==(const TonalContext&) const = default;
  auto operator<=>(const TonalContext&) const = default;
};

TonalContext parse_tonal_context(std::string_view s);

// ---------------------------------------------------------------------------
// Tokens and f0 tracks
// ---------------------------------------------------------------------------

/// One voiced pitch measurement. Unvoiced stretches have no samples at all;
/// an f0 of zero is invalid by construction.
struct F0Sample {
  double t_ms = 0.0;   // time since token onset, >= 0
  double f0_hz = 0.0;  // > 0
};

/// Time-stamped f0 samples of one token. Timestamps are strictly
/// increasing; gaps between consecutive samples are ordinary and represent
/// voiceless spans.
struct F0Track {
  std::string token_id;
  std::vector<F0Sample> samples;
  double duration_ms = 0.0;

  double normalized_time(std::size_t i) const {
    return samples[i].t_ms / duration_ms;
  }
};

/// Throws Error if the track violates any invariant (empty, non-positive
/// f0, non-monotone time, sample past duration).
void validate_track(const F0Track& track);

/// Token metadata. Extension columns parsed from input files that are not
/// part of the fixed schema land in `extra_numeric` / `extra_factor` and can
/// be referenced by model terms like any built-in field.
struct TokenRecord {
  std::string token_id;
  std::string word;
  TonePattern tone_pattern;
  std::string speaker;
  Gender gender = Gender::female;
  Tone preceding_tone = Tone::pause;
  Tone following_tone = Tone::pause;
  double speech_rate = 0.0;   // syllables/second, > 0
  double norm_utt_pos = 0.0;  // [0,1]; 1 for single-word utterances
  double bg_prob_prev = 0.0;  // [0,1]
  double bg_prob_fol = 0.0;   // [0,1]
  std::optional<std::string> sense_type;
  std::map<std::string, double> extra_numeric;
  std::map<std::string, std::string> extra_factor;

  TonalContext tonal_context() const { return {preceding_tone, following_tone}; }
};

/// Numeric covariate lookup by field name ("speech_rate", "norm_utt_pos",
/// "bg_prob_prev", "bg_prob_fol", or an extension column).
double numeric_field(const TokenRecord& token, std::string_view name);

/// Categorical field lookup by name ("word", "tone_pattern", "speaker",
/// "gender", "sense_type", "tonal_context", or an extension column).
std::string factor_field(const TokenRecord& token, std::string_view name);

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

using EmbeddingMap = std::map<std::string, std::vector<double>>;

/// Cross-referenced corpus: token metadata, f0 tracks keyed by token id and
/// optional per-token embeddings of one shared dimension. Immutable by
/// convention after construction; share freely across threads for reading.
struct CorpusDataset {
  std::vector<TokenRecord> tokens;
  std::map<std::string, F0Track> tracks;
  EmbeddingMap embeddings;  // empty when not supplied

  std::size_t size() const { return tokens.size(); }
  bool has_embeddings() const { return !embeddings.empty(); }
  /// Dimension q of the embeddings; 0 when none are present.
  std::size_t embedding_dim() const {
    return embeddings.empty() ? 0 : embeddings.begin()->second.size();
  }
  const F0Track& track(const std::string& token_id) const;
  const TokenRecord* find_token(const std::string& token_id) const;
};

/// Cross-references tokens, tracks and optional embeddings into a dataset.
/// Collects all violations (missing or duplicate tracks/tokens, embedding
/// dimension mismatches, invalid tracks) and throws ValidationError listing
/// every one of them; otherwise returns the assembled dataset. Token order
/// is preserved from the input.
CorpusDataset build_dataset(std::vector<TokenRecord> tokens,
                            std::map<std::string, F0Track> tracks,
                            EmbeddingMap embeddings = {});

/// Replaces every f0 value by its natural logarithm. Timestamps are kept.
/// Throws Error(non_positive_f0) naming the offending sample.
F0Track log_f0(const F0Track& track);

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// n x p matrix of fixed-length pitch vectors, one row per token, evaluated
/// on `grid` (p equally spaced normalized-time points in [0,1]).
struct PitchMatrix {
  Eigen::MatrixXd values;             // n x p
  std::vector<std::string> row_index;  // token id per row
  std::vector<double> grid;            // p points

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// n x q matrix of per-token semantic vectors, row-aligned with a
/// PitchMatrix built from the same token list.
struct SemanticMatrix {
  Eigen::MatrixXd values;  // n x q
  std::vector<std::string> row_index;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// p equally spaced points in [0,1], endpoints included.
std::vector<double> normalized_time_grid(int p);

/// Checks the z-normalization invariant: every row has |mean| < tol and
/// |sd - 1| < tol (sample sd, n-1 denominator). Throws Error on violation.
void validate_pitch_matrix(const PitchMatrix& m, double tol = 1e-10);

/// Mean and sample standard deviation (n-1 denominator) of a row vector.
struct RowMoments {
  double mean = 0.0;
  double sd = 0.0;
};
RowMoments row_moments(const Eigen::Ref<const Eigen::RowVectorXd>& row);

}  // namespace tonelex
