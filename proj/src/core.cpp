#include "tonelex/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tonelex {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::missing_track: return "MissingTrack";
    case Errc::duplicate_token: return "DuplicateToken";
    case Errc::embedding_dim_mismatch: return "EmbeddingDimMismatch";
    case Errc::non_positive_f0: return "NonPositiveF0";
    case Errc::parse_error: return "ParseError";
    case Errc::unknown_tone_pattern: return "UnknownTonePattern";
    case Errc::non_monotone_time: return "NonMonotoneTime";
    case Errc::too_short: return "TooShort";
    case Errc::empty_result: return "EmptyResult";
    case Errc::out_of_domain: return "OutOfDomain";
    case Errc::singular_system: return "SingularSystem";
    case Errc::degenerate_fit: return "DegenerateFit";
    case Errc::invalid_rho: return "InvalidRho";
    case Errc::empty_data: return "EmptyData";
    case Errc::too_few_samples: return "TooFewSamples";
    case Errc::empty_pattern: return "EmptyPattern";
    case Errc::unseen_level: return "UnseenLevel";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::zero_variance: return "ZeroVariance";
    case Errc::word_too_small: return "WordTooSmall";
    case Errc::config_error: return "ConfigError";
    case Errc::missing_file: return "MissingFile";
    case Errc::validation_failed: return "ValidationFailed";
  }
  return "UnknownError";
}

Gender parse_gender(std::string_view s) {
  if (s == "female" || s == "f") return Gender::female;
  if (s == "male" || s == "m") return Gender::male;
  throw Error(Errc::parse_error, "gender must be 'female' or 'male', got '" +
                                     std::string(s) + "'");
}

const char* to_string(Gender g) {
  return g == Gender::female ? "female" : "male";
}

Tone parse_tone(std::string_view s) {
  if (s == "PAUSE") return Tone::pause;
  if (s.size() == 1 && s[0] >= '0' && s[0] <= '4')
    return static_cast<Tone>(s[0] - '0');
  throw Error(Errc::parse_error,
              "tone must be 0-4 or PAUSE, got '" + std::string(s) + "'");
}

std::string to_string(Tone t) {
  if (t == Tone::pause) return "PAUSE";
  return std::string(1, static_cast<char>('0' + static_cast<int>(t)));
}

std::string TonePattern::label() const {
  return "T" + std::to_string(first) + "-T" + std::to_string(second);
}

TonePattern parse_tone_pattern(std::string_view s) {
  // Expected form: "T<first>-T<second>", first in 1..4, second in 0..4.
  if (s.size() == 5 && s[0] == 'T' && s[2] == '-' && s[3] == 'T') {
    int first = s[1] - '0';
    int second = s[4] - '0';
    if (first >= 1 && first <= 4 && second >= 0 && second <= 4)
      return TonePattern{first, second};
  }
  throw Error(Errc::unknown_tone_pattern,
              "'" + std::string(s) + "' is not one of the 20 tone patterns");
}

const std::vector<TonePattern>& all_tone_patterns() {
  static const std::vector<TonePattern> patterns = [] {
    std::vector<TonePattern> out;
    for (int first = 1; first <= 4; ++first)
      for (int second : {1, 2, 3, 4, 0}) out.push_back({first, second});
    return out;
  }();
  return patterns;
}

std::string TonalContext::label() const {
  return to_string(preceding) + "." + to_string(following);
}

TonalContext parse_tonal_context(std::string_view s) {
  auto dot = s.find('.');
  if (dot == std::string_view::npos)
    throw Error(Errc::parse_error,
                "tonal context must look like '4.4', got '" + std::string(s) + "'");
  return {parse_tone(s.substr(0, dot)), parse_tone(s.substr(dot + 1))};
}

void validate_track(const F0Track& track) {
  if (track.samples.empty())
    throw Error(Errc::too_short, "track " + track.token_id + " has no samples");
  if (!(track.duration_ms > 0.0))
    throw Error(Errc::parse_error,
                "track " + track.token_id + " has non-positive duration");
  double prev = -1.0;
  for (const F0Sample& s : track.samples) {
    if (!(s.f0_hz > 0.0))
      throw Error(Errc::non_positive_f0,
                  "track " + track.token_id + " at t=" + std::to_string(s.t_ms) +
                      " ms has f0=" + std::to_string(s.f0_hz));
    if (!(s.t_ms > prev))
      throw Error(Errc::non_monotone_time,
                  "track " + track.token_id + " at t=" + std::to_string(s.t_ms) + " ms");
    if (s.t_ms < 0.0 || s.t_ms > track.duration_ms)
      throw Error(Errc::parse_error,
                  "track " + track.token_id + " sample at t=" + std::to_string(s.t_ms) +
                      " ms lies outside [0, duration=" +
                      std::to_string(track.duration_ms) + "]");
    prev = s.t_ms;
  }
}

double numeric_field(const TokenRecord& token, std::string_view name) {
  if (name == "speech_rate") return token.speech_rate;
  if (name == "norm_utt_pos") return token.norm_utt_pos;
  if (name == "bg_prob_prev") return token.bg_prob_prev;
  if (name == "bg_prob_fol") return token.bg_prob_fol;
  auto it = token.extra_numeric.find(std::string(name));
  if (it != token.extra_numeric.end()) return it->second;
  throw Error(Errc::config_error,
              "unknown numeric field '" + std::string(name) + "'");
}

std::string factor_field(const TokenRecord& token, std::string_view name) {
  if (name == "word") return token.word;
  if (name == "tone_pattern") return token.tone_pattern.label();
  if (name == "speaker") return token.speaker;
  if (name == "gender") return to_string(token.gender);
  if (name == "tonal_context") return token.tonal_context().label();
  if (name == "sense_type") {
    if (!token.sense_type)
      throw Error(Errc::empty_data,
                  "token " + token.token_id + " has no sense_type label");
    return *token.sense_type;
  }
  auto it = token.extra_factor.find(std::string(name));
  if (it != token.extra_factor.end()) return it->second;
  throw Error(Errc::config_error,
              "unknown factor field '" + std::string(name) + "'");
}

const F0Track& CorpusDataset::track(const std::string& token_id) const {
  auto it = tracks.find(token_id);
  if (it == tracks.end())
    throw Error(Errc::missing_track, "no track for token " + token_id);
  return it->second;
}

const TokenRecord* CorpusDataset::find_token(const std::string& token_id) const {
  for (const TokenRecord& t : tokens)
    if (t.token_id == token_id) return &t;
  return nullptr;
}

CorpusDataset build_dataset(std::vector<TokenRecord> tokens,
                            std::map<std::string, F0Track> tracks,
                            EmbeddingMap embeddings) {
  std::vector<ValidationIssue> issues;

  std::set<std::string> seen;
  for (const TokenRecord& t : tokens) {
    if (!seen.insert(t.token_id).second)
      issues.push_back({Errc::duplicate_token, t.token_id,
                        "token id " + t.token_id + " appears more than once"});
    if (!tracks.contains(t.token_id))
      issues.push_back({Errc::missing_track, t.token_id,
                        "no f0 track for token " + t.token_id});
  }

  for (const auto& [id, track] : tracks) {
    try {
      validate_track(track);
    } catch (const Error& e) {
      issues.push_back({e.code(), id, e.what()});
    }
  }

  if (!embeddings.empty()) {
    const std::size_t q = embeddings.begin()->second.size();
    for (const auto& [id, vec] : embeddings) {
      if (vec.size() != q)
        issues.push_back({Errc::embedding_dim_mismatch, id,
                          "embedding dim mismatch for " + id + ": expected " +
                              std::to_string(q) + ", got " +
                              std::to_string(vec.size())});
    }
  }

  if (!issues.empty()) throw ValidationError(std::move(issues));

  CorpusDataset out;
  out.tokens = std::move(tokens);
  out.tracks = std::move(tracks);
  out.embeddings = std::move(embeddings);
  return out;
}

F0Track log_f0(const F0Track& track) {
  F0Track out = track;
  for (F0Sample& s : out.samples) {
    if (!(s.f0_hz > 0.0))
      throw Error(Errc::non_positive_f0,
                  "token " + track.token_id + " at t=" + std::to_string(s.t_ms) +
                      " ms: f0=" + std::to_string(s.f0_hz));
    s.f0_hz = std::log(s.f0_hz);
  }
  return out;
}

std::vector<double> normalized_time_grid(int p) {
  if (p < 2) throw Error(Errc::config_error, "grid length must be >= 2");
  std::vector<double> grid(p);
  for (int i = 0; i < p; ++i) grid[i] = static_cast<double>(i) / (p - 1);
  return grid;
}

RowMoments row_moments(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const Eigen::Index p = row.size();
  RowMoments m;
  m.mean = row.mean();
  if (p > 1) {
    double ssd = (row.array() - m.mean).square().sum();
    m.sd = std::sqrt(ssd / static_cast<double>(p - 1));
  }
  return m;
}

void validate_pitch_matrix(const PitchMatrix& m, double tol) {
  if (m.values.rows() != static_cast<Eigen::Index>(m.row_index.size()))
    throw Error(Errc::shape_mismatch, "row index size does not match matrix");
  if (m.values.cols() != static_cast<Eigen::Index>(m.grid.size()))
    throw Error(Errc::shape_mismatch, "grid size does not match matrix");
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    RowMoments mom = row_moments(m.values.row(i));
    if (std::abs(mom.mean) >= tol || std::abs(mom.sd - 1.0) >= tol)
      throw Error(Errc::validation_failed,
                  "row " + m.row_index[i] + " not z-normalized: mean=" +
                      std::to_string(mom.mean) + ", sd=" + std::to_string(mom.sd));
  }
}

}  // namespace tonelex
