#include "tonelex/synth.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "tonelex/centroid.hpp"
#include "tonelex/ingest.hpp"
#include "tonelex/rng.hpp"

#include <json.hpp>

namespace tonelex::synth {

namespace {

// Tone targets in log-f0 units: (onset, mid, offset) over the syllable.
struct ToneShape {
  double a, b, c;
};

ToneShape tone_shape(int tone) {
  switch (tone) {
    case 1: return {0.25, 0.27, 0.28};    // high level
    case 2: return {-0.08, -0.12, 0.22};  // slight dip then rise
    case 3: return {-0.12, -0.25, -0.10}; // low dip
    case 4: return {0.28, 0.10, -0.25};   // fall
    default: return {-0.05, -0.10, -0.14};  // neutral: mid-low drift
  }
}

// Uniform Catmull-Rom through 5 nodes at t = 0, .25, .5, .75, 1; C1-smooth
// so spline recovery of the templates is well-posed.
double catmull5(const double y[5], double t) {
  t = std::clamp(t, 0.0, 1.0);
  int seg = std::min(static_cast<int>(t * 4.0), 3);
  double u = t * 4.0 - seg;
  double m0 = seg == 0 ? y[1] - y[0] : 0.5 * (y[seg + 1] - y[seg - 1]);
  double m1 = seg == 3 ? y[4] - y[3] : 0.5 * (y[seg + 2] - y[seg]);
  double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  double h10 = u * (1 - u) * (1 - u);
  double h01 = u * u * (3 - 2 * u);
  double h11 = u * u * (u - 1);
  return h00 * y[seg] + h10 * m0 + h01 * y[seg + 1] + h11 * m1;
}

double pattern_template_at(const TonePattern& p, double t) {
  ToneShape s1 = tone_shape(p.first);
  ToneShape s2 = tone_shape(p.second);
  double nodes[5] = {s1.a, s1.b, 0.5 * (s1.c + s2.a), s2.b, s2.c};
  return catmull5(nodes, t);
}

// Smooth deviation basis; coordinates double as embedding directions.
constexpr int kDevDims = 6;
double dev_basis(int j, double t) {
  using std::numbers::pi;
  switch (j) {
    case 0: return 1.0;
    case 1: return t - 0.5;
    case 2: return 0.5 * std::sin(2 * pi * t);
    case 3: return 0.5 * std::cos(2 * pi * t);
    case 4: return std::sin(4 * pi * t) / 3.0;
    default: return std::cos(4 * pi * t) / 3.0;
  }
}

// Context-specific modulation shapes for the four standard contexts.
double context_shape(const std::string& label, double t) {
  using std::numbers::pi;
  if (label == "4.4") return std::sin(2 * pi * t);
  if (label == "3.4") return -std::cos(pi * t);
  if (label == "4.1") return std::cos(pi * t);
  return -t;  // "4.0": extra final lowering
}

const std::vector<std::string> kContexts = {"4.4", "3.4", "4.1", "4.0"};

std::string word_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "w%03d", i);
  return buf;
}

double beta_draw(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  double x = ga(rng), y = gb(rng);
  return x / (x + y);
}

}  // namespace

std::pair<CorpusDataset, GroundTruth> generate(const GenConfig& cfg) {
  const auto& patterns = all_tone_patterns();
  const int n_patterns = static_cast<int>(patterns.size());
  if (cfg.n_words < n_patterns)
    throw Error(Errc::config_error, "need at least one word per tone pattern");
  if (cfg.q_embed < n_patterns + kDevDims)
    throw Error(Errc::config_error,
                "q_embed must be >= " + std::to_string(n_patterns + kDevDims));
  if (cfg.tokens_per_word_min < 2 || cfg.tokens_per_word_max < cfg.tokens_per_word_min)
    throw Error(Errc::config_error, "bad tokens_per_word range");
  if (cfg.n_speakers < 2)
    throw Error(Errc::config_error, "need at least 2 speakers");
  if (cfg.word_deviation_sd < 0 || cfg.embed_cluster_sd < 0 || cfg.noise_sd < 0 ||
      cfg.missing_span_prob < 0 || cfg.missing_span_prob > 1)
    throw Error(Errc::config_error, "negative spread or bad probability");

  GroundTruth truth;
  truth.grid = normalized_time_grid(cfg.grid_p);

  // speakers: first half female
  const int n_female = (cfg.n_speakers + 1) / 2;
  std::vector<std::pair<std::string, Gender>> speakers;
  for (int i = 0; i < cfg.n_speakers; ++i) {
    const bool female = i < n_female;
    std::string name = (female ? "f" : "m") + std::to_string(female ? i : i - n_female);
    speakers.push_back({name, female ? Gender::female : Gender::male});
    std::mt19937_64 rng = seeded_rng(cfg.seed, "speaker/" + name);
    truth.speaker_offset[name] =
        std::normal_distribution<double>(0.0, 0.04)(rng);
  }

  // orthonormal embedding directions: pattern block then deviation block
  Eigen::MatrixXd directions;
  {
    std::mt19937_64 rng = seeded_rng(cfg.seed, "embedding_directions");
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd raw(cfg.q_embed, n_patterns + kDevDims);
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
      for (Eigen::Index j = 0; j < raw.cols(); ++j) raw(i, j) = g(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    directions = Eigen::MatrixXd(qr.householderQ()).leftCols(n_patterns + kDevDims);
  }
  const auto pattern_dir = [&](int pi) { return directions.col(pi); };
  const auto dev_dir = [&](int j) { return directions.col(n_patterns + j); };

  // per-pattern templates on the grid
  for (const TonePattern& p : patterns) {
    Eigen::VectorXd tmpl(cfg.grid_p);
    for (int i = 0; i < cfg.grid_p; ++i)
      tmpl(i) = pattern_template_at(p, truth.grid[i]);
    truth.pattern_template[p.label()] = tmpl;
  }

  // word deviation coordinates; the first word of each pattern is planted at
  // the mean of the others so the pattern centroid recovers it exactly
  std::map<std::string, Eigen::VectorXd> dev_coords;
  std::vector<std::vector<int>> words_of_pattern(n_patterns);
  for (int w = 0; w < cfg.n_words; ++w)
    words_of_pattern[w % n_patterns].push_back(w);

  for (int pi = 0; pi < n_patterns; ++pi) {
    const auto& members = words_of_pattern[pi];
    Eigen::VectorXd mean_rest = Eigen::VectorXd::Zero(kDevDims);
    for (std::size_t m = 1; m < members.size(); ++m) {
      std::mt19937_64 rng = seeded_rng(cfg.seed, "dev/" + word_name(members[m]));
      std::normal_distribution<double> g(0.0, cfg.word_deviation_sd);
      Eigen::VectorXd a(kDevDims);
      for (int j = 0; j < kDevDims; ++j) a(j) = g(rng);
      dev_coords[word_name(members[m])] = a;
      mean_rest += a;
    }
    if (members.size() > 1) mean_rest /= static_cast<double>(members.size() - 1);
    if (cfg.plant_prototypes || members.size() == 1) {
      dev_coords[word_name(members[0])] = mean_rest;
    } else {
      std::mt19937_64 rng = seeded_rng(cfg.seed, "dev/" + word_name(members[0]));
      std::normal_distribution<double> g(0.0, cfg.word_deviation_sd);
      Eigen::VectorXd a(kDevDims);
      for (int j = 0; j < kDevDims; ++j) a(j) = g(rng);
      dev_coords[word_name(members[0])] = a;
    }
    truth.prototype_word[patterns[pi].label()] = word_name(members[0]);
  }

  // words: true contour and true embedding centroid
  const double coord_scale =
      cfg.word_deviation_sd > 0 ? 1.0 / cfg.word_deviation_sd : 1.0;
  for (int w = 0; w < cfg.n_words; ++w) {
    const int pi = w % n_patterns;
    const std::string name = word_name(w);
    const Eigen::VectorXd& a = dev_coords[name];
    truth.pattern_of_word[name] = patterns[pi].label();

    Eigen::VectorXd contour = truth.pattern_template[patterns[pi].label()];
    for (int i = 0; i < cfg.grid_p; ++i)
      for (int j = 0; j < kDevDims; ++j)
        contour(i) += a(j) * dev_basis(j, truth.grid[i]);
    truth.word_contour[name] = contour;

    Eigen::VectorXd emb = pattern_dir(pi);
    for (int j = 0; j < kDevDims; ++j) emb += a(j) * coord_scale * dev_dir(j);
    truth.word_embedding[name] = emb;
  }

  // tokens
  CorpusDataset ds;
  for (int w = 0; w < cfg.n_words; ++w) {
    const std::string word = word_name(w);
    const int pi = w % n_patterns;
    std::mt19937_64 wrng = seeded_rng(cfg.seed, "word_tokens/" + word);
    std::uniform_int_distribution<int> n_tok_dist(cfg.tokens_per_word_min,
                                                  cfg.tokens_per_word_max);
    const int n_tokens = n_tok_dist(wrng);

    const bool has_senses = cfg.sense_deviation_sd > 0.0 && w % 5 == 0;

    for (int k = 0; k < n_tokens; ++k) {
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "_t%02d", k);
      const std::string id = word + suffix;
      std::mt19937_64 rng = seeded_rng(cfg.seed, "token/" + id);
      std::uniform_real_distribution<double> u(0.0, 1.0);

      TokenRecord tok;
      tok.token_id = id;
      tok.word = word;
      tok.tone_pattern = patterns[pi];

      // first two tokens pin one female and one male speaker
      std::size_t spk_idx;
      if (k == 0)
        spk_idx = static_cast<std::size_t>(u(rng) * n_female);
      else if (k == 1)
        spk_idx = n_female +
                  static_cast<std::size_t>(u(rng) * (cfg.n_speakers - n_female));
      else
        spk_idx = static_cast<std::size_t>(u(rng) * cfg.n_speakers);
      spk_idx = std::min(spk_idx, speakers.size() - 1);
      tok.speaker = speakers[spk_idx].first;
      tok.gender = speakers[spk_idx].second;

      const std::string& ctx = kContexts[static_cast<std::size_t>(
          std::min(u(rng) * kContexts.size(), kContexts.size() - 1.0))];
      TonalContext parsed = parse_tonal_context(ctx);
      tok.preceding_tone = parsed.preceding;
      tok.following_tone = parsed.following;

      tok.speech_rate = 3.0 + 5.0 * u(rng);
      tok.norm_utt_pos = u(rng);
      tok.bg_prob_prev = beta_draw(rng, 2.0, 5.0);
      tok.bg_prob_fol = beta_draw(rng, 2.0, 5.0);

      double sense_off = 0.0;
      if (has_senses) {
        const int sense = k % 2;
        tok.sense_type = word + "/s" + std::to_string(sense + 1);
        sense_off = (sense == 0 ? 1.0 : -1.0) * cfg.sense_deviation_sd;
      }

      // constant planted covariate effects; bg_prob_fol is the null covariate
      const double cov_effect = -0.015 * (tok.speech_rate - 5.5) -
                                0.04 * (tok.norm_utt_pos - 0.5) +
                                0.03 * (tok.bg_prob_prev - 0.3);
      const double base = tok.gender == Gender::female ? 5.30 : 4.78;
      const double decl =
          cfg.declination * (tok.gender == Gender::female ? 1.0 : 0.5);

      const double duration = 240.0 + 180.0 * u(rng);
      tok.extra_numeric.clear();

      F0Track track;
      track.token_id = id;
      track.duration_ms = duration;
      std::normal_distribution<double> g(0.0, 1.0);
      double ar = 0.0;
      bool first_sample = true;
      for (double t_ms = 0.0; t_ms <= duration + 1e-9; t_ms += 15.0) {
        const double t = std::min(t_ms / duration, 1.0);
        if (first_sample) {
          ar = cfg.noise_sd > 0
                   ? g(rng) * cfg.noise_sd / std::sqrt(1.0 - cfg.ar1_rho * cfg.ar1_rho)
                   : 0.0;
          first_sample = false;
        } else {
          ar = cfg.ar1_rho * ar + (cfg.noise_sd > 0 ? g(rng) * cfg.noise_sd : 0.0);
        }
        double logf0 = base + truth.speaker_offset[tok.speaker] - decl * t +
                       pattern_template_at(patterns[pi], t) + sense_off +
                       cfg.context_amplitude * context_shape(ctx, t) + cov_effect + ar;
        const Eigen::VectorXd& a = dev_coords[word];
        for (int j = 0; j < kDevDims; ++j) logf0 += a(j) * dev_basis(j, t);
        track.samples.push_back({t_ms, std::exp(logf0)});
      }

      // one optional voiceless span
      if (cfg.missing_span_prob > 0 && u(rng) < cfg.missing_span_prob) {
        const double frac0 = 0.15 + 0.45 * u(rng);
        const double frac1 = frac0 + 0.10 + 0.15 * u(rng);
        std::vector<F0Sample> kept;
        for (const F0Sample& s : track.samples) {
          const double t = s.t_ms / duration;
          if (t < frac0 || t > frac1) kept.push_back(s);
        }
        if (kept.size() >= 4) track.samples = std::move(kept);
      }

      // token embedding around the word centroid
      std::vector<double> emb(cfg.q_embed);
      {
        const Eigen::VectorXd& center = truth.word_embedding[word];
        for (int j = 0; j < cfg.q_embed; ++j)
          emb[j] = center(j) + (cfg.embed_cluster_sd > 0
                                    ? g(rng) * cfg.embed_cluster_sd
                                    : 0.0);
      }

      ds.tokens.push_back(std::move(tok));
      ds.tracks[id] = std::move(track);
      ds.embeddings[id] = std::move(emb);
    }
  }
  return {std::move(ds), std::move(truth)};
}

void write_corpus(const CorpusDataset& dataset, const GroundTruth& truth,
                  const std::filesystem::path& dir) {
  ingest::write_dataset(dataset, dir);
  {
    nlohmann::json j;
    j["grid"] = truth.grid;
    j["pattern_of_word"] = truth.pattern_of_word;
    j["speaker_offset"] = truth.speaker_offset;
    j["prototype_word"] = truth.prototype_word;
    for (const auto& [w, v] : truth.word_contour)
      j["word_contour"][w] = std::vector<double>(v.data(), v.data() + v.size());
    for (const auto& [w, v] : truth.word_embedding)
      j["word_embedding"][w] = std::vector<double>(v.data(), v.data() + v.size());
    for (const auto& [p, v] : truth.pattern_template)
      j["pattern_template"][p] = std::vector<double>(v.data(), v.data() + v.size());
    std::ofstream out(dir / "ground_truth.json");
    out << j.dump(2) << "\n";
  }
}

OracleReport oracle_check(const CorpusDataset& dataset, const GroundTruth& truth,
                          const PipelineOutputs& outputs) {
  OracleReport report;

  std::map<std::string, double> word_share;
  for (const TokenRecord& t : dataset.tokens)
    word_share[t.word] += 1.0 / static_cast<double>(dataset.tokens.size());
  for (const auto& [w, s] : word_share) report.chance_nn_accuracy += s * s;

  auto contour_rmse = [&](const contour_models::ContourSet& set) {
    const Eigen::Index p = set.values.cols();
    double total = 0.0;
    Eigen::Index counted = 0;
    for (Eigen::Index i = 0; i < set.values.rows(); ++i) {
      const TokenRecord* tok = dataset.find_token(set.row_index[i]);
      if (!tok) continue;
      const Eigen::VectorXd truth_curve =
          centroid::z_normalize(truth.word_contour.at(tok->word));
      const Eigen::VectorXd row =
          centroid::z_normalize(set.values.row(i).transpose());
      total += (row - truth_curve).squaredNorm() / static_cast<double>(p);
      ++counted;
    }
    return counted ? std::sqrt(total / static_cast<double>(counted)) : 0.0;
  };

  if (outputs.method1)
    report.method1_contour_rmse = contour_rmse(*outputs.method1);
  else
    report.missing_stages.push_back("method1_contours");
  if (outputs.method2)
    report.method2_contour_rmse = contour_rmse(*outputs.method2);
  else
    report.missing_stages.push_back("method2_contours");
  if (outputs.method3)
    report.method3_contour_rmse = contour_rmse(*outputs.method3);
  else
    report.missing_stages.push_back("method3_contours");

  if (outputs.word_centroids) {
    double total = 0.0;
    int n = 0;
    for (const auto& [word, emp] : *outputs.word_centroids) {
      auto it = truth.word_embedding.find(word);
      if (it == truth.word_embedding.end()) continue;
      total += (emp - it->second).norm();
      ++n;
    }
    report.centroid_displacement = n ? total / n : 0.0;
  } else {
    report.missing_stages.push_back("word_centroids");
  }

  if (outputs.eval_reports) {
    for (const dlm_map::EvalReport& r : *outputs.eval_reports)
      report.test_accuracy[r.method] = r.accuracy_test;
  } else {
    report.missing_stages.push_back("evaluation");
  }
  return report;
}

}  // namespace tonelex::synth
