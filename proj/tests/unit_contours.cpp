#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "tonelex/contour_models.hpp"

using namespace tonelex;
using namespace tonelex::contour_models;

namespace {

F0Track track_from(const std::string& id, double duration_ms, int n,
                   const std::function<double(double)>& logf0_of_t) {
  F0Track tr;
  tr.token_id = id;
  tr.duration_ms = duration_ms;
  for (int i = 0; i < n; ++i) {
    double t_ms = duration_ms * i / (n - 1);
    tr.samples.push_back({t_ms, std::exp(logf0_of_t(t_ms / duration_ms))});
  }
  return tr;
}

TokenRecord base_token(const std::string& id, const std::string& word,
                       const std::string& pattern = "T2-T4") {
  TokenRecord tok;
  tok.token_id = id;
  tok.word = word;
  tok.tone_pattern = parse_tone_pattern(pattern);
  tok.speaker = "s1";
  tok.gender = Gender::female;
  tok.preceding_tone = Tone::t4;
  tok.following_tone = Tone::t4;
  tok.speech_rate = 5.0;
  tok.norm_utt_pos = 0.5;
  tok.bg_prob_prev = 0.2;
  tok.bg_prob_fol = 0.3;
  return tok;
}

double template_curve(double t) {
  return 0.2 * std::sin(2.0 * std::numbers::pi * t) - 0.1 * t;
}

}  // namespace

TEST_CASE("intercept-only model on constant response") {
  std::vector<TokenRecord> toks;
  std::map<std::string, F0Track> tracks;
  for (int i = 0; i < 4; ++i) {
    std::string id = "t" + std::to_string(i);
    toks.push_back(base_token(id, "w"));
    tracks[id] = track_from(id, 300, 10, [](double) { return 5.0; });
  }
  CorpusDataset ds = build_dataset(toks, tracks);

  ModelSpec spec;
  spec.label = "intercept_only";
  spec.ar1_rho = 0.0;
  FittedModel m = fit_model(spec, ds);
  CHECK(m.intercept() == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(m.rss == doctest::Approx(0.0));
  CHECK_THROWS_AS(m.aic(), Error);  // zero residual -> DegenerateFit
}

TEST_CASE("random intercepts recover planted speaker offsets") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<TokenRecord> toks;
  std::map<std::string, F0Track> tracks;
  int counter = 0;
  for (auto [speaker, offset] : {std::pair{"spkA", 0.5}, std::pair{"spkB", -0.5}}) {
    for (int i = 0; i < 20; ++i) {
      std::string id = "t" + std::to_string(counter++);
      TokenRecord tok = base_token(id, "w");
      tok.speaker = speaker;
      toks.push_back(tok);
      double off = offset;
      tracks[id] = track_from(id, 300, 12,
                              [&, off](double) { return 5.0 + off + noise(rng); });
    }
  }
  CorpusDataset ds = build_dataset(toks, tracks);

  ModelSpec spec;
  spec.label = "ri";
  spec.terms = {random_intercept("speaker")};
  spec.ar1_rho = 0.0;
  FittedModel m = fit_model(spec, ds);

  REQUIRE(m.terms.size() == 1);
  REQUIRE(m.terms[0].levels == std::vector<std::string>{"spkA", "spkB"});
  double a = m.coefficients(m.terms[0].offset);
  double b = m.coefficients(m.terms[0].offset + 1);
  CHECK(std::abs(a - 0.5) < 0.05);   // shrunk toward 0, bounded by chosen lambda
  CHECK(std::abs(b + 0.5) < 0.05);
  CHECK(m.terms[0].lambda > 0.0);
}

TEST_CASE("method I reproduces exactly linear token samples") {
  std::vector<TokenRecord> toks = {base_token("lin", "w")};
  std::map<std::string, F0Track> tracks;
  tracks["lin"] = track_from("lin", 300, 30,
                             [](double t) { return 5.0 + 0.4 * t; });
  CorpusDataset ds = build_dataset(toks, tracks);

  ContourSet c = contours_method1(ds, 50);
  REQUIRE(c.row_index == std::vector<std::string>{"lin"});
  // grid evaluation must be collinear: residual from the exact line
  for (int i = 0; i < 50; ++i) {
    double want = 5.0 + 0.4 * c.grid[i];
    CHECK(std::abs(c.values(0, i) - want) < 1e-6);
  }
}

TEST_CASE("method I recovers a dense sine to RMSE < 0.05") {
  std::vector<TokenRecord> toks = {base_token("sine", "w")};
  std::map<std::string, F0Track> tracks;
  auto truth = [](double t) { return 5.0 + 0.3 * std::sin(2.0 * std::numbers::pi * t); };
  tracks["sine"] = track_from("sine", 450, 31, truth);
  CorpusDataset ds = build_dataset(toks, tracks);

  ContourSet c = contours_method1(ds, 100);
  double sse = 0;
  for (int i = 0; i < 100; ++i) {
    double d = c.values(0, i) - truth(c.grid[i]);
    sse += d * d;
  }
  CHECK(std::sqrt(sse / 100) < 0.05);
}

TEST_CASE("method I excludes tokens with fewer than 4 samples") {
  std::vector<TokenRecord> toks = {base_token("tiny", "w"), base_token("ok", "w")};
  std::map<std::string, F0Track> tracks;
  tracks["tiny"] = track_from("tiny", 60, 3, [](double) { return 5.0; });
  tracks["ok"] = track_from("ok", 300, 12, [](double t) { return 5.0 + 0.1 * t; });
  CorpusDataset ds = build_dataset(toks, tracks);

  ContourSet c = contours_method1(ds, 20);
  CHECK(c.row_index == std::vector<std::string>{"ok"});
  REQUIRE(c.excluded.size() == 1);
  CHECK(c.excluded[0].first == "tiny");
  CHECK(c.excluded[0].second == "TooFewSamples");
}

namespace {

// three words around a shared template: offsets +0.3, -0.3 and 0
CorpusDataset method2_fixture(double noise_sd = 0.01) {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> noise(0.0, noise_sd);
  std::vector<TokenRecord> toks;
  std::map<std::string, F0Track> tracks;
  int counter = 0;
  for (auto [word, offset] :
       {std::pair{"word_up", 0.3}, {"word_down", -0.3}, {"word_mid", 0.0}}) {
    for (int i = 0; i < 6; ++i) {
      std::string id = "t" + std::to_string(counter++);
      toks.push_back(base_token(id, word));
      double off = offset;
      tracks[id] = track_from(id, 375, 26, [&, off](double t) {
        return 5.0 + template_curve(t) + off + noise(rng);
      });
    }
  }
  return build_dataset(toks, tracks);
}

}  // namespace

TEST_CASE("method II rows are bitwise identical within a word") {
  CorpusDataset ds = method2_fixture();
  ContourSet c = contours_method2(ds, 40);
  REQUIRE(c.values.rows() == 18);
  std::map<std::string, Eigen::Index> first_row;
  for (Eigen::Index i = 0; i < c.values.rows(); ++i) {
    const std::string& word = ds.find_token(c.row_index[i])->word;
    auto [it, inserted] = first_row.try_emplace(word, i);
    if (!inserted)
      for (int j = 0; j < 40; ++j)
        CHECK(c.values(i, j) == c.values(it->second, j));  // exact equality
  }
  CHECK(first_row.size() == 3);
}

TEST_CASE("method II separates words planted 0.6 apart at every grid point") {
  CorpusDataset ds = method2_fixture();
  ContourSet c = contours_method2(ds, 40);
  Eigen::RowVectorXd up, down, mid;
  for (Eigen::Index i = 0; i < c.values.rows(); ++i) {
    const std::string& word = ds.find_token(c.row_index[i])->word;
    if (word == "word_up") up = c.values.row(i);
    if (word == "word_down") down = c.values.row(i);
    if (word == "word_mid") mid = c.values.row(i);
  }
  for (int j = 0; j < 40; ++j)
    CHECK(std::abs((up(j) - down(j)) - 0.6) < 0.05);
}

TEST_CASE("method II gives a near-zero factor-smooth to the template word") {
  CorpusDataset ds = method2_fixture();
  // refit the same structure directly to inspect the factor-smooth component
  ModelSpec spec;
  spec.label = "inspect";
  spec.terms = {smooth("normalized_t", 10, 2), factor_smooth("normalized_t", "word", 10)};
  spec.filter = {{"tone_pattern", "T2-T4"}};
  FittedModel m = fit_model(spec, ds);
  std::vector<double> grid = normalized_time_grid(40);
  Eigen::VectorXd fs_mid = term_curve(m, 1, "word_mid", grid);
  CHECK(fs_mid.cwiseAbs().maxCoeff() < 0.05);
  Eigen::VectorXd fs_up = term_curve(m, 1, "word_up", grid);
  CHECK(fs_up.cwiseAbs().maxCoeff() > 0.2);
}

namespace {

CorpusDataset method3_fixture() {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TokenRecord> toks;
  std::map<std::string, F0Track> tracks;
  const char* speakers[4] = {"sf1", "sf2", "sm1", "sm2"};
  int counter = 0;
  for (const std::string word : {"alpha", "beta"}) {
    for (int i = 0; i < 10; ++i) {
      std::string id = "t" + std::to_string(counter++);
      TokenRecord tok = base_token(id, word);
      tok.speaker = speakers[i % 4];
      tok.gender = (i % 4) < 2 ? Gender::female : Gender::male;
      tok.speech_rate = 3.0 + 4.0 * u(rng);
      tok.norm_utt_pos = u(rng);
      tok.bg_prob_prev = u(rng);
      tok.bg_prob_fol = u(rng);
      double word_off = word == "alpha" ? 0.15 : -0.15;
      double gender_off = tok.gender == Gender::female ? 0.0 : -0.4;
      double rate_eff = 0.05 * (tok.speech_rate - 5.0);
      toks.push_back(tok);
      tracks[id] = track_from(id, 330, 23, [&, word_off, gender_off, rate_eff](double t) {
        return 5.2 + gender_off + word_off + rate_eff + template_curve(t) + noise(rng);
      });
    }
  }
  return build_dataset(toks, tracks);
}

}  // namespace

TEST_CASE("method III rows are token-specific through covariates") {
  CorpusDataset ds = method3_fixture();
  std::vector<FittedModel> models;
  models.push_back(fit_model(default_context_model("4.4"), ds));

  ContourSet c = contours_method3(ds, models, 30);
  REQUIRE(c.values.rows() == 20);

  // two tokens of the same word and gender but different speech rate
  Eigen::Index a = -1, b = -1;
  for (Eigen::Index i = 0; i < c.values.rows(); ++i) {
    const TokenRecord* tok = ds.find_token(c.row_index[i]);
    if (tok->word == "alpha" && tok->gender == Gender::female) {
      if (a < 0)
        a = i;
      else if (std::abs(ds.find_token(c.row_index[i])->speech_rate -
                        ds.find_token(c.row_index[a])->speech_rate) > 0.3)
        b = i;
    }
  }
  REQUIRE(a >= 0);
  REQUIRE(b >= 0);
  CHECK((c.values.row(a) - c.values.row(b)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("method III rejects tokens of unseen words") {
  CorpusDataset ds = method3_fixture();
  FittedModel model = fit_model(default_context_model("4.4"), ds);
  TokenRecord unseen = base_token("new", "gamma");
  std::vector<double> grid = normalized_time_grid(10);
  CHECK_THROWS_AS(predict_contour(model, unseen, grid), Error);
  try {
    predict_contour(model, unseen, grid);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unseen_level);
  }
}

TEST_CASE("normalize_rows z-scores, rejects constants, is idempotent") {
  ContourSet c;
  c.method = Method::I;
  c.grid = normalized_time_grid(3);
  c.row_index = {"a"};
  c.values.resize(1, 3);
  c.values << 1.0, 2.0, 3.0;
  PitchMatrix pm = normalize_rows(c);
  CHECK(pm.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(pm.values(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pm.values(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
  validate_pitch_matrix(pm);

  ContourSet again;
  again.method = Method::I;
  again.grid = pm.grid;
  again.row_index = pm.row_index;
  again.values = pm.values;
  PitchMatrix twice = normalize_rows(again);
  CHECK((twice.values - pm.values).cwiseAbs().maxCoeff() < 1e-12);

  c.values << 5.0, 5.0, 5.0;
  CHECK_THROWS_AS(normalize_rows(c), Error);
}

TEST_CASE("compare_aic of a spec against itself is zero") {
  CorpusDataset ds = method2_fixture();
  ModelSpec spec;
  spec.label = "m";
  spec.terms = {smooth("normalized_t", 6, 2)};
  CHECK(compare_aic(spec, spec, ds) == 0.0);
}

TEST_CASE("fit_model reports EmptyData when the filter matches nothing") {
  CorpusDataset ds = method2_fixture();
  ModelSpec spec = default_context_model("1.1");
  try {
    fit_model(spec, ds);
    FAIL("expected EmptyData");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_data);
  }
}
