#include "tonelex/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>

#include "tonelex/centroid.hpp"
#include "tonelex/contour_models.hpp"
#include "tonelex/csv.hpp"
#include "tonelex/dlm_map.hpp"
#include "tonelex/svg_report.hpp"

namespace tonelex::cli {

namespace {

namespace cm = tonelex::contour_models;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::missing_file, "cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

// ---- contour matrix files -------------------------------------------------

void write_contours_csv(const std::filesystem::path& path, const cm::ContourSet& set) {
  std::ofstream out(path);
  out << "token_id,method";
  for (Eigen::Index j = 0; j < set.values.cols(); ++j) out << ",g" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < set.values.rows(); ++i) {
    out << set.row_index[i] << "," << cm::to_string(set.method);
    for (Eigen::Index j = 0; j < set.values.cols(); ++j)
      out << "," << fmt17(set.values(i, j));
    out << "\n";
  }
}

struct ContourFile {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;
};

ContourFile read_contours_csv(const std::filesystem::path& path) {
  csv::Table table = csv::read_table(path);
  if (table.header.size() < 3 || table.header[0] != "token_id" ||
      table.header[1] != "method")
    throw Error(Errc::parse_error, path.string() + ": bad contour header");
  const Eigen::Index p = static_cast<Eigen::Index>(table.header.size()) - 2;
  ContourFile out;
  out.values.resize(static_cast<Eigen::Index>(table.rows.size()), p);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.ids.push_back(table.rows[r][0]);
    for (Eigen::Index j = 0; j < p; ++j) {
      const std::string& s = table.rows[r][static_cast<std::size_t>(j) + 2];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error(Errc::parse_error, path.string() + ": bad value '" + s + "'");
      out.values(static_cast<Eigen::Index>(r), j) = v;
    }
  }
  return out;
}

void write_gold_csv(const std::filesystem::path& path,
                    const std::map<std::string, Eigen::VectorXd>& gold) {
  std::ofstream out(path);
  const Eigen::Index p = gold.begin()->second.size();
  out << "tone_pattern";
  for (Eigen::Index j = 0; j < p; ++j) out << ",g" << j;
  out << "\n";
  for (const auto& [pattern, curve] : gold) {
    out << pattern;
    for (Eigen::Index j = 0; j < p; ++j) out << "," << fmt17(curve(j));
    out << "\n";
  }
}

std::map<std::string, Eigen::VectorXd> read_gold_csv(const std::filesystem::path& path) {
  csv::Table table = csv::read_table(path);
  std::map<std::string, Eigen::VectorXd> out;
  const Eigen::Index p = static_cast<Eigen::Index>(table.header.size()) - 1;
  for (const auto& row : table.rows) {
    Eigen::VectorXd v(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const std::string& s = row[static_cast<std::size_t>(j) + 1];
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
      if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error(Errc::parse_error, path.string() + ": bad value '" + s + "'");
      v(j) = x;
    }
    out[row[0]] = v;
  }
  return out;
}

CorpusDataset load_trimmed(const RunConfig& config, bool need_embeddings) {
  const auto dir = config.out_dir / "trimmed";
  auto tokens = ingest::read_tokens(dir / "tokens.csv");
  auto tracks = ingest::read_f0(dir / "f0.csv", dir / "durations.csv");
  EmbeddingMap embeddings;
  if (std::filesystem::exists(dir / "embeddings.csv"))
    embeddings = ingest::read_embeddings(dir / "embeddings.csv");
  else if (need_embeddings)
    throw Error(Errc::missing_file,
                (dir / "embeddings.csv").string() + " (the evaluation stage needs embeddings)");
  return build_dataset(std::move(tokens), std::move(tracks), std::move(embeddings));
}

nlohmann::json json_of_model(const cm::FittedModel& model) {
  nlohmann::json j;
  j["label"] = model.spec.label;
  if (model.spec.filter)
    j["filter"] = {{"field", model.spec.filter->first},
                   {"value", model.spec.filter->second}};
  j["ar1_rho"] = model.spec.ar1_rho;
  j["n_obs"] = model.n_obs;
  j["n_tokens"] = model.n_tokens;
  j["rss"] = model.rss;
  j["edf"] = model.edf;
  j["gcv"] = model.gcv;
  try {
    j["aic"] = model.aic();
  } catch (const Error&) {
    j["aic"] = nullptr;  // zero-residual fit
  }
  nlohmann::json terms = nlohmann::json::array();
  for (const cm::FittedTerm& t : model.terms) {
    nlohmann::json tj;
    tj["term"] = t.spec.label();
    tj["kind"] = cm::to_string(t.spec.kind);
    tj["k"] = t.spec.basis_k;
    tj["penalty_order"] = t.spec.penalty_order;
    tj["lambda"] = t.lambda;
    if (t.ridge_group >= 0) tj["lambda_ridge"] = t.lambda_ridge;
    tj["edf"] = t.edf;
    if (!t.levels.empty()) tj["levels"] = t.levels.size();
    terms.push_back(std::move(tj));
  }
  j["terms"] = std::move(terms);
  return j;
}

const std::map<std::string, std::string> kMethodColor = {
    {"I", "#1f6fd6"}, {"II", "#1fa33c"}, {"III", "#d62a2a"}};

}  // namespace

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

nlohmann::json run_synth(const RunConfig& config) {
  auto [dataset, truth] = synth::generate(config.gen);
  synth::write_corpus(dataset, truth, config.input_dir);

  nlohmann::json j;
  j["n_tokens"] = dataset.tokens.size();
  j["n_words"] = truth.word_contour.size();
  j["q_embed"] = dataset.embedding_dim();
  j["seed"] = config.gen.seed;
  j["files"] = {"tokens.csv", "f0.csv", "durations.csv", "embeddings.csv",
                "ground_truth.json"};
  return j;
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

nlohmann::json run_ingest(const RunConfig& config) {
  const auto& dir = config.input_dir;
  auto tokens = ingest::read_tokens(dir / "tokens.csv");
  auto tracks = ingest::read_f0(dir / "f0.csv", dir / "durations.csv");
  EmbeddingMap embeddings;
  if (std::filesystem::exists(dir / "embeddings.csv"))
    embeddings = ingest::read_embeddings(dir / "embeddings.csv");

  CorpusDataset dataset =
      build_dataset(std::move(tokens), std::move(tracks), std::move(embeddings));
  auto [trimmed, report] = ingest::trim(dataset, config.trim);

  std::filesystem::create_directories(config.out_dir);
  ingest::write_dataset(trimmed, config.out_dir / "trimmed");

  nlohmann::json j;
  j["rule_order"] = {"outliers", "min_tokens_per_word", "cap", "gender"};
  j["config"] = {{"min_tokens_per_word", report.config.min_tokens_per_word},
                 {"max_tokens_per_word", report.config.max_tokens_per_word},
                 {"outlier_decile", report.config.outlier_decile},
                 {"require_both_genders", report.config.require_both_genders},
                 {"rng_seed", report.config.rng_seed},
                 {"outlier_on_log_f0", report.config.outlier_on_log_f0}};
  j["input_tokens"] = report.input_tokens;
  j["input_words"] = report.input_words;
  j["removed"] = {{"too_short", report.removed_too_short},
                  {"outlier", report.removed_outlier},
                  {"min_tokens_per_word", report.removed_min_word_count},
                  {"cap", report.removed_cap},
                  {"gender_rule", report.removed_gender_rule}};
  j["removed_total"] = report.removed_total();
  j["retained_tokens"] = report.retained_tokens;
  j["retained_words"] = report.retained_words;
  j["outlier_sd_threshold"] = report.outlier_sd_threshold;
  j["retained_by_context"] = report.retained_by_context;
  j["words_removed_by_rule"] = report.words_removed_by_rule;
  nlohmann::json removals = nlohmann::json::array();
  for (const auto& r : report.removals)
    removals.push_back({{"token_id", r.token_id}, {"reason", r.reason}});
  j["removals"] = std::move(removals);

  write_json(config.out_dir / "trim_report.json", j);

  nlohmann::json section;
  section["input_tokens"] = report.input_tokens;
  section["retained_tokens"] = report.retained_tokens;
  section["retained_words"] = report.retained_words;
  section["removed_total"] = report.removed_total();
  section["retained_by_context"] = report.retained_by_context;
  return section;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

nlohmann::json run_fit(const RunConfig& config) {
  for (const std::string& ctx : config.contexts) {
    try {
      parse_tonal_context(ctx);
    } catch (const Error& e) {
      throw Error(Errc::config_error, "bad tonal context '" + ctx + "': " + e.what());
    }
  }
  for (const std::string& m : config.methods)
    if (m != "I" && m != "II" && m != "III")
      throw Error(Errc::config_error, "unknown method '" + m + "'");

  CorpusDataset dataset = load_trimmed(config, false);

  // context models, one per requested tonal context, fitted concurrently
  std::vector<cm::FittedModel> models;
  {
    std::vector<std::future<cm::FittedModel>> futures;
    for (const std::string& ctx : config.contexts) {
      cm::ModelSpec spec = cm::default_context_model(ctx, config.lexical_factor,
                                                     config.factor_smooth_k);
      spec.ar1_rho = config.ar1_rho;
      futures.push_back(std::async(std::launch::async, [spec, &dataset] {
        return cm::fit_model(spec, dataset);
      }));
    }
    for (auto& f : futures) models.push_back(f.get());
  }

  nlohmann::json model_summaries = nlohmann::json::array();
  for (const cm::FittedModel& m : models) model_summaries.push_back(json_of_model(m));
  write_json(config.out_dir / "model_summary.json",
             {{"schema_version", 1}, {"models", model_summaries}});

  if (!models.empty())
    write_gold_csv(config.out_dir / "gold_contours.csv",
                   cm::gold_pattern_contours(models, config.grid_p));

  nlohmann::json methods_json;
  for (const std::string& m : config.methods) {
    cm::ContourSet set;
    if (m == "I") {
      set = cm::contours_method1(dataset, config.grid_p);
    } else if (m == "II") {
      set = cm::contours_method2(dataset, config.grid_p, config.method2_group,
                                 config.ar1_rho);
    } else {
      set = cm::contours_method3(dataset, models, config.grid_p);
    }
    write_contours_csv(config.out_dir / ("contours_" + m + ".csv"), set);
    nlohmann::json mj;
    mj["rows"] = set.row_index.size();
    mj["excluded"] = set.excluded.size();
    nlohmann::json excl = nlohmann::json::array();
    for (const auto& [id, reason] : set.excluded)
      excl.push_back({{"token_id", id}, {"reason", reason}});
    mj["excluded_tokens"] = std::move(excl);
    methods_json[m] = std::move(mj);
  }

  // AIC variable-importance table: refit with single terms withheld
  nlohmann::json aic_json = nlohmann::json::array();
  if (!config.withhold.empty()) {
    for (const cm::FittedModel& full : models) {
      nlohmann::json row;
      row["model"] = full.spec.label;
      const double aic_full = full.aic();
      row["aic_full"] = aic_full;
      nlohmann::json deltas;
      for (const std::string& key : config.withhold) {
        cm::ModelSpec reduced = full.spec;
        std::erase_if(reduced.terms, [&](const cm::TermSpec& t) {
          return (t.covariate == key && t.kind == cm::TermKind::smooth) ||
                 (t.covariate == key && t.kind == cm::TermKind::by_factor_smooth) ||
                 (t.factor == key && t.kind != cm::TermKind::parametric_factor);
        });
        if (reduced.terms.size() == full.spec.terms.size())
          throw Error(Errc::config_error,
                      "withhold key '" + key + "' matches no model term");
        reduced.label = full.spec.label + "/without_" + key;
        cm::FittedModel rm = cm::fit_model(reduced, dataset);
        deltas[key] = rm.aic() - aic_full;
      }
      row["delta_aic"] = std::move(deltas);
      aic_json.push_back(std::move(row));
    }
    write_json(config.out_dir / "aic_comparison.json",
               {{"schema_version", 1}, {"withheld", config.withhold},
                {"rows", aic_json}});
  }

  nlohmann::json section;
  section["contexts"] = config.contexts;
  section["n_models"] = models.size();
  section["models"] = model_summaries;
  section["methods"] = methods_json;
  if (!config.withhold.empty()) section["aic_comparison"] = aic_json;
  return section;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

nlohmann::json run_evaluate(const RunConfig& config) {
  CorpusDataset dataset = load_trimmed(config, true);

  std::map<std::string, ContourFile> contour_of_method;
  for (const std::string& m : config.methods)
    contour_of_method[m] =
        read_contours_csv(config.out_dir / ("contours_" + m + ".csv"));

  // common token set, in trimmed order
  std::vector<std::string> common_ids;
  std::map<std::string, std::set<std::string>> present;
  for (const auto& [m, file] : contour_of_method)
    present[m] = {file.ids.begin(), file.ids.end()};
  for (const TokenRecord& tok : dataset.tokens) {
    bool ok = dataset.embeddings.contains(tok.token_id);
    for (const auto& [m, ids] : present) ok = ok && ids.contains(tok.token_id);
    if (ok) common_ids.push_back(tok.token_id);
  }
  if (common_ids.empty())
    throw Error(Errc::empty_result, "no tokens shared by all contour files");

  std::map<std::string, std::string> word_of, pattern_of_token;
  std::map<std::string, std::string> pattern_of_word;
  for (const TokenRecord& tok : dataset.tokens) {
    word_of[tok.token_id] = tok.word;
    pattern_of_token[tok.token_id] = tok.tone_pattern.label();
    pattern_of_word[tok.word] = tok.tone_pattern.label();
  }

  SemanticMatrix semantic;
  semantic.row_index = common_ids;
  const Eigen::Index q = static_cast<Eigen::Index>(dataset.embedding_dim());
  semantic.values.resize(static_cast<Eigen::Index>(common_ids.size()), q);
  for (std::size_t i = 0; i < common_ids.size(); ++i) {
    const auto& e = dataset.embeddings.at(common_ids[i]);
    for (Eigen::Index j = 0; j < q; ++j)
      semantic.values(static_cast<Eigen::Index>(i), j) = e[static_cast<std::size_t>(j)];
  }

  dlm_map::SplitPlan split =
      dlm_map::make_split(common_ids, word_of, config.train_frac, config.split_seed);
  const dlm_map::CandidateSet candidates = config.nn_candidates == "partition"
                                               ? dlm_map::CandidateSet::partition
                                               : dlm_map::CandidateSet::all;

  // per-method normalized pitch matrices and evaluations
  std::map<std::string, PitchMatrix> pitch_of_method;
  std::vector<dlm_map::EvalReport> reports;
  for (const std::string& m : config.methods) {
    const ContourFile& file = contour_of_method[m];
    cm::ContourSet aligned;
    aligned.method = m == "I" ? cm::Method::I : m == "II" ? cm::Method::II : cm::Method::III;
    aligned.grid = normalized_time_grid(static_cast<int>(file.values.cols()));
    aligned.row_index = common_ids;
    aligned.values = dlm_map::rows_of(file.values, file.ids, common_ids);
    PitchMatrix pitch = cm::normalize_rows(aligned);
    validate_pitch_matrix(pitch);
    reports.push_back(dlm_map::evaluate_method(m, semantic, pitch, word_of, split,
                                               config.permutation_reps,
                                               config.permutation_seed, candidates,
                                               config.ridge));
    pitch_of_method[m] = std::move(pitch);
  }

  // eval_report.json
  nlohmann::json eval_json;
  eval_json["schema_version"] = 1;
  eval_json["split"] = {{"train_frac", config.train_frac},
                        {"seed", config.split_seed},
                        {"n_train", split.train_ids.size()},
                        {"n_test", split.test_ids.size()}};
  eval_json["candidates"] = config.nn_candidates;
  auto rows_json = [](const std::vector<dlm_map::NnRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows)
      out.push_back({{"token_id", r.token_id},
                     {"neighbor_id", r.neighbor_id},
                     {"distance", r.distance},
                     {"correct", r.correct}});
    return out;
  };
  for (const dlm_map::EvalReport& r : reports) {
    nlohmann::json mj;
    mj["accuracy_train"] = r.accuracy_train;
    mj["accuracy_train_excluding_self"] = r.accuracy_train_excl_self;
    mj["accuracy_test"] = r.accuracy_test;
    mj["majority_baseline"] = r.majority;
    if (r.permutation.repetitions > 0)
      mj["permutation_baseline"] = {{"mean", r.permutation.mean},
                                    {"sd", r.permutation.sd},
                                    {"repetitions", r.permutation.repetitions},
                                    {"per_repetition", r.permutation.per_rep}};
    mj["n_train"] = r.n_train;
    mj["n_test"] = r.n_test;
    mj["neighbors_test"] = rows_json(r.test_rows);
    mj["neighbors_train"] = rows_json(r.train_rows);
    eval_json["methods"][r.method] = std::move(mj);
  }
  write_json(config.out_dir / "eval_report.json", eval_json);

  // prototypes: centroids, nearest words, projected contours vs gold
  std::map<std::string, Eigen::VectorXd> gold;
  if (std::filesystem::exists(config.out_dir / "gold_contours.csv"))
    gold = read_gold_csv(config.out_dir / "gold_contours.csv");

  nlohmann::json proto_json;
  proto_json["schema_version"] = 1;
  // reference means reported for the original spontaneous Taiwan Mandarin
  // corpus; shown for orientation only, not as reproduction targets
  proto_json["citation_reference"] = {
      {"note",
       "means reported for the original spontaneous Taiwan Mandarin corpus "
       "study; orientation values, not reproduction targets"},
      {"cosine", {{"I", 0.59}, {"II", 0.81}, {"III", 0.66}}},
      {"pearson", {{"I", 0.69}, {"II", 0.82}, {"III", 0.78}}},
      {"euclidean", {{"I", 1.48}, {"II", 1.57}, {"III", 1.43}}}};

  nlohmann::json reconciliation;
  reconciliation["trim_retained_tokens"] = dataset.tokens.size();
  reconciliation["evaluated_tokens"] = common_ids.size();
  for (const auto& [m, file] : contour_of_method)
    reconciliation["contour_rows"][m] = file.ids.size();

  if (!gold.empty()) {
    auto word_cents = centroid::word_centroids(semantic, word_of);
    auto pattern_cents = centroid::pattern_centroids(word_cents, pattern_of_word);
    std::map<std::string, int> words_per_pattern;
    for (const auto& [w, p] : pattern_of_word) ++words_per_pattern[p];

    for (const auto& [pattern, cent] : pattern_cents) {
      auto top = centroid::nearest_words(
          cent, word_cents, std::min<int>(2, static_cast<int>(word_cents.size())));
      nlohmann::json tj = nlohmann::json::array();
      for (const auto& [word, dist] : top)
        tj.push_back({{"word", word}, {"distance", dist}});
      proto_json["patterns"][pattern] = {{"n_words", words_per_pattern[pattern]},
                                         {"nearest_words", tj}};
    }

    std::map<std::string, centroid::PrototypeResult> proto_of_method;
    std::ofstream proto_csv(config.out_dir / "prototypes.csv");
    proto_csv << "method,tone_pattern,cosine,pearson,euclidean\n";
    for (const dlm_map::EvalReport& r : reports) {
      centroid::PrototypeResult res = centroid::prototype_contours(
          r.method, r.mapping, pattern_cents, gold, words_per_pattern);
      nlohmann::json mj;
      mj["mean_cosine"] = res.mean_cosine;
      mj["mean_pearson"] = res.mean_pearson;
      mj["mean_euclidean"] = res.mean_euclidean;
      nlohmann::json rows = nlohmann::json::array();
      for (const centroid::SimilarityRow& row : res.rows) {
        rows.push_back({{"tone_pattern", row.tone_pattern},
                        {"cosine", row.cosine},
                        {"pearson", row.pearson},
                        {"euclidean", row.euclidean}});
        proto_csv << row.method << "," << row.tone_pattern << ","
                  << fmt17(row.cosine) << "," << fmt17(row.pearson) << ","
                  << fmt17(row.euclidean) << "\n";
      }
      mj["rows"] = std::move(rows);
      proto_json["methods"][r.method] = std::move(mj);
      proto_of_method[r.method] = std::move(res);
    }

    // trellis overlay (4 x 5) plus one file per pattern
    const std::vector<double> grid =
        normalized_time_grid(static_cast<int>(gold.begin()->second.size()));
    std::vector<svg::Panel> panels;
    for (const TonePattern& pat : all_tone_patterns()) {
      const std::string label = pat.label();
      auto gold_it = gold.find(label);
      if (gold_it == gold.end()) continue;
      svg::Panel panel;
      panel.title = label;
      svg::Series gold_series;
      gold_series.x = grid;
      const Eigen::VectorXd zg = centroid::z_normalize(gold_it->second);
      gold_series.y.assign(zg.data(), zg.data() + zg.size());
      gold_series.color = "black";
      gold_series.width = 2.0;
      gold_series.label = "reference";
      panel.series.push_back(std::move(gold_series));
      for (const auto& [m, res] : proto_of_method) {
        for (const centroid::PatternPrototype& proto : res.prototypes) {
          if (proto.tone_pattern != label) continue;
          svg::Series s;
          s.x = grid;
          s.y.assign(proto.projected_contour.data(),
                     proto.projected_contour.data() + proto.projected_contour.size());
          s.color = kMethodColor.at(m);
          s.label = m;
          panel.series.push_back(std::move(s));
        }
      }
      write_text(config.out_dir / ("prototype_" + label + ".svg"),
                 svg::render_panel_grid({panel}, 1));
      panels.push_back(std::move(panel));
    }
    if (!panels.empty())
      write_text(config.out_dir / "prototypes_overlay.svg",
                 svg::render_panel_grid(panels, 4));

    // similarity distributions, one boxplot per measure
    for (const std::string metric : {"cosine", "pearson", "euclidean"}) {
      std::vector<svg::BoxGroup> groups;
      for (const auto& [m, res] : proto_of_method) {
        svg::BoxGroup g;
        g.label = "method " + m;
        g.color = kMethodColor.at(m);
        for (const centroid::SimilarityRow& row : res.rows)
          g.values.push_back(metric == "cosine" ? row.cosine
                             : metric == "pearson" ? row.pearson
                                                   : row.euclidean);
        groups.push_back(std::move(g));
      }
      write_text(config.out_dir / ("similarity_" + std::string(metric) + ".svg"),
                 svg::render_boxplot(metric + " vs reference contours", groups));
    }
  }
  write_json(config.out_dir / "prototypes.json", proto_json);

  nlohmann::json section;
  section["n_evaluated"] = common_ids.size();
  section["reconciliation"] = reconciliation;
  for (const dlm_map::EvalReport& r : reports) {
    nlohmann::json mj;
    mj["accuracy_train"] = r.accuracy_train;
    mj["accuracy_test"] = r.accuracy_test;
    mj["majority_baseline"] = r.majority;
    if (r.permutation.repetitions > 0) {
      mj["permutation_mean"] = r.permutation.mean;
      mj["permutation_sd"] = r.permutation.sd;
    }
    section["methods"][r.method] = std::move(mj);
  }
  if (proto_json.contains("methods"))
    for (auto& [m, mj] : proto_json["methods"].items())
      section["prototype_means"][m] = {{"cosine", mj["mean_cosine"]},
                                       {"pearson", mj["mean_pearson"]},
                                       {"euclidean", mj["mean_euclidean"]}};
  return section;
}

void write_run_report(const RunConfig& config, const nlohmann::json& stages) {
  nlohmann::json report;
  report["schema_version"] = 1;
  report["stages"] = stages;
  write_json(config.out_dir / "run_report.json", report);
}

}  // namespace tonelex::cli
