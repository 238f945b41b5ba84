#include "tonelex/contour_models.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tonelex::contour_models {

const char* to_string(TermKind kind) {
  switch (kind) {
    case TermKind::parametric_factor: return "param";
    case TermKind::smooth: return "s";
    case TermKind::by_factor_smooth: return "s_by";
    case TermKind::factor_smooth: return "fs";
    case TermKind::random_intercept: return "re";
  }
  return "?";
}

std::string TermSpec::label() const {
  switch (kind) {
    case TermKind::parametric_factor: return "param(" + factor + ")";
    case TermKind::smooth: return "s(" + covariate + ")";
    case TermKind::by_factor_smooth: return "s(" + covariate + "):" + factor;
    case TermKind::factor_smooth: return "fs(" + covariate + "," + factor + ")";
    case TermKind::random_intercept: return "re(" + factor + ")";
  }
  return "?";
}

TermSpec parametric(std::string factor) {
  TermSpec t;
  t.kind = TermKind::parametric_factor;
  t.factor = std::move(factor);
  return t;
}

TermSpec smooth(std::string covariate, int k, int penalty_order) {
  TermSpec t;
  t.kind = TermKind::smooth;
  t.covariate = std::move(covariate);
  t.basis_k = k;
  t.penalty_order = penalty_order;
  return t;
}

TermSpec by_smooth(std::string covariate, std::string factor, int k,
                   int penalty_order) {
  TermSpec t;
  t.kind = TermKind::by_factor_smooth;
  t.covariate = std::move(covariate);
  t.factor = std::move(factor);
  t.basis_k = k;
  t.penalty_order = penalty_order;
  return t;
}

TermSpec factor_smooth(std::string covariate, std::string factor, int k) {
  TermSpec t;
  t.kind = TermKind::factor_smooth;
  t.covariate = std::move(covariate);
  t.factor = std::move(factor);
  t.basis_k = k;
  t.penalty_order = 1;
  return t;
}

TermSpec random_intercept(std::string factor) {
  TermSpec t;
  t.kind = TermKind::random_intercept;
  t.factor = std::move(factor);
  return t;
}

ModelSpec default_context_model(const std::string& tonal_context,
                                const std::string& lexical_factor,
                                int factor_smooth_k) {
  ModelSpec spec;
  spec.label = "context_" + tonal_context + "_" + lexical_factor;
  spec.terms = {
      parametric("gender"),
      by_smooth("normalized_t", "gender", 4),
      random_intercept("speaker"),
      factor_smooth("normalized_t", "tone_pattern", factor_smooth_k),
      factor_smooth("normalized_t", lexical_factor, factor_smooth_k),
      by_smooth("speech_rate", "gender", 4),
      smooth("norm_utt_pos", 4),
      smooth("bg_prob_prev", 4),
      smooth("bg_prob_fol", 4),
  };
  spec.filter = {{"tonal_context", tonal_context}};
  return spec;
}

const char* to_string(Method m) {
  switch (m) {
    case Method::I: return "I";
    case Method::II: return "II";
    case Method::III: return "III";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Design assembly
// ---------------------------------------------------------------------------

namespace {

struct SampleData {
  std::vector<const TokenRecord*> tokens;
  Eigen::VectorXd y;                         // log f0 per sample
  std::vector<double> t_norm;                // normalized time per sample
  std::vector<std::size_t> token_of_sample;  // index into tokens
  std::vector<std::pair<Eigen::Index, Eigen::Index>> token_ranges;
};

SampleData collect_samples(const ModelSpec& spec, const CorpusDataset& dataset) {
  SampleData data;
  for (const TokenRecord& tok : dataset.tokens) {
    if (spec.filter &&
        factor_field(tok, spec.filter->first) != spec.filter->second)
      continue;
    data.tokens.push_back(&tok);
  }
  if (data.tokens.empty())
    throw Error(Errc::empty_data,
                "model '" + spec.label + "': no tokens match the filter");

  std::size_t n_samples = 0;
  for (const TokenRecord* tok : data.tokens)
    n_samples += dataset.track(tok->token_id).samples.size();
  data.y.resize(n_samples);
  data.t_norm.reserve(n_samples);
  data.token_of_sample.reserve(n_samples);

  Eigen::Index row = 0;
  for (std::size_t ti = 0; ti < data.tokens.size(); ++ti) {
    const F0Track logged = log_f0(dataset.track(data.tokens[ti]->token_id));
    const Eigen::Index begin = row;
    for (std::size_t i = 0; i < logged.samples.size(); ++i) {
      data.y(row) = logged.samples[i].f0_hz;
      data.t_norm.push_back(logged.normalized_time(i));
      data.token_of_sample.push_back(ti);
      ++row;
    }
    data.token_ranges.push_back({begin, row});
  }
  return data;
}

std::vector<std::string> sorted_levels(const std::string& factor,
                                       const std::vector<const TokenRecord*>& tokens) {
  std::set<std::string> levels;
  for (const TokenRecord* tok : tokens) levels.insert(factor_field(*tok, factor));
  return {levels.begin(), levels.end()};
}

// Per-sample covariate values for one term.
std::vector<double> covariate_values(const TermSpec& term, const SampleData& data) {
  if (term.covariate == "normalized_t") return data.t_norm;
  std::vector<double> out(data.token_of_sample.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = numeric_field(*data.tokens[data.token_of_sample[i]], term.covariate);
  return out;
}

splines::BasisSpec resolve_basis(const TermSpec& term, const std::vector<double>& v) {
  splines::BasisSpec basis{term.basis_k, term.degree, 0.0, 1.0};
  if (term.covariate == "normalized_t") return basis;
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (!(*hi > *lo))
    throw Error(Errc::config_error,
                "covariate '" + term.covariate + "' is constant; cannot smooth");
  basis.lo = *lo;
  basis.hi = *hi;
  return basis;
}

struct Assembly {
  Eigen::MatrixXd design;
  std::vector<splines::PenaltyBlock> penalties;
  std::vector<FittedTerm> terms;
  int n_lambda = 0;
};

Assembly assemble(const ModelSpec& spec, const SampleData& data) {
  const Eigen::Index n = data.y.size();

  // first pass: resolve layout
  Assembly out;
  Eigen::Index offset = 1;  // column 0 is the intercept
  for (const TermSpec& term : spec.terms) {
    FittedTerm ft;
    ft.spec = term;
    ft.offset = offset;
    switch (term.kind) {
      case TermKind::parametric_factor:
        ft.levels = sorted_levels(term.factor, data.tokens);
        ft.size = static_cast<Eigen::Index>(ft.levels.size()) - 1;
        break;
      case TermKind::smooth:
        ft.size = term.basis_k - 1;  // one column absorbed by the constraint
        ft.per_level_size = ft.size;
        break;
      case TermKind::by_factor_smooth:
        ft.levels = sorted_levels(term.factor, data.tokens);
        ft.per_level_size = term.basis_k - 1;
        ft.size = ft.per_level_size * static_cast<Eigen::Index>(ft.levels.size());
        break;
      case TermKind::factor_smooth:
        ft.levels = sorted_levels(term.factor, data.tokens);
        ft.per_level_size = term.basis_k;
        ft.size = ft.per_level_size * static_cast<Eigen::Index>(ft.levels.size());
        break;
      case TermKind::random_intercept:
        ft.levels = sorted_levels(term.factor, data.tokens);
        ft.size = static_cast<Eigen::Index>(ft.levels.size());
        break;
    }
    offset += ft.size;
    out.terms.push_back(std::move(ft));
  }

  out.design = Eigen::MatrixXd::Zero(n, offset);
  out.design.col(0).setOnes();

  auto level_rows = [&](const std::string& factor,
                        const std::vector<std::string>& levels) {
    std::vector<std::vector<Eigen::Index>> rows(levels.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::string value =
          factor_field(*data.tokens[data.token_of_sample[i]], factor);
      const auto it = std::lower_bound(levels.begin(), levels.end(), value);
      rows[static_cast<std::size_t>(it - levels.begin())].push_back(i);
    }
    return rows;
  };

  // second pass: fill columns and penalties
  for (FittedTerm& ft : out.terms) {
    const TermSpec& term = ft.spec;
    switch (term.kind) {
      case TermKind::parametric_factor: {
        auto rows = level_rows(term.factor, ft.levels);
        for (std::size_t l = 1; l < ft.levels.size(); ++l)
          for (Eigen::Index r : rows[l])
            out.design(r, ft.offset + static_cast<Eigen::Index>(l) - 1) = 1.0;
        break;
      }
      case TermKind::smooth: {
        const std::vector<double> v = covariate_values(term, data);
        ft.basis = resolve_basis(term, v);
        Eigen::MatrixXd b = splines::bspline_design(ft.basis, v);
        Eigen::MatrixXd z = splines::sum_to_zero_null_basis(b.colwise().sum());
        ft.constraints.push_back(z);
        out.design.block(0, ft.offset, n, ft.size) = b * z;
        Eigen::MatrixXd p = splines::difference_penalty(term.basis_k, term.penalty_order);
        ft.lambda_group = out.n_lambda;
        out.penalties.push_back(
            {ft.offset, z.transpose() * p * z, out.n_lambda});
        ++out.n_lambda;
        break;
      }
      case TermKind::by_factor_smooth: {
        const std::vector<double> v = covariate_values(term, data);
        ft.basis = resolve_basis(term, v);
        Eigen::MatrixXd p = splines::difference_penalty(term.basis_k, term.penalty_order);
        ft.lambda_group = out.n_lambda;
        auto rows = level_rows(term.factor, ft.levels);
        for (std::size_t l = 0; l < ft.levels.size(); ++l) {
          std::vector<double> vl;
          vl.reserve(rows[l].size());
          for (Eigen::Index r : rows[l]) vl.push_back(v[r]);
          Eigen::MatrixXd b = splines::bspline_design(ft.basis, vl);
          Eigen::MatrixXd z = splines::sum_to_zero_null_basis(b.colwise().sum());
          ft.constraints.push_back(z);
          Eigen::MatrixXd bz = b * z;
          const Eigen::Index block = ft.offset + ft.per_level_size * l;
          for (std::size_t i = 0; i < rows[l].size(); ++i)
            out.design.block(rows[l][i], block, 1, ft.per_level_size) = bz.row(i);
          out.penalties.push_back({block, z.transpose() * p * z, out.n_lambda});
        }
        ++out.n_lambda;
        break;
      }
      case TermKind::factor_smooth: {
        const std::vector<double> v = covariate_values(term, data);
        ft.basis = resolve_basis(term, v);
        // order-1 roughness plus a ridge on every level block, each under
        // its own lambda. The ridge is what shrinks level curves toward the
        // global smooth; giving it a separate smoothing parameter lets the
        // roughness penalty flatten level shapes without also crushing
        // genuine level offsets.
        Eigen::MatrixXd p1 = splines::difference_penalty(term.basis_k, 1);
        Eigen::MatrixXd ridge =
            Eigen::MatrixXd::Identity(term.basis_k, term.basis_k);
        auto rows = level_rows(term.factor, ft.levels);
        const int rough_group = out.n_lambda;
        const int ridge_group = out.n_lambda + 1;
        ft.lambda_group = rough_group;
        ft.ridge_group = ridge_group;
        for (std::size_t l = 0; l < ft.levels.size(); ++l) {
          std::vector<double> vl;
          vl.reserve(rows[l].size());
          for (Eigen::Index r : rows[l]) vl.push_back(v[r]);
          Eigen::MatrixXd b = splines::bspline_design(ft.basis, vl);
          const Eigen::Index block =
              ft.offset + ft.per_level_size * static_cast<Eigen::Index>(l);
          for (std::size_t i = 0; i < rows[l].size(); ++i)
            out.design.block(rows[l][i], block, 1, ft.per_level_size) = b.row(i);
          out.penalties.push_back({block, p1, rough_group});
          out.penalties.push_back({block, ridge, ridge_group});
        }
        out.n_lambda += 2;
        break;
      }
      case TermKind::random_intercept: {
        auto rows = level_rows(term.factor, ft.levels);
        for (std::size_t l = 0; l < ft.levels.size(); ++l)
          for (Eigen::Index r : rows[l])
            out.design(r, ft.offset + static_cast<Eigen::Index>(l)) = 1.0;
        ft.lambda_group = out.n_lambda;
        out.penalties.push_back(
            {ft.offset, Eigen::MatrixXd::Identity(ft.size, ft.size), out.n_lambda});
        ++out.n_lambda;
        break;
      }
    }
  }
  return out;
}

// Coordinate-descent GCV: full ladder sweep per lambda group, then local
// refinement sweeps until the lambda vector stops moving.
splines::GcvResult select_lambdas(const splines::PenalizedSystem& system,
                                  int n_lambda) {
  const std::vector<double> ladder = splines::default_lambda_grid();
  std::vector<double> current(n_lambda, 1.0);
  splines::GcvResult best;
  const int max_sweeps = 4;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (int g = 0; g < n_lambda; ++g) {
      std::vector<std::vector<double>> grid;
      if (sweep == 0) {
        for (double l : ladder) {
          std::vector<double> v = current;
          v[g] = l;
          grid.push_back(std::move(v));
        }
      } else {
        for (double f : {0.1, 1.0, 10.0}) {
          double l = std::clamp(current[g] * f, ladder.front(), ladder.back());
          std::vector<double> v = current;
          v[g] = l;
          if (std::find(grid.begin(), grid.end(), v) == grid.end())
            grid.push_back(std::move(v));
        }
      }
      splines::GcvResult r = splines::gcv_select(system, grid);
      if (r.lambda != current) moved = true;
      current = r.lambda;
      best = std::move(r);
    }
    if (!moved && sweep > 0) break;
    if (n_lambda == 1) break;  // one full ladder pass is already exhaustive
  }
  return best;
}

}  // namespace

double FittedModel::aic() const {
  splines::PenalizedFit fit;
  fit.rss = rss;
  fit.edf = edf;
  fit.n_obs = n_obs;
  return splines::aic(fit);
}

FittedModel fit_model(const ModelSpec& spec, const CorpusDataset& dataset) {
  SampleData data = collect_samples(spec, dataset);
  Assembly assembly = assemble(spec, data);

  Eigen::VectorXd y = data.y;
  if (spec.ar1_rho != 0.0) {
    for (auto [begin, end] : data.token_ranges) {
      splines::ar1_whiten_inplace(y.segment(begin, end - begin), spec.ar1_rho);
      Eigen::Ref<Eigen::MatrixXd> block =
          assembly.design.middleRows(begin, end - begin);
      splines::ar1_whiten_rows_inplace(block, spec.ar1_rho);
    }
  }

  splines::PenalizedSystem system(assembly.design, y, assembly.penalties);

  splines::PenalizedFit fit;
  double gcv = 0.0;
  std::vector<double> lambdas;
  if (assembly.n_lambda == 0) {
    fit = system.solve({});
    gcv = splines::gcv_score(fit);
  } else {
    splines::GcvResult r = select_lambdas(system, assembly.n_lambda);
    fit = std::move(r.fit);
    gcv = r.scores[r.selected_index];
    lambdas = r.lambda;
  }

  FittedModel model;
  model.spec = spec;
  model.coefficients = fit.coefficients;
  model.rss = fit.rss;
  model.edf = fit.edf;
  model.gcv = gcv;
  model.n_obs = fit.n_obs;
  model.n_tokens = data.tokens.size();
  model.terms = std::move(assembly.terms);

  // per-term lambda and edf
  for (FittedTerm& ft : model.terms) {
    if (ft.lambda_group >= 0 && !lambdas.empty())
      ft.lambda = lambdas[ft.lambda_group];
    if (ft.ridge_group >= 0 && !lambdas.empty())
      ft.lambda_ridge = lambdas[ft.ridge_group];
    ft.edf = ft.size > 0 ? fit.leverage.segment(ft.offset, ft.size).sum() : 0.0;
  }
  return model;
}

double compare_aic(const ModelSpec& spec_full, const ModelSpec& spec_reduced,
                   const CorpusDataset& dataset) {
  FittedModel full = fit_model(spec_full, dataset);
  FittedModel reduced = fit_model(spec_reduced, dataset);
  return reduced.aic() - full.aic();
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

std::size_t level_index(const FittedTerm& ft, const std::string& level) {
  auto it = std::lower_bound(ft.levels.begin(), ft.levels.end(), level);
  if (it == ft.levels.end() || *it != level)
    throw Error(Errc::unseen_level, "level '" + level + "' of " +
                                        ft.spec.label() + " was absent at fit time");
  return static_cast<std::size_t>(it - ft.levels.begin());
}

}  // namespace

Eigen::VectorXd term_curve(const FittedModel& model, std::size_t term_index,
                           const std::string& level, std::span<const double> grid) {
  if (term_index >= model.terms.size())
    throw Error(Errc::config_error, "term index out of range");
  const FittedTerm& ft = model.terms[term_index];

  // map the grid onto the term's own domain when it is not over time
  std::vector<double> xs(grid.begin(), grid.end());
  if (ft.spec.covariate != "normalized_t")
    for (double& x : xs) x = ft.basis.lo + x * (ft.basis.hi - ft.basis.lo);

  switch (ft.spec.kind) {
    case TermKind::smooth: {
      Eigen::MatrixXd b = splines::bspline_design(ft.basis, xs);
      return b * ft.constraints[0] *
             model.coefficients.segment(ft.offset, ft.size);
    }
    case TermKind::by_factor_smooth: {
      const std::size_t l = level_index(ft, level);
      Eigen::MatrixXd b = splines::bspline_design(ft.basis, xs);
      return b * ft.constraints[l] *
             model.coefficients.segment(ft.offset + ft.per_level_size * l,
                                        ft.per_level_size);
    }
    case TermKind::factor_smooth: {
      const std::size_t l = level_index(ft, level);
      Eigen::MatrixXd b = splines::bspline_design(ft.basis, xs);
      return b * model.coefficients.segment(ft.offset + ft.per_level_size * l,
                                            ft.per_level_size);
    }
    default:
      throw Error(Errc::config_error,
                  "term " + ft.spec.label() + " has no curve");
  }
}

Eigen::VectorXd predict_contour(const FittedModel& model, const TokenRecord& token,
                                std::span<const double> grid) {
  const Eigen::Index p = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd out = Eigen::VectorXd::Constant(p, model.intercept());

  for (const FittedTerm& ft : model.terms) {
    switch (ft.spec.kind) {
      case TermKind::parametric_factor: {
        const std::size_t l = level_index(ft, factor_field(token, ft.spec.factor));
        if (l > 0) out.array() += model.coefficients(ft.offset + l - 1);
        break;
      }
      case TermKind::smooth: {
        if (ft.spec.covariate == "normalized_t") {
          Eigen::MatrixXd b = splines::bspline_design(ft.basis, grid);
          out += b * ft.constraints[0] *
                 model.coefficients.segment(ft.offset, ft.size);
        } else {
          double x = numeric_field(token, ft.spec.covariate);
          Eigen::RowVectorXd b = splines::bspline_row(ft.basis, x);
          out.array() += (b * ft.constraints[0] *
                          model.coefficients.segment(ft.offset, ft.size))(0);
        }
        break;
      }
      case TermKind::by_factor_smooth: {
        const std::size_t l = level_index(ft, factor_field(token, ft.spec.factor));
        const Eigen::Index block = ft.offset + ft.per_level_size * l;
        if (ft.spec.covariate == "normalized_t") {
          Eigen::MatrixXd b = splines::bspline_design(ft.basis, grid);
          out += b * ft.constraints[l] *
                 model.coefficients.segment(block, ft.per_level_size);
        } else {
          double x = numeric_field(token, ft.spec.covariate);
          Eigen::RowVectorXd b = splines::bspline_row(ft.basis, x);
          out.array() += (b * ft.constraints[l] *
                          model.coefficients.segment(block, ft.per_level_size))(0);
        }
        break;
      }
      case TermKind::factor_smooth: {
        const std::size_t l = level_index(ft, factor_field(token, ft.spec.factor));
        const Eigen::Index block = ft.offset + ft.per_level_size * l;
        if (ft.spec.covariate == "normalized_t") {
          Eigen::MatrixXd b = splines::bspline_design(ft.basis, grid);
          out += b * model.coefficients.segment(block, ft.per_level_size);
        } else {
          double x = numeric_field(token, ft.spec.covariate);
          Eigen::RowVectorXd b = splines::bspline_row(ft.basis, x);
          out.array() +=
              (b * model.coefficients.segment(block, ft.per_level_size))(0);
        }
        break;
      }
      case TermKind::random_intercept: {
        const std::size_t l = level_index(ft, factor_field(token, ft.spec.factor));
        out.array() += model.coefficients(ft.offset + l);
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Methods I / II / III
// ---------------------------------------------------------------------------

ContourSet contours_method1(const CorpusDataset& dataset, int grid_p, int basis_k) {
  ContourSet out;
  out.method = Method::I;
  out.grid = normalized_time_grid(grid_p);

  const splines::BasisSpec basis{basis_k, 3, 0.0, 1.0};
  const Eigen::MatrixXd penalty = splines::difference_penalty(basis_k, 2);
  const Eigen::MatrixXd grid_design = splines::bspline_design(basis, out.grid);

  // widened ladder: per-token data can be exactly smooth, where the fit
  // should be allowed to interpolate
  std::vector<std::vector<double>> grid_lambdas;
  for (int e = -8; e <= 8; ++e) grid_lambdas.push_back({std::pow(10.0, e)});

  std::vector<Eigen::VectorXd> rows;
  for (const TokenRecord& tok : dataset.tokens) {
    const F0Track logged = log_f0(dataset.track(tok.token_id));
    if (logged.samples.size() < 4) {
      out.excluded.push_back({tok.token_id, "TooFewSamples"});
      continue;
    }
    std::vector<double> t(logged.samples.size());
    Eigen::VectorXd y(static_cast<Eigen::Index>(logged.samples.size()));
    for (std::size_t i = 0; i < logged.samples.size(); ++i) {
      t[i] = logged.normalized_time(i);
      y(static_cast<Eigen::Index>(i)) = logged.samples[i].f0_hz;
    }
    Eigen::MatrixXd b = splines::bspline_design(basis, t);
    splines::GcvResult r = splines::gcv_select(b, y, {{0, penalty, 0}}, grid_lambdas);
    rows.push_back(grid_design * r.fit.coefficients);
    out.row_index.push_back(tok.token_id);
    out.provenance.push_back("method1/" + tok.token_id);
  }

  out.values.resize(static_cast<Eigen::Index>(rows.size()), grid_p);
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.values.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

ContourSet contours_method2(const CorpusDataset& dataset, int grid_p,
                            const std::string& group_field, double ar1_rho) {
  ContourSet out;
  out.method = Method::II;
  out.grid = normalized_time_grid(grid_p);

  // drop tokens without a usable group label (sense_type may be missing)
  CorpusDataset usable;
  for (const TokenRecord& tok : dataset.tokens) {
    try {
      factor_field(tok, group_field);
    } catch (const Error&) {
      out.excluded.push_back({tok.token_id, "NoGroupLabel"});
      continue;
    }
    usable.tokens.push_back(tok);
    usable.tracks[tok.token_id] = dataset.track(tok.token_id);
  }
  if (usable.tokens.empty())
    throw Error(Errc::empty_data, "no tokens with a '" + group_field + "' label");

  std::set<std::string> patterns;
  for (const TokenRecord& tok : usable.tokens)
    patterns.insert(tok.tone_pattern.label());

  std::map<std::string, Eigen::VectorXd> curve_of_group;  // "pattern/group"
  for (const std::string& pattern : patterns) {
    ModelSpec spec;
    spec.label = "method2/" + pattern;
    spec.terms = {smooth("normalized_t", 10, 2),
                  factor_smooth("normalized_t", group_field, 10)};
    spec.filter = {{"tone_pattern", pattern}};
    spec.ar1_rho = ar1_rho;
    FittedModel model = fit_model(spec, usable);

    Eigen::VectorXd global = term_curve(model, 0, "", out.grid);
    for (const std::string& level : model.terms[1].levels)
      curve_of_group[pattern + "/" + level] =
          global + term_curve(model, 1, level, out.grid);
  }

  out.values.resize(static_cast<Eigen::Index>(usable.tokens.size()), grid_p);
  Eigen::Index row = 0;
  for (const TokenRecord& tok : usable.tokens) {
    const std::string key =
        tok.tone_pattern.label() + "/" + factor_field(tok, group_field);
    auto it = curve_of_group.find(key);
    if (it == curve_of_group.end())
      throw Error(Errc::empty_pattern, "no fitted curve for " + key);
    out.values.row(row) = it->second.transpose();
    out.row_index.push_back(tok.token_id);
    out.provenance.push_back("method2/" + tok.tone_pattern.label());
    ++row;
  }
  return out;
}

ContourSet contours_method3(const CorpusDataset& dataset,
                            const std::vector<FittedModel>& context_models,
                            int grid_p) {
  ContourSet out;
  out.method = Method::III;
  out.grid = normalized_time_grid(grid_p);

  std::map<std::string, const FittedModel*> model_of_context;
  for (const FittedModel& m : context_models) {
    if (!m.spec.filter || m.spec.filter->first != "tonal_context")
      throw Error(Errc::config_error,
                  "context model '" + m.spec.label +
                      "' is not filtered on tonal_context");
    model_of_context[m.spec.filter->second] = &m;
  }

  std::vector<Eigen::VectorXd> rows;
  for (const TokenRecord& tok : dataset.tokens) {
    auto it = model_of_context.find(tok.tonal_context().label());
    if (it == model_of_context.end()) {
      out.excluded.push_back({tok.token_id, "UnmodeledContext"});
      continue;
    }
    rows.push_back(predict_contour(*it->second, tok, out.grid));
    out.row_index.push_back(tok.token_id);
    out.provenance.push_back(it->second->spec.label);
  }

  out.values.resize(static_cast<Eigen::Index>(rows.size()), grid_p);
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.values.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

PitchMatrix normalize_rows(const ContourSet& contours) {
  PitchMatrix out;
  out.grid = contours.grid;
  out.row_index = contours.row_index;
  out.values.resizeLike(contours.values);
  for (Eigen::Index i = 0; i < contours.values.rows(); ++i) {
    RowMoments m = row_moments(contours.values.row(i));
    if (!(m.sd > 0.0))
      throw Error(Errc::zero_variance,
                  "token " + contours.row_index[i] + " has a constant contour");
    out.values.row(i) = (contours.values.row(i).array() - m.mean) / m.sd;
  }
  return out;
}

std::map<std::string, Eigen::VectorXd> gold_pattern_contours(
    const std::vector<FittedModel>& context_models, int grid_p) {
  const std::vector<double> grid = normalized_time_grid(grid_p);
  std::map<std::string, Eigen::VectorXd> sums;
  std::map<std::string, int> counts;

  for (const FittedModel& model : context_models) {
    std::size_t time_by_gender = model.terms.size();
    std::size_t pattern_fs = model.terms.size();
    for (std::size_t i = 0; i < model.terms.size(); ++i) {
      const TermSpec& t = model.terms[i].spec;
      if (t.kind == TermKind::by_factor_smooth && t.covariate == "normalized_t" &&
          t.factor == "gender")
        time_by_gender = i;
      if (t.kind == TermKind::factor_smooth && t.covariate == "normalized_t" &&
          t.factor == "tone_pattern")
        pattern_fs = i;
    }
    if (time_by_gender == model.terms.size() || pattern_fs == model.terms.size())
      throw Error(Errc::config_error,
                  "model '" + model.spec.label +
                      "' lacks the by-gender time smooth or the tone-pattern "
                      "factor smooth");

    Eigen::VectorXd female = term_curve(model, time_by_gender, "female", grid);
    for (const std::string& pattern : model.terms[pattern_fs].levels) {
      Eigen::VectorXd curve =
          female + term_curve(model, pattern_fs, pattern, grid);
      auto [it, inserted] = sums.try_emplace(pattern, curve);
      if (!inserted) it->second += curve;
      ++counts[pattern];
    }
  }
  if (sums.empty())
    throw Error(Errc::empty_pattern, "no tone-pattern curves available");
  for (auto& [pattern, curve] : sums) curve /= counts[pattern];
  return sums;
}

}  // namespace tonelex::contour_models
