#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tonelex/core.hpp"
#include "tonelex/splines.hpp"

namespace tonelex::contour_models {

// ---------------------------------------------------------------------------
// Model terms
// ---------------------------------------------------------------------------

enum class TermKind {
  parametric_factor,  // treatment-coded dummy columns, unpenalized
  smooth,             // centered univariate penalized smooth
  by_factor_smooth,   // one centered smooth per factor level, shared lambda
  factor_smooth,      // per-level curves under order-1 difference + ridge
  random_intercept,   // per-level offsets under a ridge
};

const char* to_string(TermKind kind);

struct TermSpec {
  TermKind kind = TermKind::smooth;
  std::string covariate;  // numeric field name or "normalized_t"
  std::string factor;     // grouping field for parametric/by/fs/re kinds
  int basis_k = 4;
  int degree = 3;
  int penalty_order = 2;  // factor smooths always use order 1 (plus ridge)

  std::string label() const;
};

TermSpec parametric(std::string factor);
TermSpec smooth(std::string covariate, int k = 4, int penalty_order = 2);
TermSpec by_smooth(std::string covariate, std::string factor, int k = 4,
                   int penalty_order = 2);
TermSpec factor_smooth(std::string covariate, std::string factor, int k = 5);
TermSpec random_intercept(std::string factor);

/// Declarative additive model for log f0 at the f0-sample level. A global
/// intercept is always present and implicit. `filter` restricts the fit to
/// tokens whose factor_field(filter->first) equals filter->second.
struct ModelSpec {
  std::string label;
  std::vector<TermSpec> terms;
  std::optional<std::pair<std::string, std::string>> filter;
  double ar1_rho = 0.95;  // 0 disables residual whitening

  ModelSpec& filtered_on(std::string field, std::string value) {
    filter = {std::move(field), std::move(value)};
    return *this;
  }
};

/// The standard per-context model: gender + by-gender time smooths + speaker
/// random intercepts + factor smooths of time by tone pattern and by the
/// lexical factor (word or sense_type) + by-gender speech-rate smooth +
/// covariate smooths for utterance position and both bigram probabilities.
ModelSpec default_context_model(const std::string& tonal_context,
                                const std::string& lexical_factor = "word",
                                int factor_smooth_k = 4);

// ---------------------------------------------------------------------------
// Fitted state
// ---------------------------------------------------------------------------

struct FittedTerm {
  TermSpec spec;
  Eigen::Index offset = 0;  // first design column of this term
  Eigen::Index size = 0;    // total columns
  double lambda = 0.0;       // 0 for unpenalized terms
  double lambda_ridge = 0.0; // factor smooths only: the level-shrinkage ridge
  double edf = 0.0;
  splines::BasisSpec basis;               // domain resolved from the data
  std::vector<std::string> levels;        // factor-backed terms
  Eigen::Index per_level_size = 0;        // columns per level (by/fs)
  std::vector<Eigen::MatrixXd> constraints;  // per-level Z for centered kinds
  int lambda_group = -1;                  // indices into the lambda vector
  int ridge_group = -1;
};

struct FittedModel {
  ModelSpec spec;
  Eigen::VectorXd coefficients;  // intercept first
  std::vector<FittedTerm> terms;
  double rss = 0.0;
  double edf = 0.0;
  double gcv = 0.0;
  Eigen::Index n_obs = 0;     // f0 samples entering the fit
  std::size_t n_tokens = 0;

  double intercept() const { return coefficients(0); }
  /// Gaussian AIC; throws DegenerateFit on a zero-residual fit.
  double aic() const;
};

/// Builds the sample-level design (one row per f0 sample, token covariates
/// broadcast), whitens per token when ar1_rho > 0, selects one lambda per
/// penalized term by GCV (grid sweeps, coordinate descent for multi-term
/// models) and returns the fitted state.
FittedModel fit_model(const ModelSpec& spec, const CorpusDataset& dataset);

/// AIC(reduced) - AIC(full): positive when the withheld term was helping.
double compare_aic(const ModelSpec& spec_full, const ModelSpec& spec_reduced,
                   const CorpusDataset& dataset);

/// Predicted log-f0 contour for one token over the normalized-time grid,
/// using the token's own covariate and factor values. Throws UnseenLevel for
/// factor levels absent at fit time.
Eigen::VectorXd predict_contour(const FittedModel& model, const TokenRecord& token,
                                std::span<const double> grid);

/// Partial-effect curve of one term over the grid. `level` selects the
/// factor level for by/fs kinds and is ignored for plain smooths. For terms
/// over covariates other than normalized_t the curve is over that
/// covariate's fitted domain instead.
Eigen::VectorXd term_curve(const FittedModel& model, std::size_t term_index,
                           const std::string& level, std::span<const double> grid);

// ---------------------------------------------------------------------------
// Fixed-length pitch vectors
// ---------------------------------------------------------------------------

enum class Method { I = 1, II = 2, III = 3 };
const char* to_string(Method m);

/// Fixed-length log-f0 contour rows (pre-normalization) plus bookkeeping of
/// which tokens were excluded and why. Rows align with `row_index`.
struct ContourSet {
  Method method = Method::I;
  Eigen::MatrixXd values;
  std::vector<std::string> row_index;
  std::vector<double> grid;
  std::vector<std::string> provenance;  // fitted-model identifier per row
  std::vector<std::pair<std::string, std::string>> excluded;  // (token, reason)
};

/// Per-token penalized spline of log f0 on normalized time (k=10, order-2
/// penalty, GCV over a widened ladder), evaluated on the grid. Tokens with
/// fewer than 4 samples are excluded and logged, not fatal.
ContourSet contours_method1(const CorpusDataset& dataset, int grid_p,
                            int basis_k = 10);

/// One model per tone pattern: global time smooth + factor smooth by the
/// grouping field (word or sense_type). Every token of a group receives the
/// identical row: global smooth + its group's curve.
ContourSet contours_method2(const CorpusDataset& dataset, int grid_p,
                            const std::string& group_field = "word",
                            double ar1_rho = 0.95);

/// Token-specific rows predicted from the fitted per-context models using
/// each token's own covariates. Tokens whose tonal context has no fitted
/// model are excluded and logged.
ContourSet contours_method3(const CorpusDataset& dataset,
                            const std::vector<FittedModel>& context_models,
                            int grid_p);

/// Z-scores every row (mean 0, sample sd 1). Throws ZeroVariance naming the
/// first constant row.
PitchMatrix normalize_rows(const ContourSet& contours);

/// Tone-pattern reference contours: per context model, the female global
/// time smooth plus the pattern's factor-smooth curve, averaged across the
/// models that contain the pattern. Keyed by pattern label.
std::map<std::string, Eigen::VectorXd> gold_pattern_contours(
    const std::vector<FittedModel>& context_models, int grid_p);

}  // namespace tonelex::contour_models
