#pragma once

#include <map>
#include <string>
#include <vector>

#include "tonelex/core.hpp"
#include "tonelex/dlm_map.hpp"

namespace tonelex::centroid {

/// Mean embedding of each word's tokens.
std::map<std::string, Eigen::VectorXd> word_centroids(
    const SemanticMatrix& semantic,
    const std::map<std::string, std::string>& word_of);

/// Unweighted mean of word centroids per tone pattern: every word counts
/// once no matter how many tokens it has. Throws EmptyPattern when a word's
/// pattern map is missing.
std::map<std::string, Eigen::VectorXd> pattern_centroids(
    const std::map<std::string, Eigen::VectorXd>& word_centroids,
    const std::map<std::string, std::string>& pattern_of_word);

/// Words ranked by ascending Euclidean distance to the centroid, ties by
/// label; truncated to top_k.
std::vector<std::pair<std::string, double>> nearest_words(
    const Eigen::VectorXd& centroid,
    const std::map<std::string, Eigen::VectorXd>& word_centroids, int top_k = 2);

// ---------------------------------------------------------------------------
// Prototype contours and similarity to the reference curves
// ---------------------------------------------------------------------------

struct PatternPrototype {
  std::string tone_pattern;
  Eigen::VectorXd centroid;           // q
  int n_words = 0;
  Eigen::VectorXd projected_contour;  // p, z-normalized
  Eigen::VectorXd gold_contour;       // p, z-normalized
};

struct SimilarityRow {
  std::string method;
  std::string tone_pattern;
  double cosine = 0.0;
  double pearson = 0.0;
  double euclidean = 0.0;
};

struct PrototypeResult {
  std::string method;
  std::vector<PatternPrototype> prototypes;  // pattern label order
  std::vector<SimilarityRow> rows;
  double mean_cosine = 0.0;
  double mean_pearson = 0.0;
  double mean_euclidean = 0.0;
};

/// Projects each pattern centroid through G, z-normalizes it (training
/// targets are z-normalized rows) and compares against the z-normalized
/// reference contour with cosine, Pearson and Euclidean measures.
PrototypeResult prototype_contours(
    const std::string& method, const dlm_map::MappingG& mapping,
    const std::map<std::string, Eigen::VectorXd>& pattern_centroids,
    const std::map<std::string, Eigen::VectorXd>& gold_contours,
    const std::map<std::string, int>& words_per_pattern);

// Similarity helpers (exposed for the report plots and tests).
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
Eigen::VectorXd z_normalize(const Eigen::VectorXd& v);

}  // namespace tonelex::centroid
