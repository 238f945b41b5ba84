#include "tonelex/centroid.hpp"

#include <algorithm>
#include <cmath>

namespace tonelex::centroid {

std::map<std::string, Eigen::VectorXd> word_centroids(
    const SemanticMatrix& semantic,
    const std::map<std::string, std::string>& word_of) {
  std::map<std::string, Eigen::VectorXd> sums;
  std::map<std::string, int> counts;
  for (Eigen::Index i = 0; i < semantic.rows(); ++i) {
    const std::string& word = word_of.at(semantic.row_index[i]);
    auto [it, inserted] = sums.try_emplace(word, semantic.values.row(i).transpose());
    if (!inserted) it->second += semantic.values.row(i).transpose();
    ++counts[word];
  }
  for (auto& [word, sum] : sums) sum /= counts[word];
  return sums;
}

std::map<std::string, Eigen::VectorXd> pattern_centroids(
    const std::map<std::string, Eigen::VectorXd>& word_centroids,
    const std::map<std::string, std::string>& pattern_of_word) {
  std::map<std::string, Eigen::VectorXd> sums;
  std::map<std::string, int> counts;
  for (const auto& [word, wc] : word_centroids) {
    auto it = pattern_of_word.find(word);
    if (it == pattern_of_word.end())
      throw Error(Errc::empty_pattern, "word '" + word + "' has no tone pattern");
    auto [sit, inserted] = sums.try_emplace(it->second, wc);
    if (!inserted) sit->second += wc;
    ++counts[it->second];
  }
  if (sums.empty()) throw Error(Errc::empty_pattern, "no word centroids given");
  for (auto& [pattern, sum] : sums) sum /= counts[pattern];
  return sums;
}

std::vector<std::pair<std::string, double>> nearest_words(
    const Eigen::VectorXd& centroid,
    const std::map<std::string, Eigen::VectorXd>& word_centroids, int top_k) {
  if (static_cast<int>(word_centroids.size()) < top_k)
    throw Error(Errc::config_error,
                "need at least " + std::to_string(top_k) + " words");
  std::vector<std::pair<std::string, double>> ranked;
  ranked.reserve(word_centroids.size());
  for (const auto& [word, wc] : word_centroids)
    ranked.emplace_back(word, (wc - centroid).norm());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  ranked.resize(top_k);
  return ranked;
}

Eigen::VectorXd z_normalize(const Eigen::VectorXd& v) {
  const Eigen::Index p = v.size();
  const double mean = v.mean();
  const double ssd = (v.array() - mean).square().sum();
  if (!(ssd > 0.0))
    throw Error(Errc::zero_variance, "cannot z-normalize a constant vector");
  const double sd = std::sqrt(ssd / static_cast<double>(p - 1));
  return (v.array() - mean) / sd;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0))
    throw Error(Errc::zero_variance, "cosine of a zero vector");
  return a.dot(b) / (na * nb);
}

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return cosine_similarity(a.array() - a.mean(), b.array() - b.mean());
}

PrototypeResult prototype_contours(
    const std::string& method, const dlm_map::MappingG& mapping,
    const std::map<std::string, Eigen::VectorXd>& pattern_centroids,
    const std::map<std::string, Eigen::VectorXd>& gold_contours,
    const std::map<std::string, int>& words_per_pattern) {
  PrototypeResult out;
  out.method = method;
  for (const auto& [pattern, centroid] : pattern_centroids) {
    auto gold_it = gold_contours.find(pattern);
    if (gold_it == gold_contours.end())
      throw Error(Errc::empty_pattern,
                  "no reference contour for pattern " + pattern);

    Eigen::MatrixXd projected = dlm_map::predict(mapping, centroid.transpose());

    PatternPrototype proto;
    proto.tone_pattern = pattern;
    proto.centroid = centroid;
    auto words_it = words_per_pattern.find(pattern);
    proto.n_words = words_it == words_per_pattern.end() ? 0 : words_it->second;
    proto.projected_contour = z_normalize(projected.row(0).transpose());
    proto.gold_contour = z_normalize(gold_it->second);

    SimilarityRow row;
    row.method = method;
    row.tone_pattern = pattern;
    row.cosine = cosine_similarity(proto.projected_contour, proto.gold_contour);
    row.pearson = pearson_correlation(proto.projected_contour, proto.gold_contour);
    row.euclidean = (proto.projected_contour - proto.gold_contour).norm();

    out.mean_cosine += row.cosine;
    out.mean_pearson += row.pearson;
    out.mean_euclidean += row.euclidean;
    out.prototypes.push_back(std::move(proto));
    out.rows.push_back(std::move(row));
  }
  if (out.rows.empty())
    throw Error(Errc::empty_pattern, "no pattern centroids given");
  out.mean_cosine /= static_cast<double>(out.rows.size());
  out.mean_pearson /= static_cast<double>(out.rows.size());
  out.mean_euclidean /= static_cast<double>(out.rows.size());
  return out;
}

}  // namespace tonelex::centroid
