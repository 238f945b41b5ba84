#include "tonelex/dlm_map.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "tonelex/rng.hpp"

namespace tonelex::dlm_map {

SplitPlan make_split(const std::vector<std::string>& token_ids,
                     const std::map<std::string, std::string>& word_of,
                     double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0) || !(train_frac < 1.0))
    throw Error(Errc::config_error, "train fraction must lie in (0,1)");

  std::map<std::string, std::vector<std::string>> by_word;
  for (const std::string& id : token_ids) by_word[word_of.at(id)].push_back(id);

  std::set<std::string> train_set;
  SplitPlan plan;
  plan.rng_seed = seed;
  plan.train_frac = train_frac;
  for (const auto& [word, ids] : by_word) {
    const int n = static_cast<int>(ids.size());
    if (n < 2)
      throw Error(Errc::word_too_small,
                  "word '" + word + "' has " + std::to_string(n) +
                      " token(s); both partitions need at least one");
    int n_train = static_cast<int>(std::llround(train_frac * n));
    n_train = std::clamp(n_train, 1, n - 1);
    std::vector<std::string> shuffled = ids;
    std::mt19937_64 rng = seeded_rng(seed, word);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (int i = 0; i < n_train; ++i) train_set.insert(shuffled[i]);
    plan.per_word[word] = {n_train, n - n_train};
  }
  for (const std::string& id : token_ids) {
    if (train_set.contains(id))
      plan.train_ids.push_back(id);
    else
      plan.test_ids.push_back(id);
  }
  return plan;
}

MappingG fit_mapping(const Eigen::MatrixXd& semantic_train,
                     const Eigen::MatrixXd& pitch_train, double ridge) {
  if (semantic_train.rows() != pitch_train.rows())
    throw Error(Errc::shape_mismatch,
                "semantic and pitch training matrices disagree on rows");
  if (semantic_train.rows() < 1)
    throw Error(Errc::empty_data, "no training rows");
  if (ridge < 0.0) throw Error(Errc::config_error, "ridge must be >= 0");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(semantic_train,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-10 * sv(0) : 0.0;

  Eigen::VectorXd factors = Eigen::VectorXd::Zero(sv.size());
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) {
      factors(i) = ridge > 0.0 ? sv(i) / (sv(i) * sv(i) + ridge) : 1.0 / sv(i);
      ++rank;
    }
  }

  MappingG g;
  g.matrix = svd.matrixV() * factors.asDiagonal() *
             (svd.matrixU().transpose() * pitch_train);
  g.rank = rank;
  g.sv_cutoff = cutoff;
  g.n_train = semantic_train.rows();
  g.ridge = ridge;
  return g;
}

Eigen::MatrixXd predict(const MappingG& mapping, const Eigen::MatrixXd& semantic) {
  if (semantic.cols() != mapping.matrix.rows())
    throw Error(Errc::shape_mismatch,
                "embedding dimension " + std::to_string(semantic.cols()) +
                    " does not match the mapping (q=" +
                    std::to_string(mapping.matrix.rows()) + ")");
  return semantic * mapping.matrix;
}

NnEval nn_evaluate(const Eigen::MatrixXd& predicted,
                   const std::vector<std::string>& predicted_ids,
                   const Eigen::MatrixXd& gold,
                   const std::vector<std::string>& gold_ids,
                   const std::map<std::string, std::string>& word_of,
                   bool exclude_self) {
  if (predicted.rows() != static_cast<Eigen::Index>(predicted_ids.size()) ||
      gold.rows() != static_cast<Eigen::Index>(gold_ids.size()))
    throw Error(Errc::shape_mismatch, "row index does not match matrix");
  if (predicted.cols() != gold.cols())
    throw Error(Errc::shape_mismatch, "predicted and gold dimensions differ");

  NnEval eval;
  eval.rows.reserve(predicted_ids.size());
  for (Eigen::Index i = 0; i < predicted.rows(); ++i) {
    Eigen::Index best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < gold.rows(); ++j) {
      if (exclude_self && gold_ids[j] == predicted_ids[i]) continue;
      const double d2 = (gold.row(j) - predicted.row(i)).squaredNorm();
      if (d2 < best_d2) {  // strict: exact ties keep the smallest row index
        best_d2 = d2;
        best = j;
      }
    }
    if (best < 0)
      throw Error(Errc::empty_data, "no gold candidates for " + predicted_ids[i]);
    NnRow row;
    row.token_id = predicted_ids[i];
    row.neighbor_id = gold_ids[best];
    row.distance = std::sqrt(best_d2);
    row.correct = word_of.at(row.neighbor_id) == word_of.at(row.token_id);
    eval.n_correct += row.correct;
    eval.rows.push_back(std::move(row));
  }
  eval.n_total = predicted_ids.size();
  eval.accuracy =
      eval.n_total ? static_cast<double>(eval.n_correct) / eval.n_total : 0.0;
  return eval;
}

double majority_baseline(const std::vector<std::string>& train_ids,
                         const std::vector<std::string>& test_ids,
                         const std::map<std::string, std::string>& word_of) {
  if (test_ids.empty()) throw Error(Errc::empty_data, "empty test set");
  std::map<std::string, int> counts;
  for (const std::string& id : train_ids) ++counts[word_of.at(id)];
  std::string top;
  int best = -1;
  for (const auto& [word, c] : counts)
    if (c > best) {  // map order resolves ties toward the smaller word
      best = c;
      top = word;
    }
  int hits = 0;
  for (const std::string& id : test_ids) hits += word_of.at(id) == top;
  return static_cast<double>(hits) / static_cast<double>(test_ids.size());
}

PermutationBaseline permutation_baseline(
    const Eigen::MatrixXd& semantic_train, const Eigen::MatrixXd& pitch_train,
    const Eigen::MatrixXd& semantic_test, const std::vector<std::string>& test_ids,
    const Eigen::MatrixXd& gold, const std::vector<std::string>& gold_ids,
    const std::map<std::string, std::string>& word_of, int repetitions,
    std::uint64_t seed, double ridge) {
  if (repetitions < 1)
    throw Error(Errc::config_error, "permutation baseline needs R >= 1");

  PermutationBaseline out;
  out.repetitions = repetitions;
  const Eigen::Index n = pitch_train.rows();
  for (int rep = 0; rep < repetitions; ++rep) {
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::mt19937_64 rng(mix64(seed + static_cast<std::uint64_t>(rep)));
    std::shuffle(perm.begin(), perm.end(), rng);

    Eigen::MatrixXd shuffled(n, pitch_train.cols());
    for (Eigen::Index i = 0; i < n; ++i) shuffled.row(i) = pitch_train.row(perm[i]);

    MappingG g = fit_mapping(semantic_train, shuffled, ridge);
    NnEval eval = nn_evaluate(predict(g, semantic_test), test_ids, gold, gold_ids,
                              word_of, false);
    out.per_rep.push_back(eval.accuracy);
  }
  double sum = 0.0;
  for (double a : out.per_rep) sum += a;
  out.mean = sum / repetitions;
  if (repetitions > 1) {
    double ssd = 0.0;
    for (double a : out.per_rep) ssd += (a - out.mean) * (a - out.mean);
    out.sd = std::sqrt(ssd / (repetitions - 1));
  }
  return out;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m,
                        const std::vector<std::string>& index,
                        const std::vector<std::string>& wanted) {
  std::unordered_map<std::string_view, Eigen::Index> where;
  where.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i)
    where.emplace(index[i], static_cast<Eigen::Index>(i));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(wanted.size()), m.cols());
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    auto it = where.find(wanted[i]);
    if (it == where.end())
      throw Error(Errc::shape_mismatch, "row '" + wanted[i] + "' missing from matrix");
    out.row(static_cast<Eigen::Index>(i)) = m.row(it->second);
  }
  return out;
}

EvalReport evaluate_method(const std::string& method_name,
                           const SemanticMatrix& semantic, const PitchMatrix& pitch,
                           const std::map<std::string, std::string>& word_of,
                           const SplitPlan& split, int permutation_reps,
                           std::uint64_t permutation_seed, CandidateSet candidates,
                           double ridge) {
  EvalReport report;
  report.method = method_name;
  report.n_train = split.train_ids.size();
  report.n_test = split.test_ids.size();

  const Eigen::MatrixXd s_train = rows_of(semantic.values, semantic.row_index, split.train_ids);
  const Eigen::MatrixXd s_test = rows_of(semantic.values, semantic.row_index, split.test_ids);
  const Eigen::MatrixXd c_train = rows_of(pitch.values, pitch.row_index, split.train_ids);

  MappingG g = fit_mapping(s_train, c_train, ridge);
  const Eigen::MatrixXd pred_train = predict(g, s_train);
  const Eigen::MatrixXd pred_test = predict(g, s_test);

  const Eigen::MatrixXd* gold_train = &pitch.values;
  const Eigen::MatrixXd* gold_test = &pitch.values;
  const std::vector<std::string>* gold_train_ids = &pitch.row_index;
  const std::vector<std::string>* gold_test_ids = &pitch.row_index;
  Eigen::MatrixXd part_train, part_test;
  if (candidates == CandidateSet::partition) {
    part_train = c_train;
    part_test = rows_of(pitch.values, pitch.row_index, split.test_ids);
    gold_train = &part_train;
    gold_test = &part_test;
    gold_train_ids = &split.train_ids;
    gold_test_ids = &split.test_ids;
  }

  NnEval train_eval = nn_evaluate(pred_train, split.train_ids, *gold_train,
                                  *gold_train_ids, word_of, false);
  NnEval train_excl = nn_evaluate(pred_train, split.train_ids, *gold_train,
                                  *gold_train_ids, word_of, true);
  NnEval test_eval = nn_evaluate(pred_test, split.test_ids, *gold_test,
                                 *gold_test_ids, word_of, false);

  report.accuracy_train = train_eval.accuracy;
  report.accuracy_train_excl_self = train_excl.accuracy;
  report.accuracy_test = test_eval.accuracy;
  report.train_rows = std::move(train_eval.rows);
  report.test_rows = std::move(test_eval.rows);
  report.mapping = g;
  report.majority = majority_baseline(split.train_ids, split.test_ids, word_of);
  if (permutation_reps > 0)
    report.permutation = permutation_baseline(
        s_train, c_train, s_test, split.test_ids, *gold_test, *gold_test_ids,
        word_of, permutation_reps, permutation_seed, ridge);
  return report;
}

}  // namespace tonelex::dlm_map
