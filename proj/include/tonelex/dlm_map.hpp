#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tonelex/core.hpp"

namespace tonelex::dlm_map {

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

struct SplitPlan {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::map<std::string, std::pair<int, int>> per_word;  // word -> (train, test)
  std::uint64_t rng_seed = 0;
  double train_frac = 0.0;
};

/// Per word: round(frac * n_w) tokens in train, clamped to [1, n_w-1], so
/// every word appears on both sides. Token choice is drawn from a per-word
/// seeded generator; identical inputs and seed give the identical plan.
/// Throws WordTooSmall for words with fewer than 2 tokens.
SplitPlan make_split(const std::vector<std::string>& token_ids,
                     const std::map<std::string, std::string>& word_of,
                     double train_frac = 0.8039, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Linear mapping
// ---------------------------------------------------------------------------

struct MappingG {
  Eigen::MatrixXd matrix;  // q x p
  Eigen::Index rank = 0;
  double sv_cutoff = 0.0;  // absolute singular-value cutoff applied
  Eigen::Index n_train = 0;
  double ridge = 0.0;
};

/// Least-squares G = argmin |S G - C|_F^2 (+ ridge |G|_F^2), solved by SVD
/// with a 1e-10 relative singular-value cutoff; the minimum-norm solution
/// when S is rank-deficient.
MappingG fit_mapping(const Eigen::MatrixXd& semantic_train,
                     const Eigen::MatrixXd& pitch_train, double ridge = 0.0);

/// Rows of `semantic` mapped to pitch vectors: S * G.
Eigen::MatrixXd predict(const MappingG& mapping, const Eigen::MatrixXd& semantic);

// ---------------------------------------------------------------------------
// Nearest-neighbor evaluation and baselines
// ---------------------------------------------------------------------------

struct NnRow {
  std::string token_id;
  std::string neighbor_id;
  double distance = 0.0;
  bool correct = false;
};

struct NnEval {
  double accuracy = 0.0;
  std::size_t n_correct = 0;
  std::size_t n_total = 0;
  std::vector<NnRow> rows;
};

/// For every predicted row, the Euclidean-nearest gold row; exact ties break
/// toward the smallest gold row index. Correct iff the neighbor's word type
/// equals the target token's word type. `exclude_self` drops the gold row
/// whose token id equals the predicted row's id (self-matches otherwise
/// count, and are correct by construction).
NnEval nn_evaluate(const Eigen::MatrixXd& predicted,
                   const std::vector<std::string>& predicted_ids,
                   const Eigen::MatrixXd& gold,
                   const std::vector<std::string>& gold_ids,
                   const std::map<std::string, std::string>& word_of,
                   bool exclude_self = false);

/// Share of test tokens whose word is the most frequent word type of the
/// training set (ties toward the lexicographically smaller word).
double majority_baseline(const std::vector<std::string>& train_ids,
                         const std::vector<std::string>& test_ids,
                         const std::map<std::string, std::string>& word_of);

struct PermutationBaseline {
  double mean = 0.0;
  double sd = 0.0;
  int repetitions = 0;
  std::vector<double> per_rep;
};

/// R repetitions of: permute the train-row correspondence between S and C,
/// refit G, evaluate test nearest-neighbor accuracy against the same gold
/// candidates. Deterministic under the seed.
PermutationBaseline permutation_baseline(
    const Eigen::MatrixXd& semantic_train, const Eigen::MatrixXd& pitch_train,
    const Eigen::MatrixXd& semantic_test, const std::vector<std::string>& test_ids,
    const Eigen::MatrixXd& gold, const std::vector<std::string>& gold_ids,
    const std::map<std::string, std::string>& word_of, int repetitions,
    std::uint64_t seed, double ridge = 0.0);

// ---------------------------------------------------------------------------
// Full evaluation report for one pitch-vector method
// ---------------------------------------------------------------------------

struct EvalReport {
  std::string method;
  double accuracy_train = 0.0;             // self-matches allowed
  double accuracy_train_excl_self = 0.0;   // self gold row removed
  double accuracy_test = 0.0;
  double majority = 0.0;
  PermutationBaseline permutation;         // repetitions == 0 when disabled
  std::size_t n_train = 0, n_test = 0;
  std::vector<NnRow> test_rows;
  std::vector<NnRow> train_rows;
  MappingG mapping;                        // the fitted meaning-to-pitch map
};

/// Candidate set for the nearest-neighbor search.
enum class CandidateSet { all, partition };

/// Splits, fits G, and evaluates one method's matrices end to end.
EvalReport evaluate_method(const std::string& method_name,
                           const SemanticMatrix& semantic, const PitchMatrix& pitch,
                           const std::map<std::string, std::string>& word_of,
                           const SplitPlan& split, int permutation_reps,
                           std::uint64_t permutation_seed,
                           CandidateSet candidates = CandidateSet::all,
                           double ridge = 0.0);

/// Row-aligned extraction helpers.
Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m,
                        const std::vector<std::string>& index,
                        const std::vector<std::string>& wanted);

}  // namespace tonelex::dlm_map
