#include <doctest.h>

#include <random>

#include "tonelex/centroid.hpp"

using namespace tonelex;
using namespace tonelex::centroid;

namespace {

SemanticMatrix semantic_from(const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  SemanticMatrix s;
  s.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows[0].second.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.row_index.push_back(rows[i].first);
    for (std::size_t j = 0; j < rows[i].second.size(); ++j)
      s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i].second[j];
  }
  return s;
}

}  // namespace

TEST_CASE("word centroids are plain token means") {
  SemanticMatrix s = semantic_from({{"t1", {0, 0}}, {"t2", {2, 2}}, {"t3", {7, -1}}});
  std::map<std::string, std::string> word_of = {
      {"t1", "wa"}, {"t2", "wa"}, {"t3", "wb"}};
  auto wc = word_centroids(s, word_of);
  CHECK(wc.at("wa")(0) == doctest::Approx(1.0));
  CHECK(wc.at("wa")(1) == doctest::Approx(1.0));
  // single-token word is its own embedding
  CHECK(wc.at("wb")(0) == 7.0);
  CHECK(wc.at("wb")(1) == -1.0);
}

TEST_CASE("word centroids match an independent summation oracle") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  double sums[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    std::vector<double> v = {g(rng), g(rng), g(rng)};
    for (int j = 0; j < 3; ++j) sums[j] += v[j];
    rows.push_back({"t" + std::to_string(i), v});
  }
  SemanticMatrix s = semantic_from(rows);
  std::map<std::string, std::string> word_of = {
      {"t0", "w"}, {"t1", "w"}, {"t2", "w"}};
  auto wc = word_centroids(s, word_of);
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(wc.at("w")(j) - sums[j] / 3.0) < 1e-12);
}

TEST_CASE("pattern centroids weight words equally, not by token count") {
  // word A at (0,0) with 1 token, word B at (4,0) with 99 tokens
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  rows.push_back({"a0", {0, 0}});
  for (int i = 0; i < 99; ++i) rows.push_back({"b" + std::to_string(i), {4, 0}});
  SemanticMatrix s = semantic_from(rows);
  std::map<std::string, std::string> word_of;
  word_of["a0"] = "wordA";
  for (int i = 0; i < 99; ++i) word_of["b" + std::to_string(i)] = "wordB";

  auto wc = word_centroids(s, word_of);
  std::map<std::string, std::string> pattern_of = {{"wordA", "T1-T1"},
                                                   {"wordB", "T1-T1"}};
  auto pc = pattern_centroids(wc, pattern_of);
  CHECK(pc.at("T1-T1")(0) == doctest::Approx(2.0));  // not 3.96
  CHECK(pc.at("T1-T1")(1) == doctest::Approx(0.0));
}

TEST_CASE("pattern centroid is unchanged when one word's tokens are duplicated") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  auto vec = [&] { return std::vector<double>{g(rng), g(rng)}; };
  std::vector<std::pair<std::string, std::vector<double>>> rows = {
      {"a0", vec()}, {"a1", vec()}, {"b0", vec()}, {"b1", vec()}};
  std::map<std::string, std::string> word_of = {
      {"a0", "wa"}, {"a1", "wa"}, {"b0", "wb"}, {"b1", "wb"}};
  std::map<std::string, std::string> pattern_of = {{"wa", "T2-T2"}, {"wb", "T2-T2"}};

  auto pc_before =
      pattern_centroids(word_centroids(semantic_from(rows), word_of), pattern_of);

  // duplicate every token of word A
  auto dup = rows;
  dup.push_back({"a0x", rows[0].second});
  dup.push_back({"a1x", rows[1].second});
  word_of["a0x"] = "wa";
  word_of["a1x"] = "wa";
  auto pc_after =
      pattern_centroids(word_centroids(semantic_from(dup), word_of), pattern_of);

  CHECK((pc_before.at("T2-T2") - pc_after.at("T2-T2")).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nearest_words ranks by distance with label tie-break") {
  std::map<std::string, Eigen::VectorXd> wc;
  Eigen::VectorXd a(2), b(2), c(2);
  a << 1, 0;
  b << 0, 2;
  c << 3, 3;
  wc["wa"] = a;
  wc["wb"] = b;
  wc["wc"] = c;

  auto top = nearest_words(a, wc, 2);
  CHECK(top[0].first == "wa");
  CHECK(top[0].second == 0.0);
  CHECK(top[1].first == "wb");

  auto all = nearest_words(a, wc, 3);
  CHECK(all.size() == 3);
  CHECK(all[2].first == "wc");

  CHECK_THROWS_AS(nearest_words(a, wc, 4), Error);
}

TEST_CASE("similarity helpers behave on hand vectors") {
  Eigen::VectorXd v1(4), v2(4);
  v1 << 1, -1, 1, -1;
  v2 << 1, 1, -1, -1;
  CHECK(cosine_similarity(v1, v2) == doctest::Approx(0.0));
  CHECK(cosine_similarity(v1, v1) == doctest::Approx(1.0));

  // pearson of two z-normalized vectors equals dot/(p-1)
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd raw1(20), raw2(20);
  for (int i = 0; i < 20; ++i) {
    raw1(i) = g(rng);
    raw2(i) = g(rng);
  }
  Eigen::VectorXd z1 = z_normalize(raw1), z2 = z_normalize(raw2);
  CHECK(std::abs(pearson_correlation(z1, z2) - z1.dot(z2) / 19.0) < 1e-12);

  CHECK_THROWS_AS(z_normalize(Eigen::VectorXd::Constant(5, 3.0)), Error);
}

TEST_CASE("prototype contours: exact match and a zero-information mapping") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  const int q = 6, p = 30;

  // mapping whose projection of the centroid equals the gold contour
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(q, q);
  Eigen::MatrixXd c(q, p);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < p; ++j) c(i, j) = g(rng);
  dlm_map::MappingG mapping = dlm_map::fit_mapping(s, c);

  Eigen::VectorXd centroid = Eigen::VectorXd::Zero(q);
  centroid(2) = 1.0;  // picks out row 2 of C
  std::map<std::string, Eigen::VectorXd> pc = {{"T4-T2", centroid}};
  std::map<std::string, Eigen::VectorXd> gold = {{"T4-T2", c.row(2).transpose()}};
  std::map<std::string, int> counts = {{"T4-T2", 3}};

  PrototypeResult r = prototype_contours("II", mapping, pc, gold, counts);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].cosine == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.rows[0].pearson == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.rows[0].euclidean == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(r.prototypes[0].n_words == 3);
}

TEST_CASE("projection of the centroid equals the centroid of projections") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g(0.0, 1.0);
  const int q = 8, p = 25, n = 40;
  Eigen::MatrixXd s(n, q), c(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < q; ++j) s(i, j) = g(rng);
    for (int j = 0; j < p; ++j) c(i, j) = g(rng);
  }
  dlm_map::MappingG mapping = dlm_map::fit_mapping(s, c);

  // member vectors of one "pattern"
  Eigen::MatrixXd members = s.topRows(12);
  Eigen::VectorXd centroid = members.colwise().mean().transpose();
  Eigen::VectorXd proj_of_centroid =
      dlm_map::predict(mapping, centroid.transpose()).row(0);
  Eigen::VectorXd centroid_of_proj =
      dlm_map::predict(mapping, members).colwise().mean().transpose();
  CHECK((proj_of_centroid - centroid_of_proj).cwiseAbs().maxCoeff() < 1e-12);
}
