#include <doctest.h>

#include <set>

#include "desk/forest.hpp"
#include "desk/io.hpp"
#include "desk/rng.hpp"
#include "helpers.hpp"

using namespace desk;

namespace {

FeatureVector fv(std::vector<std::uint8_t> bits) {
  return {std::move(bits), {}};
}

// n distinct random binary vectors with arbitrary labels: conflict-free.
void random_conflict_free(Rng& rng, int n, int dim, int n_labels,
                          std::vector<FeatureVector>& samples,
                          std::vector<int>& labels) {
  std::set<std::vector<std::uint8_t>> seen;
  while (static_cast<int>(samples.size()) < n) {
    std::vector<std::uint8_t> bits(dim);
    for (auto& b : bits) b = rng.below(2);
    if (!seen.insert(bits).second) continue;
    samples.push_back(fv(bits));
    labels.push_back(static_cast<int>(rng.below(n_labels)));
  }
}

int tree_predict(const Tree& tree, const FeatureVector& x) {
  int node = 0;
  while (!tree.nodes[node].is_leaf()) {
    node = x.values[tree.nodes[node].feature] ? tree.nodes[node].right
                                              : tree.nodes[node].left;
  }
  const auto& counts = tree.nodes[node].counts;
  int best = 0;
  for (int l = 1; l < static_cast<int>(counts.size()); ++l) {
    if (counts[l] > counts[best]) best = l;
  }
  return best;
}

}  // namespace

TEST_CASE("gini impurity hand values") {
  CHECK(gini({5, 5}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gini({10}) == 0.0);
  CHECK(gini({1, 1, 2}) == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(gini({0, 3}) == 0.0);
  CHECK_THROWS_AS(gini({}), Error);
  CHECK_THROWS_AS(gini({0, 0}), Error);
}

TEST_CASE("gini is zero exactly on pure nodes") {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::int64_t> counts(1 + rng.below(5));
    for (auto& c : counts) c = rng.below(20);
    std::int64_t total = 0, nonzero = 0;
    for (auto c : counts) total += c, nonzero += c > 0;
    if (total == 0) continue;
    if (nonzero <= 1) {
      CHECK(gini(counts) == 0.0);
    } else {
      CHECK(gini(counts) > 0.0);
    }
  }
}

TEST_CASE("pure labels give a single leaf") {
  const std::vector<FeatureVector> samples = {fv({0, 1}), fv({1, 0}), fv({1, 1})};
  const Tree tree = fit_tree(samples, {2, 2, 2}, 3, 0, 2);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].is_leaf());
  CHECK(tree.nodes[0].counts == std::vector<std::int64_t>{0, 0, 3});
}

TEST_CASE("a perfectly predictive feature yields a depth-1 tree") {
  Rng rng(9);
  std::vector<FeatureVector> samples;
  std::vector<int> labels;
  for (int t = 0; t < 40; ++t) {
    std::vector<std::uint8_t> bits(8);
    for (auto& b : bits) b = rng.below(2);
    labels.push_back(bits[3]);
    samples.push_back(fv(std::move(bits)));
  }
  const Tree tree = fit_tree(samples, labels, 2, 7, 8);  // m_try = input_dim
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == 3);
  CHECK(tree.nodes[tree.nodes[0].left].is_leaf());
  CHECK(tree.nodes[tree.nodes[0].right].is_leaf());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    CHECK(tree_predict(tree, samples[s]) == labels[s]);
  }
}

TEST_CASE("constant features with mixed labels give a majority leaf") {
  const std::vector<FeatureVector> samples = {fv({1, 0}), fv({1, 0}), fv({1, 0})};
  const Tree tree = fit_tree(samples, {0, 1, 1}, 2, 0, 2);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree_predict(tree, samples[0]) == 1);
}

TEST_CASE("fully grown trees are exact on conflict-free data") {
  // includes XOR-style labelings, where the first split gains nothing
  {
    const std::vector<FeatureVector> samples = {fv({0, 0}), fv({0, 1}),
                                                fv({1, 0}), fv({1, 1})};
    const std::vector<int> labels = {0, 1, 1, 0};
    const Tree tree = fit_tree(samples, labels, 2, 0, 2);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      CHECK(tree_predict(tree, samples[s]) == labels[s]);
    }
  }
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    std::vector<FeatureVector> samples;
    std::vector<int> labels;
    random_conflict_free(rng, 30, 6, 4, samples, labels);
    const Tree tree = fit_tree(samples, labels, 4, t, 6);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      CHECK(tree_predict(tree, samples[s]) == labels[s]);
    }
  }
}

TEST_CASE("forests are deterministic in the seed") {
  Rng rng(33);
  std::vector<FeatureVector> samples;
  std::vector<int> labels;
  random_conflict_free(rng, 60, 10, 3, samples, labels);
  const std::vector<std::string> domain = {"a", "b", "c"};
  const ForestModel m1 =
      fit_forest(samples, labels, domain, 0, ModalityMask{}, 20, 77);
  const ForestModel m2 =
      fit_forest(samples, labels, domain, 0, ModalityMask{}, 20, 77);
  CHECK(serialize_forest(m1) == serialize_forest(m2));  // bit-exact
  for (int t = 0; t < 50; ++t) {
    std::vector<std::uint8_t> bits(10);
    for (auto& b : bits) b = rng.below(2);
    const FeatureVector probe = fv(bits);
    CHECK(predict(m1, probe) == predict(m2, probe));
    CHECK(predict_proba(m1, probe) == predict_proba(m2, probe));
  }
}

TEST_CASE("a one-tree forest predicts like its tree") {
  Rng rng(44);
  std::vector<FeatureVector> samples;
  std::vector<int> labels;
  random_conflict_free(rng, 40, 8, 3, samples, labels);
  const ForestModel m =
      fit_forest(samples, labels, {"a", "b", "c"}, 0, ModalityMask{}, 1, 5);
  REQUIRE(m.trees.size() == 1);
  for (int t = 0; t < 30; ++t) {
    std::vector<std::uint8_t> bits(8);
    for (auto& b : bits) b = rng.below(2);
    const FeatureVector probe = fv(bits);
    CHECK(predict(m, probe) == tree_predict(m.trees[0], probe));
  }
}

TEST_CASE("a linearly separable dataset trains above 0.95") {
  Rng rng(55);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<FeatureVector> samples;
    std::vector<int> labels;
    for (int t = 0; t < 100; ++t) {
      std::vector<std::uint8_t> bits(12);
      for (auto& b : bits) b = rng.below(2);
      labels.push_back(bits[7]);
      samples.push_back(fv(std::move(bits)));
    }
    const ForestModel m =
        fit_forest(samples, labels, {"0", "1"}, 0, ModalityMask{}, 20, seed);
    int hits = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      hits += predict(m, samples[s]) == labels[s];
    }
    CHECK(static_cast<double>(hits) / samples.size() >= 0.95);
  }
}

TEST_CASE("prediction ties take the earlier label") {
  ForestModel m;
  m.label_domain = {"E", "NE", "N"};
  m.input_dim = 1;
  m.mask = ModalityMask{};
  Tree t1, t2;
  t1.nodes.push_back({-1, -1, -1, {0, 0, 1}});  // votes N
  t2.nodes.push_back({-1, -1, -1, {1, 0, 0}});  // votes E
  m.trees = {t1, t2};
  const FeatureVector probe = fv({1});
  const auto proba = predict_proba(m, probe);
  CHECK(proba[0] == doctest::Approx(0.5));
  CHECK(proba[2] == doctest::Approx(0.5));
  CHECK(predict(m, probe) == 0);  // E and N tie; E is earlier in the domain
}

TEST_CASE("probabilities normalize and argmax matches predict") {
  Rng rng(66);
  std::vector<FeatureVector> samples;
  std::vector<int> labels;
  random_conflict_free(rng, 50, 9, 4, samples, labels);
  const ForestModel m =
      fit_forest(samples, labels, {"a", "b", "c", "d"}, 0, ModalityMask{}, 10, 3);
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::uint8_t> bits(9);
    for (auto& b : bits) b = rng.below(2);
    const FeatureVector probe = fv(bits);
    const auto proba = predict_proba(m, probe);
    double sum = 0.0;
    for (double p : proba) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    int best = 0;
    for (int l = 1; l < 4; ++l) {
      if (proba[l] > proba[best]) best = l;
    }
    CHECK(predict(m, probe) == best);
  }
}

TEST_CASE("configuration and dimension errors") {
  const std::vector<FeatureVector> samples = {fv({0, 1})};
  CHECK_THROWS_AS(fit_forest(samples, {0}, {"a"}, 0, ModalityMask{}, 0, 0), Error);
  CHECK_THROWS_AS(fit_tree(samples, {0}, 1, 0, 5), Error);  // m_try > dim
  CHECK_THROWS_AS(fit_tree({}, {}, 1, 0, 1), Error);
  const ForestModel m =
      fit_forest(samples, {0}, {"a", "b"}, 0, ModalityMask{}, 1, 0);
  CHECK_THROWS_AS(predict(m, fv({0, 1, 1})), Error);
}
