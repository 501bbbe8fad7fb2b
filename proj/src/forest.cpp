#include "desk/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "desk/rng.hpp"

namespace desk {

double gini(const std::vector<std::int64_t>& class_counts) {
  std::int64_t total = 0;
  for (std::int64_t c : class_counts) {
    if (c < 0) throw Error(Errc::data, "negative class count");
    total += c;
  }
  if (total == 0) {
    throw Error(Errc::data, "gini of an empty node is undefined");
  }
  double sum_sq = 0.0;
  for (std::int64_t c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

namespace {

struct Builder {
  const std::vector<FeatureVector>& samples;
  const std::vector<int>& labels;
  int n_labels;
  int dim;
  int m_try;
  Rng rng;
  Tree tree;
  std::vector<int> scratch;  // feature candidate pool

  int build(std::vector<int>& rows) {
    std::vector<std::int64_t> counts(n_labels, 0);
    for (int r : rows) counts[labels[r]]++;
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    const bool pure =
        std::count_if(counts.begin(), counts.end(),
                      [](std::int64_t c) { return c > 0; }) <= 1;
    int best_feature = -1;
    double best_score = 0.0;
    if (!pure) {
      // Partial Fisher-Yates draw of m_try distinct candidate features.
      for (int f = 0; f < dim; ++f) scratch[f] = f;
      for (int t = 0; t < m_try; ++t) {
        const int pick = t + static_cast<int>(rng.below(dim - t));
        std::swap(scratch[t], scratch[pick]);
        const int f = scratch[t];
        std::vector<std::int64_t> right(n_labels, 0);
        std::int64_t n_right = 0;
        for (int r : rows) {
          if (samples[r].values[f]) {
            right[labels[r]]++;
            n_right++;
          }
        }
        const std::int64_t n = static_cast<std::int64_t>(rows.size());
        if (n_right == 0 || n_right == n) continue;  // constant on this node
        std::vector<std::int64_t> left(n_labels, 0);
        for (int c = 0; c < n_labels; ++c) left[c] = counts[c] - right[c];
        const double score =
            (static_cast<double>(n - n_right) * gini(left) +
             static_cast<double>(n_right) * gini(right)) /
            static_cast<double>(n);
        // Zero-improvement splits are still taken: they can unlock pure
        // children further down, which keeps fully grown trees exact on
        // conflict-free data. Ties go to the lower feature index.
        if (best_feature < 0 || score < best_score ||
            (score == best_score && f < best_feature)) {
          best_feature = f;
          best_score = score;
        }
      }
    }

    if (best_feature < 0) {
      tree.nodes[node_id].counts = std::move(counts);
      return node_id;
    }

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
      (samples[r].values[best_feature] ? right_rows : left_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int left_id = build(left_rows);
    const int right_id = build(right_rows);
    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].left = left_id;
    tree.nodes[node_id].right = right_id;
    return node_id;
  }
};

void check_dataset(const std::vector<FeatureVector>& samples,
                   const std::vector<int>& labels, int n_labels) {
  if (samples.empty()) {
    throw Error(Errc::data, "cannot fit a tree on an empty dataset");
  }
  if (samples.size() != labels.size()) {
    throw Error(Errc::data, "sample/label count mismatch");
  }
  const std::size_t dim = samples.front().values.size();
  if (dim == 0) throw Error(Errc::data, "zero-dimensional samples");
  for (const FeatureVector& s : samples) {
    if (s.values.size() != dim) {
      throw Error(Errc::dimension, "inconsistent sample dimensionality");
    }
  }
  for (int l : labels) {
    if (l < 0 || l >= n_labels) {
      throw Error(Errc::data, "label out of range: " + std::to_string(l));
    }
  }
}

}  // namespace

Tree fit_tree(const std::vector<FeatureVector>& samples,
              const std::vector<int>& labels, int n_labels,
              std::uint64_t rng_seed, int m_try) {
  check_dataset(samples, labels, n_labels);
  const int dim = static_cast<int>(samples.front().values.size());
  if (m_try < 1 || m_try > dim) {
    throw Error(Errc::configuration,
                "m_try must lie in [1, input_dim], got " + std::to_string(m_try));
  }
  Builder b{samples, labels, n_labels, dim, m_try, Rng(rng_seed), {}, {}};
  b.scratch.resize(dim);
  std::vector<int> rows(samples.size());
  std::iota(rows.begin(), rows.end(), 0);
  b.build(rows);
  return std::move(b.tree);
}

ForestModel fit_forest(const std::vector<FeatureVector>& samples,
                       const std::vector<int>& labels,
                       const std::vector<std::string>& label_domain,
                       int k_train, ModalityMask mask, int n_trees,
                       std::uint64_t rng_seed, int m_try) {
  if (n_trees < 1) {
    throw Error(Errc::configuration, "a forest needs at least one tree");
  }
  const int n_labels = static_cast<int>(label_domain.size());
  check_dataset(samples, labels, n_labels);
  const int dim = static_cast<int>(samples.front().values.size());
  if (m_try <= 0) {
    // One-hot scene vectors are mostly context bits, so sqrt(d) candidate
    // features starve the split search; half the features per node keeps the
    // trees decorrelated without losing the informative blocks.
    m_try = (dim + 1) / 2;
  }
  m_try = std::min(m_try, dim);

  ForestModel model;
  model.label_domain = label_domain;
  model.input_dim = dim;
  model.k_train = k_train;
  model.mask = mask;
  model.trees.reserve(n_trees);
  const std::size_t n = samples.size();
  for (int t = 0; t < n_trees; ++t) {
    // Seeds pre-derived per tree so a parallel build would give the same model.
    Rng boot(Rng::derive(rng_seed, 2 * static_cast<std::uint64_t>(t)));
    std::vector<FeatureVector> bs;
    std::vector<int> bl;
    bs.reserve(n);
    bl.reserve(n);
    for (std::size_t d = 0; d < n; ++d) {
      const std::size_t r = boot.below(n);
      bs.push_back(samples[r]);
      bl.push_back(labels[r]);
    }
    model.trees.push_back(
        fit_tree(bs, bl, n_labels,
                 Rng::derive(rng_seed, 2 * static_cast<std::uint64_t>(t) + 1),
                 m_try));
  }
  return model;
}

std::vector<double> predict_proba(const ForestModel& model,
                                  const FeatureVector& x) {
  if (model.trees.empty()) {
    throw Error(Errc::configuration, "empty forest");
  }
  if (static_cast<int>(x.values.size()) != model.input_dim) {
    throw Error(Errc::dimension,
                "input has dimension " + std::to_string(x.values.size()) +
                    ", model expects " + std::to_string(model.input_dim));
  }
  const int n_labels = static_cast<int>(model.label_domain.size());
  std::vector<double> acc(n_labels, 0.0);
  for (const Tree& tree : model.trees) {
    int node = 0;
    while (!tree.nodes[node].is_leaf()) {
      node = x.values[tree.nodes[node].feature] ? tree.nodes[node].right
                                                : tree.nodes[node].left;
    }
    const auto& counts = tree.nodes[node].counts;
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    for (int l = 0; l < n_labels; ++l) {
      acc[l] += static_cast<double>(counts[l]) / static_cast<double>(total);
    }
  }
  for (double& p : acc) p /= static_cast<double>(model.trees.size());
  return acc;
}

int predict(const ForestModel& model, const FeatureVector& x) {
  const std::vector<double> proba = predict_proba(model, x);
  int best = 0;
  for (int l = 1; l < static_cast<int>(proba.size()); ++l) {
    if (proba[l] > proba[best]) best = l;
  }
  return best;
}

}  // namespace desk
