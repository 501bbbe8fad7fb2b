#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "desk/core.hpp"
#include "desk/features.hpp"

namespace desk {

// Nodes stored flat; root at index 0. Internal nodes route value 0 left and
// value 1 right. Leaves carry raw class counts.
struct TreeNode {
  std::int32_t feature = -1;  // -1 = leaf
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::int64_t> counts;  // leaves only, one per label

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;
};

struct ForestModel {
  std::vector<Tree> trees;
  std::vector<std::string> label_domain;
  int input_dim = 0;
  int k_train = 0;
  ModalityMask mask;
};

// 1 - sum((n_c / n)^2); zero exactly on pure nodes.
double gini(const std::vector<std::int64_t>& class_counts);

// Fully grown, unpruned binary tree on 0/1 features. Each node draws m_try
// candidate features without replacement and takes the valid split with the
// lowest weighted child Gini; a node becomes a leaf only when pure or when
// every candidate is constant across its samples.
Tree fit_tree(const std::vector<FeatureVector>& samples,
              const std::vector<int>& labels, int n_labels,
              std::uint64_t rng_seed, int m_try);

// Bagged ensemble: each tree trains on a bootstrap resample under a derived
// per-tree seed. m_try <= 0 selects the ceil(input_dim / 2) default.
ForestModel fit_forest(const std::vector<FeatureVector>& samples,
                       const std::vector<int>& labels,
                       const std::vector<std::string>& label_domain,
                       int k_train, ModalityMask mask, int n_trees,
                       std::uint64_t rng_seed, int m_try = 0);

// Mean of per-tree normalized leaf distributions.
std::vector<double> predict_proba(const ForestModel& model,
                                  const FeatureVector& x);

// Argmax of predict_proba; ties take the earlier label_domain entry.
int predict(const ForestModel& model, const FeatureVector& x);

}  // namespace desk
