#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "desk/core.hpp"
#include "desk/features.hpp"
#include "desk/forest.hpp"
#include "desk/mln.hpp"

namespace desk {

struct LabeledScene {
  Scene scene;
  SceneGroundings truth;
};

using Dataset = std::vector<LabeledScene>;

enum class ModelKind { forest, mln };

std::string_view model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(std::string_view name);

struct EvalReport {
  ModelKind model_kind = ModelKind::forest;
  ModalityMask mask;
  std::uint64_t seed = 0;
  std::vector<double> fold_quad_acc;
  std::vector<double> fold_rel_acc;
  std::vector<double> fold_combined;
  double quad_mean = 0.0;
  double rel_mean = 0.0;
  double combined_mean = 0.0;
  double combined_std = 0.0;  // sample standard deviation over folds
};

// Fraction of matching quadrants and of matching ordered-pair directions.
std::pair<double, double> grounding_accuracy(const SceneGroundings& pred,
                                             const SceneGroundings& truth);

// (K * quad_acc + C(K,2) * rel_acc) / (K + C(K,2)).
double combined_accuracy(double quad_acc, double rel_acc, int k);

// Seeded shuffle into k near-equal disjoint folds; returns per-fold
// (train_indices, test_indices).
std::vector<std::pair<std::vector<int>, std::vector<int>>> kfold(
    int n, int k, std::uint64_t rng_seed);

struct TrainConfig {
  int n_trees = 20;
  int m_try = 0;  // <= 0: ceil(sqrt(input_dim))
  LearnOptions mln;
};

// The two classifiers of the forest pipeline, trained side by side.
struct ForestPair {
  ForestModel quad;
  ForestModel rel;
};

ForestPair train_forests(const Dataset& train, ModalityMask mask,
                         std::uint64_t seed, const TrainConfig& config = {});
GroundedMln train_mln(const Dataset& train, ModalityMask mask,
                      const TrainConfig& config = {});

// Every quad atom and every ordered dir atom queried from attribute evidence.
SceneGroundings predict_groundings(const ForestPair& models, const Scene& scene);

// k-fold cross-validation for one model/mask combination. Forest training
// requires all scenes to share one K.
EvalReport run_cv(const Dataset& data, ModelKind kind, ModalityMask mask,
                  int folds, std::uint64_t seed, const TrainConfig& config = {});

// One report per modality subset, in the order HUV, HV, UV, HU, H, U, V.
std::vector<EvalReport> run_ablation(const Dataset& data, ModelKind kind,
                                     int folds, std::uint64_t seed,
                                     const TrainConfig& config = {});

std::map<std::string, Dataset> partition_by_participant(const Dataset& data);

// Empirical probability that a uniform random quadrant assignment of K
// objects matches a fixed truth exactly.
double random_baseline_exact_match(int k, std::int64_t trials,
                                   std::uint64_t rng_seed);

// TSV rendering: one-line header plus one row per report.
std::string report_table(const std::vector<EvalReport>& reports);

}  // namespace desk
