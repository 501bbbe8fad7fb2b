#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "desk/core.hpp"
#include "desk/features.hpp"

namespace desk {

// Restricted Markov logic network: conjunctive positive templates with
// exactly one relation atom (quad or dir) whose value slot is functional.
// Given full attribute evidence the conditional over relation atoms then
// factorizes per atom, so softmax scoring is exact inference.

// One predicate of the scene language: argument domain names plus which
// argument is functional (takes exactly one value per binding of the rest).
struct PredicateDecl {
  std::string name;
  std::vector<std::string> arg_domains;
  int functional_slot = -1;
};

// The fixed schema: the six attribute predicates, quad(object, QUAD) and
// dir(object, object, DIR), each functional in its last argument.
const std::vector<PredicateDecl>& predicate_schema();

struct AttrLiteral {
  int slot = 0;  // 0 = first object variable, 1 = second (dir only)
  Attribute attr = Attribute::color;
  bool operator==(const AttrLiteral&) const = default;
};

struct FormulaTemplate {
  enum class Rel { quad, dir };
  Rel rel = Rel::quad;
  std::vector<AttrLiteral> attrs;
  bool operator==(const FormulaTemplate&) const = default;
};

void validate(const FormulaTemplate& t);

// One fully expanded template instance: bound attribute values plus the
// relation value, with its learned weight.
struct GroundFeature {
  int template_id = 0;
  std::vector<int> values;  // one per attribute literal
  int rel_value = 0;        // quad 0..3 (quadrant-1) or Direction index
  double weight = 0.0;
};

class GroundedMln {
 public:
  GroundedMln() = default;
  GroundedMln(std::vector<FormulaTemplate> templates, ModalityMask mask);

  const std::vector<FormulaTemplate>& templates() const { return templates_; }
  ModalityMask mask() const { return mask_; }

  std::size_t feature_count() const { return weights_.size(); }
  double weight(std::size_t f) const { return weights_.at(f); }
  void set_weight(std::size_t f, double w) { weights_.at(f) = w; }
  const std::vector<double>& weights() const { return weights_; }
  void set_weights(std::vector<double> w);

  GroundFeature feature(std::size_t f) const;
  // Feature index from bound values; features are laid out template-major,
  // then lexicographic in slot values, relation value minor.
  std::size_t feature_index(int template_id, const std::vector<int>& values,
                            int rel_value) const;

  std::size_t template_offset(int template_id) const {
    return offsets_.at(template_id);
  }
  int rel_domain_size(int template_id) const;

 private:
  std::vector<FormulaTemplate> templates_;
  ModalityMask mask_;
  std::vector<double> weights_;
  std::vector<std::size_t> offsets_;  // per template, into weights_
};

struct Evidence {
  std::vector<AttributeSet> objects;  // indexed by object id
};

struct WorldDatabase {
  Evidence evidence;
  SceneGroundings truth;
};

struct QueryAtom {
  enum class Kind { quad, dir };
  Kind kind = Kind::quad;
  int i = 0;
  int j = -1;  // dir only

  static QueryAtom quad(int i) { return {Kind::quad, i, -1}; }
  static QueryAtom dir(int i, int j) { return {Kind::dir, i, j}; }
};

// Default formula family: one quad template per enabled attribute and one
// dir template per unordered pair of enabled attributes (self-pairs included).
std::vector<FormulaTemplate> default_templates(ModalityMask mask);

// Cartesian expansion of every value slot, all weights zero.
GroundedMln expand_templates(const std::vector<FormulaTemplate>& templates,
                             ModalityMask mask);

// Sum of weights of features whose attribute literals hold under the evidence
// and whose relation value equals candidate_value.
double score_value(const GroundedMln& mln, const Evidence& evidence,
                   const QueryAtom& atom, int candidate_value);

// Argmax of score_value over the atom's domain; ties take the first value.
int infer_map(const GroundedMln& mln, const Evidence& evidence,
              const QueryAtom& atom);

// Softmax over per-candidate scores; exact under the functional restriction.
std::vector<double> infer_marginal(const GroundedMln& mln,
                                   const Evidence& evidence,
                                   const QueryAtom& atom);

struct LearnOptions {
  double learning_rate = 0.1;  // initial step; backtracking keeps ascent monotone
  double l2_lambda = 1e-4;
  int max_iters = 500;
  double grad_tol = 1e-6;  // on the gradient infinity norm
};

struct LearnTrace {
  std::vector<double> objective;  // per accepted iterate, including the start
  int iterations = 0;
};

// L2-penalized conditional log-likelihood of every relation atom given the
// attribute evidence, over all databases.
double learn_objective(const GroundedMln& mln,
                       const std::vector<WorldDatabase>& training,
                       double l2_lambda);
std::vector<double> learn_gradient(const GroundedMln& mln,
                                   const std::vector<WorldDatabase>& training,
                                   double l2_lambda);

// Deterministic batch gradient ascent on learn_objective.
GroundedMln learn_weights(const GroundedMln& mln,
                          const std::vector<WorldDatabase>& training,
                          const LearnOptions& options = {},
                          LearnTrace* trace = nullptr);

// Top-n features by weight, rendered in predicate syntax.
std::vector<std::pair<std::string, double>> dump_top_formulas(
    const GroundedMln& mln, int n);
std::string render_feature(const GroundedMln& mln, std::size_t f);

// Per-atom MAP over every quad and ordered dir atom of the scene. The result
// is raw per-atom output and need not satisfy the pairwise invariants.
SceneGroundings predict_groundings(const GroundedMln& mln, const Scene& scene);

Evidence evidence_from(const Scene& scene);
WorldDatabase database_from(const Scene& scene, const SceneGroundings& truth);

}  // namespace desk
