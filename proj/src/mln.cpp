#include "desk/mln.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace desk {

const std::vector<PredicateDecl>& predicate_schema() {
  static const std::vector<PredicateDecl> schema = [] {
    std::vector<PredicateDecl> out;
    for (Attribute a : kAttributes) {
      out.push_back({std::string(attribute_name(a)),
                     {"object", std::string(attribute_name(a))},
                     1});
    }
    out.push_back({"quad", {"object", "QUAD"}, 1});
    out.push_back({"dir", {"object", "object", "DIR"}, 2});
    return out;
  }();
  return schema;
}

void validate(const FormulaTemplate& t) {
  if (t.attrs.empty()) {
    throw Error(Errc::configuration, "template needs at least one attribute literal");
  }
  const int max_slot = t.rel == FormulaTemplate::Rel::dir ? 1 : 0;
  for (const AttrLiteral& lit : t.attrs) {
    if (lit.slot < 0 || lit.slot > max_slot) {
      throw Error(Errc::configuration, "attribute literal on an unbound object variable");
    }
  }
}

GroundedMln::GroundedMln(std::vector<FormulaTemplate> templates,
                         ModalityMask mask)
    : templates_(std::move(templates)), mask_(mask) {
  validate(mask_);
  std::size_t total = 0;
  offsets_.reserve(templates_.size());
  for (const FormulaTemplate& t : templates_) {
    validate(t);
    for (const AttrLiteral& lit : t.attrs) {
      if (!mask_.includes(lit.attr)) {
        throw Error(Errc::configuration,
                    std::string("template references masked-out attribute ") +
                        std::string(attribute_name(lit.attr)));
      }
    }
    offsets_.push_back(total);
    std::size_t n = t.rel == FormulaTemplate::Rel::dir ? kDirectionCount
                                                       : kQuadrantCount;
    for (const AttrLiteral& lit : t.attrs) n *= domain_size(lit.attr);
    total += n;
  }
  weights_.assign(total, 0.0);
}

void GroundedMln::set_weights(std::vector<double> w) {
  if (w.size() != weights_.size()) {
    throw Error(Errc::dimension, "weight vector length mismatch");
  }
  weights_ = std::move(w);
}

int GroundedMln::rel_domain_size(int template_id) const {
  return templates_.at(template_id).rel == FormulaTemplate::Rel::dir
             ? kDirectionCount
             : kQuadrantCount;
}

std::size_t GroundedMln::feature_index(int template_id,
                                       const std::vector<int>& values,
                                       int rel_value) const {
  const FormulaTemplate& t = templates_.at(template_id);
  if (values.size() != t.attrs.size()) {
    throw Error(Errc::dimension, "value binding arity mismatch");
  }
  std::size_t idx = 0;
  for (std::size_t s = 0; s < values.size(); ++s) {
    const int d = domain_size(t.attrs[s].attr);
    if (values[s] < 0 || values[s] >= d) {
      throw Error(Errc::out_of_domain, "slot value out of domain");
    }
    idx = idx * d + values[s];
  }
  const int rel_size = rel_domain_size(template_id);
  if (rel_value < 0 || rel_value >= rel_size) {
    throw Error(Errc::out_of_domain, "relation value out of domain");
  }
  return offsets_[template_id] + idx * rel_size + rel_value;
}

GroundFeature GroundedMln::feature(std::size_t f) const {
  if (f >= weights_.size()) {
    throw Error(Errc::data, "feature index out of range");
  }
  int t = static_cast<int>(templates_.size()) - 1;
  while (offsets_[t] > f) --t;
  std::size_t local = f - offsets_[t];
  const FormulaTemplate& tmpl = templates_[t];
  GroundFeature gf;
  gf.template_id = t;
  gf.weight = weights_[f];
  const int rel_size = rel_domain_size(t);
  gf.rel_value = static_cast<int>(local % rel_size);
  local /= rel_size;
  gf.values.resize(tmpl.attrs.size());
  for (int s = static_cast<int>(tmpl.attrs.size()) - 1; s >= 0; --s) {
    const int d = domain_size(tmpl.attrs[s].attr);
    gf.values[s] = static_cast<int>(local % d);
    local /= d;
  }
  return gf;
}

std::vector<FormulaTemplate> default_templates(ModalityMask mask) {
  validate(mask);
  std::vector<Attribute> enabled;
  for (Attribute a : kAttributes) {
    if (mask.includes(a)) enabled.push_back(a);
  }
  std::vector<FormulaTemplate> out;
  for (std::size_t a = 0; a < enabled.size(); ++a) {
    for (std::size_t b = a; b < enabled.size(); ++b) {
      out.push_back({FormulaTemplate::Rel::dir,
                     {{0, enabled[a]}, {1, enabled[b]}}});
    }
  }
  for (Attribute a : enabled) {
    out.push_back({FormulaTemplate::Rel::quad, {{0, a}}});
  }
  return out;
}

GroundedMln expand_templates(const std::vector<FormulaTemplate>& templates,
                             ModalityMask mask) {
  return GroundedMln(templates, mask);
}

namespace {

void check_atom(const Evidence& evidence, const QueryAtom& atom) {
  const int n = static_cast<int>(evidence.objects.size());
  auto check = [&](int o) {
    if (o < 0 || o >= n) {
      throw Error(Errc::evidence_incomplete,
                  "no evidence for object o" + std::to_string(o));
    }
  };
  check(atom.i);
  if (atom.kind == QueryAtom::Kind::dir) {
    check(atom.j);
    if (atom.i == atom.j) {
      throw Error(Errc::degenerate_pair, "dir atom needs two distinct objects");
    }
  }
}

// Feature index of candidate value 0 for one template under the atom's
// bindings; candidate d lives at base + d.
std::size_t atom_base_index(const GroundedMln& mln, const Evidence& evidence,
                            const QueryAtom& atom, int template_id) {
  const FormulaTemplate& t = mln.templates()[template_id];
  std::size_t idx = 0;
  for (const AttrLiteral& lit : t.attrs) {
    const int obj = lit.slot == 0 ? atom.i : atom.j;
    idx = idx * domain_size(lit.attr) +
          evidence.objects[obj].value(lit.attr);
  }
  return mln.template_offset(template_id) +
         idx * mln.rel_domain_size(template_id);
}

bool template_matches(const FormulaTemplate& t, const QueryAtom& atom) {
  return (t.rel == FormulaTemplate::Rel::dir) ==
         (atom.kind == QueryAtom::Kind::dir);
}

int atom_domain_size(const QueryAtom& atom) {
  return atom.kind == QueryAtom::Kind::dir ? kDirectionCount : kQuadrantCount;
}

std::vector<double> atom_scores(const GroundedMln& mln, const Evidence& evidence,
                                const QueryAtom& atom) {
  check_atom(evidence, atom);
  std::vector<double> scores(atom_domain_size(atom), 0.0);
  for (int t = 0; t < static_cast<int>(mln.templates().size()); ++t) {
    if (!template_matches(mln.templates()[t], atom)) continue;
    const std::size_t base = atom_base_index(mln, evidence, atom, t);
    for (std::size_t d = 0; d < scores.size(); ++d) {
      scores[d] += mln.weights()[base + d];
    }
  }
  return scores;
}

std::vector<double> softmax(std::vector<double> scores) {
  const double m = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double& s : scores) {
    s = std::exp(s - m);
    z += s;
  }
  for (double& s : scores) s /= z;
  return scores;
}

}  // namespace

double score_value(const GroundedMln& mln, const Evidence& evidence,
                   const QueryAtom& atom, int candidate_value) {
  check_atom(evidence, atom);
  if (candidate_value < 0 || candidate_value >= atom_domain_size(atom)) {
    throw Error(Errc::out_of_domain, "candidate value out of the atom's domain");
  }
  double score = 0.0;
  for (int t = 0; t < static_cast<int>(mln.templates().size()); ++t) {
    if (!template_matches(mln.templates()[t], atom)) continue;
    score += mln.weights()[atom_base_index(mln, evidence, atom, t) +
                           candidate_value];
  }
  return score;
}

int infer_map(const GroundedMln& mln, const Evidence& evidence,
              const QueryAtom& atom) {
  const std::vector<double> scores = atom_scores(mln, evidence, atom);
  int best = 0;
  for (int d = 1; d < static_cast<int>(scores.size()); ++d) {
    if (scores[d] > scores[best]) best = d;
  }
  return best;
}

std::vector<double> infer_marginal(const GroundedMln& mln,
                                   const Evidence& evidence,
                                   const QueryAtom& atom) {
  return softmax(atom_scores(mln, evidence, atom));
}

namespace {

// Pre-resolved training set: per atom, the truth value and one base feature
// index per matching template.
struct CompiledAtom {
  int truth = 0;
  int domain = 0;
  std::vector<std::size_t> bases;
};

std::vector<CompiledAtom> compile(const GroundedMln& mln,
                                  const std::vector<WorldDatabase>& training) {
  if (training.empty()) {
    throw Error(Errc::data, "empty training set");
  }
  std::vector<int> quad_templates, dir_templates;
  for (int t = 0; t < static_cast<int>(mln.templates().size()); ++t) {
    (mln.templates()[t].rel == FormulaTemplate::Rel::dir ? dir_templates
                                                         : quad_templates)
        .push_back(t);
  }
  std::vector<CompiledAtom> atoms;
  for (const WorldDatabase& db : training) {
    const int k = db.truth.object_count();
    if (static_cast<int>(db.evidence.objects.size()) != k) {
      throw Error(Errc::evidence_incomplete,
                  "evidence does not cover every object in the database");
    }
    for (int i = 0; i < k; ++i) {
      CompiledAtom a;
      a.truth = db.truth.quad(i) - 1;
      a.domain = kQuadrantCount;
      for (int t : quad_templates) {
        a.bases.push_back(
            atom_base_index(mln, db.evidence, QueryAtom::quad(i), t));
      }
      atoms.push_back(std::move(a));
    }
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (i == j) continue;
        CompiledAtom a;
        a.truth = static_cast<int>(db.truth.rel(i, j));
        a.domain = kDirectionCount;
        for (int t : dir_templates) {
          a.bases.push_back(
              atom_base_index(mln, db.evidence, QueryAtom::dir(i, j), t));
        }
        atoms.push_back(std::move(a));
      }
    }
  }
  return atoms;
}

double objective_of(const std::vector<double>& w,
                    const std::vector<CompiledAtom>& atoms, double l2_lambda) {
  double obj = 0.0;
  std::vector<double> scores;
  for (const CompiledAtom& a : atoms) {
    scores.assign(a.domain, 0.0);
    for (std::size_t base : a.bases) {
      for (int d = 0; d < a.domain; ++d) scores[d] += w[base + d];
    }
    const double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - m);
    obj += scores[a.truth] - m - std::log(z);
  }
  double norm = 0.0;
  for (double x : w) norm += x * x;
  return obj - l2_lambda * norm;
}

std::vector<double> gradient_of(const std::vector<double>& w,
                                const std::vector<CompiledAtom>& atoms,
                                double l2_lambda) {
  std::vector<double> grad(w.size(), 0.0);
  std::vector<double> scores;
  for (const CompiledAtom& a : atoms) {
    scores.assign(a.domain, 0.0);
    for (std::size_t base : a.bases) {
      for (int d = 0; d < a.domain; ++d) scores[d] += w[base + d];
    }
    const double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double& s : scores) {
      s = std::exp(s - m);
      z += s;
    }
    // observed count minus expected count, per matching feature
    for (std::size_t base : a.bases) {
      grad[base + a.truth] += 1.0;
      for (int d = 0; d < a.domain; ++d) grad[base + d] -= scores[d] / z;
    }
  }
  for (std::size_t f = 0; f < w.size(); ++f) grad[f] -= 2.0 * l2_lambda * w[f];
  return grad;
}

}  // namespace

double learn_objective(const GroundedMln& mln,
                       const std::vector<WorldDatabase>& training,
                       double l2_lambda) {
  return objective_of(mln.weights(), compile(mln, training), l2_lambda);
}

std::vector<double> learn_gradient(const GroundedMln& mln,
                                   const std::vector<WorldDatabase>& training,
                                   double l2_lambda) {
  return gradient_of(mln.weights(), compile(mln, training), l2_lambda);
}

GroundedMln learn_weights(const GroundedMln& mln,
                          const std::vector<WorldDatabase>& training,
                          const LearnOptions& options, LearnTrace* trace) {
  if (options.max_iters < 0 || !(options.learning_rate > 0.0)) {
    throw Error(Errc::configuration, "invalid learning options");
  }
  const std::vector<CompiledAtom> atoms = compile(mln, training);
  std::vector<double> w = mln.weights();
  double obj = objective_of(w, atoms, options.l2_lambda);
  if (!std::isfinite(obj)) {
    throw Error(Errc::numerical, "objective non-finite at the starting point");
  }
  if (trace) {
    trace->objective.clear();
    trace->objective.push_back(obj);
    trace->iterations = 0;
  }
  double step = options.learning_rate;
  std::vector<double> candidate(w.size());
  for (int iter = 0; iter < options.max_iters; ++iter) {
    const std::vector<double> grad = gradient_of(w, atoms, options.l2_lambda);
    double ginf = 0.0;
    for (double g : grad) ginf = std::max(ginf, std::abs(g));
    if (ginf < options.grad_tol) break;
    // Backtracking keeps the ascent monotone whatever the initial rate; the
    // step regrows after each accepted iterate, capped at the configured rate.
    bool accepted = false;
    while (step >= 1e-18) {
      for (std::size_t f = 0; f < w.size(); ++f) {
        candidate[f] = w[f] + step * grad[f];
      }
      const double cand_obj = objective_of(candidate, atoms, options.l2_lambda);
      if (std::isfinite(cand_obj) && cand_obj >= obj) {
        w.swap(candidate);
        obj = cand_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      throw Error(Errc::numerical,
                  "gradient ascent stalled at iteration " + std::to_string(iter) +
                      " (objective " + std::to_string(obj) + ", |grad|inf " +
                      std::to_string(ginf) + ")");
    }
    step = std::min(step * 2.0, options.learning_rate);
    if (trace) {
      trace->objective.push_back(obj);
      trace->iterations = iter + 1;
    }
  }
  GroundedMln out = mln;
  out.set_weights(std::move(w));
  return out;
}

std::string render_feature(const GroundedMln& mln, std::size_t f) {
  const GroundFeature gf = mln.feature(f);
  const FormulaTemplate& t = mln.templates()[gf.template_id];
  std::string out;
  for (std::size_t s = 0; s < t.attrs.size(); ++s) {
    const AttrLiteral& lit = t.attrs[s];
    out += std::string(attribute_name(lit.attr));
    out += "(o" + std::to_string(lit.slot + 1) + ", ";
    out += std::string(value_name(lit.attr, gf.values[s]));
    out += ") ^ ";
  }
  if (t.rel == FormulaTemplate::Rel::dir) {
    out += "dir(o1, o2, " +
           std::string(direction_name(static_cast<Direction>(gf.rel_value))) +
           ")";
  } else {
    out += "quad(o1, " + std::to_string(gf.rel_value + 1) + ")";
  }
  return out;
}

std::vector<std::pair<std::string, double>> dump_top_formulas(
    const GroundedMln& mln, int n) {
  if (n < 0) throw Error(Errc::configuration, "negative formula count");
  std::vector<std::size_t> order(mln.feature_count());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t keep = std::min<std::size_t>(n, order.size());
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (mln.weight(a) != mln.weight(b)) {
                        return mln.weight(a) > mln.weight(b);
                      }
                      return a < b;
                    });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    out.emplace_back(render_feature(mln, order[r]), mln.weight(order[r]));
  }
  return out;
}

Evidence evidence_from(const Scene& scene) {
  validate(scene);
  Evidence e;
  e.objects.reserve(scene.objects.size());
  for (const ObjectInstance& obj : scene.objects) e.objects.push_back(obj.attrs);
  return e;
}

WorldDatabase database_from(const Scene& scene, const SceneGroundings& truth) {
  if (truth.object_count() != scene.object_count()) {
    throw Error(Errc::data, "groundings do not match the scene's object count");
  }
  return {evidence_from(scene), truth};
}

SceneGroundings predict_groundings(const GroundedMln& mln, const Scene& scene) {
  const Evidence e = evidence_from(scene);
  const int k = scene.object_count();
  SceneGroundings g(k);
  for (int i = 0; i < k; ++i) {
    g.set_quad(i, infer_map(mln, e, QueryAtom::quad(i)) + 1);
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      g.set_rel(i, j,
                static_cast<Direction>(infer_map(mln, e, QueryAtom::dir(i, j))));
    }
  }
  return g;
}

}  // namespace desk
