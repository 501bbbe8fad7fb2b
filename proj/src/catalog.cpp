#include "desk/catalog.hpp"

#include <algorithm>
#include <set>

#include "desk/rng.hpp"

namespace desk {

void validate(const Catalog& catalog) {
  std::set<std::string> keys;
  for (const CatalogEntry& e : catalog) {
    if (e.key.empty()) throw Error(Errc::data, "catalog entry with empty key");
    if (!keys.insert(e.key).second) {
      throw Error(Errc::data, "duplicate catalog key: " + e.key);
    }
    validate(e.attrs);
    for (const AttributeSet& v : e.variants) validate(v);
    if (!(e.footprint.w > 0.0) || !(e.footprint.h > 0.0)) {
      throw Error(Errc::data, "non-positive footprint for " + e.key);
    }
  }
}

void validate(const Ruleset& rules) {
  for (int q : rules.quad_rule) {
    if (q < 1 || q > kQuadrantCount) {
      throw Error(Errc::configuration,
                  "quad_rule value out of range in ruleset " + rules.name);
    }
  }
  auto is_permutation = [](const auto& ranks) {
    std::vector<int> sorted(ranks.begin(), ranks.end());
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
      if (sorted[i] != i) return false;
    }
    return true;
  };
  if (!is_permutation(rules.ew_rank) || !is_permutation(rules.ns_rank)) {
    throw Error(Errc::configuration,
                "ruleset orders must be strict total orders: " + rules.name);
  }
}

Ruleset default_ruleset() {
  Ruleset r;
  r.name = "default";
  r.quad_rule = {3, 2, 2, 1, 1, 4, 4};  // utility 1..7
  r.ew_rank = {0, 1, 2, 3, 4, 5};       // red < blue < black < green < yellow < other
  r.ns_rank = {0, 1, 2, 3};             // rectangle < cylinder < cube < other
  return r;
}

Ruleset permuted_ruleset(const Ruleset& base, const std::array<int, 4>& quad_perm,
                         const std::string& name) {
  for (int q : quad_perm) {
    if (q < 1 || q > kQuadrantCount) {
      throw Error(Errc::configuration, "quadrant permutation value out of range");
    }
  }
  std::set<int> seen(quad_perm.begin(), quad_perm.end());
  if (seen.size() != 4) {
    throw Error(Errc::configuration, "quadrant permutation has duplicates");
  }
  Ruleset r = base;
  r.name = name;
  for (int& q : r.quad_rule) q = quad_perm[q - 1];
  validate(r);
  return r;
}

void apply_utility_profile(Scene& scene, const UtilityProfile& profile) {
  for (ObjectInstance& obj : scene.objects) {
    auto it = profile.utilities.find(obj.catalog_key);
    if (it == profile.utilities.end()) {
      throw Error(Errc::data, "utility profile " + profile.participant_id +
                                  " does not cover " + obj.catalog_key);
    }
    if (it->second < kUtilityMin || it->second > kUtilityMax) {
      throw Error(Errc::out_of_domain, "profile utility out of range for " +
                                           obj.catalog_key);
    }
    obj.attrs.utility = it->second;
  }
  scene.participant = profile.participant_id;
}

Scene generate_scene(std::uint64_t rng_seed, const Catalog& catalog, int k_min,
                     int k_max) {
  if (catalog.empty()) {
    throw Error(Errc::configuration, "cannot generate scenes from an empty catalog");
  }
  if (k_min < 1 || k_min > k_max) {
    throw Error(Errc::configuration, "invalid object count range [" +
                                         std::to_string(k_min) + ", " +
                                         std::to_string(k_max) + "]");
  }
  Rng rng(rng_seed);
  const int k = rng.range(k_min, k_max);
  Scene scene;
  scene.id = "synth-" + std::to_string(rng_seed);
  scene.objects.reserve(k);
  for (int i = 0; i < k; ++i) {
    const CatalogEntry& entry = catalog[rng.below(catalog.size())];
    ObjectInstance obj;
    obj.id = i;
    obj.catalog_key = entry.key;
    if (entry.variants.empty()) {
      obj.attrs = entry.attrs;
    } else {
      const std::uint64_t pick = rng.below(entry.variants.size() + 1);
      obj.attrs = pick == 0 ? entry.attrs : entry.variants[pick - 1];
    }
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

namespace {

// Chain position within a quadrant: west to east by (color, shape, id).
struct ChainKey {
  int ew;
  int ns;
  int id;
  bool operator<(const ChainKey& o) const {
    if (ew != o.ew) return ew < o.ew;
    if (ns != o.ns) return ns < o.ns;
    return id < o.id;
  }
};

}  // namespace

SceneGroundings rule_annotate(const Scene& scene, const Ruleset& rules) {
  validate(scene);
  validate(rules);
  const int k = scene.object_count();
  SceneGroundings g(k);
  std::vector<ChainKey> key(k);
  for (int i = 0; i < k; ++i) {
    const AttributeSet& a = scene.objects[i].attrs;
    g.set_quad(i, rules.quad_rule[a.utility - 1]);
    key[i] = {rules.ew_rank[static_cast<int>(a.color)],
              rules.ns_rank[static_cast<int>(a.shape)], i};
  }
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (g.quad(i) != g.quad(j)) {
        const Direction d = derived_dir_from_quads(g.quad(i), g.quad(j));
        g.set_rel(i, j, d);
        g.set_rel(j, i, opposite(d));
        continue;
      }
      // The chain-later object sits east; its north-south offset follows the
      // shape order.
      const bool i_east = key[j] < key[i];
      const int east = i_east ? i : j;
      const int west = i_east ? j : i;
      Direction d = Direction::E;
      if (key[east].ns > key[west].ns) d = Direction::NE;
      if (key[east].ns < key[west].ns) d = Direction::SE;
      g.set_rel(east, west, d);
      g.set_rel(west, east, opposite(d));
    }
  }
  return g;
}

Scene perturb_attributes(const Scene& scene, double p, std::uint64_t rng_seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(Errc::configuration,
                "perturbation probability must lie in [0,1]");
  }
  validate(scene);
  Rng rng(rng_seed);
  Scene out = scene;
  for (ObjectInstance& obj : out.objects) {
    for (Attribute a : kAttributes) {
      const bool flip = rng.bernoulli(p);
      if (!flip) continue;
      const int cur = obj.attrs.value(a);
      // Draw from the domain minus the current value so a flip always changes.
      int repl = static_cast<int>(rng.below(domain_size(a) - 1));
      if (repl >= cur) ++repl;
      obj.attrs.set_value(a, repl);
    }
  }
  return out;
}

namespace {

template <typename V>
void check_vote_coverage(const std::vector<std::map<std::string, V>>& votes) {
  if (votes.empty()) {
    throw Error(Errc::configuration, "no participant votes supplied");
  }
  for (const auto& m : votes) {
    if (m.size() != votes.front().size()) {
      throw Error(Errc::data, "participant vote maps cover different objects");
    }
    for (const auto& [key, unused] : votes.front()) {
      if (!m.count(key)) {
        throw Error(Errc::data, "participant vote missing object " + key);
      }
    }
  }
}

}  // namespace

std::map<std::string, std::pair<Weight, Size>> canonicalize_subjective(
    const std::vector<std::map<std::string, Weight>>& weight_votes,
    const std::vector<std::map<std::string, Size>>& size_votes) {
  check_vote_coverage(weight_votes);
  check_vote_coverage(size_votes);
  for (const auto& [key, unused] : weight_votes.front()) {
    if (!size_votes.front().count(key)) {
      throw Error(Errc::data, "weight and size votes cover different objects");
    }
  }
  if (weight_votes.front().size() != size_votes.front().size()) {
    throw Error(Errc::data, "weight and size votes cover different objects");
  }
  std::map<std::string, std::pair<Weight, Size>> out;
  for (const auto& [key, unused] : weight_votes.front()) {
    int heavy = 0;
    for (const auto& m : weight_votes) heavy += m.at(key) == Weight::heavy;
    int large = 0;
    for (const auto& m : size_votes) large += m.at(key) == Size::large;
    // Ties go heavy / large.
    const Weight w = 2 * heavy >= static_cast<int>(weight_votes.size())
                         ? Weight::heavy
                         : Weight::light;
    const Size s = 2 * large >= static_cast<int>(size_votes.size())
                       ? Size::large
                       : Size::small;
    out[key] = {w, s};
  }
  return out;
}

std::map<std::string, Rigidity> threshold_rigidity(
    const std::map<std::string, double>& stiffness) {
  if (stiffness.empty()) {
    throw Error(Errc::data, "no stiffness measurements");
  }
  std::vector<double> values;
  values.reserve(stiffness.size());
  for (const auto& [key, v] : stiffness) {
    if (!(v > 0.0)) {
      throw Error(Errc::data, "non-positive stiffness for " + key);
    }
    values.push_back(v);
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double median = n % 2 == 1
                            ? values[n / 2]
                            : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  std::map<std::string, Rigidity> out;
  for (const auto& [key, v] : stiffness) {
    out[key] = v < median ? Rigidity::soft : Rigidity::hard;
  }
  return out;
}

}  // namespace desk
