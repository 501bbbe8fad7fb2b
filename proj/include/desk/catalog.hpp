#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "desk/core.hpp"

namespace desk {

struct CatalogEntry {
  std::string key;
  AttributeSet attrs;                  // utility holds the catalog default
  std::vector<AttributeSet> variants;  // alternative configurations
  Footprint footprint{0.06, 0.06};
};

using Catalog = std::vector<CatalogEntry>;

// Keys unique; the shipped default carries 17 entries.
void validate(const Catalog& catalog);

// Deterministic organizational rule: quadrant from utility, then a
// west-to-east chain within each quadrant ordered by color and shape.
struct Ruleset {
  std::string name;
  std::array<int, 7> quad_rule{};  // utility u -> quad_rule[u-1], values 1..4
  std::array<int, 6> ew_rank{};    // per Color, a permutation of 0..5
  std::array<int, 4> ns_rank{};    // per Shape, a permutation of 0..3
};

void validate(const Ruleset& rules);
Ruleset default_ruleset();

// Base ruleset with quadrant labels remapped; used for pseudo-participants.
// quad_perm maps quadrant q -> quad_perm[q-1].
Ruleset permuted_ruleset(const Ruleset& base, const std::array<int, 4>& quad_perm,
                         const std::string& name);

struct UtilityProfile {
  std::string participant_id;
  std::map<std::string, int> utilities;  // catalog_key -> 1..7
};

// Overwrites each object's utility from the profile; every catalog key in the
// scene must be covered.
void apply_utility_profile(Scene& scene, const UtilityProfile& profile);

// K objects drawn uniformly with replacement, K uniform in [k_min, k_max];
// entries with variants pick one configuration uniformly. No geometry.
Scene generate_scene(std::uint64_t rng_seed, const Catalog& catalog, int k_min,
                     int k_max);

// Groundings implied by the ruleset: quadrants from utility; within a
// quadrant the chain sorted by (ew_rank(color), ns_rank(shape), id) runs west
// to east, successive objects relating E on equal shapes, NE when the eastern
// object's shape ranks later, SE when earlier; cross-quadrant pairs derive
// from quadrant geometry.
SceneGroundings rule_annotate(const Scene& scene, const Ruleset& rules);

// Each attribute of each object independently flips, with probability p, to a
// value drawn uniformly from the rest of its domain. Groundings are not
// recomputed: the noise models an untrusted attribute annotator.
Scene perturb_attributes(const Scene& scene, double p, std::uint64_t rng_seed);

// Majority vote per object over participants; ties resolve to heavy / large.
std::map<std::string, std::pair<Weight, Size>> canonicalize_subjective(
    const std::vector<std::map<std::string, Weight>>& weight_votes,
    const std::vector<std::map<std::string, Size>>& size_votes);

// Median split: stiffness strictly below the median is soft, the rest hard.
std::map<std::string, Rigidity> threshold_rigidity(
    const std::map<std::string, double>& stiffness);

}  // namespace desk
