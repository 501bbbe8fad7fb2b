#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "desk/core.hpp"
#include "desk/forest.hpp"

namespace desk {

struct LayoutPlan {
  SceneGroundings groundings;
  std::vector<Point> coordinates;    // per object id
  std::vector<Footprint> footprints; // as realized (contained objects shrink)
  struct Unsatisfied {
    int i = 0;
    int j = 0;
    Direction expected = Direction::NONE;
  };
  std::vector<Unsatisfied> unsatisfied;
};

// Quadrants from rf_quad; same-quadrant pairs predicted by rf_rel in
// ascending (i, j) order with first-prediction-wins conflict resolution;
// cross-quadrant pairs derived from quadrants. The result always satisfies
// the pairwise grounding invariants.
SceneGroundings organize(const std::vector<ObjectInstance>& objects,
                         const ForestModel& rf_quad, const ForestModel& rf_rel,
                         ModalityMask mask);

// Greedy placement on a 3x3 anchor grid per quadrant. Objects are placed in
// decreasing order of outgoing cardinal constraints, each at the free anchor
// satisfying the most relations to already-placed objects. IN(i, j) puts i at
// j's center with a footprint clamped inside j's. Impossible relations land
// in `unsatisfied`, never silently changed.
LayoutPlan realize(const SceneGroundings& groundings,
                   const std::vector<Footprint>& footprints);

// Uniform i.i.d. centers on the desk; groundings read back by annotate_scene.
LayoutPlan random_organize(const std::vector<ObjectInstance>& objects,
                           std::uint64_t rng_seed);

// 800x600 desk with quadrant gridlines, one labeled rectangle per object
// colored by its color attribute, unsatisfied constraints in a margin note.
std::string render_svg(const LayoutPlan& plan,
                       const std::vector<ObjectInstance>& objects);

}  // namespace desk
