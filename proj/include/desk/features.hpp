#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "desk/core.hpp"

namespace desk {

// Which attribute groups a model may see. Vision covers color/shape/size,
// haptics weight/rigidity, utility itself.
struct ModalityMask {
  bool haptics = true;
  bool utility = true;
  bool vision = true;

  bool includes(Attribute a) const;
  // Canonical code in H,U,V order: "HUV", "UV", "H", ...
  std::string code() const;
  static ModalityMask parse(std::string_view code);
  // All seven non-empty subsets, in the ablation's fixed reporting order:
  // HUV, HV, UV, HU, H, U, V.
  static std::vector<ModalityMask> all();

  bool operator==(const ModalityMask&) const = default;
};

void validate(const ModalityMask& mask);

// (attribute, value-index) per position of a single object block.
using FeatureLayout = std::vector<std::pair<Attribute, int>>;

FeatureLayout layout_for(ModalityMask mask);
int object_block_length(ModalityMask mask);

struct FeatureVector {
  std::vector<std::uint8_t> values;
  // Per-object block layout; position p of the full vector describes
  // layout[p % layout.size()] of object slot p / layout.size().
  FeatureLayout layout;
};

// One-hot blocks for the enabled attributes in fixed order
// (color, shape, size, weight, rigidity, utility).
FeatureVector encode_object(const AttributeSet& attrs, ModalityMask mask);

// Enabled attribute values recovered from a single-object vector.
std::map<Attribute, int> decode_object(const FeatureVector& fv);

// Target object's block followed by the K-1 context blocks sorted
// lexicographically by bit pattern, so context order never matters.
FeatureVector encode_quad_sample(const Scene& scene, int target,
                                 ModalityMask mask);

// Ordered pair (i, j) blocks, then the K-2 sorted context blocks.
FeatureVector encode_rel_sample(const Scene& scene, int i, int j,
                                ModalityMask mask);

}  // namespace desk
