#include "desk/features.hpp"

#include <algorithm>

namespace desk {

bool ModalityMask::includes(Attribute a) const {
  switch (a) {
    case Attribute::color:
    case Attribute::shape:
    case Attribute::size:
      return vision;
    case Attribute::weight:
    case Attribute::rigidity:
      return haptics;
    case Attribute::utility:
      return utility;
  }
  return false;
}

std::string ModalityMask::code() const {
  std::string s;
  if (haptics) s += 'H';
  if (utility) s += 'U';
  if (vision) s += 'V';
  return s;
}

ModalityMask ModalityMask::parse(std::string_view code) {
  ModalityMask m{false, false, false};
  for (char c : code) {
    switch (c) {
      case 'H': case 'h': m.haptics = true; break;
      case 'U': case 'u': m.utility = true; break;
      case 'V': case 'v': m.vision = true; break;
      default:
        throw Error(Errc::configuration,
                    "unknown modality '" + std::string(1, c) + "' in mask");
    }
  }
  validate(m);
  return m;
}

std::vector<ModalityMask> ModalityMask::all() {
  return {
      {true, true, true},   {true, false, true}, {false, true, true},
      {true, true, false},  {true, false, false}, {false, true, false},
      {false, false, true},
  };
}

void validate(const ModalityMask& mask) {
  if (!mask.haptics && !mask.utility && !mask.vision) {
    throw Error(Errc::configuration, "modality mask enables no modality");
  }
}

FeatureLayout layout_for(ModalityMask mask) {
  validate(mask);
  FeatureLayout layout;
  for (Attribute a : kAttributes) {
    if (!mask.includes(a)) continue;
    for (int v = 0; v < domain_size(a); ++v) layout.emplace_back(a, v);
  }
  return layout;
}

int object_block_length(ModalityMask mask) {
  int n = 0;
  for (Attribute a : kAttributes) {
    if (mask.includes(a)) n += domain_size(a);
  }
  return n;
}

namespace {

std::vector<std::uint8_t> object_bits(const AttributeSet& attrs,
                                      ModalityMask mask) {
  std::vector<std::uint8_t> bits;
  bits.reserve(object_block_length(mask));
  for (Attribute a : kAttributes) {
    if (!mask.includes(a)) continue;
    const int v = attrs.value(a);
    for (int i = 0; i < domain_size(a); ++i) bits.push_back(i == v ? 1 : 0);
  }
  return bits;
}

void append_context(std::vector<std::uint8_t>& out, const Scene& scene,
                    ModalityMask mask, int skip_a, int skip_b) {
  std::vector<std::vector<std::uint8_t>> blocks;
  blocks.reserve(scene.objects.size());
  for (const ObjectInstance& obj : scene.objects) {
    if (obj.id == skip_a || obj.id == skip_b) continue;
    blocks.push_back(object_bits(obj.attrs, mask));
  }
  std::sort(blocks.begin(), blocks.end());
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
}

void check_object_index(const Scene& scene, int i) {
  if (i < 0 || i >= scene.object_count()) {
    throw Error(Errc::data, "object index out of range: " + std::to_string(i));
  }
}

}  // namespace

FeatureVector encode_object(const AttributeSet& attrs, ModalityMask mask) {
  validate(attrs);
  return {object_bits(attrs, mask), layout_for(mask)};
}

std::map<Attribute, int> decode_object(const FeatureVector& fv) {
  if (fv.values.size() != fv.layout.size()) {
    throw Error(Errc::dimension, "decode expects a single object block");
  }
  std::map<Attribute, int> out;
  for (std::size_t p = 0; p < fv.values.size(); ++p) {
    if (!fv.values[p]) continue;
    const auto [attr, value] = fv.layout[p];
    if (out.count(attr)) {
      throw Error(Errc::data, "multiple hot bits in one attribute block");
    }
    out[attr] = value;
  }
  for (const auto& [attr, value] : fv.layout) {
    if (!out.count(attr)) {
      throw Error(Errc::data, std::string("no hot bit for ") +
                                  std::string(attribute_name(attr)));
    }
  }
  return out;
}

FeatureVector encode_quad_sample(const Scene& scene, int target,
                                 ModalityMask mask) {
  validate(scene);
  check_object_index(scene, target);
  FeatureVector fv;
  fv.layout = layout_for(mask);
  fv.values = object_bits(scene.objects[target].attrs, mask);
  fv.values.reserve(scene.objects.size() * fv.layout.size());
  append_context(fv.values, scene, mask, target, -1);
  return fv;
}

FeatureVector encode_rel_sample(const Scene& scene, int i, int j,
                                ModalityMask mask) {
  validate(scene);
  check_object_index(scene, i);
  check_object_index(scene, j);
  if (i == j) {
    throw Error(Errc::degenerate_pair, "relation sample needs two distinct objects");
  }
  FeatureVector fv;
  fv.layout = layout_for(mask);
  fv.values = object_bits(scene.objects[i].attrs, mask);
  const auto bits_j = object_bits(scene.objects[j].attrs, mask);
  fv.values.insert(fv.values.end(), bits_j.begin(), bits_j.end());
  fv.values.reserve(scene.objects.size() * fv.layout.size());
  append_context(fv.values, scene, mask, i, j);
  return fv;
}

}  // namespace desk
