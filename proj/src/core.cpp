#include "desk/core.hpp"

#include <algorithm>
#include <cmath>

namespace desk {

namespace {

constexpr std::array<std::string_view, 6> kColorNames = {
    "red", "blue", "black", "green", "yellow", "other"};
constexpr std::array<std::string_view, 4> kShapeNames = {
    "rectangle", "cylinder", "cube", "other"};
constexpr std::array<std::string_view, 2> kSizeNames = {"small", "large"};
constexpr std::array<std::string_view, 2> kWeightNames = {"light", "heavy"};
constexpr std::array<std::string_view, 2> kRigidityNames = {"soft", "hard"};
constexpr std::array<std::string_view, 7> kUtilityNames = {"1", "2", "3",
                                                           "4", "5", "6", "7"};
constexpr std::array<std::string_view, 10> kDirectionNames = {
    "E", "NE", "N", "NW", "W", "SW", "S", "SE", "IN", "NONE"};

std::string object_label(int i) { return "o" + std::to_string(i); }

}  // namespace

int domain_size(Attribute a) {
  switch (a) {
    case Attribute::color: return 6;
    case Attribute::shape: return 4;
    case Attribute::size: return 2;
    case Attribute::weight: return 2;
    case Attribute::rigidity: return 2;
    case Attribute::utility: return 7;
  }
  throw Error(Errc::data, "unknown attribute");
}

std::string_view attribute_name(Attribute a) {
  switch (a) {
    case Attribute::color: return "color";
    case Attribute::shape: return "shape";
    case Attribute::size: return "size";
    case Attribute::weight: return "weight";
    case Attribute::rigidity: return "rigidity";
    case Attribute::utility: return "utility";
  }
  throw Error(Errc::data, "unknown attribute");
}

std::string_view value_name(Attribute a, int value) {
  if (value < 0 || value >= domain_size(a)) {
    throw Error(Errc::out_of_domain, std::string(attribute_name(a)) +
                                         " value index out of range: " +
                                         std::to_string(value));
  }
  switch (a) {
    case Attribute::color: return kColorNames[value];
    case Attribute::shape: return kShapeNames[value];
    case Attribute::size: return kSizeNames[value];
    case Attribute::weight: return kWeightNames[value];
    case Attribute::rigidity: return kRigidityNames[value];
    case Attribute::utility: return kUtilityNames[value];
  }
  throw Error(Errc::data, "unknown attribute");
}

int value_from_name(Attribute a, std::string_view token) {
  for (int v = 0; v < domain_size(a); ++v) {
    if (value_name(a, v) == token) return v;
  }
  return -1;
}

std::optional<Attribute> attribute_from_name(std::string_view token) {
  for (Attribute a : kAttributes) {
    if (attribute_name(a) == token) return a;
  }
  return std::nullopt;
}

int AttributeSet::value(Attribute a) const {
  switch (a) {
    case Attribute::color: return static_cast<int>(color);
    case Attribute::shape: return static_cast<int>(shape);
    case Attribute::size: return static_cast<int>(size);
    case Attribute::weight: return static_cast<int>(weight);
    case Attribute::rigidity: return static_cast<int>(rigidity);
    case Attribute::utility: return utility - kUtilityMin;
  }
  throw Error(Errc::data, "unknown attribute");
}

void AttributeSet::set_value(Attribute a, int value) {
  if (value < 0 || value >= domain_size(a)) {
    throw Error(Errc::out_of_domain, std::string(attribute_name(a)) +
                                         " value index out of range: " +
                                         std::to_string(value));
  }
  switch (a) {
    case Attribute::color: color = static_cast<Color>(value); return;
    case Attribute::shape: shape = static_cast<Shape>(value); return;
    case Attribute::size: size = static_cast<Size>(value); return;
    case Attribute::weight: weight = static_cast<Weight>(value); return;
    case Attribute::rigidity: rigidity = static_cast<Rigidity>(value); return;
    case Attribute::utility: utility = value + kUtilityMin; return;
  }
}

void validate(const AttributeSet& attrs) {
  if (attrs.utility < kUtilityMin || attrs.utility > kUtilityMax) {
    throw Error(Errc::out_of_domain,
                "utility must be in [1,7], got " + std::to_string(attrs.utility));
  }
}

void validate(const Scene& scene) {
  if (scene.objects.empty()) {
    throw Error(Errc::invalid_scene, "a scene needs at least one object");
  }
  for (int i = 0; i < scene.object_count(); ++i) {
    const ObjectInstance& obj = scene.objects[i];
    if (obj.id != i) {
      throw Error(Errc::invalid_scene,
                  "object ids must be contiguous from 0; slot " +
                      std::to_string(i) + " holds id " + std::to_string(obj.id));
    }
    validate(obj.attrs);
    if (obj.geometry) {
      quadrant_of(obj.geometry->center);  // range check
      if (!(obj.geometry->footprint.w > 0.0) ||
          !(obj.geometry->footprint.h > 0.0)) {
        throw Error(Errc::invalid_geometry,
                    object_label(i) + " footprint must be strictly positive");
      }
    }
  }
}

std::string_view direction_name(Direction d) {
  return kDirectionNames[static_cast<int>(d)];
}

std::optional<Direction> direction_from_name(std::string_view token) {
  for (Direction d : kDirections) {
    if (direction_name(d) == token) return d;
  }
  return std::nullopt;
}

bool is_cardinal(Direction d) {
  return static_cast<int>(d) < static_cast<int>(Direction::IN);
}

Direction opposite(Direction d) {
  switch (d) {
    case Direction::E: return Direction::W;
    case Direction::NE: return Direction::SW;
    case Direction::N: return Direction::S;
    case Direction::NW: return Direction::SE;
    case Direction::W: return Direction::E;
    case Direction::SW: return Direction::NE;
    case Direction::S: return Direction::N;
    case Direction::SE: return Direction::NW;
    case Direction::IN:
    case Direction::NONE:
      throw Error(Errc::no_opposite, std::string(direction_name(d)) +
                                         " has no opposite direction");
  }
  throw Error(Errc::data, "unknown direction");
}

int quadrant_of(Point center) {
  if (!(center.x >= 0.0 && center.x <= 1.0 && center.y >= 0.0 &&
        center.y <= 1.0)) {
    throw Error(Errc::invalid_geometry,
                "center outside the unit desk: (" + std::to_string(center.x) +
                    ", " + std::to_string(center.y) + ")");
  }
  const bool east = center.x >= 0.5;
  const bool north = center.y >= 0.5;
  if (east && north) return 1;
  if (!east && north) return 2;
  if (!east && !north) return 3;
  return 4;
}

Direction cardinal_between(Point center_i, Point center_j) {
  const double dx = center_i.x - center_j.x;
  const double dy = center_i.y - center_j.y;
  if (dx == 0.0 && dy == 0.0) {
    throw Error(Errc::degenerate_pair, "coincident centers have no direction");
  }
  // Rotate the displacement by +22.5 degrees so sector boundaries land on the
  // axes and main diagonals; IEEE negation symmetry then makes the antipodal
  // identity exact even on boundaries.
  constexpr double kCos = 0.92387953251128674;  // cos(pi/8)
  constexpr double kSin = 0.38268343236508978;  // sin(pi/8)
  const double u = kCos * dx - kSin * dy;
  const double v = kSin * dx + kCos * dy;
  if (u == 0.0 && v == 0.0) {
    throw Error(Errc::degenerate_pair, "displacement underflows to zero");
  }
  // Rotated-frame sectors, upper bound inclusive:
  //   E (0,45]  NE (45,90]  N (90,135]  NW (135,180]
  //   W (-180,-135]  SW (-135,-90]  S (-90,-45]  SE (-45,0]
  if (v > 0.0) {
    if (u >= 0.0) return v <= u ? Direction::E : Direction::NE;
    return -u <= v ? Direction::N : Direction::NW;
  }
  if (v == 0.0) return u > 0.0 ? Direction::SE : Direction::NW;
  if (u <= 0.0) return v >= u ? Direction::W : Direction::SW;
  return u <= -v ? Direction::S : Direction::SE;
}

Direction derived_dir_from_quads(int quad_i, int quad_j) {
  auto check = [](int q) {
    if (q < 1 || q > kQuadrantCount) {
      throw Error(Errc::out_of_domain, "quadrant out of range: " + std::to_string(q));
    }
  };
  check(quad_i);
  check(quad_j);
  if (quad_i == quad_j) {
    throw Error(Errc::same_quadrant,
                "relation between objects in the same quadrant is not derivable");
  }
  // Layout: 1 = NE, 2 = NW, 3 = SW, 4 = SE.
  if (quad_i == 1 && quad_j == 4) return Direction::N;
  if (quad_i == 1 && quad_j == 2) return Direction::E;
  if (quad_i == 1 && quad_j == 3) return Direction::NE;
  if (quad_i == 2 && quad_j == 3) return Direction::N;
  if (quad_i == 2 && quad_j == 4) return Direction::NW;
  if (quad_i == 3 && quad_j == 4) return Direction::W;
  return opposite(derived_dir_from_quads(quad_j, quad_i));
}

SceneGroundings::SceneGroundings(int object_count)
    : count_(object_count),
      quads_(static_cast<std::size_t>(object_count), 0),
      rels_(static_cast<std::size_t>(object_count) * object_count, -1) {
  if (object_count < 0) {
    throw Error(Errc::data, "negative object count");
  }
}

void SceneGroundings::check_object(int i) const {
  if (i < 0 || i >= count_) {
    throw Error(Errc::data, "object index out of range: " + std::to_string(i));
  }
}

int SceneGroundings::index(int i, int j) const {
  check_object(i);
  check_object(j);
  if (i == j) {
    throw Error(Errc::degenerate_pair, "no relation of an object to itself");
  }
  return i * count_ + j;
}

int SceneGroundings::quad(int i) const {
  check_object(i);
  if (quads_[i] == 0) {
    throw Error(Errc::data, "quadrant of " + object_label(i) + " is unset");
  }
  return quads_[i];
}

void SceneGroundings::set_quad(int i, int quadrant) {
  check_object(i);
  if (quadrant < 1 || quadrant > kQuadrantCount) {
    throw Error(Errc::out_of_domain,
                "quadrant out of range: " + std::to_string(quadrant));
  }
  quads_[i] = static_cast<std::int8_t>(quadrant);
}

bool SceneGroundings::has_quad(int i) const {
  check_object(i);
  return quads_[i] != 0;
}

Direction SceneGroundings::rel(int i, int j) const {
  const int idx = index(i, j);
  if (rels_[idx] < 0) {
    throw Error(Errc::data, "relation (" + object_label(i) + ", " +
                                object_label(j) + ") is unset");
  }
  return static_cast<Direction>(rels_[idx]);
}

void SceneGroundings::set_rel(int i, int j, Direction d) {
  rels_[index(i, j)] = static_cast<std::int8_t>(d);
}

bool SceneGroundings::has_rel(int i, int j) const {
  return rels_[index(i, j)] >= 0;
}

void validate(const SceneGroundings& g) {
  const int k = g.object_count();
  for (int i = 0; i < k; ++i) {
    if (!g.has_quad(i)) {
      throw Error(Errc::invalid_scene, "missing quadrant for " + object_label(i));
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (!g.has_rel(i, j) || !g.has_rel(j, i)) {
        throw Error(Errc::invalid_scene, "missing relation for pair (" +
                                             object_label(i) + ", " +
                                             object_label(j) + ")");
      }
      const Direction d = g.rel(i, j);
      const Direction r = g.rel(j, i);
      bool ok = false;
      if (is_cardinal(d)) {
        ok = r == opposite(d);
      } else if (d == Direction::IN) {
        ok = r == Direction::NONE;
      } else {  // NONE pairs with NONE, or is the inverse of IN
        ok = r == Direction::NONE || r == Direction::IN;
      }
      if (!ok) {
        throw Error(Errc::invalid_scene,
                    "inconsistent pair (" + object_label(i) + ", " +
                        object_label(j) + "): " +
                        std::string(direction_name(d)) + " vs " +
                        std::string(direction_name(r)));
      }
    }
  }
}

namespace {

double overlap_area(const Geometry& a, const Geometry& b) {
  const double ox =
      std::min(a.center.x + a.footprint.w / 2, b.center.x + b.footprint.w / 2) -
      std::max(a.center.x - a.footprint.w / 2, b.center.x - b.footprint.w / 2);
  const double oy =
      std::min(a.center.y + a.footprint.h / 2, b.center.y + b.footprint.h / 2) -
      std::max(a.center.y - a.footprint.h / 2, b.center.y - b.footprint.h / 2);
  if (ox <= 0.0 || oy <= 0.0) return 0.0;
  return ox * oy;
}

}  // namespace

SceneGroundings annotate_scene(const Scene& scene) {
  validate(scene);
  const int k = scene.object_count();
  for (int i = 0; i < k; ++i) {
    if (!scene.objects[i].geometry) {
      throw Error(Errc::invalid_geometry,
                  object_label(i) + " has no geometry to annotate");
    }
  }
  SceneGroundings g(k);
  for (int i = 0; i < k; ++i) {
    g.set_quad(i, quadrant_of(scene.objects[i].geometry->center));
  }
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const Geometry& gi = *scene.objects[i].geometry;
      const Geometry& gj = *scene.objects[j].geometry;
      const double ai = gi.footprint.area();
      const double aj = gj.footprint.area();
      const double ov = overlap_area(gi, gj);
      if (ov >= 0.5 * std::min(ai, aj) && ai != aj) {
        const int inner = ai < aj ? i : j;
        const int outer = ai < aj ? j : i;
        g.set_rel(inner, outer, Direction::IN);
        g.set_rel(outer, inner, Direction::NONE);
        continue;
      }
      if (gi.center == gj.center) {
        throw Error(Errc::annotation_ambiguity,
                    "objects " + object_label(i) + " and " + object_label(j) +
                        " coincide without a containment relation");
      }
      const Direction d = cardinal_between(gi.center, gj.center);
      g.set_rel(i, j, d);
      g.set_rel(j, i, opposite(d));
    }
  }
  return g;
}

}  // namespace desk
