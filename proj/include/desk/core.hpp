#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace desk {

// ---------------------------------------------------------------------------
// Errors

enum class Errc {
  invalid_geometry,
  degenerate_pair,
  no_opposite,
  same_quadrant,
  annotation_ambiguity,
  configuration,
  data,
  dimension,
  capacity,
  evidence_incomplete,
  numerical,
  // parser diagnostics (stable codes, see io.hpp)
  parse_syntax,
  unknown_predicate,
  out_of_domain,
  duplicate_functional,
  dangling_object,
  incomplete_object,
  invalid_scene,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// ---------------------------------------------------------------------------
// Attribute domains

enum class Color : std::uint8_t { red, blue, black, green, yellow, other };
enum class Shape : std::uint8_t { rectangle, cylinder, cube, other };
enum class Size : std::uint8_t { small, large };
enum class Weight : std::uint8_t { light, heavy };
enum class Rigidity : std::uint8_t { soft, hard };

enum class Attribute : std::uint8_t { color, shape, size, weight, rigidity, utility };

inline constexpr std::array<Attribute, 6> kAttributes = {
    Attribute::color, Attribute::shape,    Attribute::size,
    Attribute::weight, Attribute::rigidity, Attribute::utility};

inline constexpr int kUtilityMin = 1;
inline constexpr int kUtilityMax = 7;
inline constexpr int kQuadrantCount = 4;

int domain_size(Attribute a);
std::string_view attribute_name(Attribute a);
std::string_view value_name(Attribute a, int value);
// Returns -1 when the token is not a member of the attribute's domain.
int value_from_name(Attribute a, std::string_view token);
std::optional<Attribute> attribute_from_name(std::string_view token);

struct AttributeSet {
  Color color = Color::other;
  Shape shape = Shape::other;
  Size size = Size::small;
  Weight weight = Weight::light;
  Rigidity rigidity = Rigidity::hard;
  int utility = kUtilityMin;

  // Value of one attribute as an index into its domain (utility 1..7 -> 0..6).
  int value(Attribute a) const;
  void set_value(Attribute a, int value);

  bool operator==(const AttributeSet&) const = default;
};

void validate(const AttributeSet& attrs);

// ---------------------------------------------------------------------------
// Scene geometry

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct Footprint {
  double w = 0.0;
  double h = 0.0;
  double area() const { return w * h; }
  bool operator==(const Footprint&) const = default;
};

struct Geometry {
  Point center;
  Footprint footprint;
  bool operator==(const Geometry&) const = default;
};

struct ObjectInstance {
  int id = 0;
  std::string catalog_key;
  AttributeSet attrs;
  std::optional<Geometry> geometry;
  bool operator==(const ObjectInstance&) const = default;
};

struct Scene {
  std::string id;
  std::string participant;  // empty = unattributed
  std::vector<ObjectInstance> objects;

  int object_count() const { return static_cast<int>(objects.size()); }
  bool operator==(const Scene&) const = default;
};

// Checks object ids are exactly 0..K-1, attributes valid, and any geometry
// lies on the unit desk with a strictly positive footprint.
void validate(const Scene& scene);

// ---------------------------------------------------------------------------
// Spatial relations

// Domain order is fixed; forest/MLN tie-breaking relies on it.
enum class Direction : std::uint8_t { E, NE, N, NW, W, SW, S, SE, IN, NONE };

inline constexpr int kDirectionCount = 10;
inline constexpr std::array<Direction, 10> kDirections = {
    Direction::E,  Direction::NE, Direction::N,  Direction::NW, Direction::W,
    Direction::SW, Direction::S,  Direction::SE, Direction::IN, Direction::NONE};

std::string_view direction_name(Direction d);
std::optional<Direction> direction_from_name(std::string_view token);
bool is_cardinal(Direction d);

// 180-degree rotation of a cardinal. IN and NONE have no opposite.
Direction opposite(Direction d);

// Quadrant layout: 1 = NE, 2 = NW, 3 = SW, 4 = SE on the unit desk, +x east,
// +y north. Boundaries are closed on the >= 0.5 side of both axes.
int quadrant_of(Point center);

// 45-degree sector of the displacement from j to i, counter-clockwise from +x.
// Sectors are half-open with the upper bound inclusive, so exact diagonals are
// deterministic and cardinal_between(a,b) == opposite(cardinal_between(b,a))
// holds exactly for every non-degenerate pair.
Direction cardinal_between(Point center_i, Point center_j);

// Cardinal implied by quadrant membership alone, e.g. quadrant 1 is north of
// quadrant 4. Undefined (error) for equal quadrants.
Direction derived_dir_from_quads(int quad_i, int quad_j);

// One quadrant per object plus one directed relation per ordered pair.
class SceneGroundings {
 public:
  SceneGroundings() = default;
  explicit SceneGroundings(int object_count);

  int object_count() const { return count_; }

  int quad(int i) const;
  void set_quad(int i, int quadrant);
  bool has_quad(int i) const;

  Direction rel(int i, int j) const;
  void set_rel(int i, int j, Direction d);
  bool has_rel(int i, int j) const;

  bool operator==(const SceneGroundings&) const = default;

 private:
  int index(int i, int j) const;
  void check_object(int i) const;

  int count_ = 0;
  std::vector<std::int8_t> quads_;  // 0 = unset, else 1..4
  std::vector<std::int8_t> rels_;   // -1 = unset, else Direction
};

// Throws unless the groundings are complete and satisfy inverse consistency:
// cardinal pairs are opposites, IN pairs with a NONE inverse, NONE otherwise.
void validate(const SceneGroundings& g);

// Positional annotator: quadrants from centers; IN when footprints overlap by
// at least half of the smaller footprint and areas differ strictly; cardinal
// sectors between centers otherwise. Requires geometry on every object.
SceneGroundings annotate_scene(const Scene& scene);

}  // namespace desk
