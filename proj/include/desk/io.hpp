#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "desk/catalog.hpp"
#include "desk/core.hpp"
#include "desk/forest.hpp"
#include "desk/mln.hpp"

namespace desk {

// Scene files use the MLN predicate syntax, one ground atom per statement:
//
//   scene synth-7-000
//   participant p1
//   item(o0, mouse).
//   color(o0, black). shape(o0, other). size(o0, small).
//   weight(o0, light). rigidity(o0, hard). utility(o0, 7).
//   quad(o0, 4). dir(o0, o1, NE).
//   pos(o0, 0.25, 0.75). size2d(o0, 0.06, 0.09).
//
// Relational atoms are optional but must be complete and consistent when
// present. '#' starts a comment.

struct ParsedScene {
  Scene scene;
  std::optional<SceneGroundings> groundings;
};

ParsedScene parse_scene(std::string_view text);

// Canonical form: header, then atoms sorted by predicate name and arguments.
// parse_scene(serialize_scene(x)) recovers x exactly, and reserializing a
// canonical document is byte-identical.
std::string serialize_scene(const Scene& scene,
                            const SceneGroundings* groundings = nullptr);

std::string serialize_forest(const ForestModel& model);
ForestModel parse_forest(std::string_view text);

std::string serialize_mln(const GroundedMln& mln);
GroundedMln parse_mln(std::string_view text);

// One grounded formula in dump syntax, e.g.
// "color(o1, blue) ^ color(o2, other) ^ dir(o1, o2, SE)".
struct ParsedFormula {
  FormulaTemplate tmpl;
  std::vector<int> values;
  int rel_value = 0;
};

ParsedFormula parse_formula(std::string_view text);

Catalog parse_catalog(std::string_view text);
Ruleset parse_ruleset(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Shortest decimal that round-trips through from_chars.
std::string format_double(double v);

}  // namespace desk
