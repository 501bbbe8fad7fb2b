#include <doctest.h>

#include <functional>

#include "desk/eval.hpp"
#include "desk/io.hpp"
#include "desk/organize.hpp"
#include "desk/rng.hpp"
#include "helpers.hpp"

using namespace desk;
using testutil::attrs;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::data;
}

const char* kSmallScene =
    "scene demo\n"
    "participant p3\n"
    "item(o0, mouse).\n"
    "color(o0, black). shape(o0, other). size(o0, small).\n"
    "weight(o0, light). rigidity(o0, hard). utility(o0, 7).\n"
    "color(o1, red). shape(o1, cube). size(o1, large).\n"
    "weight(o1, heavy). rigidity(o1, soft). utility(o1, 2).\n";

}  // namespace

TEST_CASE("parse_scene reads attributes, headers and geometry") {
  std::string text = std::string(kSmallScene) +
                     "pos(o0, 0.25, 0.75). size2d(o0, 0.1, 0.05).\n";
  const ParsedScene parsed = parse_scene(text);
  CHECK(parsed.scene.id == "demo");
  CHECK(parsed.scene.participant == "p3");
  REQUIRE(parsed.scene.object_count() == 2);
  CHECK(parsed.scene.objects[0].catalog_key == "mouse");
  CHECK(parsed.scene.objects[0].attrs.color == Color::black);
  CHECK(parsed.scene.objects[1].attrs.utility == 2);
  CHECK(!parsed.groundings.has_value());
  REQUIRE(parsed.scene.objects[0].geometry.has_value());
  CHECK(parsed.scene.objects[0].geometry->center == Point{0.25, 0.75});
  CHECK(!parsed.scene.objects[1].geometry.has_value());
}

TEST_CASE("parser diagnostics carry distinct stable codes") {
  // out-of-domain value, naming the legal colors
  try {
    parse_scene("scene x\ncolor(o0, purple).\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::out_of_domain);
    const std::string msg = e.what();
    for (const char* name : {"red", "blue", "black", "green", "yellow", "other"}) {
      CHECK(msg.find(name) != std::string::npos);
    }
    CHECK(msg.find("line 2") != std::string::npos);
  }
  // duplicate functional assignment, two atoms on one line
  CHECK(code_of([] {
          parse_scene(std::string(kSmallScene) + "quad(o0,1). quad(o0,2).\n");
        }) == Errc::duplicate_functional);
  CHECK(code_of([] {
          parse_scene(std::string(kSmallScene) + "color(o0, red).\n");
        }) == Errc::duplicate_functional);
  // unknown predicate
  CHECK(code_of([] { parse_scene("scene x\nflavor(o0, sweet).\n"); }) ==
        Errc::unknown_predicate);
  // dangling object: o2 appears only inside a relation
  CHECK(code_of([] {
          parse_scene(std::string(kSmallScene) +
                      "quad(o0,1). quad(o1,1). quad(o2,2).\n");
        }) == Errc::dangling_object);
  // incomplete object
  CHECK(code_of([] { parse_scene("scene x\ncolor(o0, red).\n"); }) ==
        Errc::incomplete_object);
  // incomplete groundings
  CHECK(code_of([] {
          parse_scene(std::string(kSmallScene) + "quad(o0,1).\n");
        }) == Errc::invalid_scene);
  // geometry needs both pos and size2d
  CHECK(code_of([] {
          parse_scene(std::string(kSmallScene) + "pos(o0, 0.5, 0.5).\n");
        }) == Errc::invalid_geometry);
  // utility domain
  CHECK(code_of([] {
          parse_scene("scene x\nutility(o0, 9).\n");
        }) == Errc::out_of_domain);
  // syntax
  CHECK(code_of([] { parse_scene("scene x\ncolor(o0, red)\n"); }) ==
        Errc::parse_syntax);
  CHECK(code_of([] { parse_scene("color(o0, red).\n"); }) == Errc::parse_syntax);
}

TEST_CASE("inconsistent relational atoms are rejected") {
  const std::string base = std::string(kSmallScene) + "quad(o0,1). quad(o1,2).\n";
  CHECK(code_of([&] {
          parse_scene(base + "dir(o0, o1, N). dir(o1, o0, N).\n");
        }) == Errc::invalid_scene);
  CHECK_NOTHROW(parse_scene(base + "dir(o0, o1, N). dir(o1, o0, S).\n"));
}

TEST_CASE("scene serialization round-trips the data model") {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    const int k = 1 + static_cast<int>(rng.below(8));
    Scene scene = testutil::random_geometry_scene(rng, k);
    scene.id = "rt-" + std::to_string(t);
    if (rng.below(2)) scene.participant = "p" + std::to_string(rng.below(5));
    for (int i = 0; i < k; ++i) {
      if (rng.below(2)) {
        scene.objects[i].catalog_key = "key" + std::to_string(rng.below(9));
      }
      if (rng.below(4) == 0) scene.objects[i].geometry.reset();
    }
    std::optional<SceneGroundings> truth;
    if (rng.below(2)) {
      truth = rule_annotate(scene, default_ruleset());
    }
    const std::string text = serialize_scene(scene, truth ? &*truth : nullptr);
    const ParsedScene back = parse_scene(text);
    CHECK(back.scene == scene);
    CHECK(back.groundings.has_value() == truth.has_value());
    if (truth) CHECK(*back.groundings == *truth);
    // canonical reserialization is byte-identical
    CHECK(serialize_scene(back.scene,
                          back.groundings ? &*back.groundings : nullptr) == text);
  }
}

TEST_CASE("forest models survive serialization") {
  Rng rng(41);
  std::vector<FeatureVector> samples;
  std::vector<int> labels;
  for (int t = 0; t < 60; ++t) {
    std::vector<std::uint8_t> bits(12);
    for (auto& b : bits) b = rng.below(2);
    labels.push_back((bits[2] + bits[5]) % 3);
    samples.push_back({std::move(bits), {}});
  }
  const ForestModel model = fit_forest(samples, labels, {"a", "b", "c"}, 7,
                                       ModalityMask::parse("UV"), 12, 9);
  const std::string text = serialize_forest(model);
  const ForestModel back = parse_forest(text);
  CHECK(back.input_dim == model.input_dim);
  CHECK(back.k_train == 7);
  CHECK(back.mask == model.mask);
  CHECK(back.label_domain == model.label_domain);
  REQUIRE(back.trees.size() == model.trees.size());
  for (int t = 0; t < 100; ++t) {
    std::vector<std::uint8_t> bits(12);
    for (auto& b : bits) b = rng.below(2);
    const FeatureVector probe{std::move(bits), {}};
    CHECK(predict(back, probe) == predict(model, probe));
    CHECK(predict_proba(back, probe) == predict_proba(model, probe));
  }
  CHECK(serialize_forest(back) == text);
  CHECK_THROWS_AS(parse_forest("not a model"), Error);
}

TEST_CASE("mln models survive serialization") {
  Rng rng(43);
  const ModalityMask mask = ModalityMask::parse("HU");
  GroundedMln mln = expand_templates(default_templates(mask), mask);
  std::vector<double> w(mln.feature_count());
  for (double& x : w) x = 4.0 * rng.unit() - 2.0;
  mln.set_weights(std::move(w));
  const std::string text = serialize_mln(mln);
  const GroundedMln back = parse_mln(text);
  CHECK(back.mask() == mask);
  CHECK(back.feature_count() == mln.feature_count());
  CHECK(back.weights() == mln.weights());
  CHECK(back.templates() == mln.templates());
  CHECK(serialize_mln(back) == text);
}

TEST_CASE("dump lines round-trip through the formula parser") {
  const ModalityMask mask = ModalityMask::parse("HUV");
  GroundedMln mln = expand_templates(default_templates(mask), mask);
  Rng rng(47);
  for (int t = 0; t < 40; ++t) {
    const std::size_t f = rng.below(mln.feature_count());
    mln.set_weight(f, 1.0 + rng.unit());
    const GroundFeature gf = mln.feature(f);
    const ParsedFormula parsed = parse_formula(render_feature(mln, f));
    CHECK(parsed.tmpl == mln.templates()[gf.template_id]);
    CHECK(parsed.values == gf.values);
    CHECK(parsed.rel_value == gf.rel_value);
  }
  // the paper's own example shape parses
  const ParsedFormula p =
      parse_formula("utility(o1, 5) ^ utility(o2, 3) ^ dir(o1, o2, NW)");
  CHECK(p.tmpl.rel == FormulaTemplate::Rel::dir);
  CHECK(p.values == std::vector<int>{4, 2});
  CHECK(p.rel_value == static_cast<int>(Direction::NW));
  CHECK_THROWS_AS(parse_formula("dir(o1, o2, NW)"), Error);
  CHECK_THROWS_AS(parse_formula("color(o1, red) ^ color(o2, blue)"), Error);
}

TEST_CASE("the shipped data files parse") {
  const Catalog& catalog = testutil::shipped_catalog();
  CHECK(catalog.size() == 17);
  const CatalogEntry* rubiks = nullptr;
  const CatalogEntry* eraser = nullptr;
  const CatalogEntry* marker = nullptr;
  for (const CatalogEntry& e : catalog) {
    if (e.key == "rubiks_cube") rubiks = &e;
    if (e.key == "eraser") eraser = &e;
    if (e.key == "dry_erase_marker") marker = &e;
  }
  REQUIRE(rubiks != nullptr);
  REQUIRE(eraser != nullptr);
  REQUIRE(marker != nullptr);
  // both are cubes of color other; they differ in rigidity
  CHECK(rubiks->attrs.shape == Shape::cube);
  CHECK(eraser->attrs.shape == Shape::cube);
  CHECK(rubiks->attrs.color == Color::other);
  CHECK(eraser->attrs.color == Color::other);
  CHECK(rubiks->attrs.rigidity == Rigidity::hard);
  CHECK(eraser->attrs.rigidity == Rigidity::soft);
  CHECK(marker->variants.size() == 2);

  const Ruleset rules = parse_ruleset(
      read_file(std::string(DESK_DATA_DIR) + "/ruleset_default.txt"));
  const Ruleset builtin = default_ruleset();
  CHECK(rules.quad_rule == builtin.quad_rule);
  CHECK(rules.ew_rank == builtin.ew_rank);
  CHECK(rules.ns_rank == builtin.ns_rank);
}

TEST_CASE("catalog and ruleset parsers reject malformed input") {
  CHECK_THROWS_AS(parse_catalog("catalog v2\n"), Error);
  CHECK_THROWS_AS(
      parse_catalog("catalog v1\nentry a color=red shape=cube size=small "
                    "weight=light rigidity=hard\n"),
      Error);  // missing utility and footprint is fine, utility is required
  CHECK_THROWS_AS(
      parse_catalog("catalog v1\nvariant ghost color=red shape=cube size=small "
                    "weight=light rigidity=hard utility=1\n"),
      Error);
  CHECK_THROWS_AS(parse_ruleset("ruleset v1\nname x\n"), Error);
  CHECK_THROWS_AS(
      parse_ruleset("ruleset v1\nname x\nquad_rule 1 1 1 1 1 1 9\n"
                    "ew_order red blue black green yellow other\n"
                    "ns_order rectangle cylinder cube other\n"),
      Error);
  CHECK_THROWS_AS(
      parse_ruleset("ruleset v1\nname x\nquad_rule 1 1 1 1 1 1 1\n"
                    "ew_order red red black green yellow other\n"
                    "ns_order rectangle cylinder cube other\n"),
      Error);
}
