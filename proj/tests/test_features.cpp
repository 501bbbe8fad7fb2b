#include <doctest.h>

#include <set>

#include "desk/features.hpp"
#include "desk/rng.hpp"
#include "helpers.hpp"

using namespace desk;
using testutil::attrs;

TEST_CASE("mask codes and the seven ablation masks") {
  CHECK(ModalityMask{true, true, true}.code() == "HUV");
  CHECK(ModalityMask::parse("UV") == ModalityMask{false, true, true});
  CHECK(ModalityMask::parse("h") == ModalityMask{true, false, false});
  CHECK_THROWS_AS(ModalityMask::parse("HX"), Error);
  CHECK_THROWS_AS(validate(ModalityMask{false, false, false}), Error);
  const auto all = ModalityMask::all();
  CHECK(all.size() == 7);
  CHECK(all.front().code() == "HUV");
  CHECK(all.back().code() == "V");
  std::set<std::string> codes;
  for (const ModalityMask& m : all) codes.insert(m.code());
  CHECK(codes.size() == 7);
}

TEST_CASE("object encoding lengths follow the domain sizes") {
  const AttributeSet a =
      attrs(Color::red, Shape::cube, Size::small, Weight::light, Rigidity::hard, 1);
  CHECK(encode_object(a, ModalityMask::parse("HUV")).values.size() == 23);
  CHECK(encode_object(a, ModalityMask::parse("V")).values.size() == 12);
  CHECK(encode_object(a, ModalityMask::parse("H")).values.size() == 4);
  const FeatureVector u = encode_object(a, ModalityMask::parse("U"));
  CHECK(u.values == std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0, 0});
}

TEST_CASE("every attribute block is exactly one-hot") {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const AttributeSet a = testutil::random_attrs(rng);
    const auto masks = ModalityMask::all();
    const ModalityMask mask = masks[rng.below(masks.size())];
    const FeatureVector fv = encode_object(a, mask);
    std::size_t pos = 0;
    for (Attribute attr : kAttributes) {
      if (!mask.includes(attr)) continue;
      int ones = 0;
      for (int v = 0; v < domain_size(attr); ++v) ones += fv.values[pos++];
      CHECK(ones == 1);
    }
    CHECK(pos == fv.values.size());
  }
}

TEST_CASE("decode recovers the encoded attribute values") {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const AttributeSet a = testutil::random_attrs(rng);
    const auto decoded = decode_object(encode_object(a, ModalityMask::parse("HUV")));
    for (Attribute attr : kAttributes) {
      CHECK(decoded.at(attr) == a.value(attr));
    }
  }
}

namespace {

Scene seven_object_scene(Rng& rng) {
  std::vector<AttributeSet> as;
  for (int i = 0; i < 7; ++i) as.push_back(testutil::random_attrs(rng));
  return testutil::make_scene(as);
}

}  // namespace

TEST_CASE("quad samples are 7x23 under the full mask") {
  Rng rng(4);
  const Scene scene = seven_object_scene(rng);
  const FeatureVector fv = encode_quad_sample(scene, 0, ModalityMask::parse("HUV"));
  CHECK(fv.values.size() == 161);
}

TEST_CASE("context order never changes the encoding") {
  Rng rng(5);
  const Scene scene = seven_object_scene(rng);
  const ModalityMask mask = ModalityMask::parse("HUV");
  const FeatureVector base = encode_quad_sample(scene, 3, mask);
  Scene shuffled = scene;
  // swap two context objects' attribute sets (ids keep their positions)
  std::swap(shuffled.objects[1].attrs, shuffled.objects[5].attrs);
  CHECK(encode_quad_sample(shuffled, 3, mask).values == base.values);

  const FeatureVector rel = encode_rel_sample(scene, 2, 4, mask);
  CHECK(rel.values.size() == 161);
  Scene shuffled2 = scene;
  std::swap(shuffled2.objects[0].attrs, shuffled2.objects[6].attrs);
  CHECK(encode_rel_sample(shuffled2, 2, 4, mask).values == rel.values);
}

TEST_CASE("relation samples encode the pair in order") {
  Rng rng(6);
  Scene scene = seven_object_scene(rng);
  scene.objects[1].attrs =
      attrs(Color::red, Shape::cube, Size::small, Weight::light, Rigidity::hard, 1);
  scene.objects[2].attrs =
      attrs(Color::blue, Shape::other, Size::large, Weight::heavy, Rigidity::soft, 7);
  const ModalityMask mask = ModalityMask::parse("HUV");
  CHECK(encode_rel_sample(scene, 1, 2, mask).values !=
        encode_rel_sample(scene, 2, 1, mask).values);
  CHECK_THROWS_AS(encode_rel_sample(scene, 2, 2, mask), Error);
}

TEST_CASE("encoding separates distinct context multisets") {
  Rng rng(7);
  const ModalityMask mask = ModalityMask::parse("HUV");
  for (int t = 0; t < 50; ++t) {
    Scene a = seven_object_scene(rng);
    Scene b = a;
    // change one context attribute; the target stays put
    const int victim = 1 + static_cast<int>(rng.below(6));
    AttributeSet changed = b.objects[victim].attrs;
    changed.set_value(Attribute::color,
                      (changed.value(Attribute::color) + 1) % 6);
    b.objects[victim].attrs = changed;
    CHECK(encode_quad_sample(a, 0, mask).values !=
          encode_quad_sample(b, 0, mask).values);
  }
}
