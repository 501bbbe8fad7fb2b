#pragma once

#include <string>
#include <vector>

#include "desk/catalog.hpp"
#include "desk/core.hpp"
#include "desk/io.hpp"
#include "desk/rng.hpp"

namespace testutil {

inline desk::AttributeSet attrs(desk::Color c, desk::Shape sh, desk::Size si,
                                desk::Weight w, desk::Rigidity r, int u) {
  desk::AttributeSet a;
  a.color = c;
  a.shape = sh;
  a.size = si;
  a.weight = w;
  a.rigidity = r;
  a.utility = u;
  return a;
}

inline desk::Scene make_scene(const std::vector<desk::AttributeSet>& object_attrs,
                              const std::string& id = "test") {
  desk::Scene scene;
  scene.id = id;
  for (std::size_t i = 0; i < object_attrs.size(); ++i) {
    desk::ObjectInstance obj;
    obj.id = static_cast<int>(i);
    obj.attrs = object_attrs[i];
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

inline desk::AttributeSet random_attrs(desk::Rng& rng) {
  desk::AttributeSet a;
  for (desk::Attribute attr : desk::kAttributes) {
    a.set_value(attr, static_cast<int>(rng.below(desk::domain_size(attr))));
  }
  return a;
}

// Random scene with geometry; footprints small enough that containment stays
// rare and centers never collide.
inline desk::Scene random_geometry_scene(desk::Rng& rng, int k) {
  desk::Scene scene;
  scene.id = "rand";
  for (int i = 0; i < k; ++i) {
    desk::ObjectInstance obj;
    obj.id = i;
    obj.attrs = random_attrs(rng);
    obj.geometry = desk::Geometry{{rng.unit(), rng.unit()},
                                  {0.01 + 0.05 * rng.unit(), 0.01 + 0.05 * rng.unit()}};
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

inline const desk::Catalog& shipped_catalog() {
  static const desk::Catalog catalog =
      desk::parse_catalog(desk::read_file(std::string(DESK_DATA_DIR) + "/catalog.txt"));
  return catalog;
}

}  // namespace testutil
