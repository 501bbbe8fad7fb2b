#include "desk/organize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "desk/features.hpp"
#include "desk/rng.hpp"

namespace desk {

SceneGroundings organize(const std::vector<ObjectInstance>& objects,
                         const ForestModel& rf_quad, const ForestModel& rf_rel,
                         ModalityMask mask) {
  if (rf_quad.mask != mask || rf_rel.mask != mask) {
    throw Error(Errc::configuration, "models were trained under a different mask");
  }
  const int k = static_cast<int>(objects.size());
  if (k != rf_quad.k_train || k != rf_rel.k_train) {
    throw Error(Errc::dimension,
                std::to_string(k) + " objects, but models trained on K = " +
                    std::to_string(rf_quad.k_train));
  }
  Scene scene;
  scene.id = "organize";
  scene.objects = objects;
  validate(scene);

  SceneGroundings g(k);
  for (int i = 0; i < k; ++i) {
    g.set_quad(i, predict(rf_quad, encode_quad_sample(scene, i, mask)) + 1);
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j || g.has_rel(i, j)) continue;  // forced by an earlier pair
      if (g.quad(i) != g.quad(j)) {
        const Direction d = derived_dir_from_quads(g.quad(i), g.quad(j));
        g.set_rel(i, j, d);
        g.set_rel(j, i, opposite(d));
        continue;
      }
      const Direction d = static_cast<Direction>(
          predict(rf_rel, encode_rel_sample(scene, i, j, mask)));
      g.set_rel(i, j, d);
      if (is_cardinal(d)) {
        g.set_rel(j, i, opposite(d));
      } else {
        g.set_rel(j, i, Direction::NONE);
      }
    }
  }
  validate(g);
  return g;
}

namespace {

// 3x3 = 9 cells per quadrant, spanning most of it so cross-quadrant sectors
// stay reachable. The middle fraction comes first so sparse quadrants fill
// inward-out.
constexpr std::array<double, 3> kAnchorFrac = {0.5, 0.1, 0.9};

struct Quad {
  double x0, y0;  // south-west corner
};

Quad quadrant_box(int q) {
  switch (q) {
    case 1: return {0.5, 0.5};
    case 2: return {0.0, 0.5};
    case 3: return {0.0, 0.0};
    case 4: return {0.5, 0.0};
  }
  throw Error(Errc::out_of_domain, "quadrant out of range");
}

std::array<Point, 9> quadrant_anchors(int q) {
  const Quad box = quadrant_box(q);
  std::array<Point, 9> anchors;
  int n = 0;
  for (double fy : kAnchorFrac) {
    for (double fx : kAnchorFrac) {
      anchors[n++] = {box.x0 + 0.5 * fx, box.y0 + 0.5 * fy};
    }
  }
  return anchors;
}

}  // namespace

LayoutPlan realize(const SceneGroundings& groundings,
                   const std::vector<Footprint>& footprints) {
  validate(groundings);
  const int k = groundings.object_count();
  if (static_cast<int>(footprints.size()) != k) {
    throw Error(Errc::data, "need one footprint per object");
  }
  for (const Footprint& f : footprints) {
    if (!(f.w > 0.0) || !(f.h > 0.0)) {
      throw Error(Errc::invalid_geometry, "footprints must be strictly positive");
    }
  }

  LayoutPlan plan;
  plan.groundings = groundings;
  plan.coordinates.assign(k, Point{});
  plan.footprints = footprints;

  // An object rides its container only when both share a quadrant and the
  // containment chain is acyclic; everything else competes for an anchor.
  std::vector<int> container(k, -1);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i != j && groundings.rel(i, j) == Direction::IN) {
        container[i] = j;
        break;  // lowest container wins if several
      }
    }
  }
  std::vector<char> rides(k, 0);
  for (int i = 0; i < k; ++i) {
    if (container[i] < 0) continue;
    bool cycle = false;
    int hops = 0;
    for (int hop = container[i]; hop >= 0; hop = container[hop]) {
      if (hop == i || ++hops > k) {  // also catches chains into foreign cycles
        cycle = true;
        break;
      }
    }
    if (!cycle && groundings.quad(container[i]) == groundings.quad(i)) {
      rides[i] = 1;
    } else {
      plan.unsatisfied.push_back({i, container[i], Direction::IN});
      container[i] = -1;
    }
  }

  std::array<int, 5> anchored_per_quad{};  // index by quadrant
  for (int i = 0; i < k; ++i) {
    if (!rides[i]) anchored_per_quad[groundings.quad(i)]++;
  }
  for (int q = 1; q <= kQuadrantCount; ++q) {
    if (anchored_per_quad[q] > 9) {
      throw Error(Errc::capacity, "quadrant " + std::to_string(q) +
                                      " is overfull: " +
                                      std::to_string(anchored_per_quad[q]) +
                                      " objects for 9 anchors");
    }
  }

  std::vector<int> out_cardinal(k, 0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i != j && is_cardinal(groundings.rel(i, j))) out_cardinal[i]++;
    }
  }
  std::vector<int> order;
  for (int i = 0; i < k; ++i) {
    if (!rides[i]) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (out_cardinal[a] != out_cardinal[b]) return out_cardinal[a] > out_cardinal[b];
    return a < b;
  });

  // Placement of anchored objects: deterministic multi-start local search.
  // Start 0 seeds greedily in constraint order; the rest seed from a fixed
  // internal stream. Each start hill-climbs single-object moves to a fixed
  // point (pair satisfaction is symmetric, so object-local improvements
  // raise the global satisfied-pair count and the climb terminates). The
  // best start wins; a lone greedy pass stalls well short of what the grid
  // can express.
  std::vector<char> placed(k, 0);
  std::vector<int> cell_of(k, -1);
  std::array<std::array<char, 9>, 5> cell_used{};
  auto satisfied_at = [&](int obj, const Point& pos) {
    int score = 0;
    for (int other = 0; other < k; ++other) {
      if (other == obj || !placed[other]) continue;
      const Direction want = groundings.rel(obj, other);
      if (!is_cardinal(want)) continue;
      score += cardinal_between(pos, plan.coordinates[other]) == want;
    }
    return score;
  };
  auto climb = [&] {
    for (int sweep = 0; sweep < 64; ++sweep) {
      bool moved = false;
      for (int obj : order) {
        const int q = groundings.quad(obj);
        const auto anchors = quadrant_anchors(q);
        int best_cell = cell_of[obj];
        int best_score = satisfied_at(obj, plan.coordinates[obj]);
        for (int c = 0; c < 9; ++c) {
          if (cell_used[q][c] && c != cell_of[obj]) continue;
          const int score = satisfied_at(obj, anchors[c]);
          if (score > best_score) {
            best_score = score;
            best_cell = c;
          }
        }
        if (best_cell != cell_of[obj]) {
          cell_used[q][cell_of[obj]] = 0;
          cell_used[q][best_cell] = 1;
          cell_of[obj] = best_cell;
          plan.coordinates[obj] = anchors[best_cell];
          moved = true;
        }
      }
      if (!moved) break;
    }
  };
  auto total_satisfied = [&] {
    int score = 0;
    for (std::size_t a = 0; a < order.size(); ++a) {
      for (std::size_t b = a + 1; b < order.size(); ++b) {
        const int i = order[a];
        const int j = order[b];
        const Direction want = groundings.rel(i, j);
        if (is_cardinal(want) &&
            cardinal_between(plan.coordinates[i], plan.coordinates[j]) == want) {
          score++;
        }
      }
    }
    return score;
  };

  Rng restarts(0x9e3779b9u);  // internal stream; realize stays deterministic
  std::vector<int> best_cells(k, -1);
  int best_total = -1;
  for (int start = 0; start < 12; ++start) {
    for (auto& row : cell_used) row.fill(0);
    std::fill(placed.begin(), placed.end(), 0);
    std::fill(cell_of.begin(), cell_of.end(), -1);
    if (start == 0) {
      for (int obj : order) {
        const int q = groundings.quad(obj);
        const auto anchors = quadrant_anchors(q);
        int best_cell = -1;
        int best_score = -1;
        for (int c = 0; c < 9; ++c) {
          if (cell_used[q][c]) continue;
          const int score = satisfied_at(obj, anchors[c]);
          if (score > best_score) {
            best_score = score;
            best_cell = c;
          }
        }
        cell_used[q][best_cell] = 1;
        cell_of[obj] = best_cell;
        plan.coordinates[obj] = anchors[best_cell];
        placed[obj] = 1;
      }
    } else {
      for (int obj : order) {
        const int q = groundings.quad(obj);
        int c;
        do {
          c = static_cast<int>(restarts.below(9));
        } while (cell_used[q][c]);
        cell_used[q][c] = 1;
        cell_of[obj] = c;
        plan.coordinates[obj] = quadrant_anchors(q)[c];
        placed[obj] = 1;
      }
    }
    climb();
    const int total = total_satisfied();
    if (total > best_total) {
      best_total = total;
      best_cells = cell_of;
    }
  }
  for (int obj : order) {
    cell_of[obj] = best_cells[obj];
    plan.coordinates[obj] = quadrant_anchors(groundings.quad(obj))[cell_of[obj]];
  }

  // Contained objects, containers first along the chain. Later arrivals in
  // the same container shift a hair toward the quadrant center so re-derived
  // directions between them stay well defined.
  std::vector<int> load(k, 0);
  std::vector<int> pending;
  for (int i = 0; i < k; ++i) {
    if (rides[i]) pending.push_back(i);
  }
  while (!pending.empty()) {
    bool progress = false;
    for (auto it = pending.begin(); it != pending.end();) {
      const int i = *it;
      const int c = container[i];
      if (!placed[c]) {
        ++it;
        continue;
      }
      const Quad box = quadrant_box(groundings.quad(i));
      const double qcx = box.x0 + 0.25;
      Point p = plan.coordinates[c];
      if (load[c] > 0) {
        p.x += 0.002 * load[c] * (p.x <= qcx ? 1.0 : -1.0);
      }
      load[c]++;
      plan.coordinates[i] = p;
      plan.footprints[i] = {
          std::min(footprints[i].w, 0.9 * plan.footprints[c].w),
          std::min(footprints[i].h, 0.9 * plan.footprints[c].h)};
      placed[i] = 1;
      it = pending.erase(it);
      progress = true;
    }
    if (!progress) {
      throw Error(Errc::data, "unsatisfiable containment chain");
    }
  }

  // Final ledger of dropped cardinal constraints, once per unordered pair.
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const Direction want = groundings.rel(i, j);
      if (!is_cardinal(want)) continue;
      if (plan.coordinates[i] == plan.coordinates[j] ||
          cardinal_between(plan.coordinates[i], plan.coordinates[j]) != want) {
        plan.unsatisfied.push_back({i, j, want});
      }
    }
  }
  return plan;
}

LayoutPlan random_organize(const std::vector<ObjectInstance>& objects,
                           std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  Scene scene;
  scene.id = "random";
  scene.objects = objects;
  const int k = static_cast<int>(objects.size());
  LayoutPlan plan;
  plan.coordinates.reserve(k);
  plan.footprints.reserve(k);
  for (int i = 0; i < k; ++i) {
    const Point p{rng.unit(), rng.unit()};
    const Footprint f = objects[i].geometry ? objects[i].geometry->footprint
                                            : Footprint{0.06, 0.06};
    scene.objects[i].id = i;
    scene.objects[i].geometry = Geometry{p, f};
    plan.coordinates.push_back(p);
    plan.footprints.push_back(f);
  }
  plan.groundings = annotate_scene(scene);
  return plan;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string_view fill_for(Color c) {
  switch (c) {
    case Color::red: return "#d64541";
    case Color::blue: return "#3867c4";
    case Color::black: return "#3b3b3b";
    case Color::green: return "#3f9b4f";
    case Color::yellow: return "#e3b62e";
    case Color::other: return "#9a9a8f";
  }
  return "#9a9a8f";
}

}  // namespace

std::string render_svg(const LayoutPlan& plan,
                       const std::vector<ObjectInstance>& objects) {
  const int k = static_cast<int>(plan.coordinates.size());
  if (static_cast<int>(objects.size()) != k) {
    throw Error(Errc::data, "plan and object list disagree on object count");
  }
  constexpr double kW = 800.0, kH = 600.0;
  auto sx = [&](double x) { return x * kW; };
  auto sy = [&](double y) { return (1.0 - y) * kH; };  // +y is away from the user

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#f7f3e8\" "
         "stroke=\"#444444\"/>\n";
  svg += "  <line x1=\"400\" y1=\"0\" x2=\"400\" y2=\"600\" stroke=\"#bbbbaa\" "
         "stroke-dasharray=\"6,4\"/>\n";
  svg += "  <line x1=\"0\" y1=\"300\" x2=\"800\" y2=\"300\" stroke=\"#bbbbaa\" "
         "stroke-dasharray=\"6,4\"/>\n";
  svg += "  <text x=\"770\" y=\"20\" font-size=\"14\" fill=\"#999988\">1</text>\n";
  svg += "  <text x=\"20\" y=\"20\" font-size=\"14\" fill=\"#999988\">2</text>\n";
  svg += "  <text x=\"20\" y=\"590\" font-size=\"14\" fill=\"#999988\">3</text>\n";
  svg += "  <text x=\"770\" y=\"590\" font-size=\"14\" fill=\"#999988\">4</text>\n";
  for (int i = 0; i < k; ++i) {
    const Point& p = plan.coordinates[i];
    const Footprint& f = plan.footprints[i];
    const double w = f.w * kW;
    const double h = f.h * kH;
    svg += "  <rect x=\"" + fmt(sx(p.x) - w / 2) + "\" y=\"" +
           fmt(sy(p.y) - h / 2) + "\" width=\"" + fmt(w) + "\" height=\"" +
           fmt(h) + "\" fill=\"" + std::string(fill_for(objects[i].attrs.color)) +
           "\" fill-opacity=\"0.75\" stroke=\"#333333\"/>\n";
    const std::string label = objects[i].catalog_key.empty()
                                  ? "o" + std::to_string(i)
                                  : objects[i].catalog_key;
    double label_y = sy(p.y) - h / 2 - 3;
    if (label_y < 12.0) label_y = sy(p.y) + h / 2 + 12.0;  // clipped at the top
    svg += "  <text x=\"" + fmt(sx(p.x)) + "\" y=\"" + fmt(label_y) +
           "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#222222\">" +
           xml_escape(label) + "</text>\n";
  }
  if (!plan.unsatisfied.empty()) {
    double y = 36.0;
    svg += "  <text x=\"12\" y=\"" + fmt(y) +
           "\" font-size=\"12\" fill=\"#aa3333\">unsatisfied:</text>\n";
    for (const auto& u : plan.unsatisfied) {
      y += 14.0;
      svg += "  <text x=\"12\" y=\"" + fmt(y) +
             "\" font-size=\"12\" fill=\"#aa3333\">dir(o" + std::to_string(u.i) +
             ", o" + std::to_string(u.j) + ", " +
             std::string(direction_name(u.expected)) + ")</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace desk
