#include "desk/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace desk {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::data, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(Errc::data, "cannot write " + path.string());
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

namespace {

// ---------------------------------------------------------------------------
// shared lexing helpers

struct Atom {
  std::string pred;
  std::vector<std::string> args;
  int line = 0;
  int col = 0;
};

[[noreturn]] void fail(Errc code, int line, int col, const std::string& what) {
  throw Error(code, "line " + std::to_string(line) + ", col " +
                        std::to_string(col) + ": " + what);
}

// Parses "pred(arg, arg, ...)" starting at pos; returns the atom and leaves
// pos one past ')'. Identifiers here may not contain commas or parens.
Atom lex_atom(std::string_view line_text, std::size_t& pos, int line) {
  Atom atom;
  atom.line = line;
  atom.col = static_cast<int>(pos) + 1;
  const std::size_t open = line_text.find('(', pos);
  if (open == std::string_view::npos) {
    fail(Errc::parse_syntax, line, atom.col, "expected '(' after predicate name");
  }
  atom.pred = std::string(line_text.substr(pos, open - pos));
  if (atom.pred.empty()) {
    fail(Errc::parse_syntax, line, atom.col, "empty predicate name");
  }
  std::size_t p = open + 1;
  std::string cur;
  for (;; ++p) {
    if (p >= line_text.size()) {
      fail(Errc::parse_syntax, line, static_cast<int>(p) + 1,
           "unterminated argument list");
    }
    const char c = line_text[p];
    if (c == ',' || c == ')') {
      // trim surrounding spaces
      while (!cur.empty() && cur.front() == ' ') cur.erase(cur.begin());
      while (!cur.empty() && cur.back() == ' ') cur.pop_back();
      if (cur.empty()) {
        fail(Errc::parse_syntax, line, static_cast<int>(p) + 1, "empty argument");
      }
      atom.args.push_back(cur);
      cur.clear();
      if (c == ')') break;
    } else {
      cur += c;
    }
  }
  pos = p + 1;
  return atom;
}

int parse_object_ref(const Atom& atom, const std::string& arg) {
  if (arg.size() < 2 || arg[0] != 'o') {
    fail(Errc::parse_syntax, atom.line, atom.col,
         "expected an object reference like o0, got '" + arg + "'");
  }
  int value = 0;
  const auto res = std::from_chars(arg.data() + 1, arg.data() + arg.size(), value);
  if (res.ec != std::errc() || res.ptr != arg.data() + arg.size() || value < 0) {
    fail(Errc::parse_syntax, atom.line, atom.col,
         "expected an object reference like o0, got '" + arg + "'");
  }
  return value;
}

int parse_int_arg(const Atom& atom, const std::string& arg) {
  int value = 0;
  const auto res = std::from_chars(arg.data(), arg.data() + arg.size(), value);
  if (res.ec != std::errc() || res.ptr != arg.data() + arg.size()) {
    fail(Errc::out_of_domain, atom.line, atom.col,
         "expected an integer, got '" + arg + "'");
  }
  return value;
}

double parse_double_arg(const Atom& atom, const std::string& arg) {
  double value = 0;
  const auto res = std::from_chars(arg.data(), arg.data() + arg.size(), value);
  if (res.ec != std::errc() || res.ptr != arg.data() + arg.size()) {
    fail(Errc::parse_syntax, atom.line, atom.col,
         "expected a number, got '" + arg + "'");
  }
  return value;
}

std::string domain_values_text(Attribute a) {
  std::string out;
  for (int v = 0; v < domain_size(a); ++v) {
    if (v) out += ", ";
    out += std::string(value_name(a, v));
  }
  return out;
}

int parse_attribute_value(const Atom& atom, Attribute a, const std::string& arg) {
  const int v = value_from_name(a, arg);
  if (v < 0) {
    fail(Errc::out_of_domain, atom.line, atom.col,
         "'" + arg + "' is not a " + std::string(attribute_name(a)) +
             "; legal values: " + domain_values_text(a));
  }
  return v;
}

void expect_arity(const Atom& atom, std::size_t n) {
  if (atom.args.size() != n) {
    fail(Errc::parse_syntax, atom.line, atom.col,
         atom.pred + " takes " + std::to_string(n) + " arguments, got " +
             std::to_string(atom.args.size()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// scene files

ParsedScene parse_scene(std::string_view text) {
  std::string scene_id;
  std::string participant;
  bool saw_scene = false;
  std::vector<Atom> atoms;

  int line_no = 0;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    const std::size_t nl = text.find('\n', line_start);
    std::string_view line = text.substr(
        line_start, nl == std::string_view::npos ? text.size() - line_start
                                                 : nl - line_start);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);

    std::size_t pos = 0;
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos < line.size()) {
      if (line.substr(pos) == "scene" || line.substr(pos) == "participant") {
        fail(Errc::parse_syntax, line_no, static_cast<int>(pos) + 1,
             line.substr(pos) == "scene" ? "scene header needs an id"
                                         : "participant header needs an id");
      }
      if (line.substr(pos, 6) == "scene ") {
        if (saw_scene) {
          fail(Errc::parse_syntax, line_no, static_cast<int>(pos) + 1,
               "duplicate scene header");
        }
        scene_id = std::string(line.substr(pos + 6));
        while (!scene_id.empty() && scene_id.back() == ' ') scene_id.pop_back();
        while (!scene_id.empty() && scene_id.front() == ' ')
          scene_id.erase(scene_id.begin());
        if (scene_id.empty()) {
          fail(Errc::parse_syntax, line_no, static_cast<int>(pos) + 1,
               "scene header needs an id");
        }
        saw_scene = true;
      } else if (line.substr(pos, 12) == "participant ") {
        participant = std::string(line.substr(pos + 12));
        while (!participant.empty() && participant.back() == ' ')
          participant.pop_back();
      } else {
        while (pos < line.size()) {
          atoms.push_back(lex_atom(line, pos, line_no));
          if (pos >= line.size() || line[pos] != '.') {
            fail(Errc::parse_syntax, line_no, static_cast<int>(pos) + 1,
                 "expected '.' after atom");
          }
          ++pos;
          while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t'))
            ++pos;
        }
      }
    }
    if (nl == std::string_view::npos) break;
    line_start = nl + 1;
  }
  if (!saw_scene) {
    throw Error(Errc::parse_syntax, "line 1, col 1: missing scene header");
  }

  // First pass: object universe.
  static const std::set<std::string> known = [] {
    // the relational schema plus the artifact-only atoms
    std::set<std::string> names = {"item", "pos", "size2d"};
    for (const PredicateDecl& decl : predicate_schema()) names.insert(decl.name);
    return names;
  }();
  int max_obj = -1;
  for (const Atom& atom : atoms) {
    if (!known.count(atom.pred)) {
      fail(Errc::unknown_predicate, atom.line, atom.col,
           "unknown predicate '" + atom.pred + "'");
    }
    const std::size_t n_objs = atom.pred == "dir" ? 2 : 1;
    for (std::size_t a = 0; a < n_objs && a < atom.args.size(); ++a) {
      max_obj = std::max(max_obj, parse_object_ref(atom, atom.args[a]));
    }
  }
  const int k = max_obj + 1;
  if (k == 0) {
    throw Error(Errc::invalid_scene, "scene " + scene_id + " has no objects");
  }
  if (k > 4096) {
    throw Error(Errc::invalid_scene, "scene " + scene_id + " references o" +
                                         std::to_string(max_obj) +
                                         "; desk scenes stay far below 4096 objects");
  }

  struct Partial {
    std::array<std::optional<int>, 6> attr;
    std::optional<std::string> key;
    std::optional<Point> pos;
    std::optional<Footprint> size2d;
  };
  std::vector<Partial> objs(k);
  std::vector<std::optional<int>> quads(k);
  std::vector<std::vector<std::optional<Direction>>> dirs(
      k, std::vector<std::optional<Direction>>(k));
  bool any_grounding = false;

  for (const Atom& atom : atoms) {
    if (atom.pred == "dir") {
      expect_arity(atom, 3);
      const int i = parse_object_ref(atom, atom.args[0]);
      const int j = parse_object_ref(atom, atom.args[1]);
      if (i == j) {
        fail(Errc::parse_syntax, atom.line, atom.col,
             "dir needs two distinct objects");
      }
      const auto d = direction_from_name(atom.args[2]);
      if (!d) {
        fail(Errc::out_of_domain, atom.line, atom.col,
             "'" + atom.args[2] +
                 "' is not a direction; legal values: E, NE, N, NW, W, SW, S, "
                 "SE, IN, NONE");
      }
      if (dirs[i][j]) {
        fail(Errc::duplicate_functional, atom.line, atom.col,
             "dir(o" + std::to_string(i) + ", o" + std::to_string(j) +
                 ", _) assigned twice");
      }
      dirs[i][j] = *d;
      any_grounding = true;
      continue;
    }
    const int i = parse_object_ref(atom, atom.args.empty() ? "" : atom.args[0]);
    if (atom.pred == "quad") {
      expect_arity(atom, 2);
      const int q = parse_int_arg(atom, atom.args[1]);
      if (q < 1 || q > kQuadrantCount) {
        fail(Errc::out_of_domain, atom.line, atom.col,
             "quadrant must be 1, 2, 3 or 4");
      }
      if (quads[i]) {
        fail(Errc::duplicate_functional, atom.line, atom.col,
             "quad(o" + std::to_string(i) + ", _) assigned twice");
      }
      quads[i] = q;
      any_grounding = true;
    } else if (atom.pred == "item") {
      expect_arity(atom, 2);
      if (objs[i].key) {
        fail(Errc::duplicate_functional, atom.line, atom.col,
             "item(o" + std::to_string(i) + ", _) assigned twice");
      }
      objs[i].key = atom.args[1];
    } else if (atom.pred == "pos") {
      expect_arity(atom, 3);
      if (objs[i].pos) {
        fail(Errc::duplicate_functional, atom.line, atom.col,
             "pos(o" + std::to_string(i) + ", _, _) assigned twice");
      }
      objs[i].pos = Point{parse_double_arg(atom, atom.args[1]),
                          parse_double_arg(atom, atom.args[2])};
    } else if (atom.pred == "size2d") {
      expect_arity(atom, 3);
      if (objs[i].size2d) {
        fail(Errc::duplicate_functional, atom.line, atom.col,
             "size2d(o" + std::to_string(i) + ", _, _) assigned twice");
      }
      objs[i].size2d = Footprint{parse_double_arg(atom, atom.args[1]),
                                 parse_double_arg(atom, atom.args[2])};
    } else {
      expect_arity(atom, 2);
      const Attribute a = *attribute_from_name(atom.pred);
      const int v = a == Attribute::utility
                        ? parse_int_arg(atom, atom.args[1]) - kUtilityMin
                        : parse_attribute_value(atom, a, atom.args[1]);
      if (a == Attribute::utility &&
          (v < 0 || v >= domain_size(Attribute::utility))) {
        fail(Errc::out_of_domain, atom.line, atom.col,
             "utility must be an integer in [1, 7]");
      }
      auto& slot = objs[i].attr[static_cast<int>(a)];
      if (slot) {
        fail(Errc::duplicate_functional, atom.line, atom.col,
             atom.pred + "(o" + std::to_string(i) + ", _) assigned twice");
      }
      slot = v;
    }
  }

  // Assemble and validate the object table.
  Scene scene;
  scene.id = scene_id;
  scene.participant = participant;
  scene.objects.resize(k);
  for (int i = 0; i < k; ++i) {
    const Partial& p = objs[i];
    const int have =
        static_cast<int>(std::count_if(p.attr.begin(), p.attr.end(),
                                       [](const auto& o) { return o.has_value(); }));
    if (have == 0) {
      throw Error(Errc::dangling_object,
                  "o" + std::to_string(i) +
                      " is referenced but carries no attributes");
    }
    if (have < 6) {
      std::string missing;
      for (Attribute a : kAttributes) {
        if (!p.attr[static_cast<int>(a)]) {
          if (!missing.empty()) missing += ", ";
          missing += std::string(attribute_name(a));
        }
      }
      throw Error(Errc::incomplete_object,
                  "o" + std::to_string(i) + " is missing " + missing);
    }
    ObjectInstance& obj = scene.objects[i];
    obj.id = i;
    obj.catalog_key = p.key.value_or("");
    for (Attribute a : kAttributes) {
      obj.attrs.set_value(a, *p.attr[static_cast<int>(a)]);
    }
    if (p.pos.has_value() != p.size2d.has_value()) {
      throw Error(Errc::invalid_geometry,
                  "o" + std::to_string(i) + " needs both pos and size2d");
    }
    if (p.pos) obj.geometry = Geometry{*p.pos, *p.size2d};
  }
  validate(scene);

  ParsedScene out;
  out.scene = std::move(scene);
  if (any_grounding) {
    SceneGroundings g(k);
    for (int i = 0; i < k; ++i) {
      if (!quads[i]) {
        throw Error(Errc::invalid_scene,
                    "groundings are incomplete: quad(o" + std::to_string(i) +
                        ", _) is missing");
      }
      g.set_quad(i, *quads[i]);
    }
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (i == j) continue;
        if (!dirs[i][j]) {
          throw Error(Errc::invalid_scene,
                      "groundings are incomplete: dir(o" + std::to_string(i) +
                          ", o" + std::to_string(j) + ", _) is missing");
        }
        g.set_rel(i, j, *dirs[i][j]);
      }
    }
    validate(g);
    out.groundings = std::move(g);
  }
  return out;
}

std::string serialize_scene(const Scene& scene,
                            const SceneGroundings* groundings) {
  validate(scene);
  if (groundings) {
    if (groundings->object_count() != scene.object_count()) {
      throw Error(Errc::data, "groundings do not match the scene");
    }
    validate(*groundings);
  }
  const int k = scene.object_count();
  std::string out = "scene " + scene.id + "\n";
  if (!scene.participant.empty()) {
    out += "participant " + scene.participant + "\n";
  }
  auto attr_line = [&](Attribute a, int i) {
    out += std::string(attribute_name(a)) + "(o" + std::to_string(i) + ", " +
           std::string(value_name(a, scene.objects[i].attrs.value(a))) + ").\n";
  };
  // Canonical order: atoms sorted by predicate name, then arguments.
  for (int i = 0; i < k; ++i) attr_line(Attribute::color, i);
  if (groundings) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (i == j) continue;
        out += "dir(o" + std::to_string(i) + ", o" + std::to_string(j) + ", " +
               std::string(direction_name(groundings->rel(i, j))) + ").\n";
      }
    }
  }
  for (int i = 0; i < k; ++i) {
    if (!scene.objects[i].catalog_key.empty()) {
      out += "item(o" + std::to_string(i) + ", " + scene.objects[i].catalog_key +
             ").\n";
    }
  }
  for (int i = 0; i < k; ++i) {
    if (scene.objects[i].geometry) {
      const Point& p = scene.objects[i].geometry->center;
      out += "pos(o" + std::to_string(i) + ", " + format_double(p.x) + ", " +
             format_double(p.y) + ").\n";
    }
  }
  if (groundings) {
    for (int i = 0; i < k; ++i) {
      out += "quad(o" + std::to_string(i) + ", " +
             std::to_string(groundings->quad(i)) + ").\n";
    }
  }
  for (int i = 0; i < k; ++i) attr_line(Attribute::rigidity, i);
  for (int i = 0; i < k; ++i) attr_line(Attribute::shape, i);
  for (int i = 0; i < k; ++i) attr_line(Attribute::size, i);
  for (int i = 0; i < k; ++i) {
    if (scene.objects[i].geometry) {
      const Footprint& f = scene.objects[i].geometry->footprint;
      out += "size2d(o" + std::to_string(i) + ", " + format_double(f.w) + ", " +
             format_double(f.h) + ").\n";
    }
  }
  for (int i = 0; i < k; ++i) attr_line(Attribute::utility, i);
  for (int i = 0; i < k; ++i) attr_line(Attribute::weight, i);
  return out;
}

// ---------------------------------------------------------------------------
// model files

namespace {

int to_int(const std::string& token, const std::string& what) {
  int v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(Errc::parse_syntax, "bad " + what + ": '" + token + "'");
  }
  return v;
}

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

struct LineReader {
  std::string_view text;
  std::size_t pos = 0;
  int line_no = 0;

  // Next non-blank, non-comment line; nullopt at end.
  std::optional<std::string_view> next() {
    while (pos <= text.size()) {
      if (pos == text.size()) return std::nullopt;
      const std::size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(
          pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      const std::size_t hash = line.find('#');
      if (hash != std::string_view::npos) line = line.substr(0, hash);
      std::size_t a = 0, b = line.size();
      while (a < b && (line[a] == ' ' || line[a] == '\t')) ++a;
      while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t')) --b;
      if (b > a) return line.substr(a, b - a);
    }
    return std::nullopt;
  }

  std::string_view require(const std::string& what) {
    auto line = next();
    if (!line) {
      throw Error(Errc::parse_syntax, "unexpected end of file, expected " + what);
    }
    return *line;
  }
};

void serialize_tree_node(const Tree& tree, int node, std::string& out) {
  const TreeNode& n = tree.nodes[node];
  if (n.is_leaf()) {
    out += "(leaf";
    for (std::int64_t c : n.counts) out += ' ' + std::to_string(c);
    out += ')';
    return;
  }
  out += "(split " + std::to_string(n.feature) + ' ';
  serialize_tree_node(tree, n.left, out);
  out += ' ';
  serialize_tree_node(tree, n.right, out);
  out += ')';
}

struct SexprParser {
  std::string_view text;
  std::size_t pos = 0;
  int line = 0;

  void skip_ws() {
    while (pos < text.size() && text[pos] == ' ') ++pos;
  }

  [[noreturn]] void die(const std::string& what) {
    fail(Errc::parse_syntax, line, static_cast<int>(pos) + 1, what);
  }

  std::string token() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && text[pos] != ' ' && text[pos] != '(' &&
           text[pos] != ')') {
      ++pos;
    }
    if (start == pos) die("expected a token");
    return std::string(text.substr(start, pos - start));
  }

  int parse_node(Tree& tree, int n_labels) {
    skip_ws();
    if (pos >= text.size() || text[pos] != '(') die("expected '('");
    ++pos;
    const std::string kind = token();
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (kind == "leaf") {
      std::vector<std::int64_t> counts;
      skip_ws();
      while (pos < text.size() && text[pos] != ')') {
        const std::string t = token();
        std::int64_t v = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
          die("bad leaf count '" + t + "'");
        }
        counts.push_back(v);
        skip_ws();
      }
      if (static_cast<int>(counts.size()) != n_labels) {
        die("leaf carries " + std::to_string(counts.size()) + " counts, expected " +
            std::to_string(n_labels));
      }
      std::int64_t total = 0;
      for (std::int64_t c : counts) {
        if (c < 0) die("negative leaf count");
        total += c;
      }
      if (total == 0) die("leaf with no samples");
      tree.nodes[id].counts = std::move(counts);
    } else if (kind == "split") {
      const std::string t = token();
      int f = 0;
      const auto res = std::from_chars(t.data(), t.data() + t.size(), f);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size() || f < 0) {
        die("bad feature index '" + t + "'");
      }
      const int left = parse_node(tree, n_labels);
      const int right = parse_node(tree, n_labels);
      tree.nodes[id].feature = f;
      tree.nodes[id].left = left;
      tree.nodes[id].right = right;
    } else {
      die("unknown node kind '" + kind + "'");
    }
    skip_ws();
    if (pos >= text.size() || text[pos] != ')') die("expected ')'");
    ++pos;
    return id;
  }
};

}  // namespace

std::string serialize_forest(const ForestModel& model) {
  std::string out = "forest v1\n";
  out += "mask " + model.mask.code() + "\n";
  out += "k_train " + std::to_string(model.k_train) + "\n";
  out += "input_dim " + std::to_string(model.input_dim) + "\n";
  out += "labels";
  for (const std::string& l : model.label_domain) out += ' ' + l;
  out += "\ntrees " + std::to_string(model.trees.size()) + "\n";
  for (const Tree& tree : model.trees) {
    serialize_tree_node(tree, 0, out);
    out += '\n';
  }
  return out;
}

ForestModel parse_forest(std::string_view text) {
  LineReader r{text};
  if (r.require("forest header") != "forest v1") {
    throw Error(Errc::parse_syntax, "not a forest model file (expected 'forest v1')");
  }
  ForestModel model;
  auto mask_line = split_ws(r.require("mask"));
  if (mask_line.size() != 2 || mask_line[0] != "mask") {
    throw Error(Errc::parse_syntax, "expected 'mask <code>'");
  }
  model.mask = ModalityMask::parse(mask_line[1]);
  auto k_line = split_ws(r.require("k_train"));
  if (k_line.size() != 2 || k_line[0] != "k_train") {
    throw Error(Errc::parse_syntax, "expected 'k_train <n>'");
  }
  model.k_train = to_int(k_line[1], "k_train");
  auto dim_line = split_ws(r.require("input_dim"));
  if (dim_line.size() != 2 || dim_line[0] != "input_dim") {
    throw Error(Errc::parse_syntax, "expected 'input_dim <n>'");
  }
  model.input_dim = to_int(dim_line[1], "input_dim");
  auto labels = split_ws(r.require("labels"));
  if (labels.size() < 2 || labels[0] != "labels") {
    throw Error(Errc::parse_syntax, "expected 'labels <l1> <l2> ...'");
  }
  model.label_domain.assign(labels.begin() + 1, labels.end());
  auto trees_line = split_ws(r.require("trees"));
  if (trees_line.size() != 2 || trees_line[0] != "trees") {
    throw Error(Errc::parse_syntax, "expected 'trees <n>'");
  }
  const int n_trees = to_int(trees_line[1], "tree count");
  for (int t = 0; t < n_trees; ++t) {
    SexprParser p{r.require("tree " + std::to_string(t)), 0, r.line_no};
    Tree tree;
    p.parse_node(tree, static_cast<int>(model.label_domain.size()));
    p.skip_ws();
    if (p.pos != p.text.size()) p.die("trailing text after tree");
    for (const TreeNode& n : tree.nodes) {
      if (!n.is_leaf() && n.feature >= model.input_dim) {
        throw Error(Errc::out_of_domain, "split feature index " +
                                             std::to_string(n.feature) +
                                             " exceeds input_dim");
      }
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

namespace {

std::string render_template(const FormulaTemplate& t) {
  std::string out;
  for (const AttrLiteral& lit : t.attrs) {
    out += std::string(attribute_name(lit.attr)) + "(o" +
           std::to_string(lit.slot + 1) + ", +v) ^ ";
  }
  out += t.rel == FormulaTemplate::Rel::dir ? "dir(o1, o2, +v)" : "quad(o1, +v)";
  return out;
}

struct Literal {
  std::string pred;
  std::vector<std::string> args;
};

std::vector<Literal> split_literals(std::string_view text, int line_no) {
  std::vector<Literal> lits;
  std::size_t pos = 0;
  std::string_view rest = text;
  while (true) {
    const std::size_t sep = rest.find(" ^ ");
    std::string_view part = sep == std::string_view::npos ? rest : rest.substr(0, sep);
    std::size_t p = 0;
    const Atom atom = lex_atom(part, p, line_no);
    if (p != part.size()) {
      fail(Errc::parse_syntax, line_no, static_cast<int>(pos + p) + 1,
           "trailing text after literal");
    }
    lits.push_back({atom.pred, atom.args});
    if (sep == std::string_view::npos) break;
    rest = rest.substr(sep + 3);
    pos += sep + 3;
  }
  return lits;
}

int slot_of(const std::string& arg, int line_no) {
  if (arg == "o1") return 0;
  if (arg == "o2") return 1;
  fail(Errc::parse_syntax, line_no, 1,
       "expected object variable o1 or o2, got '" + arg + "'");
}

}  // namespace

ParsedFormula parse_formula(std::string_view text) {
  const std::vector<Literal> lits = split_literals(text, 1);
  ParsedFormula out;
  bool saw_rel = false;
  for (const Literal& lit : lits) {
    if (lit.pred == "dir" || lit.pred == "quad") {
      if (saw_rel) {
        throw Error(Errc::parse_syntax, "formula has more than one relation atom");
      }
      saw_rel = true;
      if (lit.pred == "dir") {
        if (lit.args.size() != 3 || slot_of(lit.args[0], 1) != 0 ||
            slot_of(lit.args[1], 1) != 1) {
          throw Error(Errc::parse_syntax, "dir literal must be dir(o1, o2, value)");
        }
        out.tmpl.rel = FormulaTemplate::Rel::dir;
        const auto d = direction_from_name(lit.args[2]);
        if (!d) {
          throw Error(Errc::out_of_domain,
                      "'" + lit.args[2] + "' is not a direction");
        }
        out.rel_value = static_cast<int>(*d);
      } else {
        if (lit.args.size() != 2 || slot_of(lit.args[0], 1) != 0) {
          throw Error(Errc::parse_syntax, "quad literal must be quad(o1, value)");
        }
        out.tmpl.rel = FormulaTemplate::Rel::quad;
        int q = 0;
        const auto res = std::from_chars(
            lit.args[1].data(), lit.args[1].data() + lit.args[1].size(), q);
        if (res.ec != std::errc() || q < 1 || q > kQuadrantCount) {
          throw Error(Errc::out_of_domain,
                      "'" + lit.args[1] + "' is not a quadrant");
        }
        out.rel_value = q - 1;
      }
      continue;
    }
    const auto attr = attribute_from_name(lit.pred);
    if (!attr) {
      throw Error(Errc::unknown_predicate,
                  "unknown predicate '" + lit.pred + "' in formula");
    }
    if (lit.args.size() != 2) {
      throw Error(Errc::parse_syntax, lit.pred + " literal takes 2 arguments");
    }
    const int slot = slot_of(lit.args[0], 1);
    int value;
    if (*attr == Attribute::utility) {
      value = 0;
      const auto res = std::from_chars(
          lit.args[1].data(), lit.args[1].data() + lit.args[1].size(), value);
      if (res.ec != std::errc() || value < kUtilityMin || value > kUtilityMax) {
        throw Error(Errc::out_of_domain,
                    "'" + lit.args[1] + "' is not a utility value");
      }
      value -= kUtilityMin;
    } else {
      value = value_from_name(*attr, lit.args[1]);
      if (value < 0) {
        throw Error(Errc::out_of_domain, "'" + lit.args[1] + "' is not a " +
                                             std::string(attribute_name(*attr)));
      }
    }
    out.tmpl.attrs.push_back({slot, *attr});
    out.values.push_back(value);
  }
  if (!saw_rel) {
    throw Error(Errc::parse_syntax, "formula has no relation atom");
  }
  validate(out.tmpl);
  return out;
}

std::string serialize_mln(const GroundedMln& mln) {
  std::string out = "mln v1\n";
  out += "mask " + mln.mask().code() + "\n";
  out += "templates " + std::to_string(mln.templates().size()) + "\n";
  for (const FormulaTemplate& t : mln.templates()) {
    out += "template " + render_template(t) + "\n";
  }
  out += "weights " + std::to_string(mln.feature_count()) + "\n";
  for (std::size_t f = 0; f < mln.feature_count(); ++f) {
    out += format_double(mln.weight(f)) + "\n";
  }
  return out;
}

GroundedMln parse_mln(std::string_view text) {
  LineReader r{text};
  if (r.require("mln header") != "mln v1") {
    throw Error(Errc::parse_syntax, "not an MLN model file (expected 'mln v1')");
  }
  auto mask_line = split_ws(r.require("mask"));
  if (mask_line.size() != 2 || mask_line[0] != "mask") {
    throw Error(Errc::parse_syntax, "expected 'mask <code>'");
  }
  const ModalityMask mask = ModalityMask::parse(mask_line[1]);
  auto tcount_line = split_ws(r.require("templates"));
  if (tcount_line.size() != 2 || tcount_line[0] != "templates") {
    throw Error(Errc::parse_syntax, "expected 'templates <n>'");
  }
  const int n_templates = to_int(tcount_line[1], "template count");
  std::vector<FormulaTemplate> templates;
  for (int t = 0; t < n_templates; ++t) {
    std::string_view line = r.require("template");
    if (line.substr(0, 9) != "template ") {
      throw Error(Errc::parse_syntax, "expected 'template <formula>'");
    }
    // Placeholder values parse as domain members only structurally; re-derive
    // the template from the literal structure.
    const std::vector<Literal> lits = split_literals(line.substr(9), r.line_no);
    FormulaTemplate tmpl;
    bool saw_rel = false;
    for (const Literal& lit : lits) {
      if (lit.pred == "dir") {
        tmpl.rel = FormulaTemplate::Rel::dir;
        saw_rel = true;
      } else if (lit.pred == "quad") {
        tmpl.rel = FormulaTemplate::Rel::quad;
        saw_rel = true;
      } else {
        const auto attr = attribute_from_name(lit.pred);
        if (!attr || lit.args.size() != 2) {
          throw Error(Errc::parse_syntax,
                      "bad template literal '" + lit.pred + "'");
        }
        tmpl.attrs.push_back({slot_of(lit.args[0], r.line_no), *attr});
      }
    }
    if (!saw_rel) {
      throw Error(Errc::parse_syntax, "template has no relation atom");
    }
    templates.push_back(std::move(tmpl));
  }
  GroundedMln mln = expand_templates(templates, mask);
  auto wcount_line = split_ws(r.require("weights"));
  if (wcount_line.size() != 2 || wcount_line[0] != "weights") {
    throw Error(Errc::parse_syntax, "expected 'weights <n>'");
  }
  const std::size_t n_weights = static_cast<std::size_t>(to_int(wcount_line[1], "weight count"));
  if (n_weights != mln.feature_count()) {
    throw Error(Errc::dimension,
                "weight count " + std::to_string(n_weights) +
                    " does not match the expanded feature count " +
                    std::to_string(mln.feature_count()));
  }
  std::vector<double> weights(n_weights);
  for (std::size_t f = 0; f < n_weights; ++f) {
    const std::string_view line = r.require("weight value");
    double v = 0;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size()) {
      throw Error(Errc::parse_syntax,
                  "bad weight on line " + std::to_string(r.line_no));
    }
    weights[f] = v;
  }
  mln.set_weights(std::move(weights));
  return mln;
}

// ---------------------------------------------------------------------------
// catalog and ruleset files

namespace {

AttributeSet parse_attr_fields(const std::vector<std::string>& fields,
                               std::size_t start, int line_no,
                               Footprint* footprint) {
  AttributeSet attrs;
  std::set<std::string> seen;
  for (std::size_t f = start; f < fields.size(); ++f) {
    const std::size_t eq = fields[f].find('=');
    if (eq == std::string::npos) {
      fail(Errc::parse_syntax, line_no, 1, "expected key=value, got '" + fields[f] + "'");
    }
    const std::string key = fields[f].substr(0, eq);
    const std::string val = fields[f].substr(eq + 1);
    if (!seen.insert(key).second) {
      fail(Errc::duplicate_functional, line_no, 1, "duplicate field '" + key + "'");
    }
    if (key == "footprint") {
      if (!footprint) {
        fail(Errc::parse_syntax, line_no, 1, "footprint not allowed here");
      }
      const std::size_t x = val.find('x');
      if (x == std::string::npos) {
        fail(Errc::parse_syntax, line_no, 1, "footprint must be WxH");
      }
      double w = 0, h = 0;
      auto r1 = std::from_chars(val.data(), val.data() + x, w);
      auto r2 = std::from_chars(val.data() + x + 1, val.data() + val.size(), h);
      if (r1.ec != std::errc() || r2.ec != std::errc() || !(w > 0) || !(h > 0)) {
        fail(Errc::parse_syntax, line_no, 1, "bad footprint '" + val + "'");
      }
      *footprint = {w, h};
      continue;
    }
    const auto attr = attribute_from_name(key);
    if (!attr) {
      fail(Errc::unknown_predicate, line_no, 1, "unknown attribute '" + key + "'");
    }
    int v;
    if (*attr == Attribute::utility) {
      v = 0;
      auto res = std::from_chars(val.data(), val.data() + val.size(), v);
      if (res.ec != std::errc() || v < kUtilityMin || v > kUtilityMax) {
        fail(Errc::out_of_domain, line_no, 1, "utility must be in [1,7]");
      }
      v -= kUtilityMin;
    } else {
      v = value_from_name(*attr, val);
      if (v < 0) {
        fail(Errc::out_of_domain, line_no, 1,
             "'" + val + "' is not a " + std::string(attribute_name(*attr)) +
                 "; legal values: " + domain_values_text(*attr));
      }
    }
    attrs.set_value(*attr, v);
  }
  for (Attribute a : kAttributes) {
    if (!seen.count(std::string(attribute_name(a)))) {
      fail(Errc::incomplete_object, line_no, 1,
           std::string("missing attribute ") + std::string(attribute_name(a)));
    }
  }
  return attrs;
}

}  // namespace

Catalog parse_catalog(std::string_view text) {
  LineReader r{text};
  if (r.require("catalog header") != "catalog v1") {
    throw Error(Errc::parse_syntax, "not a catalog file (expected 'catalog v1')");
  }
  Catalog catalog;
  while (auto line = r.next()) {
    const std::vector<std::string> fields = split_ws(*line);
    if (fields.size() < 2) {
      fail(Errc::parse_syntax, r.line_no, 1, "expected 'entry <key> ...' or 'variant <key> ...'");
    }
    if (fields[0] == "entry") {
      CatalogEntry entry;
      entry.key = fields[1];
      entry.attrs = parse_attr_fields(fields, 2, r.line_no, &entry.footprint);
      catalog.push_back(std::move(entry));
    } else if (fields[0] == "variant") {
      auto it = std::find_if(catalog.begin(), catalog.end(),
                             [&](const CatalogEntry& e) { return e.key == fields[1]; });
      if (it == catalog.end()) {
        fail(Errc::dangling_object, r.line_no, 1,
             "variant for unknown entry '" + fields[1] + "'");
      }
      it->variants.push_back(parse_attr_fields(fields, 2, r.line_no, nullptr));
    } else {
      fail(Errc::parse_syntax, r.line_no, 1, "unknown directive '" + fields[0] + "'");
    }
  }
  validate(catalog);
  return catalog;
}

Ruleset parse_ruleset(std::string_view text) {
  LineReader r{text};
  if (r.require("ruleset header") != "ruleset v1") {
    throw Error(Errc::parse_syntax, "not a ruleset file (expected 'ruleset v1')");
  }
  Ruleset rules;
  bool saw_quad = false, saw_ew = false, saw_ns = false;
  while (auto line = r.next()) {
    const std::vector<std::string> fields = split_ws(*line);
    if (fields.empty()) continue;
    if (fields[0] == "name") {
      if (fields.size() != 2) fail(Errc::parse_syntax, r.line_no, 1, "expected 'name <id>'");
      rules.name = fields[1];
    } else if (fields[0] == "quad_rule") {
      if (fields.size() != 8) {
        fail(Errc::parse_syntax, r.line_no, 1,
             "quad_rule needs 7 quadrants (utility 1..7)");
      }
      for (int u = 0; u < 7; ++u) {
        int q = 0;
        auto res = std::from_chars(fields[u + 1].data(),
                                   fields[u + 1].data() + fields[u + 1].size(), q);
        if (res.ec != std::errc() || q < 1 || q > kQuadrantCount) {
          fail(Errc::out_of_domain, r.line_no, 1, "quadrant must be 1..4");
        }
        rules.quad_rule[u] = q;
      }
      saw_quad = true;
    } else if (fields[0] == "ew_order" || fields[0] == "ns_order") {
      const Attribute a =
          fields[0] == "ew_order" ? Attribute::color : Attribute::shape;
      const int n = domain_size(a);
      if (static_cast<int>(fields.size()) != n + 1) {
        fail(Errc::parse_syntax, r.line_no, 1,
             fields[0] + " must list all " + std::to_string(n) + " values");
      }
      std::vector<int> rank(n, -1);
      for (int pos = 0; pos < n; ++pos) {
        const int v = value_from_name(a, fields[pos + 1]);
        if (v < 0) {
          fail(Errc::out_of_domain, r.line_no, 1,
               "'" + fields[pos + 1] + "' is not a " +
                   std::string(attribute_name(a)));
        }
        if (rank[v] >= 0) {
          fail(Errc::duplicate_functional, r.line_no, 1,
               "duplicate value '" + fields[pos + 1] + "'");
        }
        rank[v] = pos;
      }
      if (a == Attribute::color) {
        std::copy(rank.begin(), rank.end(), rules.ew_rank.begin());
        saw_ew = true;
      } else {
        std::copy(rank.begin(), rank.end(), rules.ns_rank.begin());
        saw_ns = true;
      }
    } else {
      fail(Errc::parse_syntax, r.line_no, 1, "unknown directive '" + fields[0] + "'");
    }
  }
  if (!saw_quad || !saw_ew || !saw_ns) {
    throw Error(Errc::incomplete_object,
                "ruleset needs name, quad_rule, ew_order and ns_order");
  }
  validate(rules);
  return rules;
}

}  // namespace desk
