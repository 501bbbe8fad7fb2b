// deskorg: scene generation, model training, evaluation and layout synthesis
// for the desk-organization pipeline. Every command is deterministic under a
// fixed --seed.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "desk/catalog.hpp"
#include "desk/core.hpp"
#include "desk/eval.hpp"
#include "desk/features.hpp"
#include "desk/io.hpp"
#include "desk/mln.hpp"
#include "desk/organize.hpp"
#include "desk/rng.hpp"

namespace fs = std::filesystem;
using namespace desk;

namespace {

std::vector<fs::path> scene_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(Errc::configuration, dir.string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".scene") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw Error(Errc::configuration, "no .scene files in " + dir.string());
  }
  return files;
}

Dataset load_dataset(const fs::path& dir, bool need_truth) {
  Dataset data;
  for (const fs::path& file : scene_files(dir)) {
    ParsedScene parsed = parse_scene(read_file(file));
    if (!parsed.groundings) {
      if (need_truth) {
        throw Error(Errc::data, file.string() + " carries no groundings");
      }
      parsed.groundings = SceneGroundings(parsed.scene.object_count());
    }
    data.push_back({std::move(parsed.scene), std::move(*parsed.groundings)});
  }
  return data;
}

std::string pad3(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", i);
  return buf;
}

std::vector<Footprint> footprints_of(const Scene& scene) {
  std::vector<Footprint> out;
  out.reserve(scene.objects.size());
  for (const ObjectInstance& obj : scene.objects) {
    out.push_back(obj.geometry ? obj.geometry->footprint : Footprint{0.06, 0.06});
  }
  return out;
}

void write_plan(const Scene& objects_scene, const LayoutPlan& plan,
                const std::string& out_path, const std::string& svg_path) {
  Scene realized = objects_scene;
  for (int i = 0; i < realized.object_count(); ++i) {
    realized.objects[i].geometry =
        Geometry{plan.coordinates[i], plan.footprints[i]};
  }
  const std::string text = serialize_scene(realized, &plan.groundings);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
    std::cout << "wrote " << out_path << "\n";
  }
  if (!svg_path.empty()) {
    write_file(svg_path, render_svg(plan, realized.objects));
    std::cout << "wrote " << svg_path << "\n";
  }
  if (!plan.unsatisfied.empty()) {
    std::cout << "unsatisfied " << plan.unsatisfied.size() << "\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"desk organization pipeline"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "global random seed")->capture_default_str();

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic",
                                 "generate rule-annotated synthetic scenes");
  int gen_count = 30, gen_kmin = 6, gen_kmax = 9;
  std::string gen_ruleset, gen_catalog = "data/catalog.txt", gen_out;
  std::uint64_t gen_seed = 0;
  bool gen_seed_set = false;
  gen->add_option("--seed", gen_seed, "seed for this command")
      ->each([&](const std::string&) { gen_seed_set = true; });
  gen->add_option("--count", gen_count, "number of scenes")->capture_default_str();
  gen->add_option("--k-min", gen_kmin, "minimum objects per scene")
      ->capture_default_str();
  gen->add_option("--k-max", gen_kmax, "maximum objects per scene")
      ->capture_default_str();
  gen->add_option("--ruleset", gen_ruleset,
                  "ruleset file (defaults to the built-in default ruleset)");
  gen->add_option("--catalog", gen_catalog, "catalog file")->capture_default_str();
  gen->add_option("--out-dir", gen_out, "output directory")->required();

  // perturb
  auto* pert = app.add_subcommand("perturb", "flip attributes with probability p");
  double pert_p = 0.15;
  std::string pert_scenes, pert_out;
  std::uint64_t pert_seed = 0;
  bool pert_seed_set = false;
  pert->add_option("--seed", pert_seed, "seed for this command")
      ->each([&](const std::string&) { pert_seed_set = true; });
  pert->add_option("--p", pert_p, "flip probability")->capture_default_str();
  pert->add_option("--scenes", pert_scenes, "input scene directory")->required();
  pert->add_option("--out-dir", pert_out, "output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "train a model on annotated scenes");
  std::string train_model, train_mask = "HUV", train_scenes, train_out;
  std::uint64_t train_seed = 0;
  bool train_seed_set = false;
  int train_trees = 20;
  train->add_option("--seed", train_seed, "seed for this command")
      ->each([&](const std::string&) { train_seed_set = true; });
  train->add_option("--model", train_model, "forest or mln")->required();
  train->add_option("--mask", train_mask, "modality mask, e.g. HUV, UV, H")
      ->capture_default_str();
  train->add_option("--scenes", train_scenes, "training scene directory")->required();
  train->add_option("--out", train_out,
                    "output model path (forest writes <out>.quad and <out>.rel)")
      ->required();
  train->add_option("--trees", train_trees, "forest size")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "cross-validated accuracy for one mask");
  std::string ev_model, ev_mask = "HUV", ev_scenes;
  int ev_folds = 5;
  std::uint64_t ev_seed = 0;
  bool ev_seed_set = false;
  ev->add_option("--seed", ev_seed, "seed for this command")
      ->each([&](const std::string&) { ev_seed_set = true; });
  ev->add_option("--model", ev_model, "forest or mln")->required();
  ev->add_option("--mask", ev_mask, "modality mask")->capture_default_str();
  ev->add_option("--folds", ev_folds, "fold count")->capture_default_str();
  ev->add_option("--scenes", ev_scenes, "scene directory")->required();

  // ablation
  auto* ab = app.add_subcommand("ablation", "cross-validation over all 7 masks");
  std::string ab_model, ab_scenes;
  int ab_folds = 5;
  std::uint64_t ab_seed = 0;
  bool ab_seed_set = false;
  ab->add_option("--seed", ab_seed, "seed for this command")
      ->each([&](const std::string&) { ab_seed_set = true; });
  ab->add_option("--model", ab_model, "forest or mln")->required();
  ab->add_option("--folds", ab_folds, "fold count")->capture_default_str();
  ab->add_option("--scenes", ab_scenes, "scene directory")->required();

  // organize
  auto* org = app.add_subcommand("organize",
                                 "lay out objects with trained forest models");
  std::string org_quad, org_rel, org_objects, org_out, org_svg;
  org->add_option("--model-quad", org_quad, "quadrant forest file")->required();
  org->add_option("--model-rel", org_rel, "relation forest file")->required();
  org->add_option("--objects", org_objects, "scene file naming the objects")
      ->required();
  org->add_option("--out", org_out, "realized scene output (default stdout)");
  org->add_option("--svg-out", org_svg, "SVG rendering output");

  // baseline-random
  auto* rnd = app.add_subcommand("baseline-random",
                                 "uniform random layout of the given objects");
  std::string rnd_objects, rnd_out, rnd_svg;
  std::uint64_t rnd_seed = 0;
  bool rnd_seed_set = false;
  rnd->add_option("--seed", rnd_seed, "seed for this command")
      ->each([&](const std::string&) { rnd_seed_set = true; });
  rnd->add_option("--objects", rnd_objects, "scene file naming the objects")
      ->required();
  rnd->add_option("--out", rnd_out, "scene output (default stdout)");
  rnd->add_option("--svg-out", rnd_svg, "SVG rendering output");

  // inspect-mln
  auto* insp = app.add_subcommand("inspect-mln", "dump the heaviest formulas");
  std::string insp_model;
  int insp_top = 10;
  insp->add_option("--model", insp_model, "MLN model file")->required();
  insp->add_option("--top", insp_top, "number of formulas")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  if (*gen) {
    if (!gen_seed_set) gen_seed = seed;
    const Catalog catalog = parse_catalog(read_file(gen_catalog));
    const Ruleset rules = gen_ruleset.empty()
                              ? default_ruleset()
                              : parse_ruleset(read_file(gen_ruleset));
    fs::create_directories(gen_out);
    for (int i = 0; i < gen_count; ++i) {
      Scene scene =
          generate_scene(Rng::derive(gen_seed, i), catalog, gen_kmin, gen_kmax);
      scene.id = "synth-" + std::to_string(gen_seed) + "-" + pad3(i);
      const SceneGroundings truth = rule_annotate(scene, rules);
      write_file(fs::path(gen_out) / (scene.id + ".scene"),
                 serialize_scene(scene, &truth));
    }
    std::cout << "wrote " << gen_count << " scenes to " << gen_out << "\n";
    return 0;
  }

  if (*pert) {
    if (!pert_seed_set) pert_seed = seed;
    fs::create_directories(pert_out);
    int index = 0;
    for (const fs::path& file : scene_files(pert_scenes)) {
      ParsedScene parsed = parse_scene(read_file(file));
      const Scene noisy = perturb_attributes(parsed.scene, pert_p,
                                             Rng::derive(pert_seed, index++));
      write_file(fs::path(pert_out) / file.filename(),
                 serialize_scene(noisy, parsed.groundings ? &*parsed.groundings
                                                          : nullptr));
    }
    std::cout << "perturbed " << index << " scenes into " << pert_out << "\n";
    return 0;
  }

  if (*train) {
    if (!train_seed_set) train_seed = seed;
    const ModalityMask mask = ModalityMask::parse(train_mask);
    const Dataset data = load_dataset(train_scenes, true);
    TrainConfig config;
    config.n_trees = train_trees;
    if (model_kind_from_name(train_model) == ModelKind::forest) {
      const ForestPair models = train_forests(data, mask, train_seed, config);
      write_file(train_out + ".quad", serialize_forest(models.quad));
      write_file(train_out + ".rel", serialize_forest(models.rel));
      std::cout << "wrote " << train_out << ".quad and " << train_out
                << ".rel\n";
    } else {
      const GroundedMln model = train_mln(data, mask, config);
      write_file(train_out, serialize_mln(model));
      std::cout << "wrote " << train_out << "\n";
    }
    return 0;
  }

  if (*ev) {
    if (!ev_seed_set) ev_seed = seed;
    const Dataset data = load_dataset(ev_scenes, true);
    const EvalReport report =
        run_cv(data, model_kind_from_name(ev_model),
               ModalityMask::parse(ev_mask), ev_folds, ev_seed);
    std::cout << report_table({report});
    return 0;
  }

  if (*ab) {
    if (!ab_seed_set) ab_seed = seed;
    const Dataset data = load_dataset(ab_scenes, true);
    const std::vector<EvalReport> reports =
        run_ablation(data, model_kind_from_name(ab_model), ab_folds, ab_seed);
    std::cout << report_table(reports);
    return 0;
  }

  if (*org) {
    const ForestModel rf_quad = parse_forest(read_file(org_quad));
    const ForestModel rf_rel = parse_forest(read_file(org_rel));
    const Scene objects = parse_scene(read_file(org_objects)).scene;
    const SceneGroundings g =
        organize(objects.objects, rf_quad, rf_rel, rf_quad.mask);
    const LayoutPlan plan = realize(g, footprints_of(objects));
    write_plan(objects, plan, org_out, org_svg);
    return 0;
  }

  if (*rnd) {
    if (!rnd_seed_set) rnd_seed = seed;
    const Scene objects = parse_scene(read_file(rnd_objects)).scene;
    const LayoutPlan plan = random_organize(objects.objects, rnd_seed);
    write_plan(objects, plan, rnd_out, rnd_svg);
    return 0;
  }

  if (*insp) {
    const GroundedMln model = parse_mln(read_file(insp_model));
    for (const auto& [formula, weight] : dump_top_formulas(model, insp_top)) {
      std::cout << format_double(weight) << '\t' << formula << '\n';
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
