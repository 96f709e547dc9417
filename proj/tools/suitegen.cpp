// Regenerates the bundled benchmark suite (suite/cases, suite/scripts,
// suite/golden) from the reference programs. The scripted responses are
// derived through the emitters so they stay in sync with the grammars.
//
// Usage: aflow-suitegen [suite-dir] [refs-dir] [catalog]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "aflow/registry.hpp"
#include "aflow/syntax.hpp"
#include "aflow/validator.hpp"

using namespace aflow;
namespace fs = std::filesystem;

namespace {

enum class Behavior { clean, refine_once, never_fix_gap, never_fix_format };

struct CaseDef {
  std::string id;
  std::string category;
  std::string description;
  std::string input_name;  // empty = no asset inputs
  Modality input_modality = Modality::image;
  std::string input_uri;
  SyntaxStyle syntax = SyntaxStyle::declarative;
  std::string oracle;  // validates_cleanly | executes_with_sim | golden_equivalence
  Behavior behavior = Behavior::clean;
  std::string source_ref;  // refs/<name>.adl, or "" when built in code
  std::string tweak_node, tweak_param;  // optional parameter variant
  ParamValue tweak_value;
};

std::string fenced(const std::string& body) { return "```\n" + body + "```"; }

Workflow nodes_only(const Workflow& w) {
  Workflow out;
  for (const auto& n : w.nodes()) out.add_node(n.id, n.type_name, n.params);
  return out;
}

Workflow with_gap(const Workflow& w, const Registry& r) {
  Workflow out = canonicalize(w);
  for (auto it = out.edges().rbegin(); it != out.edges().rend(); ++it) {
    const FunctionSchema* schema = r.find(out.find_node(it->dst.node_id)->type_name);
    if (!schema) continue;
    const PortSpec* port = schema->find_input(it->dst.port_name);
    if (port && port->required) {
      Edge target = *it;
      out.disconnect(target.dst.node_id, target.dst.port_name);
      return out;
    }
  }
  throw Error("no removable required edge in golden for gap scripting");
}

Workflow text_to_video(const Registry&) {
  Workflow w;
  w.add_node("ckpt", "CheckpointLoader", {});
  w.add_node("pos", "CLIPTextEncode", {{"text", ParamValue("waves rolling onto a beach")}});
  w.add_node("lat", "EmptyLatentImage", {});
  w.add_node("samp", "KSampler", {{"seed", ParamValue(std::int64_t{31})}});
  w.add_node("dec", "VAEDecode", {});
  w.add_node("vid", "ImageToVideo", {{"fps", ParamValue(std::int64_t{16})}});
  w.add_node("savev", "SaveVideo", {{"filename_prefix", ParamValue("beach")}});
  w.connect("ckpt", "CLIP", "pos", "clip");
  w.connect("ckpt", "MODEL", "samp", "model");
  w.connect("pos", "CONDITIONING", "samp", "positive");
  w.connect("lat", "LATENT", "samp", "latent_image");
  w.connect("samp", "LATENT", "dec", "samples");
  w.connect("ckpt", "VAE", "dec", "vae");
  w.connect("dec", "IMAGE", "vid", "image");
  w.connect("vid", "VIDEO", "savev", "video");
  return w;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  std::string suite_dir = argc > 1 ? argv[1] : "suite";
  std::string refs_dir = argc > 2 ? argv[2] : "refs";
  std::string catalog_path = argc > 3 ? argv[3] : "catalog/test.json";

  Registry registry = load_catalog_file(catalog_path);

  auto from_ref = [&](const std::string& name) {
    ParseOutcome out = parse(read_file(fs::path(refs_dir) / (name + ".adl")),
                             SyntaxStyle::declarative);
    if (!out.ok()) throw Error("reference '" + name + "' does not parse");
    return *out.workflow;
  };

  const SyntaxStyle D = SyntaxStyle::declarative;
  const SyntaxStyle F = SyntaxStyle::dataflow;
  const SyntaxStyle P = SyntaxStyle::pseudo_natural;

  std::vector<CaseDef> defs = {
      {"inpaint-1", "Inpaint", "Fill the masked hole in the photo so the repair is invisible.",
       "photo", Modality::image, "inputs/damaged.png", D, "golden_equivalence",
       Behavior::clean, "inpaint_basic", "", "", ParamValue(0)},
      {"inpaint-2", "Inpaint",
       "Replace the masked region with a red vintage bicycle, following the prompt.", "photo",
       Modality::image, "inputs/street.png", F, "validates_cleanly", Behavior::clean,
       "inpaint_guided", "fill", "strength", ParamValue(0.7)},
      {"outpaint-1", "Outpaint",
       "Extend the photo onto a wider canvas, continuing the scenery naturally.", "photo",
       Modality::image, "inputs/photo.png", P, "golden_equivalence", Behavior::clean, "outpaint",
       "", "", ParamValue(0)},
      {"outpaint-2", "Outpaint",
       "Grow the picture beyond its right border with matching scenery.", "photo",
       Modality::image, "inputs/cliff.png", D, "executes_with_sim", Behavior::clean, "outpaint",
       "samp", "seed", ParamValue(std::int64_t{77})},
      {"imgmerge-1", "ImgMerge",
       "Blend the two photographs into one coherent scene by mixing their latents.", "left",
       Modality::image, "inputs/a.png", F, "golden_equivalence", Behavior::clean, "img_blend",
       "", "", ParamValue(0)},
      {"imgmerge-2", "ImgMerge",
       "Merge the two images and upscale the combined result before saving.", "left",
       Modality::image, "inputs/left.png", P, "validates_cleanly", Behavior::refine_once,
       "img_merge_upscale", "", "", ParamValue(0)},
      {"nvs-1", "NVS", "Show the same room from a camera angle forty five degrees to the right.",
       "photo", Modality::image, "inputs/room.png", D, "golden_equivalence", Behavior::clean,
       "nvs", "", "", ParamValue(0)},
      {"nvs-2", "NVS", "Render the scene from slightly above the original viewpoint.", "photo",
       Modality::image, "inputs/room.png", F, "executes_with_sim", Behavior::never_fix_gap,
       "nvs", "view", "elevation", ParamValue(25.0)},
      {"mergemodel-1", "MergeModel",
       "Merge the two checkpoints and render a portrait with the combined model.", "",
       Modality::image, "", P, "golden_equivalence", Behavior::clean, "model_merge", "", "",
       ParamValue(0)},
      {"mergemodel-2", "MergeModel",
       "Average two models with more weight on the second and generate a sample image.", "",
       Modality::image, "", D, "validates_cleanly", Behavior::clean, "model_merge", "mm",
       "ratio", ParamValue(0.65)},
      {"i23d-1", "I23D", "Reconstruct a textured 3D mesh from the product photo.", "photo",
       Modality::image, "inputs/product.png", F, "golden_equivalence", Behavior::clean, "i23d",
       "", "", ParamValue(0)},
      {"i23d-2", "I23D", "Turn the sketch into a low resolution 3D mesh.", "photo",
       Modality::image, "inputs/sketch.png", P, "executes_with_sim", Behavior::clean, "i23d",
       "mesh", "resolution", ParamValue(std::int64_t{128})},
      {"t2i-1", "T2I", "Generate a photorealistic image of a sunset over snowy mountains.", "",
       Modality::image, "", D, "golden_equivalence", Behavior::clean, "t2i_basic", "", "",
       ParamValue(0)},
      {"t2i-2", "T2I",
       "Create a crisp macro photo of a leaf while suppressing blur with a negative prompt.", "",
       Modality::image, "", F, "validates_cleanly", Behavior::clean, "t2i_negative", "samp",
       "seed", ParamValue(std::int64_t{4})},
      {"t2a-1", "T2A", "Synthesize the sound of birds chirping over soft flowing water.", "",
       Modality::audio, "", P, "golden_equivalence", Behavior::clean, "t2a", "", "",
       ParamValue(0)},
      {"t2a-2", "T2A", "Produce a ten second thunderstorm ambience from text.", "",
       Modality::audio, "", D, "executes_with_sim", Behavior::refine_once, "t2a", "gen",
       "duration", ParamValue(10.0)},
      {"multiview-1", "MultiView",
       "Produce two additional viewpoints of the statue, one from each side.", "photo",
       Modality::image, "inputs/statue.png", F, "golden_equivalence", Behavior::clean,
       "multiview", "", "", ParamValue(0)},
      {"multiview-2", "MultiView",
       "Render the object from the left, and from the right, as separate images.", "photo",
       Modality::image, "inputs/statue.png", P, "validates_cleanly",
       Behavior::never_fix_format, "multiview", "", "", ParamValue(0)},
      {"i2v-1", "I2V", "Animate the still photograph into a short clip.", "photo",
       Modality::image, "inputs/still.png", D, "golden_equivalence", Behavior::clean, "i2v", "",
       "", ParamValue(0)},
      {"i2v-2", "I2V", "Turn the portrait into a slow motion video loop.", "photo",
       Modality::image, "inputs/portrait.png", F, "executes_with_sim", Behavior::clean, "i2v",
       "vid", "fps", ParamValue(std::int64_t{24})},
      {"t2m-1", "T2M", "Create a 3D mesh of a ceramic teapot described in text.", "",
       Modality::mesh, "", P, "golden_equivalence", Behavior::clean, "t2mesh", "", "",
       ParamValue(0)},
      {"t2m-2", "T2M", "Model a chess knight piece as a mesh from a text description.", "",
       Modality::mesh, "", D, "validates_cleanly", Behavior::clean, "t2mesh", "pos", "text",
       ParamValue("chess knight piece, plain background")},
      {"t2v-1", "T2V", "Generate a short video of waves rolling onto a beach from text.", "",
       Modality::video, "", F, "golden_equivalence", Behavior::clean, "", "", "", ParamValue(0)},
      {"t2v-2", "T2V", "Make a night sky timelapse clip from a description.", "",
       Modality::video, "", P, "executes_with_sim", Behavior::clean, "", "pos", "text",
       ParamValue("night sky timelapse, stars rotating")},
  };

  fs::create_directories(fs::path(suite_dir) / "scripts");
  fs::create_directories(fs::path(suite_dir) / "golden");

  for (const auto& def : defs) {
    Workflow golden = def.source_ref.empty() ? text_to_video(registry) : from_ref(def.source_ref);
    if (!def.tweak_node.empty()) {
      NodeInstance* node = golden.find_node(def.tweak_node);
      if (!node) throw Error(def.id + ": tweak node missing");
      bool replaced = false;
      for (auto& [k, v] : node->params) {
        if (k == def.tweak_param) {
          v = def.tweak_value;
          replaced = true;
        }
      }
      if (!replaced) node->params.emplace_back(def.tweak_param, def.tweak_value);
    }
    if (!is_executable(check(golden, registry))) throw Error(def.id + ": golden is not clean");

    std::ofstream(fs::path(suite_dir) / "golden" / (def.id + ".adl"))
        << emit(golden, SyntaxStyle::declarative);

    nlohmann::ordered_json jcase;
    jcase["id"] = def.id;
    jcase["category"] = def.category;
    jcase["description"] = def.description;
    jcase["inputs"] = nlohmann::ordered_json::array();
    if (!def.input_name.empty()) {
      jcase["inputs"].push_back({{"name", def.input_name},
                                 {"modality", std::string(to_string(def.input_modality))},
                                 {"uri", def.input_uri}});
    }
    jcase["syntax"] = std::string(to_string(def.syntax));
    jcase["oracle"] = {{"kind", def.oracle}};
    if (def.oracle == "golden_equivalence") {
      jcase["oracle"]["golden"] = "golden/" + def.id + ".adl";
    }
    std::ofstream(fs::path(suite_dir) / (def.id + ".json")) << jcase.dump(2) << "\n";

    std::vector<std::string> script;
    std::string draft = fenced(emit(nodes_only(golden), def.syntax));
    std::string full = fenced(emit(golden, def.syntax));
    switch (def.behavior) {
      case Behavior::clean:
        script = {draft, full};
        break;
      case Behavior::refine_once:
        script = {draft, fenced(emit(with_gap(golden, registry), def.syntax)), full};
        break;
      case Behavior::never_fix_gap: {
        std::string broken = fenced(emit(with_gap(golden, registry), def.syntax));
        script = {draft, broken, broken, broken, broken};
        break;
      }
      case Behavior::never_fix_format:
        script = {"@@@ not a program @@@", "@@@ still not @@@", "@@@ nor this @@@",
                  "@@@ give up @@@"};
        break;
    }
    std::ofstream(fs::path(suite_dir) / "scripts" / (def.id + ".json"))
        << nlohmann::json(script).dump(2) << "\n";
  }

  std::cout << "wrote " << defs.size() << " cases under " << suite_dir << "\n";
  return 0;
}
