// infoscribe: extract physical-information descriptions from images, rebuild
// images from descriptions, measure per-level description density, and apply
// an external lexicon to label what was found.
//
// Exit codes: 0 ok, 2 malformed input image or description, 3 unwritable
// output, 4 unknown level, 5 bad lexicon. Data goes to stdout, diagnostics
// to stderr.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "infoscribe/description.hpp"
#include "infoscribe/errors.hpp"
#include "infoscribe/raster.hpp"
#include "infoscribe/semantics.hpp"

namespace fs = std::filesystem;
using namespace infoscribe;

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitUnwritable = 3;
constexpr int kExitUnknownLevel = 4;
constexpr int kExitBadLexicon = 5;

struct PipelineConfig {
  SegParams seg;
  RelationParams rel;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << data;
  if (!f) throw IoError("write failed for '" + path + "'");
}

// Config file: JSON object with any subset of the parameter keys. Explicit
// command-line flags win over the file; the file wins over defaults.
void apply_config_file(const std::string& path, PipelineConfig& cfg,
                       const std::vector<std::pair<std::string, bool>>& flag_given) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw SchemaError("config '" + path + "' must be a JSON object");

  auto given = [&](const std::string& name) {
    for (const auto& [n, g] : flag_given)
      if (n == name) return g;
    return false;
  };
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_number())
      throw SchemaError("config key '" + key + "' must be a number");
    if (given(key)) continue;
    if (key == "tau_seg") {
      cfg.seg.tau_seg = value.get<double>();
    } else if (key == "tau_refine") {
      cfg.seg.tau_refine = value.get<double>();
    } else if (key == "min_seed") {
      cfg.seg.min_seed = value.get<int>();
    } else if (key == "max_refine_passes") {
      cfg.seg.max_refine_passes = value.get<int>();
    } else if (key == "top_max_pixels") {
      cfg.seg.top_max_pixels = value.get<int>();
    } else if (key == "centroid_gap") {
      cfg.rel.centroid_gap = value.get<double>();
    } else {
      throw SchemaError("config key '" + key + "' is not recognized");
    }
  }
}

// Shared parameter flags for every subcommand that runs the pipeline.
struct ParamFlags {
  CLI::Option* tau_seg = nullptr;
  CLI::Option* tau_refine = nullptr;
  CLI::Option* min_seed = nullptr;
  CLI::Option* max_refine_passes = nullptr;
  CLI::Option* top_max_pixels = nullptr;
  CLI::Option* centroid_gap = nullptr;
  CLI::Option* config = nullptr;
  std::string config_path;

  void attach(CLI::App* cmd, PipelineConfig& cfg) {
    tau_seg = cmd->add_option("--tau-seg", cfg.seg.tau_seg,
                              "intensity tolerance for top-level growing");
    tau_refine = cmd->add_option("--tau-refine", cfg.seg.tau_refine,
                                 "deviation threshold for expansion refinement");
    min_seed = cmd->add_option("--min-seed", cfg.seg.min_seed,
                               "minimum pixel count for a newborn region");
    max_refine_passes = cmd->add_option("--max-refine-passes", cfg.seg.max_refine_passes,
                                        "refinement iteration cap");
    top_max_pixels = cmd->add_option("--top-max-pixels", cfg.seg.top_max_pixels,
                                     "pyramid top size bound in pixels");
    centroid_gap = cmd->add_option("--centroid-gap", cfg.rel.centroid_gap,
                                   "normalized centroid gap for directional relations");
    config = cmd->add_option("--config", config_path,
                             "JSON config file (INFOSCRIBE_CONFIG is the default)");
  }

  // Resolve file/env config after parsing, honoring explicit flags.
  void resolve(PipelineConfig& cfg) const {
    std::string path = config_path;
    if (path.empty()) {
      if (const char* env = std::getenv("INFOSCRIBE_CONFIG")) path = env;
    }
    if (path.empty()) return;
    apply_config_file(path, cfg,
                      {{"tau_seg", tau_seg->count() > 0},
                       {"tau_refine", tau_refine->count() > 0},
                       {"min_seed", min_seed->count() > 0},
                       {"max_refine_passes", max_refine_passes->count() > 0},
                       {"top_max_pixels", top_max_pixels->count() > 0},
                       {"centroid_gap", centroid_gap->count() > 0}});
  }
};

std::string summary_table(const std::string& path, const ImageDescription& d) {
  std::ostringstream out;
  out << "# " << path << ": " << d.meta.width << "x" << d.meta.height << ", "
      << d.levels.size() << " levels\n";
  out << "level\twidth\theight\tregions\n";
  for (const auto& lv : d.levels)
    out << lv.level << '\t' << lv.width << '\t' << lv.height << '\t' << lv.regions.size()
        << '\n';
  return out.str();
}

int cmd_extract(const std::vector<std::string>& inputs, const std::string& output,
                bool with_density, int jobs, const PipelineConfig& cfg) {
  if (inputs.size() > 1 && !output.empty() && !fs::is_directory(output)) {
    std::cerr << "error: with multiple inputs -o must name an existing directory\n";
    return kExitUnwritable;
  }

  struct Job {
    std::string table;
    std::string error;
    int code = 0;
  };
  std::vector<Job> results(inputs.size());
  std::atomic<std::size_t> cursor{0};

  auto worker = [&]() {
    for (std::size_t i = cursor.fetch_add(1); i < inputs.size(); i = cursor.fetch_add(1)) {
      Job& job = results[i];
      const std::string& input = inputs[i];
      try {
        Raster img = load_image_file(input);
        ImageDescription d = describe(img, cfg.seg, cfg.rel);
        if (with_density) attach_density(d);

        fs::path out_path;
        if (inputs.size() == 1 && !output.empty()) {
          out_path = output;
        } else {
          fs::path base = fs::path(input).filename().replace_extension(".pid.json");
          out_path = output.empty() ? fs::path(input).parent_path() / base
                                    : fs::path(output) / base;
        }
        try {
          spill(out_path.string(), serialize(d));
        } catch (const IoError& e) {
          job.error = std::string("error: ") + e.what();
          job.code = kExitUnwritable;
          continue;
        }
        job.table = summary_table(input, d);
      } catch (const Error& e) {
        job.error = std::string("error: ") + e.what();
        job.code = kExitBadInput;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(inputs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int code = 0;
  for (const Job& job : results) {
    if (job.code == 0) {
      std::cout << job.table;
    } else {
      std::cerr << job.error << '\n';
      if (code == 0) code = job.code;
    }
  }
  return code;
}

int cmd_reconstruct(const std::string& desc_path, int level, std::string output) {
  ImageDescription d;
  try {
    d = deserialize(slurp(desc_path));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  Raster img;
  try {
    img = reconstruct(d, level);
  } catch (const UnknownLevel& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnknownLevel;
  }
  if (output.empty())
    output = fs::path(desc_path).replace_extension(".pgm").string();
  try {
    save_image_file(img, output);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnwritable;
  }
  return 0;
}

int cmd_density(const std::string& desc_path, bool csv) {
  ImageDescription d;
  try {
    d = deserialize(slurp(desc_path));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  const char sep = csv ? ',' : '\t';
  char density_buf[40];
  for (const DensityEntry& e : density_profile(d)) {
    std::snprintf(density_buf, sizeof density_buf, "%.6f", e.density);
    std::cout << e.level << sep << e.width << sep << e.height << sep << e.bytes << sep
              << density_buf << '\n';
  }
  return 0;
}

int cmd_label(const std::string& desc_path, const std::string& lexicon_path,
              std::string output) {
  ImageDescription d;
  try {
    d = deserialize(slurp(desc_path));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  Lexicon lex;
  try {
    lex = load_lexicon(slurp(lexicon_path));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadLexicon;
  }
  Annotation a = annotate(d, lex);
  if (output.empty())
    output = fs::path(desc_path).replace_extension(".ann.json").string();
  try {
    spill(output, serialize_annotation(a));
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnwritable;
  }
  std::cout << a.narrative;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"top-down coarse-to-fine image description and labeling"};
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand("extract", "build a description from an image");
  std::vector<std::string> ex_inputs;
  std::string ex_output;
  bool ex_density = false;
  int ex_jobs = 1;
  PipelineConfig ex_cfg;
  ParamFlags ex_flags;
  extract->add_option("inputs", ex_inputs, "input PGM/PPM images")->required();
  extract->add_option("-o,--output", ex_output,
                      "output file (single input) or existing directory");
  extract->add_flag("--density", ex_density, "embed the density profile");
  extract->add_option("--jobs", ex_jobs, "process this many images concurrently");
  ex_flags.attach(extract, ex_cfg);

  // reconstruct
  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "repaint an image from a description");
  std::string rc_desc, rc_output;
  int rc_level = 0;
  reconstruct_cmd->add_option("description", rc_desc, "description file")->required();
  reconstruct_cmd->add_option("--level", rc_level, "pyramid level to paint (default 0)");
  reconstruct_cmd->add_option("-o,--output", rc_output, "output PGM path");

  // density
  auto* density_cmd = app.add_subcommand("density", "print the per-level density table");
  std::string dn_desc;
  bool dn_csv = false;
  density_cmd->add_option("description", dn_desc, "description file")->required();
  density_cmd->add_flag("--csv", dn_csv, "comma-separated output");

  // label
  auto* label_cmd = app.add_subcommand("label", "apply a lexicon to a description");
  std::string lb_desc, lb_lexicon, lb_output;
  label_cmd->add_option("description", lb_desc, "description file")->required();
  label_cmd->add_option("lexicon", lb_lexicon, "lexicon file")->required();
  label_cmd->add_option("-o,--output", lb_output, "annotation output path");

  CLI11_PARSE(app, argc, argv);

  if (extract->parsed()) {
    try {
      ex_flags.resolve(ex_cfg);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitBadInput;
    }
    return cmd_extract(ex_inputs, ex_output, ex_density, ex_jobs, ex_cfg);
  }
  if (reconstruct_cmd->parsed()) return cmd_reconstruct(rc_desc, rc_level, rc_output);
  if (density_cmd->parsed()) return cmd_density(dn_desc, dn_csv);
  if (label_cmd->parsed()) return cmd_label(lb_desc, lb_lexicon, lb_output);
  return 0;
}
