#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "aps/io.hpp"
#include "aps/metrics.hpp"
#include "aps/receptive_field.hpp"
#include "aps/scenario_gen.hpp"

namespace aps::cli {

namespace fs = std::filesystem;

namespace {

// Input or usage problem; reported on stderr with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << bytes;
  if (!f) throw UsageError("failed writing " + path.string());
}

unsigned thread_count() {
  const char* env = std::getenv("APS_LAB_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw UsageError("APS_LAB_THREADS must be an integer >= 1");
  return static_cast<unsigned>(v);
}

struct GenArgs {
  std::string out;
  std::uint64_t seed = 0;
  std::string preset = "aligned";
  int instances = 3;
};

struct AssignArgs {
  std::string scenario;
  std::string assigner = "aps";
  int k = kDefaultK;
  std::string out;
};

struct CompareArgs {
  std::string corpus;
  int k = kDefaultK;
  std::string out;
};

struct RenderArgs {
  std::string scenario;
  std::string what = "cls";
  std::string assigner = "aps";
  int k = kDefaultK;
  std::string out;
};

void cmd_gen(const GenArgs& a, std::ostream& out) {
  const ScenarioConfig cfg = generate_scenario(parse_preset(a.preset), a.seed, a.instances);
  write_file(a.out, dump_json(scenario_to_json(cfg)));
  out << "wrote " << a.out << "\n";
}

Assignment assign_scenario(const ScenarioConfig& cfg, AssignerKind kind, int k) {
  if (k < 1) throw UsageError("--k must be >= 1");
  const auto fields = scenario_loss_fields(cfg);
  CompareOptions opts;
  opts.k = k;
  return run_assigner(kind, cfg, fields, opts);
}

void cmd_assign(const AssignArgs& a, std::ostream& out) {
  const AssignerKind kind = parse_assigner(a.assigner);
  const ScenarioConfig cfg = read_scenario(a.scenario);
  Json doc = assignment_to_json(assign_scenario(cfg, kind, a.k));
  doc["assigner"] = to_string(kind);
  doc["k"] = a.k;
  if (a.out.empty())
    out << dump_json(doc);
  else
    write_file(a.out, dump_json(doc));
}

void cmd_compare(const CompareArgs& a, std::ostream& out) {
  if (a.k < 1) throw UsageError("--k must be >= 1");
  if (!fs::is_directory(a.corpus)) throw UsageError("corpus is not a directory: " + a.corpus);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.corpus))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  if (files.empty()) throw UsageError("corpus contains no .json scenario files: " + a.corpus);
  std::sort(files.begin(), files.end());

  std::vector<NamedScenario> corpus;
  for (const auto& f : files) corpus.push_back({f.filename().string(), read_scenario(f)});

  CompareOptions opts;
  opts.k = a.k;
  opts.threads = thread_count();
  const std::vector<AssignerKind> assigners{AssignerKind::Aps, AssignerKind::Center, AssignerKind::AllInBox};
  const AlignmentReport report = compare_assigners(corpus, assigners, opts);
  out << report_table(report);
  if (!a.out.empty()) write_file(a.out, dump_json(report_to_json(report)));
}

void cmd_rf(const std::string& stack, std::ostream& out) {
  const auto layers = parse_conv_stack(stack);
  out << rf_table_text(rf_table(layers));
}

void cmd_render(const RenderArgs& a, std::ostream& out) {
  const ScenarioConfig cfg = read_scenario(a.scenario);
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec || !fs::is_directory(a.out)) throw UsageError("cannot create output directory " + a.out);

  const auto fields = scenario_loss_fields(cfg);
  std::optional<Assignment> assignment;
  if (a.what == "assignment") assignment = assign_scenario(cfg, parse_assigner(a.assigner), a.k);
  else if (a.what != "cls" && a.what != "reg" && a.what != "gap")
    throw UsageError("--what must be cls, reg, gap or assignment");

  for (const auto& level : cfg.grid.levels()) {
    GrayImage img;
    if (assignment) img = render_assignment_map(cfg, *assignment, level.level_index);
    else {
      const auto kind = a.what == "cls" ? LossMapKind::Cls : a.what == "reg" ? LossMapKind::Reg : LossMapKind::Gap;
      img = render_loss_map(cfg, fields, level.level_index, kind);
    }
    std::ostringstream bytes;
    write_pgm(bytes, img);
    const fs::path path = fs::path(a.out) / (a.what + "_level" + std::to_string(level.level_index) + ".pgm");
    write_file(path, bytes.str());
    out << "wrote " << path.string() << "\n";
  }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"aps_lab: loss-driven label assignment lab (aligned points sampler, baselines, receptive fields)"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* sub_gen = app.add_subcommand("gen", "Generate a synthetic scenario file");
  sub_gen->add_option("--out", gen.out, "Output scenario JSON path")->required();
  sub_gen->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  sub_gen->add_option("--preset", gen.preset, "aligned | misaligned | random")->capture_default_str();
  sub_gen->add_option("--instances", gen.instances, "Number of instances (>= 1)")->capture_default_str();

  AssignArgs assign;
  auto* sub_assign = app.add_subcommand("assign", "Assign positives for a scenario");
  sub_assign->add_option("--scenario", assign.scenario, "Scenario JSON path")->required();
  sub_assign->add_option("--assigner", assign.assigner, "aps | center | all-in-box")->capture_default_str();
  sub_assign->add_option("--k", assign.k, "Candidates per level")->capture_default_str();
  sub_assign->add_option("--out", assign.out, "Output assignment JSON path (stdout if omitted)");

  CompareArgs compare;
  auto* sub_compare = app.add_subcommand("compare", "Compare assigners over a corpus of scenario files");
  sub_compare->add_option("--corpus", compare.corpus, "Directory of scenario .json files")->required();
  sub_compare->add_option("--k", compare.k, "Candidates per level")->capture_default_str();
  sub_compare->add_option("--out", compare.out, "Write the full JSON report to this path");
  sub_compare->footer("Scenarios are evaluated with APS_LAB_THREADS worker threads (default 1).");

  std::string stack;
  auto* sub_rf = app.add_subcommand("rf", "Receptive field of a conv stack, per layer");
  sub_rf->add_option("--stack", stack, "Layers as \"k,s,p[,max_offset];...\"")->required();

  RenderArgs render;
  auto* sub_render = app.add_subcommand("render", "Render per-level PGM heatmaps");
  sub_render->add_option("--scenario", render.scenario, "Scenario JSON path")->required();
  sub_render->add_option("--what", render.what, "cls | reg | gap | assignment")->capture_default_str();
  sub_render->add_option("--assigner", render.assigner, "Assigner for --what assignment")->capture_default_str();
  sub_render->add_option("--k", render.k, "Candidates per level")->capture_default_str();
  sub_render->add_option("--out", render.out, "Output directory")->required();
  sub_render->footer(
      "Writes <what>_level<L>.pgm (binary P5, 8-bit) per pyramid level, one pixel per grid cell.\n"
      "Loss maps: a cell shows the loss of the smallest box containing it; in-box values map\n"
      "linearly from [min, max] of that map to [0, 255] (brighter = larger loss, rounded to\n"
      "nearest); cells outside every box, and maps with a single value, are 0.\n"
      "Assignment maps: positives are 255 on a 0 background.");

  std::vector<const char*> argv{"aps_lab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (sub_gen->parsed()) cmd_gen(gen, err);
    else if (sub_assign->parsed()) cmd_assign(assign, out);
    else if (sub_compare->parsed()) cmd_compare(compare, out);
    else if (sub_rf->parsed()) cmd_rf(stack, out);
    else if (sub_render->parsed()) cmd_render(render, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const aps::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

} // namespace aps::cli
