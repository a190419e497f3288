#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <ostream>

#include "dwt/io.hpp"
#include "dwt/metrics.hpp"
#include "dwt/streamline.hpp"

namespace dwt::cli {

namespace {

using json = nlohmann::json;

json parse_json_object(const std::string& text, const char* what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(fmt::format("{}: {}", what, e.what()));
  }
  if (!j.is_object()) throw UsageError(fmt::format("{}: expected a JSON object", what));
  return j;
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(fmt::format("config key '{}' has the wrong type", key));
  }
}

void take_range(const json& j, const char* key, Range& field) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw UsageError(fmt::format("recipe key '{}' must be [lo, hi]", key));
  }
  field = {v[0].get<double>(), v[1].get<double>()};
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* what) {
  for (const auto& item : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return item.key() == k; })) {
      throw UsageError(fmt::format("{}: unknown key '{}'", what, item.key()));
    }
  }
}

std::string read_text(const fs::path& path) {
  try {
    return read_file(path);
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
}

void validate_config(const SolverConfig& cfg) {
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
}

// Applies --config, then any flag given explicitly on the command line.
struct SolverFlags {
  std::string config;
  double ds = 0.0;
  double omega = 0.0;
  CLI::Option* config_opt = nullptr;
  CLI::Option* ds_opt = nullptr;
  CLI::Option* omega_opt = nullptr;

  void add(CLI::App& app) {
    config_opt = app.add_option("--config", config, "JSON file with solver settings");
    ds_opt = app.add_option("--ds", ds, "streamline step in pixels");
    omega_opt = app.add_option("--omega", omega, "SOR relaxation factor in (0, 2)");
  }

  SolverConfig resolve() const {
    SolverConfig cfg;
    if (config_opt->count()) cfg = load_solver_config(read_text(config), cfg);
    if (ds_opt->count()) cfg.step = ds;
    if (omega_opt->count()) cfg.omega = omega;
    validate_config(cfg);
    return cfg;
  }
};

double mask_spacing(const fs::path& input, const std::optional<double>& flag) {
  if (flag) return *flag;
  fs::path sidecar = input;
  sidecar.replace_extension(".json");
  if (fs::exists(sidecar)) return parse_spacing_sidecar(read_file(sidecar));
  return kDefaultSpacingMm;
}

void print_error(std::ostream& err, ErrorKind kind, std::string detail) {
  std::replace(detail.begin(), detail.end(), '\n', ' ');
  err << "error=" << to_string(kind) << " detail=" << detail << '\n';
}

int run_measure(const MeasureCommand& c, std::ostream& out) {
  const double spacing = mask_spacing(c.input, c.spacing);
  const BinaryMask mask = load_mask(read_file(c.input), spacing);
  MeasureResult result;
  if (c.boundaries) {
    const Image<BoundaryLabel> labels = load_boundary_labels(read_file(*c.boundaries));
    result = measure_detailed(mask, labels, c.cfg);
  } else {
    result = measure_detailed(mask, c.cfg);
  }
  write_file(c.output, encode_pfm(result.thickness.to_float()));
  if (c.dump_psi) write_file(*c.dump_psi, encode_pfm(result.potential.psi_image()));
  if (c.dump_flags) write_file(*c.dump_flags, encode_pgm(result.thickness.flag_image()));

  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.labels().size(); ++i) {
    if (!mask.is_wall(i)) continue;
    sum += result.thickness.thickness[i];
    ++n;
  }
  out << fmt::format("mean_mm={:.6f} max_mm={:.6f}\n", n ? sum / static_cast<double>(n) : 0.0,
                     max_thickness(result.thickness));
  return 0;
}

int run_synth(const SynthCommand& c, std::ostream& out) {
  const DatasetManifest m = gen_dataset(c.count, c.recipe, c.out_dir, c.seed, c.cfg, c.jobs);
  out << fmt::format("items={} manifest={}\n", m.entries.size(),
                     (c.out_dir / "manifest.csv").string());
  return 0;
}

int run_eval(const EvalCommand& c, std::ostream& out) {
  const DatasetManifest manifest = parse_manifest(read_file(c.manifest));
  const EvalReport report = eval_dataset(c.pred, c.gt, manifest, c.whole, c.jobs);
  if (c.report) write_file(*c.report, report_json(report));
  out << report_csv(report);
  return 0;
}

int run_aha(const AhaCommand& c, std::ostream& out) {
  const Level levels[] = {Level::basal, Level::mid, Level::apical};
  std::vector<SegmentReport> reports;
  for (std::size_t i = 0; i < 3; ++i) {
    const ThicknessMap map = ThicknessMap::from_float(parse_pfm(read_file(c.maps[i])));
    reports.push_back(segment_slice(map, levels[i], c.angle, c.sense));
  }
  const Bullseye b = assemble_17(reports[0], reports[1], reports[2], c.apex);
  double lo = 0.0;
  double hi = *std::max_element(b.means.begin(), b.means.end());
  if (c.range) {
    lo = (*c.range)[0];
    hi = (*c.range)[1];
  } else if (!(hi > lo)) {
    hi = lo + 1.0;
  }
  write_file(c.output, bullseye_svg(b, lo, hi));
  const std::string csv = bullseye_csv(b);
  if (c.csv) write_file(*c.csv, csv);
  out << csv;
  return 0;
}

int run_bench(const BenchCommand& c, std::ostream& out, std::ostream& err) {
  const double spacing = mask_spacing(c.input, c.spacing);
  const BinaryMask mask = load_mask(read_file(c.input), spacing);
  const MeasureResult r = measure_detailed(mask, c.cfg);
  const StageTimings& t = r.timings;
  err << "stage,seconds\n";
  err << fmt::format("labels,{:.6f}\nlaplace,{:.6f}\ntangent,{:.6f}\ntracing,{:.6f}\n", t.labels,
                     t.laplace, t.tangent, t.tracing);
  err << fmt::format("splat,{:.6f}\nfill,{:.6f}\ntotal,{:.6f}\n", t.splat, t.fill, t.total());
  out << fmt::format("width={} height={} sweeps={} streamlines={} splatted={} interpolated={}\n",
                     mask.geometry().width, mask.geometry().height, r.potential.iterations_used,
                     r.streamlines, r.splatted, r.interpolated);
  return 0;
}

int run_info(const InfoCommand& c, std::ostream& out) {
  const DatasetManifest manifest = parse_manifest(read_file(c.manifest));
  std::vector<double> maxima;
  for (const ManifestEntry& e : manifest.entries) maxima.push_back(e.max_thickness_mm);
  out << histogram_csv(histogram(maxima, c.bin_width, c.lo, c.hi), c.bin_width, c.lo);
  return 0;
}

}  // namespace

SolverConfig load_solver_config(const std::string& json_text, SolverConfig base) {
  const json j = parse_json_object(json_text, "solver config");
  reject_unknown(j,
                 {"tolerance", "max_iterations", "omega", "step", "max_steps", "grad_epsilon",
                  "fill_k", "fill_lambda", "psi_inner", "seed"},
                 "solver config");
  take(j, "tolerance", base.tolerance);
  take(j, "max_iterations", base.max_iterations);
  take(j, "omega", base.omega);
  take(j, "step", base.step);
  take(j, "max_steps", base.max_steps);
  take(j, "grad_epsilon", base.grad_epsilon);
  take(j, "fill_k", base.fill_k);
  take(j, "fill_lambda", base.fill_lambda);
  take(j, "psi_inner", base.psi_inner);
  take(j, "seed", base.seed);
  return base;
}

ShapeRecipe load_recipe(const std::string& json_text, ShapeRecipe base) {
  const json j = parse_json_object(json_text, "recipe");
  reject_unknown(j,
                 {"image_size", "spacing", "r_inner", "wall_width", "center_jitter", "elastic",
                  "elastic_alpha", "elastic_sigma", "piecewise_affine", "pwa_grid", "pwa_jitter",
                  "max_thickness_mm"},
                 "recipe");
  take(j, "image_size", base.image_size);
  take(j, "spacing", base.spacing);
  take_range(j, "r_inner", base.r_inner);
  take_range(j, "wall_width", base.wall_width);
  take(j, "center_jitter", base.center_jitter);
  take(j, "elastic", base.elastic);
  take(j, "elastic_alpha", base.elastic_alpha);
  take(j, "elastic_sigma", base.elastic_sigma);
  take(j, "piecewise_affine", base.piecewise_affine);
  take(j, "pwa_grid", base.pwa_grid);
  take(j, "pwa_jitter", base.pwa_jitter);
  take(j, "max_thickness_mm", base.max_thickness_mm);
  return base;
}

Command parse_args(const std::vector<std::string>& argv) {
  CLI::App app{"Dense wall thickness of annular structures", "dwt"};
  app.require_subcommand(1);

  // measure
  CLI::App* measure = app.add_subcommand("measure", "thickness map of a wall mask");
  MeasureCommand mc;
  double m_spacing = 0.0;
  std::string m_dump_psi, m_dump_flags, m_boundaries;
  SolverFlags m_flags;
  measure->add_option("input", mc.input, "mask PGM")->required();
  measure->add_option("-o,--output", mc.output, "thickness PFM")->required();
  auto* m_spacing_opt = measure->add_option("--spacing", m_spacing, "pixel spacing in mm");
  auto* m_psi_opt = measure->add_option("--dump-psi", m_dump_psi, "write the potential as PFM");
  auto* m_flags_opt =
      measure->add_option("--dump-flags", m_dump_flags, "write assignment flags as PGM");
  auto* m_bnd_opt =
      measure->add_option("--boundaries", m_boundaries, "inner/outer label PGM (manual mode)");
  m_flags.add(*measure);

  // synth
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  SynthCommand sc;
  std::string s_recipe;
  synth->add_option("-n,--count", sc.count, "number of items")->required()->check(
      CLI::NonNegativeNumber);
  synth->add_option("-o,--output", sc.out_dir, "output directory")->required();
  synth->add_option("--seed", sc.seed, "master seed");
  auto* s_recipe_opt = synth->add_option("--recipe", s_recipe, "JSON recipe");
  synth->add_option("--jobs", sc.jobs, "worker threads")->check(CLI::PositiveNumber);

  // eval
  CLI::App* eval = app.add_subcommand("eval", "score predicted maps against ground truth");
  EvalCommand ec;
  std::string e_report;
  eval->add_option("--pred", ec.pred, "predicted maps directory")->required();
  eval->add_option("--gt", ec.gt, "ground-truth directory")->required();
  eval->add_option("--manifest", ec.manifest, "manifest CSV")->required();
  auto* e_report_opt = eval->add_option("-o,--output", e_report, "JSON report");
  eval->add_flag("--whole", ec.whole, "average over the whole image");
  eval->add_option("--jobs", ec.jobs, "worker threads")->check(CLI::PositiveNumber);

  // aha
  CLI::App* aha = app.add_subcommand("aha", "17-segment bullseye from three slices");
  AhaCommand ac;
  std::vector<std::string> a_maps;
  std::string a_sense = "ccw", a_csv;
  std::vector<double> a_range;
  aha->add_option("--maps", a_maps, "basal, mid and apical thickness PFMs")
      ->required()
      ->expected(3);
  aha->add_option("--apex", ac.apex, "apex (segment 17) thickness in mm")->required();
  aha->add_option("--angle", ac.angle, "reference angle in degrees");
  aha->add_option("--sense", a_sense, "cw or ccw")->check(CLI::IsMember({"cw", "ccw"}));
  aha->add_option("-o,--output", ac.output, "SVG output")->required();
  auto* a_csv_opt = aha->add_option("--csv", a_csv, "segment CSV output");
  auto* a_range_opt = aha->add_option("--range", a_range, "color range lo hi in mm")->expected(2);

  // bench
  CLI::App* bench = app.add_subcommand("bench", "per-stage timings of measure");
  BenchCommand bc;
  double b_spacing = 0.0;
  SolverFlags b_flags;
  bench->add_option("input", bc.input, "mask PGM")->required();
  auto* b_spacing_opt = bench->add_option("--spacing", b_spacing, "pixel spacing in mm");
  b_flags.add(*bench);

  // info
  CLI::App* info = app.add_subcommand("info", "max-thickness histogram of a manifest");
  InfoCommand ic;
  info->add_option("manifest", ic.manifest, "manifest CSV")->required();
  info->add_option("--bin-width", ic.bin_width, "bin width in mm");
  info->add_option("--lo", ic.lo, "histogram lower edge");
  info->add_option("--hi", ic.hi, "histogram upper edge");

  std::vector<const char*> raw;
  for (const std::string& a : argv) raw.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help(), 0);
  } catch (const CLI::ParseError& e) {
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    if (e.get_name() == "CallForHelp") throw UsageError(sub->help(), 0);
    throw UsageError(e.what());
  }

  if (measure->parsed()) {
    if (m_spacing_opt->count()) mc.spacing = m_spacing;
    if (m_psi_opt->count()) mc.dump_psi = m_dump_psi;
    if (m_flags_opt->count()) mc.dump_flags = m_dump_flags;
    if (m_bnd_opt->count()) mc.boundaries = m_boundaries;
    if (mc.spacing && !(*mc.spacing > 0.0)) throw UsageError("--spacing must be positive");
    mc.cfg = m_flags.resolve();
    return mc;
  }
  if (synth->parsed()) {
    if (s_recipe_opt->count()) sc.recipe = load_recipe(read_text(s_recipe));
    try {
      sc.recipe.validate();
    } catch (const Error& e) {
      throw UsageError(e.detail());
    }
    sc.cfg.seed = sc.seed;
    return sc;
  }
  if (eval->parsed()) {
    if (e_report_opt->count()) ec.report = e_report;
    return ec;
  }
  if (aha->parsed()) {
    for (std::size_t i = 0; i < 3; ++i) ac.maps[i] = a_maps[i];
    ac.sense = *parse_sense(a_sense);
    if (a_csv_opt->count()) ac.csv = a_csv;
    if (a_range_opt->count()) {
      if (!(a_range[0] < a_range[1])) throw UsageError("--range needs lo < hi");
      ac.range = std::array<double, 2>{a_range[0], a_range[1]};
    }
    return ac;
  }
  if (bench->parsed()) {
    if (b_spacing_opt->count()) bc.spacing = b_spacing;
    if (bc.spacing && !(*bc.spacing > 0.0)) throw UsageError("--spacing must be positive");
    bc.cfg = b_flags.resolve();
    return bc;
  }
  if (!(ic.bin_width > 0.0) || !(ic.lo < ic.hi)) {
    throw UsageError("info needs --bin-width > 0 and --lo < --hi");
  }
  return ic;
}

int run(const Command& cmd, std::ostream& out, std::ostream& err) {
  try {
    return std::visit(
        [&](const auto& c) -> int {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, MeasureCommand>) return run_measure(c, out);
          if constexpr (std::is_same_v<T, SynthCommand>) return run_synth(c, out);
          if constexpr (std::is_same_v<T, EvalCommand>) return run_eval(c, out);
          if constexpr (std::is_same_v<T, AhaCommand>) return run_aha(c, out);
          if constexpr (std::is_same_v<T, BenchCommand>) return run_bench(c, out, err);
          if constexpr (std::is_same_v<T, InfoCommand>) return run_info(c, out);
        },
        cmd);
  } catch (const Error& e) {
    print_error(err, e.kind(), e.detail());
    return 1;
  }
}

int main_entry(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Command cmd;
  try {
    cmd = parse_args(argv);
  } catch (const UsageError& e) {
    if (e.exit_code() == 0) {
      out << e.what();
      return 0;
    }
    err << "usage error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    err << "usage error: " << e.detail() << '\n';
    return 2;
  }
  return run(cmd, out, err);
}

}  // namespace dwt::cli
