#include "cli.hpp"

#include "lpi/checkpoint.hpp"
#include "lpi/errors.hpp"
#include "lpi/extract.hpp"
#include "lpi/metrics.hpp"
#include "lpi/parallel.hpp"
#include "lpi/point_io.hpp"
#include "lpi/shapes.hpp"
#include "lpi/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace lpi::cli {

namespace {

// Keys shared by the config file and the command line, grouped by the subcommands that read them.
const std::vector<std::string> kModelKeys = {
    "regions", "affinity", "sigma", "semantic-own-weight", "latent-dim", "geodesic-knn", "fps-seed",
    "hidden-layers", "hidden-width", "skip-layers", "init-radius", "code-init-std",
};
const std::vector<std::string> kTrainKeys = {
    "loss", "steps", "batch", "lr", "queries-per-point", "noise-knn", "seed", "log-every", "gt-shape",
};
const std::vector<std::string> kMeshKeys = {"resolution", "levels", "outside-fill"};
const std::vector<std::string> kEvalKeys = {"mu", "n-samples", "iou-resolution", "seed"};
const std::vector<std::string> kCommonKeys = {"threads", "profile"};

const std::map<std::string, std::string> kKeyHelp = {
    {"regions", "Number of region centers I"},
    {"affinity", "euclidean, intrinsic, semantic, average or nearest"},
    {"sigma", "Affinity decay"},
    {"semantic-own-weight", "Weight on the query's own segment (semantic mode)"},
    {"latent-dim", "Surface code length T"},
    {"geodesic-knn", "Neighbors per point in the geodesic graph"},
    {"fps-seed", "0 starts FPS nearest the centroid, n starts at point n mod N"},
    {"hidden-layers", "Hidden layer count"},
    {"hidden-width", "Hidden layer width"},
    {"skip-layers", "Comma-separated layers that re-read the input"},
    {"init-radius", "Sphere radius of the geometric initialization"},
    {"code-init-std", "Standard deviation of initial surface codes"},
    {"loss", "pulling or mse"},
    {"steps", "Optimizer steps"},
    {"batch", "Queries per step"},
    {"lr", "Adam learning rate"},
    {"queries-per-point", "Queries sampled around each surface point"},
    {"noise-knn", "Neighbor whose distance sets the query noise scale"},
    {"seed", "Random seed"},
    {"log-every", "Steps between log lines"},
    {"gt-shape", "Analytic shape supplying signed distances for --loss mse"},
    {"resolution", "Marching cubes grid resolution"},
    {"levels", "Comma-separated part counts for relevel"},
    {"outside-fill", "constant or unseen-code"},
    {"mu", "F-score distance threshold"},
    {"n-samples", "Surface samples per mesh"},
    {"iou-resolution", "Occupancy grid resolution for --iou"},
    {"threads", "Worker threads (0 uses LPI_THREADS or 1)"},
    {"profile", "full or desk"},
};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string canonical_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

bool is_known_key(const std::string& key) {
  const auto& keys = config_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

/// Typed, validated view over resolved settings.
class Settings {
 public:
  explicit Settings(KeyValues kv) : kv_(std::move(kv)) {}

  const std::string& str(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw InvalidArgument("missing setting '" + key + "'");
    return it->second;
  }

  std::uint64_t u64(const std::string& key) const {
    const std::string& v = str(key);
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size()) {
      throw InvalidArgument("--" + key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
  }

  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

  std::size_t positive(const std::string& key) const {
    const std::size_t n = count(key);
    if (n == 0) throw InvalidArgument("--" + key + " must be positive");
    return n;
  }

  double real(const std::string& key) const {
    const std::string& v = str(key);
    try {
      std::size_t used = 0;
      const double out = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(out)) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw InvalidArgument("--" + key + ": expected a number, got '" + v + "'");
    }
  }

  std::vector<std::size_t> list(const std::string& key) const {
    std::vector<std::size_t> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(Settings(KeyValues{{key, item}}).count(key));
    }
    return out;
  }

 private:
  KeyValues kv_;
};

ModelConfig model_config(const Settings& s) {
  ModelConfig m;
  m.latent_dim = s.positive("latent-dim");
  m.geodesic_knn = s.positive("geodesic-knn");
  m.code_init_std = s.real("code-init-std");
  m.affinity.mode = parse_affinity_mode(s.str("affinity"));
  m.affinity.sigma = s.real("sigma");
  m.affinity.semantic_own_weight = s.real("semantic-own-weight");
  m.net.hidden_layers = s.positive("hidden-layers");
  m.net.hidden_width = s.positive("hidden-width");
  m.net.skip_layers = s.list("skip-layers");
  m.net.init_radius = s.real("init-radius");
  return m;
}

TrainConfig train_config(const Settings& s) {
  TrainConfig t;
  t.steps = s.count("steps");
  t.batch = s.positive("batch");
  t.lr = s.real("lr");
  t.loss = parse_loss_mode(s.str("loss"));
  t.queries_per_point = s.positive("queries-per-point");
  t.noise_knn = s.positive("noise-knn");
  t.seed = s.u64("seed");
  t.log_every = s.positive("log-every");
  t.validate();
  return t;
}

void apply_threads(const Settings& s) {
  const std::size_t n = s.count("threads");
  if (n > 0) set_thread_count(n);
}

void add_keys(CLI::App* app, const std::vector<std::string>& keys, KeyValues& flags) {
  for (const auto& key : keys) {
    if (app->get_option_no_throw("--" + key) != nullptr) continue;
    app->add_option_function<std::string>(
        "--" + key, [&flags, key](const std::string& v) { flags[key] = v; }, kKeyHelp.at(key));
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Settings resolve(const std::string& config_path, const KeyValues& flags) {
  KeyValues file;
  if (!config_path.empty()) {
    std::istringstream in(read_text_file(config_path));
    try {
      file = parse_config(in);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(config_path + ": " + e.what());
    }
  }
  return Settings(resolve_settings(file, flags));
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Subcommands

struct TrainArgs {
  std::string input;
  std::string output;
  std::string log;
};

int cmd_train(const TrainArgs& args, const Settings& s, std::ostream& out, std::ostream& err) {
  apply_threads(s);
  const ModelConfig model = model_config(s);
  const TrainConfig train_cfg = train_config(s);
  const PointCloud raw = read_point_cloud(args.input);
  auto [cloud, norm] = normalize(raw);

  std::unique_ptr<Shape> gt_shape;
  SdfFunction gt;
  if (train_cfg.loss == LossMode::Mse) {
    if (s.str("gt-shape").empty()) throw InvalidArgument("--loss mse needs --gt-shape (one of the analytic shapes)");
    gt_shape = make_shape(s.str("gt-shape"));
    gt = [&gt_shape, norm = norm](const Vec3& q) { return gt_shape->sdf(norm.invert(q)) / norm.scale; };
  }

  RegionCenters centers = model.affinity.mode == AffinityMode::Semantic
                              ? segment_centers(cloud)
                              : farthest_point_sample(cloud, s.positive("regions"), s.u64("fps-seed"));
  Checkpoint start = initialize_checkpoint(cloud, norm, std::move(centers), model, train_cfg.seed);

  const fs::path output = args.output.empty() ? fs::path(args.input).replace_extension(".lpic") : fs::path(args.output);
  fs::path log_path = args.log.empty() ? fs::path(output.string() + ".log.jsonl") : fs::path(args.log);
  fs::path log_tmp = log_path;
  log_tmp += ".partial";
  std::ofstream log(log_tmp);
  if (!log) throw IoError("cannot write " + log_tmp.string());

  try {
    TrainResult result = train(std::move(start), train_cfg, gt ? &gt : nullptr, &log);
    log.close();
    save_checkpoint(output, result.checkpoint);
    fs::rename(log_tmp, log_path);
    out << "checkpoint " << output.string() << " (" << checkpoint_id(result.checkpoint) << ")\n"
        << "regions " << result.checkpoint.region_count() << ", steps " << result.checkpoint.step;
    if (!result.losses.empty()) {
      out << ", loss " << result.losses.front() << " -> " << result.losses.back();
    }
    out << "\nlog " << log_path.string() << '\n';
    return kOk;
  } catch (const TrainingAborted& e) {
    log.close();
    save_checkpoint(output, e.last_good());
    fs::rename(log_tmp, log_path);
    err << "error: " << e.what() << "; last good state (step " << e.last_good().step << ") saved to "
        << output.string() << '\n';
    return kNumericalAbort;
  } catch (...) {
    log.close();
    fs::remove(log_tmp);
    throw;
  }
}

enum class MeshCommand { Reconstruct, Parts, Relevel, Abstract };

struct MeshArgs {
  std::string checkpoint;
  std::string output;
};

int cmd_mesh(MeshCommand command, const MeshArgs& args, const Settings& s, std::ostream& out) {
  apply_threads(s);
  const Checkpoint ck = load_checkpoint(args.checkpoint);
  const std::size_t resolution = s.count("resolution");
  if (resolution < 2) throw InvalidArgument("--resolution must be at least 2");
  const OutsideFill fill = parse_outside_fill(s.str("outside-fill"));
  const fs::path dir = args.output.empty() ? fs::path(args.checkpoint).replace_extension("") : fs::path(args.output);

  if (command == MeshCommand::Reconstruct) {
    MeshBundle bundle;
    bundle.global = marching_cubes(evaluate_grid(ck, resolution));
    bundle.checkpoint_id = checkpoint_id(ck);
    bundle.resolution = resolution;
    bundle.affinity_mode = std::string(to_string(ck.affinity.mode));
    bundle.fill = fill;
    write_bundle(dir, bundle, ck.normalization);
    out << "global mesh: " << bundle.global.vertices.size() << " vertices, " << bundle.global.triangles.size()
        << " triangles -> " << dir.string() << '\n';
    return kOk;
  }

  std::vector<std::size_t> levels = s.list("levels");
  if (levels.empty() || command == MeshCommand::Parts) levels = {ck.region_count()};
  if (command == MeshCommand::Abstract && levels.size() != 1) {
    throw InvalidArgument("abstract takes a single --levels value");
  }
  for (auto level : levels) {
    if (level < 1 || level > ck.region_count()) {
      throw InvalidArgument("level " + std::to_string(level) + " outside [1, " + std::to_string(ck.region_count()) + "]");
    }
  }

  const PartExtractor extractor(ck, resolution, fill);
  for (auto level : levels) {
    MeshBundle bundle = relevel(ck, extractor, level);
    if (command == MeshCommand::Abstract) abstract_hulls(bundle);
    char name[32];
    std::snprintf(name, sizeof name, "level_%03zu", level);
    const fs::path target = command == MeshCommand::Relevel ? dir / name : dir;
    if (command == MeshCommand::Relevel) fs::create_directories(dir);
    write_bundle(target, bundle, ck.normalization);
    std::size_t empty = 0;
    for (const auto& p : bundle.parts) empty += p.empty() ? 1 : 0;
    out << "level " << level << ": " << bundle.parts.size() << " parts";
    if (empty > 0) out << " (" << empty << " empty)";
    if (!bundle.hulls.empty()) {
      const auto fallback = std::count(bundle.hull_fallback.begin(), bundle.hull_fallback.end(), true);
      out << ", " << bundle.hulls.size() << " hulls";
      if (fallback > 0) out << " (" << fallback << " fallback)";
    }
    out << " -> " << target.string() << '\n';
  }
  return kOk;
}

struct EvalArgs {
  std::string mesh;
  std::string reference;
  std::string output;
  bool iou = false;
};

int cmd_eval(const EvalArgs& args, const Settings& s, std::ostream& out, std::ostream& err) {
  apply_threads(s);
  const double mu = s.real("mu");
  if (!(mu > 0.0)) throw InvalidArgument("--mu must be positive");
  const std::size_t n = s.positive("n-samples");
  const std::uint64_t seed = s.u64("seed");
  const TriangleMesh a = read_obj(args.mesh);
  const TriangleMesh b = read_obj(args.reference);
  if (a.empty()) throw FormatError(args.mesh + ": no triangles");
  if (b.empty()) throw FormatError(args.reference + ": no triangles");

  // Both sides use the same seed so identical meshes give identical samples.
  const SampledSurface sa = sample_mesh(a, n, seed);
  const SampledSurface sb = sample_mesh(b, n, seed);
  nlohmann::json report = {
      {"l1cd", chamfer(sa, sb, 1)},
      {"l2cd", chamfer(sa, sb, 2)},
      {"nc", normal_consistency(sa, sb)},
      {"fscore_mu", f_score(sa, sb, mu)},
      {"fscore_2mu", f_score(sa, sb, 2.0 * mu)},
      {"iou", nullptr},
      {"n_samples", n},
      {"mu", mu},
      {"seed", seed},
  };
  int code = kOk;
  if (args.iou) {
    try {
      report["iou"] = volumetric_iou(a, b, s.positive("iou-resolution"));
    } catch (const NonWatertight& e) {
      err << "error: " << e.what() << " (other metrics reported)\n";
      code = kMetricPrecondition;
    }
  }
  const std::string text = report.dump(2) + "\n";
  out << text;
  if (!args.output.empty()) write_text_atomic(args.output, text);
  return code;
}

struct InspectArgs {
  std::string checkpoint;
  bool json = false;
};

int cmd_inspect(const InspectArgs& args, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(args.checkpoint);
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& w : ck.net.weights()) layers.push_back({w.rows(), w.cols()});
  const Vec3& o = ck.normalization.offset;
  nlohmann::json summary = {
      {"id", checkpoint_id(ck)},
      {"regions", ck.region_count()},
      {"latent_dim", ck.latent_dim()},
      {"affinity", to_string(ck.affinity.mode)},
      {"sigma", ck.affinity.sigma},
      {"semantic_own_weight", ck.affinity.semantic_own_weight},
      {"geodesic_knn", ck.geodesic_knn},
      {"step", ck.step},
      {"points", ck.cloud.size()},
      {"labeled", ck.cloud.has_labels()},
      {"softplus_beta", ck.net.config().softplus_beta},
      {"skip_layers", ck.net.config().skip_layers},
      {"layers", layers},
      {"parameters", ck.net.parameter_count()},
      {"normalization", {{"scale", ck.normalization.scale}, {"offset", {o.x(), o.y(), o.z()}}}},
  };
  if (args.json) {
    out << summary.dump(2) << '\n';
    return kOk;
  }
  out << std::setprecision(17);
  out << "checkpoint     " << args.checkpoint << " (" << summary["id"].get<std::string>() << ")\n"
      << "regions (I)    " << ck.region_count() << '\n'
      << "latent dim (T) " << ck.latent_dim() << '\n'
      << "affinity       " << to_string(ck.affinity.mode) << ", sigma " << ck.affinity.sigma << '\n'
      << "step           " << ck.step << '\n'
      << "cloud          " << ck.cloud.size() << " points" << (ck.cloud.has_labels() ? ", labeled" : "") << '\n'
      << "normalization  scale " << ck.normalization.scale << ", offset (" << o.x() << ", " << o.y() << ", "
      << o.z() << ")\n"
      << "network        " << ck.net.parameter_count() << " parameters, softplus beta "
      << ck.net.config().softplus_beta << '\n';
  for (std::size_t l = 0; l < ck.net.weights().size(); ++l) {
    const auto& w = ck.net.weights()[l];
    out << "  layer " << l << "      " << w.rows() << " x " << w.cols() << (ck.net.is_skip(l) ? "  (skip input)" : "")
        << '\n';
  }
  return kOk;
}

struct SynthArgs {
  std::string shape;
  std::string output;
  std::string mesh;
  std::size_t points = 4000;
  std::uint64_t seed = 0;
  std::size_t resolution = 128;
};

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  const auto shape = make_shape(args.shape);
  if (args.points < 4) throw InvalidArgument("--points must be at least 4");
  if (!args.output.empty()) {
    write_point_cloud(args.output, sample_cloud(*shape, args.points, args.seed));
    out << args.points << " " << args.shape << " samples -> " << args.output << '\n';
  }
  if (!args.mesh.empty()) {
    if (args.resolution < 2) throw InvalidArgument("--resolution must be at least 2");
    Box box = bounding_box(shape->sample(20000, args.seed + 1).points);
    const Vec3 pad = Vec3::Constant(0.1 * box.extent().maxCoeff());
    box.lo -= pad;
    box.hi += pad;
    const TriangleMesh mesh = marching_cubes(sample_grid(args.resolution, box, [&](const Vec3& p) { return shape->sdf(p); }));
    write_obj(args.mesh, mesh);
    out << "analytic mesh (R=" << args.resolution << ", " << mesh.triangles.size() << " triangles) -> " << args.mesh
        << '\n';
  }
  if (args.output.empty() && args.mesh.empty()) throw InvalidArgument("nothing to do: pass -o and/or --mesh");
  return kOk;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> all;
    for (const auto* group : {&kModelKeys, &kTrainKeys, &kMeshKeys, &kEvalKeys, &kCommonKeys}) {
      for (const auto& k : *group) {
        if (std::find(all.begin(), all.end(), k) == all.end()) all.push_back(k);
      }
    }
    return all;
  }();
  return keys;
}

KeyValues default_settings() {
  return {
      {"regions", "100"},        {"affinity", "euclidean"},  {"sigma", "1"},
      {"semantic-own-weight", "0.8"}, {"latent-dim", "100"}, {"geodesic-knn", "10"},
      {"fps-seed", "0"},         {"hidden-layers", "8"},     {"hidden-width", "256"},
      {"skip-layers", "4"},      {"init-radius", "0.3"},     {"code-init-std", "0.01"},
      {"loss", "pulling"},       {"steps", "20000"},         {"batch", "512"},
      {"lr", "0.0001"},          {"queries-per-point", "20"}, {"noise-knn", "50"},
      {"seed", "0"},             {"log-every", "100"},       {"gt-shape", ""},
      {"resolution", "128"},     {"levels", ""},             {"outside-fill", "constant"},
      {"mu", "0.002"},           {"n-samples", "100000"},    {"iou-resolution", "64"},
      {"threads", "0"},          {"profile", "full"},
  };
}

KeyValues profile_settings(const std::string& name) {
  if (name == "full") return {};
  if (name == "desk") {
    return {
        {"latent-dim", "32"}, {"regions", "16"},    {"steps", "2000"},     {"hidden-layers", "4"},
        {"hidden-width", "128"}, {"skip-layers", "2"}, {"noise-knn", "10"}, {"resolution", "64"},
    };
  }
  throw InvalidArgument("unknown profile '" + name + "' (expected full or desk)");
}

KeyValues parse_config(std::istream& in) {
  KeyValues out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string text;
    bool quoted = false;
    for (char c : raw) {
      if (c == '"') quoted = !quoted;
      if (c == '#' && !quoted) break;
      text += c;
    }
    text = trim(text);
    if (text.empty() || text.front() == '[') continue;  // blank line or table header
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw InvalidArgument("line " + std::to_string(line) + ": expected key = value");
    const std::string key = canonical_key(trim(text.substr(0, eq)));
    std::string value = trim(text.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
    if (!is_known_key(key)) throw InvalidArgument("line " + std::to_string(line) + ": unknown key '" + key + "'");
    out[key] = value;
  }
  return out;
}

KeyValues resolve_settings(const KeyValues& file, const KeyValues& flags) {
  std::string profile = "full";
  if (auto it = file.find("profile"); it != file.end()) profile = it->second;
  if (auto it = flags.find("profile"); it != flags.end()) profile = it->second;
  KeyValues out = default_settings();
  const KeyValues overrides = profile_settings(profile);
  for (const auto* layer : {&overrides, &file, &flags}) {
    for (const auto& [k, v] : *layer) out[k] = v;
  }
  out["profile"] = profile;
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent partition implicit surfaces: train, extract parts, evaluate", "lpi"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lpi 0.1.0");

  KeyValues flags;
  std::string config_path;

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Fit a model to a point cloud (.xyz or .ply)");
  train->add_option("input", train_args.input, "Input point cloud")->required();
  train->add_option("-o,--output", train_args.output, "Checkpoint path (default: input with .lpic)");
  train->add_option("--log", train_args.log, "Training log path (default: <output>.log.jsonl)");

  MeshArgs mesh_args;
  auto add_mesh_command = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("checkpoint", mesh_args.checkpoint, "Checkpoint file")->required();
    sub->add_option("-o,--output", mesh_args.output, "Bundle directory");
    return sub;
  };
  auto* reconstruct = add_mesh_command("reconstruct", "Extract the global mesh");
  auto* parts = add_mesh_command("parts", "Extract the global mesh and one part per region");
  auto* relevel_cmd = add_mesh_command("relevel", "Extract parts at fewer regions (--levels 2,4,8)");
  auto* abstract = add_mesh_command("abstract", "Extract parts and their convex hulls");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Compare a mesh against a reference mesh (OBJ)");
  eval->add_option("mesh", eval_args.mesh, "Reconstructed mesh")->required();
  eval->add_option("reference", eval_args.reference, "Reference mesh")->required();
  eval->add_option("-o,--output", eval_args.output, "Also write the JSON report here");
  eval->add_flag("--iou", eval_args.iou, "Compute volumetric IoU (both meshes must be closed)");

  InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect", "Summarize a checkpoint");
  inspect->add_option("checkpoint", inspect_args.checkpoint, "Checkpoint file")->required();
  inspect->add_flag("--json", inspect_args.json, "Print JSON only");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Sample an analytic shape (sphere, torus, dumbbell, bent-cylinder, box)");
  synth->add_option("shape", synth_args.shape, "Shape name")->required();
  synth->add_option("-o,--output", synth_args.output, "Point cloud output (.xyz or .ply)");
  synth->add_option("--mesh", synth_args.mesh, "Also write a marching-cubes mesh of the exact SDF (OBJ)");
  synth->add_option("--points", synth_args.points, "Sample count");
  synth->add_option("--seed", synth_args.seed, "Sampling seed");
  synth->add_option("--resolution", synth_args.resolution, "Grid resolution for --mesh");

  for (auto* sub : {train, reconstruct, parts, relevel_cmd, abstract, eval}) {
    sub->add_option("--config", config_path, "TOML-style key = value file");
    add_keys(sub, kCommonKeys, flags);
  }
  add_keys(train, kModelKeys, flags);
  add_keys(train, kTrainKeys, flags);
  for (auto* sub : {reconstruct, parts, relevel_cmd, abstract}) add_keys(sub, kMeshKeys, flags);
  add_keys(eval, kEvalKeys, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    for (auto* sub : app.get_subcommands()) err << sub->help();
    return kInputError;
  }

  try {
    if (*synth) return cmd_synth(synth_args, out);
    if (*inspect) return cmd_inspect(inspect_args, out);
    const Settings settings = resolve(config_path, flags);
    if (*train) return cmd_train(train_args, settings, out, err);
    if (*eval) return cmd_eval(eval_args, settings, out, err);
    if (*reconstruct) return cmd_mesh(MeshCommand::Reconstruct, mesh_args, settings, out);
    if (*parts) return cmd_mesh(MeshCommand::Parts, mesh_args, settings, out);
    if (*relevel_cmd) return cmd_mesh(MeshCommand::Relevel, mesh_args, settings, out);
    if (*abstract) return cmd_mesh(MeshCommand::Abstract, mesh_args, settings, out);
  } catch (const NonWatertight& e) {
    err << "error: " << e.what() << '\n';
    return kMetricPrecondition;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalAbort;
  } catch (const EmptyBatch& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalAbort;
  } catch (const EmptyMesh& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalAbort;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace lpi::cli
