// Acceptance suite: one PASS/FAIL line per criterion.
//
//   lpi_acceptance            run every criterion
//   lpi_acceptance 3 6 9      run a subset
//
// Exit status is the number of failed criteria.

#include "cli.hpp"
#include "lpi/affinity.hpp"
#include "lpi/checkpoint.hpp"
#include "lpi/extract.hpp"
#include "lpi/geodesic.hpp"
#include "lpi/metrics.hpp"
#include "lpi/shapes.hpp"
#include "lpi/spatial_index.hpp"
#include "lpi/training.hpp"
#include "oracles.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace lpi;

namespace {

// Tolerances.
constexpr double kGradRelError = 1e-4;
constexpr double kFdStep = 1e-5;
constexpr double kSphereHeldOut = 5e-3;
constexpr double kAreaTolerance = 0.03;
constexpr double kTorusL2cd = 1e-4;
constexpr double kTorusFscore = 0.95;
constexpr double kPartL2cd = 2e-4;
constexpr double kOracleTolerance = 1e-12;
constexpr double kIouTolerance = 0.02;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModelConfig desk_model(AffinityMode mode) {
  ModelConfig mc;
  mc.net.hidden_layers = 4;
  mc.net.hidden_width = 128;
  mc.net.skip_layers = {2};
  mc.latent_dim = 32;
  mc.affinity.mode = mode;
  return mc;
}

TrainConfig desk_training(LossMode loss) {
  TrainConfig tc;
  tc.steps = 2000;
  tc.loss = loss;
  tc.noise_knn = 10;
  return tc;
}

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

// Largest distance from a global-mesh vertex to the nearest part vertex.
double coverage_gap(const TriangleMesh& global, const std::vector<TriangleMesh>& parts) {
  std::vector<Vec3> pts;
  for (const auto& p : parts) pts.insert(pts.end(), p.vertices.begin(), p.vertices.end());
  if (pts.empty()) return std::numeric_limits<double>::infinity();
  const SpatialIndex index(pts);
  double worst = 0.0;
  for (const Vec3& v : global.vertices) worst = std::max(worst, index.nearest(v).distance);
  return worst;
}

// ---------------------------------------------------------------------------

Outcome double_backprop() {
  const auto t0 = std::chrono::steady_clock::now();
  PointCloud cloud;
  cloud.points = {Vec3(0.3, 0, 0), Vec3(-0.2, 0.25, 0.05), Vec3(0, -0.3, 0.1), Vec3(0.1, 0.1, -0.3),
                  Vec3(-0.15, -0.1, 0.25)};
  const RegionCenters centers = farthest_point_sample(cloud, 2, 0);
  ModelConfig mc;
  mc.net.hidden_layers = 2;
  mc.net.hidden_width = 16;
  mc.net.skip_layers = {};
  mc.latent_dim = 8;
  mc.code_init_std = 0.1;
  Checkpoint ck = initialize_checkpoint(cloud, Normalization{}, centers, mc, 11);

  QuerySet batch = sample_queries(cloud, 4, 2, 5);
  assign_affinities(batch, make_affinity_field(ck));

  auto loss_value = [&] {
    Tape tape;
    const auto params = ck.net.bind(tape, false);
    return pulling_loss(ck.net, params, tape.constant(ck.codes), batch, ck.cloud).loss.value()(0, 0);
  };

  Tape tape;
  const auto params = ck.net.bind(tape, true);
  const Var codes = tape.variable(ck.codes);
  std::vector<Var> wrt = params.all();
  wrt.push_back(codes);
  const auto grads = tape.grad(pulling_loss(ck.net, params, codes, batch, ck.cloud).loss, wrt);

  // (tensor, entry) pairs: 10 random network entries plus every entry of code row 1.
  std::vector<Tensor*> tensors = ck.net.parameters();
  tensors.push_back(&ck.codes);
  std::vector<std::pair<std::size_t, Eigen::Index>> probes;
  std::mt19937_64 rng(17);
  for (int i = 0; i < 10; ++i) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, tensors.size() - 2)(rng);
    probes.emplace_back(t, std::uniform_int_distribution<Eigen::Index>(0, tensors[t]->size() - 1)(rng));
  }
  for (Eigen::Index c = 0; c < ck.codes.cols(); ++c) probes.emplace_back(tensors.size() - 1, ck.codes.cols() + c);

  double worst = 0.0;
  for (const auto& [t, i] : probes) {
    double& x = tensors[t]->data()[i];
    const double x0 = x;
    x = x0 + kFdStep;
    const double fp = loss_value();
    x = x0 - kFdStep;
    const double fm = loss_value();
    x = x0;
    worst = std::max(worst, rel_error((fp - fm) / (2 * kFdStep), grads[t].value().data()[i]));
  }
  const double secs = seconds_since(t0);
  return {worst < kGradRelError && secs < 10.0,
          fmt("max relative error %.3g over %zu entries (limit %.0e), %.2f s", worst, probes.size(), kGradRelError, secs)};
}

Outcome sphere_fit() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto sphere = make_sphere(0.3);
  auto [cloud, norm] = normalize(sample_cloud(*sphere, 2000, 1));
  const RegionCenters centers = farthest_point_sample(cloud, 16, 0);
  const Checkpoint init = initialize_checkpoint(cloud, norm, centers, desk_model(AffinityMode::Euclidean), 0);
  const SdfFunction gt = [&, norm = norm](const Vec3& q) { return sphere->sdf(norm.invert(q)) / norm.scale; };
  const Checkpoint ck = train(init, desk_training(LossMode::Mse), &gt).checkpoint;

  // Held-out queries from a different seed, errors in shape units.
  QuerySet held = sample_queries(ck.cloud, 2, 10, 99);
  const AffinityField field = make_affinity_field(ck);
  assign_affinities(held, field);
  Tensor q(static_cast<Eigen::Index>(held.size()), 3);
  for (std::size_t i = 0; i < held.size(); ++i) q.row(static_cast<Eigen::Index>(i)) = held.queries[i].transpose();
  const Eigen::VectorXd f = ck.net.evaluate(q, held.affinities * ck.codes);
  double err = 0.0;
  for (std::size_t i = 0; i < held.size(); ++i) {
    err += std::abs(f[static_cast<Eigen::Index>(i)] * norm.scale - sphere->sdf(norm.invert(held.queries[i])));
  }
  err /= static_cast<double>(held.size());

  const ScalarGrid grid = evaluate_grid(ck, field, 64);
  const TriangleMesh mesh = denormalized(marching_cubes(grid), norm);
  const double h = grid.cell_diagonal() * norm.scale;
  double radial = 0.0;
  for (const Vec3& v : mesh.vertices) radial = std::max(radial, std::abs(v.norm() - 0.3));
  const double area = 4 * std::numbers::pi * 0.09;
  const double area_err = std::abs(mesh.area() - area) / area;
  const double secs = seconds_since(t0);
  const bool pass = err < kSphereHeldOut && radial <= h && area_err < kAreaTolerance && secs < 300.0;
  return {pass, fmt("held-out |f-sdf| %.3g (limit %.0e), max radial deviation %.4f (h %.4f), area error %.2f%%, %.0f s",
                    err, kSphereHeldOut, radial, h, 100 * area_err, secs)};
}

// Torus pipeline through the command line, in `dir`.
struct PipelineRun {
  int code = 0;
  double seconds = 0.0;
  fs::path checkpoint, mesh, report;
};

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lpi");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << "lpi " << args[1] << " exited " << code << ": " << err.str();
  return code;
}

PipelineRun torus_pipeline(const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::remove_all(dir);
  fs::create_directories(dir);
  PipelineRun run;
  run.checkpoint = dir / "torus.lpic";
  run.mesh = dir / "torus_mesh" / "global.obj";
  run.report = dir / "eval.json";
  const std::string cloud = (dir / "torus.xyz").string();
  const std::string reference = (dir / "torus_ref.obj").string();
  run.code = cli({"synth", "torus", "-o", cloud, "--points", "4000", "--seed", "1", "--mesh", reference});
  if (run.code == 0) {
    run.code = cli({"train", cloud, "-o", run.checkpoint.string(), "--profile", "desk", "--affinity", "euclidean",
                    "--regions", "16"});
  }
  if (run.code == 0) {
    run.code = cli({"reconstruct", run.checkpoint.string(), "-o", (dir / "torus_mesh").string(), "--profile", "desk"});
  }
  if (run.code == 0) {
    run.code = cli({"eval", run.mesh.string(), reference, "--n-samples", "10000", "--mu", "0.01", "-o",
                    run.report.string()});
  }
  run.seconds = seconds_since(t0);
  return run;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path& work_root() {
  static const fs::path root = fs::temp_directory_path() / fmt("lpi_acceptance_%d", static_cast<int>(::getpid()));
  return root;
}

const PipelineRun& torus_run_a() {
  static const PipelineRun run = torus_pipeline(work_root() / "torus_a");
  return run;
}

Outcome torus_reconstruction() {
  const PipelineRun& run = torus_run_a();
  if (run.code != 0) return {false, fmt("pipeline failed with exit code %d", run.code)};
  std::ifstream in(run.report);
  const auto report = nlohmann::json::parse(in);
  const double l2cd = report.at("l2cd");
  const double fs01 = report.at("fscore_mu");
  return {l2cd < kTorusL2cd && fs01 > kTorusFscore && run.seconds < 900.0,
          fmt("L2CD %.3g (limit %.0e), F(0.01) %.4f (limit %.2f), NC %.4f, %.0f s", l2cd, kTorusL2cd, fs01,
              kTorusFscore, report.at("nc").get<double>(), run.seconds)};
}

Outcome part_consistency() {
  const auto dumbbell = make_dumbbell(0.2, 0.3);
  auto [cloud, norm] = normalize(sample_cloud(*dumbbell, 4000, 1));
  // Start FPS at the +x outer pole so the second center lands on the other lobe's outer pole.
  std::size_t pole = 0;
  for (std::size_t i = 1; i < cloud.size(); ++i) {
    if (cloud.points[i].x() > cloud.points[pole].x()) pole = i;
  }
  const RegionCenters centers = farthest_point_sample(cloud, 2, pole);
  const double cx0 = norm.invert(centers.centers[0]).x(), cx1 = norm.invert(centers.centers[1]).x();
  if ((cx0 > 0) == (cx1 > 0)) return {false, "FPS did not put one center on each lobe"};

  const Checkpoint init = initialize_checkpoint(cloud, norm, centers, desk_model(AffinityMode::Euclidean), 0);
  const Checkpoint ck = train(init, desk_training(LossMode::Pulling)).checkpoint;

  std::string detail;
  bool pass = true;
  for (OutsideFill fill : {OutsideFill::ConstantOffset, OutsideFill::UnseenCode}) {
    const PartExtractor ex(ck, 64, fill);
    std::vector<TriangleMesh> parts;
    std::vector<double> l2;
    for (std::size_t i = 0; i < 2; ++i) {
      try {
        parts.push_back(ex.extract(i));
      } catch (const EmptyMesh&) {
        parts.emplace_back();
        l2.push_back(std::numeric_limits<double>::infinity());
        continue;
      }
      const double cx = norm.invert(ck.centers.centers[i]).x();
      const auto lobe = make_sphere(0.2, Vec3(cx > 0 ? 0.3 : -0.3, 0, 0));
      l2.push_back(chamfer(sample_mesh(denormalized(parts.back(), norm), 10000, 5), lobe->sample(10000, 7), 2));
    }
    const double gap = coverage_gap(ex.global_mesh(), parts);
    const double h = ex.global_grid().cell_diagonal();
    if (fill == OutsideFill::ConstantOffset) {
      pass = l2[0] < kPartL2cd && l2[1] < kPartL2cd && gap <= 2 * h;
      detail += fmt("part L2CD %.3g / %.3g (limit %.0e), coverage gap %.4f (2h %.4f)", l2[0], l2[1], kPartL2cd, gap,
                    2 * h);
    } else {
      detail += fmt("; unseen-code fill (info): part L2CD %.3g / %.3g", l2[0], l2[1]);
    }
  }
  return {pass, detail};
}

double mean_final_loss(const PointCloud& cloud, const Normalization& norm, const RegionCenters& centers,
                       AffinityMode mode) {
  const Checkpoint init = initialize_checkpoint(cloud, norm, centers, desk_model(mode), 0);
  const TrainResult r = train(init, desk_training(LossMode::Pulling));
  // Batch losses are noisy; the final loss is the mean over the last 100 steps.
  return std::accumulate(r.losses.end() - 100, r.losses.end(), 0.0) / 100.0;
}

Outcome ablation_ordering() {
  const auto dumbbell = make_dumbbell(0.2, 0.3);
  auto [dcloud, dnorm] = normalize(sample_cloud(*dumbbell, 4000, 1));
  const RegionCenters dcenters = farthest_point_sample(dcloud, 16, 0);
  const double euclid = mean_final_loss(dcloud, dnorm, dcenters, AffinityMode::Euclidean);
  const double nearest = mean_final_loss(dcloud, dnorm, dcenters, AffinityMode::Nearest);

  const auto bent = make_bent_cylinder();
  auto [bcloud, bnorm] = normalize(sample_cloud(*bent, 4000, 1));
  const RegionCenters bcenters = farthest_point_sample(bcloud, 16, 0);
  const double b_euclid = mean_final_loss(bcloud, bnorm, bcenters, AffinityMode::Euclidean);
  const double b_intrinsic = mean_final_loss(bcloud, bnorm, bcenters, AffinityMode::Intrinsic);

  const bool first = euclid <= nearest;
  const bool second = b_intrinsic <= b_euclid;
  return {first && second, fmt("dumbbell euclidean %.6f vs nearest %.6f (%s); bent cylinder intrinsic %.6f vs "
                               "euclidean %.6f (%s)",
                               euclid, nearest, first ? "ok" : "wrong order", b_intrinsic, b_euclid,
                               second ? "ok" : "wrong order")};
}

Outcome multi_level() {
  const PipelineRun& run = torus_run_a();
  if (run.code != 0) return {false, fmt("torus pipeline failed with exit code %d", run.code)};
  const Checkpoint ck = load_checkpoint(run.checkpoint);
  const std::size_t resolution = 64;
  const TriangleMesh reference = marching_cubes(evaluate_grid(ck, resolution));
  const PartExtractor ex(ck, resolution);
  const double h = ex.global_grid().cell_diagonal();
  bool pass = true;
  std::string detail;
  for (std::size_t level : {2u, 4u, 8u, 16u}) {
    const MeshBundle b = relevel(ck, ex, level);
    const bool same = b.global == reference;
    const double gap = coverage_gap(b.global, b.parts);
    pass = pass && same && b.parts.size() == level && gap <= 2 * h;
    detail += fmt("%sI'=%zu: %zu parts, global %s, gap %.4f", detail.empty() ? "" : "; ", level, b.parts.size(),
                  same ? "identical" : "DIFFERS", gap);
  }
  return {pass, detail + fmt(" (2h %.4f)", 2 * h)};
}

SampledSurface random_surface(std::size_t n, std::uint64_t seed) {
  SampledSurface s;
  s.points = oracle::random_points(n, seed);
  std::mt19937_64 rng(seed + 1000);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < n; ++i) s.normals.push_back(Vec3(g(rng), g(rng), g(rng)).normalized());
  return s;
}

Outcome metric_oracles() {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const SampledSurface a = random_surface(150 + 7 * k, 2 * k + 1);
    const SampledSurface b = random_surface(200 - 3 * k, 2 * k + 2);
    worst = std::max(worst, rel_error(chamfer(a, b, 2), oracle::chamfer(a.points, b.points, 2)));
    worst = std::max(worst, rel_error(chamfer(a, b, 1), oracle::chamfer(a.points, b.points, 1)));
    worst = std::max(worst, rel_error(f_score(a, b, 0.1), oracle::f_score(a.points, b.points, 0.1)));
    worst = std::max(worst, rel_error(normal_consistency(a, b), oracle::normal_consistency(a, b)));
  }

  const Box box{Vec3::Constant(-0.5), Vec3::Constant(0.5)};
  const TriangleMesh big = marching_cubes(sample_grid(64, box, [](const Vec3& p) { return p.norm() - 0.3; }));
  const TriangleMesh small = marching_cubes(sample_grid(64, box, [](const Vec3& p) { return p.norm() - 0.2; }));
  const double iou = volumetric_iou(small, big, 64);
  const double iou_expected = std::pow(0.2 / 0.3, 3);

  PointCloud labeled;
  labeled.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  labeled.segment_labels = {0, 1, 2, 3};
  const AffinityVector sem = semantic_affinity(Vec3(0.05, 0, 0), labeled, SpatialIndex(labeled.points), 4, 0.8);
  const Eigen::Vector4d sem_expected(0.8, 0.2 / 3, 0.2 / 3, 0.2 / 3);
  const double sem_err = (sem - sem_expected).cwiseAbs().maxCoeff();

  const bool pass = worst <= kOracleTolerance && std::abs(iou - iou_expected) < kIouTolerance && sem_err < 1e-12;
  return {pass, fmt("max relative deviation %.2g over 20 pairs (limit %.0e); IoU %.4f vs %.4f (limit %.2f); semantic "
                    "[%.4f %.4f %.4f %.4f]",
                    worst, kOracleTolerance, iou, iou_expected, kIouTolerance, sem[0], sem[1], sem[2], sem[3])};
}

Outcome geometry_oracles() {
  std::size_t fps_mismatch = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto p = oracle::random_points(50, 300 + s);
    if (farthest_point_sample(p, 8, s + 1).source_indices != oracle::fps(p, 8, (s + 1) % 50)) ++fps_mismatch;
  }

  double dijkstra = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto p = oracle::random_points(30, 400 + s);
    const KnnGraph g = build_knn_graph(p, 6);
    const auto ref = oracle::floyd_warshall(g);
    for (std::size_t src = 0; src < 30; ++src) {
      const auto d = shortest_paths(g, src);
      for (std::size_t j = 0; j < 30; ++j) {
        if (std::isinf(ref[src][j]) != std::isinf(d[j])) dijkstra = std::numeric_limits<double>::infinity();
        else if (!std::isinf(d[j])) dijkstra = std::max(dijkstra, std::abs(d[j] - ref[src][j]));
      }
    }
  }

  const auto cloud = oracle::random_points(500, 7);
  const auto queries = oracle::random_points(1000, 8, 1.5);
  const SpatialIndex index(cloud);
  std::size_t kd_mismatch = 0;
  for (const Vec3& q : queries) {
    const auto nn = index.nearest(q);
    const auto ref = oracle::nearest(cloud, q);
    if (nn.index != ref.first || nn.distance != ref.second) ++kd_mismatch;
  }
  return {fps_mismatch == 0 && dijkstra <= kOracleTolerance && kd_mismatch == 0,
          fmt("FPS mismatches %zu/10, Dijkstra max deviation %.2g, k-d tree mismatches %zu/1000", fps_mismatch,
              dijkstra, kd_mismatch)};
}

Outcome determinism() {
  const PipelineRun& a = torus_run_a();
  const PipelineRun b = torus_pipeline(work_root() / "torus_b");
  if (a.code != 0 || b.code != 0) return {false, "torus pipeline failed"};
  const bool ck = slurp(a.checkpoint) == slurp(b.checkpoint);
  const bool obj = slurp(a.mesh) == slurp(b.mesh);
  const bool report = slurp(a.report) == slurp(b.report);
  return {ck && obj && report, fmt("checkpoint %s, OBJ %s, eval JSON %s", ck ? "identical" : "DIFFERS",
                                   obj ? "identical" : "DIFFERS", report ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"double-backprop gradient", double_backprop}},
      {2, {"supervised sphere fit", sphere_fit}},
      {3, {"unsupervised torus reconstruction", torus_reconstruction}},
      {4, {"part consistency", part_consistency}},
      {5, {"ablation ordering", ablation_ordering}},
      {6, {"multi-level extraction", multi_level}},
      {7, {"metric oracles", metric_oracles}},
      {8, {"geometry oracles", geometry_oracles}},
      {9, {"determinism", determinism}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [n, c] : criteria) selected.insert(n);
  }

  int failed = 0;
  for (int n : selected) {
    const auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::cout << "criterion " << n << ": FAIL unknown criterion\n";
      ++failed;
      continue;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << n << " (" << it->second.first << "): " << (o.pass ? "PASS" : "FAIL") << " - "
              << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  fs::remove_all(work_root());
  return failed;
}
