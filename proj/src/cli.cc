#include "uavgeo/cli.h"

#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "uavgeo/alignment.h"
#include "uavgeo/depth_render.h"
#include "uavgeo/error.h"
#include "uavgeo/flight.h"
#include "uavgeo/harness.h"
#include "uavgeo/io.h"
#include "uavgeo/metrics.h"

namespace uavgeo {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Values shared by subcommands. Precedence: command line, config file,
// built-in default.
struct Settings {
  uint64_t seed = 0;
  int threads = 1;
  std::optional<double> voxel;
  std::vector<int> view_counts = {8, 16, 24, 32};
  std::optional<int> samples_per_count;
  SamplingMode sampling = SamplingMode::kContiguous;
  SceneAlignmentParams alignment;
  DistanceMetric chamfer_neighbor = DistanceMetric::kL1;
  int pixel_stride = 1;
  OutlierFilterParams filter;
  int splat_radius = 1;
};

void CheckKeys(const json& j, const std::set<std::string>& allowed,
               const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ValidationError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

SamplingMode ParseSampling(const std::string& s) {
  if (s == "contiguous") return SamplingMode::kContiguous;
  if (s == "uniform") return SamplingMode::kUniform;
  throw ValidationError("sampling must be 'contiguous' or 'uniform'");
}

DistanceMetric ParseNeighbor(const std::string& s) {
  if (s == "l1") return DistanceMetric::kL1;
  if (s == "l2") return DistanceMetric::kL2;
  throw ValidationError("chamfer_neighbor must be 'l1' or 'l2'");
}

void ReadIcpConfig(const json& j, IcpParams* icp) {
  CheckKeys(j, {"mode", "max_iterations", "convergence_rel_tol",
                "trim_fraction", "max_correspondence_dist"},
            "config icp");
  if (j.contains("mode")) {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "rigid") {
      icp->mode = IcpMode::kRigid;
    } else if (mode == "similarity") {
      icp->mode = IcpMode::kSimilarity;
    } else {
      throw ValidationError("icp mode must be 'rigid' or 'similarity'");
    }
  }
  if (j.contains("max_iterations")) {
    icp->max_iterations = j.at("max_iterations").get<int>();
  }
  if (j.contains("convergence_rel_tol")) {
    icp->convergence_rel_tol = j.at("convergence_rel_tol").get<double>();
  }
  if (j.contains("trim_fraction")) {
    icp->trim_fraction = j.at("trim_fraction").get<double>();
  }
  if (j.contains("max_correspondence_dist") &&
      !j.at("max_correspondence_dist").is_null()) {
    icp->max_correspondence_dist =
        j.at("max_correspondence_dist").get<double>();
  }
}

void LoadConfig(const fs::path& path, Settings* s) {
  json j;
  try {
    j = json::parse(ReadFileBytes(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    CheckKeys(j,
              {"seed", "threads", "voxel", "view_counts", "samples_per_count",
               "sampling", "alignment", "icp", "chamfer_neighbor",
               "pixel_stride", "outlier_filter", "splat_radius"},
              "config");
    if (j.contains("seed")) s->seed = j.at("seed").get<uint64_t>();
    if (j.contains("threads")) s->threads = j.at("threads").get<int>();
    if (j.contains("voxel")) s->voxel = j.at("voxel").get<double>();
    if (j.contains("view_counts")) {
      s->view_counts = j.at("view_counts").get<std::vector<int>>();
    }
    if (j.contains("samples_per_count")) {
      s->samples_per_count = j.at("samples_per_count").get<int>();
    }
    if (j.contains("sampling")) {
      s->sampling = ParseSampling(j.at("sampling").get<std::string>());
    }
    if (j.contains("alignment")) {
      const json& a = j.at("alignment");
      CheckKeys(a, {"trim_fraction", "trim_rounds"}, "config alignment");
      if (a.contains("trim_fraction")) {
        s->alignment.trim_fraction = a.at("trim_fraction").get<double>();
      }
      if (a.contains("trim_rounds")) {
        s->alignment.trim_rounds = a.at("trim_rounds").get<int>();
      }
    }
    if (j.contains("icp")) ReadIcpConfig(j.at("icp"), &s->alignment.icp);
    if (j.contains("chamfer_neighbor")) {
      s->chamfer_neighbor =
          ParseNeighbor(j.at("chamfer_neighbor").get<std::string>());
    }
    if (j.contains("pixel_stride")) {
      s->pixel_stride = j.at("pixel_stride").get<int>();
    }
    if (j.contains("outlier_filter")) {
      const json& f = j.at("outlier_filter");
      CheckKeys(f, {"rel_tol", "abs_tol"}, "config outlier_filter");
      if (f.contains("rel_tol")) s->filter.rel_tol = f.at("rel_tol").get<double>();
      if (f.contains("abs_tol")) s->filter.abs_tol = f.at("abs_tol").get<double>();
    }
    if (j.contains("splat_radius")) {
      s->splat_radius = j.at("splat_radius").get<int>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

json SettingsJson(const Settings& s) {
  const IcpParams& icp = s.alignment.icp;
  json j;
  j["seed"] = s.seed;
  j["threads"] = s.threads;
  j["view_counts"] = s.view_counts;
  if (s.samples_per_count) j["samples_per_count"] = *s.samples_per_count;
  j["sampling"] =
      s.sampling == SamplingMode::kContiguous ? "contiguous" : "uniform";
  j["alignment"] = {{"trim_fraction", s.alignment.trim_fraction},
                    {"trim_rounds", s.alignment.trim_rounds}};
  j["icp"] = {{"mode", icp.mode == IcpMode::kRigid ? "rigid" : "similarity"},
              {"max_iterations", icp.max_iterations},
              {"convergence_rel_tol", icp.convergence_rel_tol},
              {"trim_fraction", icp.trim_fraction}};
  j["icp"]["max_correspondence_dist"] =
      icp.max_correspondence_dist ? json(*icp.max_correspondence_dist)
                                  : json(nullptr);
  j["chamfer_neighbor"] =
      s.chamfer_neighbor == DistanceMetric::kL1 ? "l1" : "l2";
  j["pixel_stride"] = s.pixel_stride;
  if (s.voxel) j["voxel"] = *s.voxel;
  return j;
}

json TransformJson(const Sim3Transform& t) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({t.Rotation()(r, 0), t.Rotation()(r, 1), t.Rotation()(r, 2)});
  }
  return {{"scale", t.Scale()},
          {"rotation", rot},
          {"translation",
           {t.Translation().x(), t.Translation().y(), t.Translation().z()}}};
}

Sim3Transform ReadTransform(const fs::path& path) {
  try {
    const json j = json::parse(ReadFileBytes(path));
    const json& t = j.contains("transform") ? j.at("transform") : j;
    Eigen::Matrix3d r;
    const auto rows = t.at("rotation").get<std::vector<std::vector<double>>>();
    if (rows.size() != 3) throw ValidationError("rotation must be 3x3");
    for (int i = 0; i < 3; ++i) {
      if (rows[i].size() != 3) throw ValidationError("rotation must be 3x3");
      for (int k = 0; k < 3; ++k) r(i, k) = rows[i][k];
    }
    const auto tr = t.at("translation").get<std::vector<double>>();
    if (tr.size() != 3) throw ValidationError("translation must have 3 values");
    return Sim3Transform(t.at("scale").get<double>(), r,
                         Eigen::Vector3d(tr[0], tr[1], tr[2]));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

json AlignmentJson(const AlignmentResult& r) {
  json j;
  j["transform"] = TransformJson(r.transform);
  j["rms_residual"] = r.rms_residual;
  j["inlier_count"] = r.inlier_count;
  j["iterations"] = r.iterations_used;
  j["residual_trace"] = r.residual_trace;
  return j;
}

void WriteJson(const fs::path& path, const json& j) {
  WriteFileBytes(path, j.dump(2) + "\n");
}

PointCloud Transformed(const PointCloud& cloud,
                       const std::optional<Sim3Transform>& t) {
  return t ? ApplySim3(*t, cloud) : cloud;
}

// Plan metadata sidecar, written next to the camera file.
json PlanJson(const FlightPlan& plan, const std::string& camera_file) {
  json views = json::array();
  for (const PlannedView& v : plan.views) {
    views.push_back({{"image_id", v.image_id},
                     {"tag", ViewTagName(v.tag)},
                     {"line", v.line},
                     {"station", v.station}});
  }
  return {{"cameras", camera_file},
          {"hfov_deg", plan.hfov},
          {"altitude_m", plan.altitude},
          {"tilt_deg", plan.tilt},
          {"forward_overlap", plan.forward_overlap},
          {"side_overlap", plan.side_overlap},
          {"footprint_across_m", plan.footprint_across},
          {"footprint_along_m", plan.footprint_along},
          {"line_spacing_m", plan.line_spacing},
          {"station_spacing_m", plan.station_spacing},
          {"num_lines", plan.num_lines},
          {"stations_per_line", plan.stations_per_line},
          {"clamped", plan.clamped},
          {"views", views}};
}

void WritePlan(const FlightPlan& plan, const fs::path& camera_path) {
  std::vector<CameraRecord> records;
  records.reserve(plan.views.size());
  for (const PlannedView& v : plan.views) {
    records.push_back(CameraRecord::FromPose(v.image_id, v.camera, v.pose));
  }
  WriteCameras(camera_path, records);
  fs::path meta = camera_path;
  meta += ".plan.json";
  WriteJson(meta, PlanJson(plan, camera_path.filename().string()));
}

std::string PlanSummary(const FlightPlan& plan) {
  return "hfov " + FormatDouble(plan.hfov) + " deg, altitude " +
         FormatDouble(plan.altitude) + " m, " +
         std::to_string(plan.views.size()) + " views, " +
         std::to_string(plan.num_lines) + " lines x " +
         std::to_string(plan.stations_per_line) + " stations" +
         (plan.clamped ? " (clamped)" : "");
}

// Final-row mean over datasets for every (model, input mode, view tag, hfov).
BenchmarkTable AcrossDatasets(const BenchmarkTable& table,
                              const std::string& label) {
  std::map<std::string, std::vector<BenchmarkRow>> groups;
  std::vector<std::string> order;
  for (const BenchmarkRow& r : table.Rows()) {
    if (r.level != "final") continue;
    BenchmarkRow key = r;
    key.dataset = label;
    const std::string k = key.Key();
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(r);
  }
  BenchmarkTable out;
  for (const std::string& k : order) {
    const std::vector<BenchmarkRow>& rows = groups.at(k);
    BenchmarkRow mean = rows.front();
    mean.dataset = label;
    for (const MetricColumn& c : MetricColumns()) {
      std::vector<double> v;
      for (const BenchmarkRow& r : rows) v.push_back(r.*c.field);
      mean.*c.field = OrderInvariantMean(std::move(v));
    }
    out.Add(std::move(mean));
  }
  return out;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Geometry evaluation and synthetic acquisition toolkit",
               "uavgeo"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> voxel;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "Sampling seed");
  app.add_option("--threads", threads, "Worker threads");
  app.add_option("--voxel", voxel, "Voxel size in meters for Chamfer");

  // eval
  auto* eval = app.add_subcommand("eval", "Benchmark predictions on a scene");
  std::string eval_manifest;
  std::string eval_predictions;
  std::string eval_out;
  std::string eval_plot;
  std::vector<int> eval_counts;
  std::optional<int> eval_samples;
  std::string eval_sampling;
  eval->add_option("--manifest", eval_manifest, "Scene manifest")->required();
  eval->add_option("--predictions", eval_predictions, "Prediction manifest")
      ->required();
  eval->add_option("--out", eval_out, "Table CSV")->required();
  eval->add_option("--plot-data", eval_plot, "Per-HFOV series CSV");
  eval->add_option("--view-counts", eval_counts, "e.g. 8,16,24,32")
      ->delimiter(',');
  eval->add_option("--samples", eval_samples, "Sampled sets per view count");
  eval->add_option("--sampling", eval_sampling, "contiguous | uniform");

  // align
  auto* align = app.add_subcommand("align", "Similarity ICP between clouds");
  std::string align_src;
  std::string align_dst;
  std::string align_init;
  std::string align_out;
  std::string align_aligned;
  bool align_rigid = false;
  align->add_option("--src", align_src, "Source PLY")->required();
  align->add_option("--dst", align_dst, "Target PLY")->required();
  align->add_option("--init", align_init, "Initial transform JSON");
  align->add_option("--out", align_out, "Result JSON")->required();
  align->add_option("--aligned", align_aligned, "Transformed source PLY");
  align->add_flag("--rigid", align_rigid, "Keep the initial scale");

  // register
  auto* reg = app.add_subcommand("register", "Register LiDAR onto SfM");
  std::string reg_lidar;
  std::string reg_sfm;
  std::string reg_init;
  std::string reg_out;
  std::string reg_aligned;
  reg->add_option("--lidar", reg_lidar, "LiDAR PLY")->required();
  reg->add_option("--sfm", reg_sfm, "SfM PLY")->required();
  reg->add_option("--init", reg_init, "Initial transform JSON");
  reg->add_option("--out", reg_out, "Result JSON")->required();
  reg->add_option("--aligned", reg_aligned, "Registered LiDAR PLY");

  // render-depth
  auto* render = app.add_subcommand("render-depth", "Render reference depth");
  std::string render_cameras;
  std::string render_cloud;
  std::string render_mesh;
  std::string render_transform;
  std::string render_dir;
  std::optional<int> render_splat;
  render->add_option("--cameras", render_cameras, "Camera file")->required();
  render->add_option("--cloud", render_cloud, "Point cloud PLY");
  render->add_option("--mesh", render_mesh,
                     "Mesh PLY; filters the cloud depth, or is rendered alone");
  render->add_option("--transform", render_transform,
                     "Transform JSON applied to cloud and mesh");
  render->add_option("--out-dir", render_dir, "Output directory")->required();
  render->add_option("--splat", render_splat, "Point splat radius in pixels");

  // gen-flight
  auto* flight = app.add_subcommand("gen-flight", "Plan UAV acquisitions");
  flight->require_subcommand(1);
  RegionSpec region;
  double fo = 0.9;
  double so = 0.8;
  ImageSize image;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--x-extent", region.x_extent, "Region size along x (m)")
        ->required();
    cmd->add_option("--y-extent", region.y_extent, "Region size along y (m)")
        ->required();
    cmd->add_option("--ground", region.ground_elevation, "Ground z (m)");
    cmd->add_option("--forward-overlap", fo, "Forward overlap fraction");
    cmd->add_option("--side-overlap", so, "Side overlap fraction");
    cmd->add_option("--width", image.width, "Image width (px)");
    cmd->add_option("--height", image.height, "Image height (px)");
  };
  double altitude = 0.0;
  double hfov = 0.0;
  double tilt = 45.0;
  std::string plan_out;
  auto* nadir = flight->add_subcommand("nadir", "Serpentine nadir grid");
  add_common(nadir);
  nadir->add_option("--altitude", altitude, "Meters above ground")->required();
  nadir->add_option("--hfov", hfov, "Degrees")->required();
  nadir->add_option("--out", plan_out, "Camera file")->required();
  auto* oblique = flight->add_subcommand("oblique", "Five-view oblique rig");
  add_common(oblique);
  oblique->add_option("--altitude", altitude, "Meters above ground")
      ->required();
  oblique->add_option("--hfov", hfov, "Degrees")->required();
  oblique->add_option("--tilt", tilt, "Degrees from nadir");
  oblique->add_option("--out", plan_out, "Camera file")->required();
  auto* fa = flight->add_subcommand("fa", "Matched-footprint HFOV groups");
  add_common(fa);
  std::vector<double> fa_hfovs = {25, 35, 45, 55, 65, 75, 85, 95};
  double fa_footprint = 0.0;
  AltitudeLimits limits;
  bool fa_clamp = false;
  std::string fa_dir;
  fa->add_option("--hfovs", fa_hfovs, "Degrees, comma separated")
      ->delimiter(',');
  fa->add_option("--footprint", fa_footprint, "Target across-track width (m)")
      ->required();
  fa->add_option("--min-altitude", limits.min, "Meters");
  fa->add_option("--max-altitude", limits.max, "Meters");
  fa->add_flag("--clamp", fa_clamp, "Clamp out-of-range altitudes");
  fa->add_option("--out-dir", fa_dir, "Output directory")->required();

  // aggregate
  auto* aggregate = app.add_subcommand("aggregate", "Merge benchmark tables");
  std::vector<std::string> agg_inputs;
  std::string agg_out;
  std::string agg_mean_label;
  aggregate->add_option("--inputs", agg_inputs, "Table CSVs")->required();
  aggregate->add_option("--out", agg_out, "Merged CSV")->required();
  aggregate->add_option("--mean-dataset", agg_mean_label,
                        "Also add final rows averaged over datasets under "
                        "this dataset name");

  // report
  auto* report = app.add_subcommand("report", "Emit report files");
  std::string rep_table;
  std::string rep_format = "csv";
  std::string rep_out;
  std::string rep_pre;
  std::string rep_post;
  report->add_option("--table", rep_table, "Table CSV")->required();
  report->add_option("--format", rep_format,
                     "csv | plot-data | reduction | oblique-gap");
  report->add_option("--out", rep_out, "Output path")->required();
  report->add_option("--pre", rep_pre, "Baseline model for reduction");
  report->add_option("--post", rep_post, "Compared model for reduction");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    Settings s;
    if (!config_path.empty()) LoadConfig(config_path, &s);
    if (seed) s.seed = *seed;
    if (threads) s.threads = *threads;
    if (voxel) s.voxel = *voxel;
    if (s.threads < 1) throw ValidationError("--threads must be at least 1");
    if (s.voxel && !(*s.voxel > 0.0)) {
      throw ValidationError("--voxel must be positive");
    }

    if (*eval) {
      if (!eval_counts.empty()) s.view_counts = eval_counts;
      if (eval_samples) s.samples_per_count = *eval_samples;
      if (!eval_sampling.empty()) s.sampling = ParseSampling(eval_sampling);
      if (!s.samples_per_count) {
        throw ValidationError(
            "samples per view count must be given (--samples or config)");
      }
      AggregationSpec spec;
      spec.view_counts = s.view_counts;
      spec.samples_per_count = *s.samples_per_count;
      spec.seed = s.seed;
      spec.sampling = s.sampling;
      spec.Validate();
      EvalOptions options;
      options.alignment = s.alignment;
      options.chamfer_neighbor = s.chamfer_neighbor;
      options.pixel_stride = s.pixel_stride;

      GroundTruthScene scene = LoadScene(ReadManifest(eval_manifest));
      if (s.voxel) scene.voxel_size = *s.voxel;
      const PredictionSet preds =
          LoadPredictions(ReadPredictionManifest(eval_predictions));
      const BenchmarkTable table =
          RunEval(scene, preds, spec, options, s.threads);
      EmitReport(table, ReportFormat::kCsv, eval_out);
      if (!eval_plot.empty()) {
        EmitReport(table, ReportFormat::kPlotData, eval_plot);
      }
      json params = SettingsJson(s);
      params["voxel"] = scene.voxel_size;
      params["scene_id"] = scene.scene_id;
      params["model"] = preds.model;
      WriteJson(eval_out + ".params.json", params);
      for (const BenchmarkRow& r : table.Rows()) {
        if (r.level != "final") continue;
        out << r.dataset << " " << r.view_tag << ": absrel "
            << FormatDouble(r.absrel) << ", ray " << FormatDouble(r.ray_error)
            << " deg, chamfer " << FormatDouble(r.chamfer) << " m, ATE-S "
            << FormatDouble(r.ate_shared) << " m, ATE-I "
            << FormatDouble(r.ate_independent) << " m, gap "
            << FormatDouble(r.ate_gap) << " m, rot "
            << FormatDouble(r.rotation_mae) << " deg\n";
      }
    } else if (*align) {
      IcpParams icp = s.alignment.icp;
      if (align_rigid) icp.mode = IcpMode::kRigid;
      const PointCloud src = ReadPointCloud(align_src);
      const PointCloud dst = ReadPointCloud(align_dst);
      const Sim3Transform init = align_init.empty()
                                     ? Sim3Transform::Identity()
                                     : ReadTransform(align_init);
      const AlignmentResult r = Icp(src, dst, init, icp);
      json j = AlignmentJson(r);
      j["params"] = SettingsJson(s)["icp"];
      if (align_rigid) j["params"]["mode"] = "rigid";
      WriteJson(align_out, j);
      if (!align_aligned.empty()) {
        WritePointCloud(align_aligned, ApplySim3(r.transform, src));
      }
      out << "rms " << FormatDouble(r.rms_residual) << " after "
          << r.iterations_used << " iterations\n";
    } else if (*reg) {
      const PointCloud lidar = ReadPointCloud(reg_lidar);
      const PointCloud sfm = ReadPointCloud(reg_sfm);
      std::optional<Sim3Transform> init;
      if (!reg_init.empty()) init = ReadTransform(reg_init);
      const AlignmentResult r =
          RegisterLidarToSfm(lidar, sfm, init, s.alignment.icp);
      WriteJson(reg_out, AlignmentJson(r));
      if (!reg_aligned.empty()) {
        WritePointCloud(reg_aligned, ApplySim3(r.transform, lidar));
      }
      out << "rms " << FormatDouble(r.rms_residual) << " after "
          << r.iterations_used << " iterations\n";
    } else if (*render) {
      if (render_cloud.empty() && render_mesh.empty()) {
        throw ValidationError("render-depth needs --cloud and/or --mesh");
      }
      if (render_splat) s.splat_radius = *render_splat;
      std::optional<Sim3Transform> t;
      if (!render_transform.empty()) t = ReadTransform(render_transform);
      std::optional<PointCloud> cloud;
      std::optional<TriangleMesh> mesh;
      if (!render_cloud.empty()) {
        cloud = Transformed(ReadPointCloud(render_cloud), t);
      }
      if (!render_mesh.empty()) {
        mesh = ReadMesh(render_mesh);
        mesh->vertices = Transformed(mesh->vertices, t);
      }
      const std::vector<CameraRecord> cams = ReadCameras(render_cameras);
      std::error_code ec;
      fs::create_directories(render_dir, ec);
      if (ec) throw IoError("cannot create " + render_dir);
      size_t total_valid = 0;
      for (const CameraRecord& c : cams) {
        const ViewPose pose = c.Pose();
        RenderedDepth d;
        if (cloud) {
          d = RenderPointDepth(*cloud, c.camera, pose, s.splat_radius);
          if (mesh) {
            d = FilterDepthOutliers(
                d, RasterizeMeshDepth(*mesh, c.camera, pose), s.filter);
          }
        } else {
          d = RasterizeMeshDepth(*mesh, c.camera, pose);
        }
        d.depth.camera_id = c.image_id;
        WriteDepth(fs::path(render_dir) / (c.image_id + ".pfm"), d.depth);
        WriteMask(fs::path(render_dir) / (c.image_id + ".pgm"), d.mask);
        total_valid += d.mask.CountValid();
      }
      out << "rendered " << cams.size() << " views, " << total_valid
          << " valid pixels\n";
    } else if (*flight) {
      if (*nadir || *oblique) {
        const FlightPlan plan =
            *nadir ? PlanNadirGrid(region, altitude, hfov, fo, so, image)
                   : PlanObliqueRig(region, altitude, hfov, tilt, fo, so,
                                    image);
        WritePlan(plan, plan_out);
        out << PlanSummary(plan) << "\n";
      } else {
        const std::vector<FlightPlan> plans = GenFaGroups(
            region, fa_hfovs, fa_footprint, limits, fo, so, image, fa_clamp);
        std::error_code ec;
        fs::create_directories(fa_dir, ec);
        if (ec) throw IoError("cannot create " + fa_dir);
        json groups = json::array();
        for (const FlightPlan& plan : plans) {
          char name[64];
          std::snprintf(name, sizeof(name), "fa_hfov%06.2f.txt", plan.hfov);
          WritePlan(plan, fs::path(fa_dir) / name);
          groups.push_back({{"hfov_deg", plan.hfov},
                            {"altitude_m", plan.altitude},
                            {"footprint_m", plan.footprint_across},
                            {"cameras", name},
                            {"clamped", plan.clamped}});
          out << PlanSummary(plan) << "\n";
        }
        WriteJson(fs::path(fa_dir) / "fa_groups.json",
                  {{"target_footprint_m", fa_footprint}, {"groups", groups}});
      }
    } else if (*aggregate) {
      BenchmarkTable merged;
      for (const std::string& in : agg_inputs) {
        merged.Merge(TableFromCsv(ReadFileBytes(in), in));
      }
      if (!agg_mean_label.empty()) {
        merged.Merge(AcrossDatasets(merged, agg_mean_label));
      }
      EmitReport(merged, ReportFormat::kCsv, agg_out);
      out << merged.Rows().size() << " rows\n";
    } else if (*report) {
      const BenchmarkTable table =
          TableFromCsv(ReadFileBytes(rep_table), rep_table);
      if (rep_format == "csv") {
        EmitReport(table, ReportFormat::kCsv, rep_out);
      } else if (rep_format == "plot-data") {
        EmitReport(table, ReportFormat::kPlotData, rep_out);
      } else if (rep_format == "reduction") {
        if (rep_pre.empty() || rep_post.empty()) {
          throw ValidationError("reduction needs --pre and --post models");
        }
        WriteFileBytes(rep_out, ReductionCsv(table, rep_pre, rep_post));
      } else if (rep_format == "oblique-gap") {
        WriteFileBytes(rep_out, ObliqueNadirCsv(table));
      } else {
        throw ValidationError("unknown report format '" + rep_format + "'");
      }
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace uavgeo
