#include "uavgeo/harness.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "uavgeo/error.h"

namespace uavgeo {
namespace {

const char* kCsvHeader =
    "model,input_mode,dataset,view_tag,level,hfov_deg,absrel,ray_error_deg,"
    "chamfer_l1_m,ate_shared_m,ate_independent_m,ate_gap_m,rotation_mae_deg";

constexpr size_t kKeyColumns = 6;

std::string HfovText(const std::optional<double>& hfov) {
  return hfov ? FormatDouble(*hfov) : std::string();
}

std::string CountLevel(int count) { return "n" + std::to_string(count); }

std::string SetLevel(int count, int sample) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "n%d/s%03d", count, sample);
  return buf;
}

void CheckCsvField(const std::string& s, const char* what) {
  if (s.find_first_of(",\"\r\n") != std::string::npos) {
    throw ValidationError(std::string(what) + " '" + s +
                          "' contains a CSV delimiter");
  }
}

std::vector<std::string> SplitComma(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double ParseCsvDouble(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(where + ": '" + s + "' is not a number");
  }
  return v;
}

using RowGroupKey = std::tuple<std::string, std::string, std::string,
                               std::string, std::string>;

std::vector<const BenchmarkRow*> FinalRows(const BenchmarkTable& table) {
  std::vector<const BenchmarkRow*> out;
  for (const BenchmarkRow& r : table.Rows()) {
    if (r.level == "final") out.push_back(&r);
  }
  return out;
}

BenchmarkRow MeanRow(const std::vector<BenchmarkRow>& rows, BenchmarkRow base) {
  for (const MetricColumn& c : MetricColumns()) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const BenchmarkRow& r : rows) values.push_back(r.*c.field);
    base.*c.field = OrderInvariantMean(std::move(values));
  }
  return base;
}

}  // namespace

void AggregationSpec::Validate() const {
  if (view_counts.empty()) {
    throw ValidationError("view_counts must not be empty");
  }
  for (int n : view_counts) {
    if (n < 2) throw ValidationError("every view count must be at least 2");
  }
  std::set<int> unique(view_counts.begin(), view_counts.end());
  if (unique.size() != view_counts.size()) {
    throw ValidationError("view_counts contains duplicates");
  }
  if (samples_per_count < 1) {
    throw ValidationError("samples_per_count must be set to at least 1");
  }
}

GroundTruthScene LoadScene(const SceneManifest& manifest) {
  GroundTruthScene scene;
  scene.scene_id = manifest.scene_id;
  scene.dataset = manifest.dataset.empty() ? manifest.scene_id
                                           : manifest.dataset;
  scene.voxel_size = manifest.metadata.voxel_size;
  scene.hfov = manifest.metadata.hfov;

  std::map<std::string, std::map<std::string, CameraRecord>> camera_files;
  for (const ManifestView& mv : manifest.views) {
    const std::string cam_path = manifest.Resolve(mv.camera_file).string();
    auto it = camera_files.find(cam_path);
    if (it == camera_files.end()) {
      std::map<std::string, CameraRecord> by_id;
      for (CameraRecord& r : ReadCameras(cam_path)) {
        by_id.emplace(r.image_id, std::move(r));
      }
      it = camera_files.emplace(cam_path, std::move(by_id)).first;
    }
    const auto rec = it->second.find(mv.image_id);
    if (rec == it->second.end()) {
      throw ValidationError(cam_path + ": no camera for image " + mv.image_id);
    }
    GroundTruthView v;
    v.image_id = mv.image_id;
    v.camera = rec->second.camera;
    v.pose = rec->second.Pose();
    v.depth = ReadDepth(manifest.Resolve(mv.depth_file));
    v.mask = ReadMask(manifest.Resolve(mv.mask_file));
    v.split = mv.split;
    v.acquisition = mv.acquisition;
    if (v.depth.width != v.camera.Width() ||
        v.depth.height != v.camera.Height() ||
        v.mask.width != v.camera.Width() ||
        v.mask.height != v.camera.Height()) {
      throw ValidationError("view " + mv.image_id +
                            ": depth or mask size differs from the camera");
    }
    scene.views.push_back(std::move(v));
  }
  return scene;
}

PredictionSet LoadPredictions(const PredictionManifest& manifest) {
  PredictionSet set;
  set.model = manifest.model;
  set.input_mode = manifest.input_mode;
  set.has_intrinsics = manifest.has_intrinsics;
  std::map<std::string, CameraRecord> cameras;
  for (CameraRecord& r : ReadCameras(manifest.Resolve(manifest.camera_file))) {
    cameras.emplace(r.image_id, std::move(r));
  }
  for (const PredictionViewRef& ref : manifest.views) {
    const auto cam = cameras.find(ref.image_id);
    if (cam == cameras.end()) {
      throw ValidationError("prediction " + ref.image_id +
                            " has no predicted camera");
    }
    PredictedView v;
    v.camera = cam->second.camera;
    v.pose = cam->second.Pose();
    if (ref.depth_file) v.depth = ReadDepth(manifest.Resolve(*ref.depth_file));
    if (ref.points_file) {
      v.points = ReadPointCloud(manifest.Resolve(*ref.points_file));
    }
    set.views.emplace(ref.image_id, std::move(v));
  }
  return set;
}

std::string BenchmarkRow::Key() const {
  return model + '\x1f' + input_mode + '\x1f' + dataset + '\x1f' + view_tag +
         '\x1f' + level + '\x1f' + HfovText(hfov);
}

const std::vector<MetricColumn>& MetricColumns() {
  static const std::vector<MetricColumn> columns = {
      {"absrel", &BenchmarkRow::absrel},
      {"ray_error_deg", &BenchmarkRow::ray_error},
      {"chamfer_l1_m", &BenchmarkRow::chamfer},
      {"ate_shared_m", &BenchmarkRow::ate_shared},
      {"ate_independent_m", &BenchmarkRow::ate_independent},
      {"ate_gap_m", &BenchmarkRow::ate_gap},
      {"rotation_mae_deg", &BenchmarkRow::rotation_mae},
  };
  return columns;
}

void BenchmarkTable::Add(BenchmarkRow row) {
  for (const MetricColumn& c : MetricColumns()) {
    if (!std::isfinite(row.*c.field)) {
      throw ValidationError("row " + row.model + "/" + row.dataset + "/" +
                            row.level + ": " + c.name + " is not finite");
    }
  }
  if (row.hfov && !std::isfinite(*row.hfov)) {
    throw ValidationError("row hfov is not finite");
  }
  CheckCsvField(row.model, "model");
  CheckCsvField(row.input_mode, "input mode");
  CheckCsvField(row.dataset, "dataset");
  CheckCsvField(row.view_tag, "view tag");
  CheckCsvField(row.level, "level");
  const std::string key = row.Key();
  if (!index_.emplace(key, rows_.size()).second) {
    throw ValidationError("duplicate table row: " + row.model + "," +
                          row.input_mode + "," + row.dataset + "," +
                          row.view_tag + "," + row.level + "," +
                          HfovText(row.hfov));
  }
  rows_.push_back(std::move(row));
}

void BenchmarkTable::Merge(const BenchmarkTable& other) {
  for (const BenchmarkRow& r : other.Rows()) Add(r);
}

std::vector<SampledSet> SampleViewSets(const GroundTruthScene& scene,
                                       const AggregationSpec& spec) {
  spec.Validate();
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < scene.views.size(); ++i) {
    if (scene.views[i].split == "test") {
      groups[scene.views[i].acquisition].push_back(i);
    }
  }
  if (groups.empty()) {
    throw ValidationError("scene " + scene.scene_id + " has no test views");
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<SampledSet> sets;
  for (const auto& [tag, members] : groups) {
    for (int count : spec.view_counts) {
      if (static_cast<size_t>(count) > members.size()) {
        throw ValidationError("view count " + std::to_string(count) +
                              " exceeds the " +
                              std::to_string(members.size()) + " '" + tag +
                              "' test views of scene " + scene.scene_id);
      }
      for (int s = 0; s < spec.samples_per_count; ++s) {
        SampledSet set{tag, count, s, {}};
        if (spec.sampling == SamplingMode::kContiguous) {
          std::uniform_int_distribution<size_t> start_dist(
              0, members.size() - count);
          const size_t start = start_dist(rng);
          set.indices.assign(members.begin() + start,
                             members.begin() + start + count);
        } else {
          // Partial Fisher-Yates, then restore trajectory order.
          std::vector<size_t> pool = members;
          for (int k = 0; k < count; ++k) {
            std::uniform_int_distribution<size_t> pick(k, pool.size() - 1);
            std::swap(pool[k], pool[pick(rng)]);
          }
          pool.resize(count);
          std::sort(pool.begin(), pool.end());
          set.indices = std::move(pool);
        }
        sets.push_back(std::move(set));
      }
    }
  }
  return sets;
}

SceneSample BuildSample(const GroundTruthScene& scene,
                        const PredictionSet& predictions,
                        const std::vector<size_t>& indices) {
  SceneSample sample;
  sample.voxel_size = scene.voxel_size;
  std::vector<std::string> missing;
  for (size_t idx : indices) {
    const GroundTruthView& gt = scene.views.at(idx);
    const auto it = predictions.views.find(gt.image_id);
    if (it == predictions.views.end()) {
      missing.push_back(gt.image_id);
      continue;
    }
    const PredictedView& pred = it->second;
    SceneView v;
    v.image_id = gt.image_id;
    v.gt_camera = gt.camera;
    v.gt_pose = gt.pose;
    v.gt_depth = gt.depth;
    v.gt_mask = gt.mask;
    if (predictions.has_intrinsics) v.pred_camera = pred.camera;
    v.pred_pose = pred.pose;
    v.pred_depth = pred.depth;
    v.pred_points = pred.points;
    sample.views.push_back(std::move(v));
  }
  if (!missing.empty()) {
    std::string msg = "missing predictions for:";
    for (const auto& id : missing) msg += " " + id;
    throw CoverageError(msg);
  }
  return sample;
}

BenchmarkTable RunEval(const GroundTruthScene& scene,
                       const PredictionSet& predictions,
                       const AggregationSpec& spec, const EvalOptions& options,
                       int threads) {
  if (threads < 1) throw ValidationError("thread count must be at least 1");
  const std::vector<SampledSet> sets = SampleViewSets(scene, spec);

  std::set<std::string> missing;
  for (const SampledSet& set : sets) {
    for (size_t idx : set.indices) {
      const std::string& id = scene.views[idx].image_id;
      if (!predictions.views.count(id)) missing.insert(id);
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing predictions for " +
                      std::to_string(missing.size()) + " sampled views:";
    for (const auto& id : missing) msg += " " + id;
    throw CoverageError(msg);
  }

  // Workers fill fixed slots; the table is assembled afterwards in slot order.
  std::vector<EvalReport> reports(sets.size());
  std::vector<std::exception_ptr> failures(sets.size());
  std::atomic<size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= sets.size()) return;
      try {
        reports[i] = EvaluateShared(
            BuildSample(scene, predictions, sets[i].indices), options);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int workers =
      static_cast<int>(std::min<size_t>(threads, std::max<size_t>(1, sets.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  BenchmarkRow base;
  base.model = predictions.model;
  base.input_mode = predictions.input_mode;
  base.dataset = scene.dataset;
  base.hfov = scene.hfov;

  BenchmarkTable table;
  std::map<std::string, std::map<int, std::vector<BenchmarkRow>>> by_tag;
  for (size_t i = 0; i < sets.size(); ++i) {
    const EvalReport& r = reports[i];
    BenchmarkRow row = base;
    row.view_tag = sets[i].view_tag;
    row.level = SetLevel(sets[i].count, sets[i].sample);
    row.absrel = r.absrel;
    row.ray_error = r.ray_error;
    row.chamfer = r.chamfer;
    row.ate_shared = r.ate_shared;
    row.ate_independent = r.ate_independent;
    row.ate_gap = r.ate_gap;
    row.rotation_mae = r.rotation_mae;
    by_tag[row.view_tag][sets[i].count].push_back(row);
    table.Add(std::move(row));
  }
  for (const auto& [tag, by_count] : by_tag) {
    BenchmarkRow tag_base = base;
    tag_base.view_tag = tag;
    std::vector<BenchmarkRow> count_means;
    for (int count : spec.view_counts) {
      BenchmarkRow mean = MeanRow(by_count.at(count), tag_base);
      mean.level = CountLevel(count);
      count_means.push_back(mean);
      table.Add(std::move(mean));
    }
    BenchmarkRow final_row = MeanRow(count_means, tag_base);
    final_row.level = "final";
    table.Add(std::move(final_row));
  }
  return table;
}

double RelativeReduction(double e_pre, double e_ft) {
  if (!(e_pre > 0.0) || !std::isfinite(e_pre)) {
    throw UndefinedBaselineError(
        "relative reduction needs a positive finite baseline error, got " +
        FormatDouble(e_pre));
  }
  return (e_pre - e_ft) / e_pre * 100.0;
}

double ObliqueNadirGap(double e_oblique, double e_nadir) {
  return e_oblique - e_nadir;
}

double OrderInvariantMean(std::vector<double> values) {
  if (values.empty()) throw InsufficientDataError("mean of no values");
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::string TableToCsv(const BenchmarkTable& table) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const BenchmarkRow& r : table.Rows()) {
    out += r.model + ',' + r.input_mode + ',' + r.dataset + ',' + r.view_tag +
           ',' + r.level + ',' + HfovText(r.hfov);
    for (const MetricColumn& c : MetricColumns()) {
      out += ',' + FormatDouble(r.*c.field);
    }
    out += '\n';
  }
  return out;
}

BenchmarkTable TableFromCsv(const std::string& text,
                            const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw ParseError(source + ": unexpected CSV header");
  }
  const size_t num_columns = kKeyColumns + MetricColumns().size();
  BenchmarkTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const std::vector<std::string> f = SplitComma(line);
    if (f.size() != num_columns) {
      throw ParseError(where + ": expected " + std::to_string(num_columns) +
                       " columns, got " + std::to_string(f.size()));
    }
    BenchmarkRow r;
    r.model = f[0];
    r.input_mode = f[1];
    r.dataset = f[2];
    r.view_tag = f[3];
    r.level = f[4];
    if (!f[5].empty()) r.hfov = ParseCsvDouble(f[5], where);
    for (size_t k = 0; k < MetricColumns().size(); ++k) {
      r.*MetricColumns()[k].field = ParseCsvDouble(f[kKeyColumns + k], where);
    }
    table.Add(std::move(r));
  }
  return table;
}

std::string PlotDataCsv(const BenchmarkTable& table) {
  using SeriesKey = std::tuple<std::string, std::string, std::string>;
  std::map<SeriesKey, std::map<double, std::vector<BenchmarkRow>>> series;
  for (const BenchmarkRow* r : FinalRows(table)) {
    if (!r->hfov) continue;
    series[{r->model, r->input_mode, r->view_tag}][*r->hfov].push_back(*r);
  }
  std::string out = "model,input_mode,view_tag,metric,hfov_deg,value\n";
  for (const auto& [key, by_hfov] : series) {
    const auto& [model, input_mode, tag] = key;
    for (const MetricColumn& c : MetricColumns()) {
      for (const auto& [hfov, rows] : by_hfov) {
        std::vector<double> values;
        for (const BenchmarkRow& r : rows) values.push_back(r.*c.field);
        out += model + ',' + input_mode + ',' + tag + ',' + c.name + ',' +
               FormatDouble(hfov) + ',' +
               FormatDouble(OrderInvariantMean(std::move(values))) + '\n';
      }
    }
  }
  return out;
}

std::string ReductionCsv(const BenchmarkTable& table,
                         const std::string& pre_model,
                         const std::string& post_model) {
  std::map<RowGroupKey, const BenchmarkRow*> post;
  for (const BenchmarkRow* r : FinalRows(table)) {
    if (r->model == post_model) {
      post[{r->input_mode, r->dataset, r->view_tag, HfovText(r->hfov), ""}] = r;
    }
  }
  std::string out =
      "input_mode,dataset,view_tag,hfov_deg,metric,pre,post,reduction_pct\n";
  for (const BenchmarkRow* pre : FinalRows(table)) {
    if (pre->model != pre_model) continue;
    const auto it = post.find(
        {pre->input_mode, pre->dataset, pre->view_tag, HfovText(pre->hfov), ""});
    if (it == post.end()) continue;
    for (const MetricColumn& c : MetricColumns()) {
      const double a = pre->*c.field;
      const double b = it->second->*c.field;
      std::string reduction;
      if (a > 0.0) reduction = FormatDouble(RelativeReduction(a, b));
      out += pre->input_mode + ',' + pre->dataset + ',' + pre->view_tag + ',' +
             HfovText(pre->hfov) + ',' + c.name + ',' + FormatDouble(a) + ',' +
             FormatDouble(b) + ',' + reduction + '\n';
    }
  }
  return out;
}

std::string ObliqueNadirCsv(const BenchmarkTable& table) {
  std::map<RowGroupKey, const BenchmarkRow*> nadir;
  for (const BenchmarkRow* r : FinalRows(table)) {
    if (r->view_tag == "nadir") {
      nadir[{r->model, r->input_mode, r->dataset, HfovText(r->hfov), ""}] = r;
    }
  }
  std::string out =
      "model,input_mode,dataset,hfov_deg,metric,oblique,nadir,gap\n";
  for (const BenchmarkRow* r : FinalRows(table)) {
    if (r->view_tag != "oblique") continue;
    const auto it =
        nadir.find({r->model, r->input_mode, r->dataset, HfovText(r->hfov), ""});
    if (it == nadir.end()) continue;
    for (const MetricColumn& c : MetricColumns()) {
      const double o = r->*c.field;
      const double n = it->second->*c.field;
      out += r->model + ',' + r->input_mode + ',' + r->dataset + ',' +
             HfovText(r->hfov) + ',' + c.name + ',' + FormatDouble(o) + ',' +
             FormatDouble(n) + ',' + FormatDouble(ObliqueNadirGap(o, n)) + '\n';
    }
  }
  return out;
}

void EmitReport(const BenchmarkTable& table, ReportFormat format,
                const std::filesystem::path& path) {
  if (table.Empty()) throw ValidationError("cannot report an empty table");
  WriteFileBytes(path, format == ReportFormat::kCsv ? TableToCsv(table)
                                                    : PlotDataCsv(table));
}

}  // namespace uavgeo
