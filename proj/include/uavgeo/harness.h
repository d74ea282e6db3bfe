#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uavgeo/io.h"
#include "uavgeo/metrics.h"

namespace uavgeo {

enum class SamplingMode {
  kContiguous,  // window of consecutive views with a random start
  kUniform,     // random subset, kept in trajectory order
};

struct AggregationSpec {
  std::vector<int> view_counts = {8, 16, 24, 32};
  int samples_per_count = 0;  // required, no default
  uint64_t seed = 0;
  SamplingMode sampling = SamplingMode::kContiguous;

  void Validate() const;
};

// Ground-truth view loaded from a scene manifest.
struct GroundTruthView {
  std::string image_id;
  CameraModel camera{1, 1, 1.0, 1.0, 0.5, 0.5};
  ViewPose pose;
  DepthMap depth;
  Mask mask;
  std::string split = "test";
  std::string acquisition = "nadir";
};

struct GroundTruthScene {
  std::string scene_id;
  std::string dataset;
  double voxel_size = 0.25;
  std::optional<double> hfov;
  std::vector<GroundTruthView> views;  // trajectory order
};

struct PredictedView {
  CameraModel camera{1, 1, 1.0, 1.0, 0.5, 0.5};
  ViewPose pose;
  std::optional<DepthMap> depth;
  std::optional<PointCloud> points;
};

struct PredictionSet {
  std::string model;
  std::string input_mode = "rgb";
  bool has_intrinsics = true;
  std::map<std::string, PredictedView> views;  // by image id
};

GroundTruthScene LoadScene(const SceneManifest& manifest);
PredictionSet LoadPredictions(const PredictionManifest& manifest);

// Row level: "final", a per-count mean such as "n8", or one sampled set such
// as "n8/s003".
struct BenchmarkRow {
  std::string model;
  std::string input_mode;
  std::string dataset;
  std::string view_tag;
  std::string level = "final";
  std::optional<double> hfov;

  double absrel = 0.0;
  double ray_error = 0.0;
  double chamfer = 0.0;
  double ate_shared = 0.0;
  double ate_independent = 0.0;
  double ate_gap = 0.0;
  double rotation_mae = 0.0;

  std::string Key() const;
};

// Metric columns in CSV order, with accessors.
struct MetricColumn {
  const char* name;
  double BenchmarkRow::*field;
};
const std::vector<MetricColumn>& MetricColumns();

class BenchmarkTable {
 public:
  // Throws ValidationError on a duplicate key or a non-finite value.
  void Add(BenchmarkRow row);
  void Merge(const BenchmarkTable& other);

  const std::vector<BenchmarkRow>& Rows() const { return rows_; }
  bool Empty() const { return rows_.empty(); }

 private:
  std::vector<BenchmarkRow> rows_;
  std::map<std::string, size_t> index_;
};

// Indices of the sampled views for one (view tag, count, sample) slot.
struct SampledSet {
  std::string view_tag;
  int count = 0;
  int sample = 0;
  std::vector<size_t> indices;  // into GroundTruthScene::views
};

// Deterministic view-set sampling over the scene's test views, grouped by
// acquisition tag. Throws ValidationError when a count exceeds a group.
std::vector<SampledSet> SampleViewSets(const GroundTruthScene& scene,
                                       const AggregationSpec& spec);

SceneSample BuildSample(const GroundTruthScene& scene,
                        const PredictionSet& predictions,
                        const std::vector<size_t>& indices);

// Samples view sets, evaluates each with EvaluateShared on up to `threads`
// workers, then emits per-set, per-count and final rows. The final row is the
// unweighted mean of the per-count means. Throws CoverageError listing every
// sampled image id without a prediction.
BenchmarkTable RunEval(const GroundTruthScene& scene,
                       const PredictionSet& predictions,
                       const AggregationSpec& spec,
                       const EvalOptions& options = {}, int threads = 1);

// (e_pre - e_ft) / e_pre * 100. Throws UndefinedBaselineError for e_pre = 0.
double RelativeReduction(double e_pre, double e_ft);
double ObliqueNadirGap(double e_oblique, double e_nadir);

// Mean with the summands sorted first, so any ordering of the inputs gives
// the same bits.
double OrderInvariantMean(std::vector<double> values);

// CSV column order:
//   model,input_mode,dataset,view_tag,level,hfov_deg,absrel,ray_error_deg,
//   chamfer_l1_m,ate_shared_m,ate_independent_m,ate_gap_m,rotation_mae_deg
std::string TableToCsv(const BenchmarkTable& table);
BenchmarkTable TableFromCsv(const std::string& text, const std::string& source);

// Long-form per-HFOV series from the final rows, averaged over datasets:
//   model,input_mode,view_tag,metric,hfov_deg,value
std::string PlotDataCsv(const BenchmarkTable& table);

// Relative reduction of every metric from one model to another on matching
// final rows:
//   input_mode,dataset,view_tag,hfov_deg,metric,pre,post,reduction_pct
std::string ReductionCsv(const BenchmarkTable& table,
                         const std::string& pre_model,
                         const std::string& post_model);

// Oblique minus nadir on matching final rows:
//   model,input_mode,dataset,hfov_deg,metric,oblique,nadir,gap
std::string ObliqueNadirCsv(const BenchmarkTable& table);

enum class ReportFormat { kCsv, kPlotData };

// Writes the table; throws ValidationError on an empty table and IoError on
// an unwritable path.
void EmitReport(const BenchmarkTable& table, ReportFormat format,
                const std::filesystem::path& path);

}  // namespace uavgeo
