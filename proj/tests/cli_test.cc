#include "uavgeo/cli.h"

#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"

#include "test_util.h"
#include "uavgeo/harness.h"
#include "uavgeo/io.h"

namespace uavgeo {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using testing::MakeSyntheticScene;
using testing::MakeTempDir;
using testing::SyntheticSceneOptions;

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult Invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  CliResult r;
  r.code = RunCli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = MakeTempDir("cli"); }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const {
    return (dir_ / name).string();
  }

  // Writes a synthetic scene and matching predictions; returns the manifest
  // paths.
  std::pair<std::string, std::string> WriteScene(int views) {
    SyntheticSceneOptions o;
    o.num_views = views;
    o.width = 16;
    o.height = 12;
    const SceneSample s = MakeSyntheticScene(5, o);
    SceneManifest m;
    m.scene_id = "syn";
    m.dataset = "synthetic";
    m.metadata.hfov = 60.0;
    PredictionManifest p;
    p.model = "model-a";
    p.camera_file = "pred_cams.txt";
    std::vector<CameraRecord> gt_cams;
    std::vector<CameraRecord> pred_cams;
    for (const SceneView& v : s.views) {
      gt_cams.push_back(CameraRecord::FromPose(v.image_id, v.gt_camera,
                                               v.gt_pose));
      pred_cams.push_back(CameraRecord::FromPose(v.image_id, *v.pred_camera,
                                                 v.pred_pose));
      WriteDepth(Path(v.image_id + ".pfm"), v.gt_depth);
      WriteMask(Path(v.image_id + ".pgm"), v.gt_mask);
      WriteDepth(Path(v.image_id + "_pred.pfm"), *v.pred_depth);
      WritePointCloud(Path(v.image_id + "_pred.ply"), *v.pred_points);
      m.views.push_back({v.image_id, "gt_cams.txt", v.image_id + ".pfm",
                         v.image_id + ".pgm", "test", "nadir"});
      p.views.push_back({v.image_id, v.image_id + "_pred.pfm",
                         v.image_id + "_pred.ply"});
    }
    WriteCameras(Path("gt_cams.txt"), gt_cams);
    WriteCameras(Path("pred_cams.txt"), pred_cams);
    WriteManifest(Path("scene.json"), m);
    WritePredictionManifest(Path("pred.json"), p);
    return {Path("scene.json"), Path("pred.json")};
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(Invoke({}).code, kExitValidation);
  EXPECT_EQ(Invoke({"bogus"}).code, kExitValidation);
  EXPECT_EQ(Invoke({"gen-flight", "nadir", "--hfov", "60"}).code,
            kExitValidation);
  EXPECT_EQ(Invoke({"--threads", "x", "aggregate"}).code, kExitValidation);
}

TEST_F(CliTest, MissingFileIsIoError) {
  const CliResult r = Invoke({"align", "--src", Path("nope.ply"), "--dst",
                           Path("nope2.ply"), "--out", Path("t.json")});
  EXPECT_EQ(r.code, kExitIo);
  EXPECT_NE(r.err.find("nope.ply"), std::string::npos) << r.err;
}

TEST_F(CliTest, DomainErrorIsValidationExit) {
  const CliResult r =
      Invoke({"gen-flight", "nadir", "--x-extent", "100", "--y-extent", "100",
           "--altitude", "50", "--hfov", "200", "--out", Path("p.txt")});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, GenFlightFa) {
  const CliResult r =
      Invoke({"gen-flight", "fa", "--x-extent", "120", "--y-extent", "80",
           "--footprint", "90", "--out-dir", Path("fa")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json groups = json::parse(ReadFileBytes(Path("fa/fa_groups.json")));
  ASSERT_EQ(groups["groups"].size(), 8u);
  size_t views = 0;
  for (const json& g : groups["groups"]) {
    const double h = g["altitude_m"].get<double>();
    const double hfov = g["hfov_deg"].get<double>();
    EXPECT_NEAR(FootprintWidth(h, hfov), 90.0, 1e-9);
    const auto cams =
        ReadCameras(dir_ / "fa" / g["cameras"].get<std::string>());
    if (views == 0) views = cams.size();
    EXPECT_EQ(cams.size(), views);
    EXPECT_EQ(cams[0].camera.Width(), 518);
    EXPECT_NEAR(cams[0].camera.Hfov(), hfov, 1e-9);
    EXPECT_NEAR(cams[0].center.z(), h, 1e-9);
  }
  EXPECT_TRUE(fs::exists(Path("fa/fa_hfov025.00.txt")));
  EXPECT_TRUE(fs::exists(Path("fa/fa_hfov095.00.txt.plan.json")));

  EXPECT_EQ(Invoke({"gen-flight", "fa", "--x-extent", "120", "--y-extent", "80",
                 "--footprint", "100", "--out-dir", Path("fa2")})
                .code,
            kExitValidation);
  EXPECT_EQ(Invoke({"gen-flight", "fa", "--x-extent", "120", "--y-extent", "80",
                 "--footprint", "100", "--clamp", "--out-dir", Path("fa3")})
                .code,
            kExitOk);
}

TEST_F(CliTest, GenFlightObliqueAndRender) {
  ASSERT_EQ(Invoke({"gen-flight", "oblique", "--x-extent", "20", "--y-extent",
                 "20", "--altitude", "30", "--hfov", "60", "--width", "32",
                 "--height", "24", "--forward-overlap", "0.5",
                 "--side-overlap", "0.5", "--out", Path("obl.txt")})
                .code,
            kExitOk);
  const auto cams = ReadCameras(Path("obl.txt"));
  ASSERT_EQ(cams.size() % 5, 0u);

  // Flat ground mesh under the flight.
  TriangleMesh ground;
  ground.vertices = {{-100, -100, 0}, {120, -100, 0}, {120, 120, 0},
                     {-100, 120, 0}};
  ground.triangles = {{0, 1, 2}, {0, 2, 3}};
  WriteMesh(Path("ground.ply"), ground);
  const CliResult r = Invoke({"render-depth", "--cameras", Path("obl.txt"),
                           "--mesh", Path("ground.ply"), "--out-dir",
                           Path("depth")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const DepthMap nadir = ReadDepth(dir_ / "depth" / (cams[0].image_id + ".pfm"));
  const Mask mask = ReadMask(dir_ / "depth" / (cams[0].image_id + ".pgm"));
  EXPECT_EQ(mask.CountValid(), mask.Size());
  EXPECT_NEAR(nadir.At(16, 12), 30.0, 1e-4);
}

TEST_F(CliTest, AlignWritesTransform) {
  testing::Rng rng(3);
  const PointCloud dst = testing::RandomCloud(rng, 300, 5.0);
  const Sim3Transform g(1.0, Eigen::Matrix3d::Identity(),
                        Eigen::Vector3d(0.05, 0, 0));
  WritePointCloud(Path("src.ply"), ApplySim3(g.Inverse(), dst));
  WritePointCloud(Path("dst.ply"), dst);
  const CliResult r = Invoke({"align", "--src", Path("src.ply"), "--dst",
                           Path("dst.ply"), "--out", Path("t.json"),
                           "--aligned", Path("aligned.ply")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json t = json::parse(ReadFileBytes(Path("t.json")));
  EXPECT_NEAR(t["transform"]["scale"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(t["transform"]["translation"][0].get<double>(), 0.05, 1e-9);
  EXPECT_EQ(ReadPointCloud(Path("aligned.ply")).size(), 300u);
}

TEST_F(CliTest, EvalMatchesInProcessRun) {
  const auto [scene_path, pred_path] = WriteScene(8);
  const CliResult r =
      Invoke({"--seed", "11", "--threads", "2", "eval", "--manifest", scene_path,
           "--predictions", pred_path, "--out", Path("table.csv"),
           "--plot-data", Path("plot.csv"), "--view-counts", "4,6",
           "--samples", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("synthetic nadir"), std::string::npos) << r.out;

  AggregationSpec spec;
  spec.view_counts = {4, 6};
  spec.samples_per_count = 2;
  spec.seed = 11;
  const BenchmarkTable want =
      RunEval(LoadScene(ReadManifest(scene_path)),
              LoadPredictions(ReadPredictionManifest(pred_path)), spec);
  EXPECT_EQ(ReadFileBytes(Path("table.csv")), TableToCsv(want));
  EXPECT_EQ(ReadFileBytes(Path("plot.csv")), PlotDataCsv(want));
  const json params = json::parse(ReadFileBytes(Path("table.csv.params.json")));
  EXPECT_EQ(params["seed"].get<int>(), 11);

  // Samples per count has no default.
  EXPECT_EQ(Invoke({"eval", "--manifest", scene_path, "--predictions", pred_path,
                 "--out", Path("t2.csv")})
                .code,
            kExitValidation);
  // A count larger than the scene.
  EXPECT_EQ(Invoke({"eval", "--manifest", scene_path, "--predictions", pred_path,
                 "--out", Path("t3.csv"), "--view-counts", "9", "--samples",
                 "1"})
                .code,
            kExitValidation);
}

TEST_F(CliTest, ConfigFile) {
  const auto [scene_path, pred_path] = WriteScene(6);
  WriteFileBytes(Path("cfg.json"),
                 R"({"seed": 4, "view_counts": [3], "samples_per_count": 2,
                     "sampling": "uniform", "chamfer_neighbor": "l2"})");
  ASSERT_EQ(Invoke({"--config", Path("cfg.json"), "eval", "--manifest",
                 scene_path, "--predictions", pred_path, "--out",
                 Path("t.csv")})
                .code,
            kExitOk);
  EXPECT_EQ(TableFromCsv(ReadFileBytes(Path("t.csv")), "t").Rows().size(), 4u);

  WriteFileBytes(Path("bad.json"), R"({"seeed": 4})");
  EXPECT_EQ(Invoke({"--config", Path("bad.json"), "eval", "--manifest",
                 scene_path, "--predictions", pred_path, "--out",
                 Path("t.csv")})
                .code,
            kExitValidation);
  EXPECT_EQ(Invoke({"--config", Path("none.json"), "eval", "--manifest",
                 scene_path, "--predictions", pred_path, "--out",
                 Path("t.csv")})
                .code,
            kExitIo);
}

TEST_F(CliTest, AggregateAndReport) {
  BenchmarkTable a;
  BenchmarkTable b;
  for (const char* model : {"pre", "post"}) {
    for (const char* dataset : {"d1", "d2"}) {
      BenchmarkRow r;
      r.model = model;
      r.input_mode = "rgb";
      r.dataset = dataset;
      r.view_tag = "nadir";
      r.hfov = 45.0;
      const double v = std::string(model) == "pre" ? 4.0 : 1.0;
      for (const auto& c : MetricColumns()) {
        r.*c.field = std::string(dataset) == "d1" ? v : 3.0 * v;
      }
      (std::string(dataset) == "d1" ? a : b).Add(r);
    }
  }
  WriteFileBytes(Path("a.csv"), TableToCsv(a));
  WriteFileBytes(Path("b.csv"), TableToCsv(b));
  const CliResult agg = Invoke({"aggregate", "--inputs", Path("a.csv"),
                             Path("b.csv"), "--out", Path("all.csv"),
                             "--mean-dataset", "mean"});
  ASSERT_EQ(agg.code, kExitOk) << agg.err;
  const BenchmarkTable all =
      TableFromCsv(ReadFileBytes(Path("all.csv")), "all");
  ASSERT_EQ(all.Rows().size(), 6u);
  bool found = false;
  for (const auto& r : all.Rows()) {
    if (r.dataset == "mean" && r.model == "pre") {
      EXPECT_EQ(r.absrel, 8.0);
      found = true;
    }
  }
  EXPECT_TRUE(found);

  ASSERT_EQ(Invoke({"report", "--table", Path("all.csv"), "--format",
                 "reduction", "--pre", "pre", "--post", "post", "--out",
                 Path("red.csv")})
                .code,
            kExitOk);
  EXPECT_NE(ReadFileBytes(Path("red.csv")).find("rgb,mean,nadir,45,absrel,8,2,75"),
            std::string::npos)
      << ReadFileBytes(Path("red.csv"));
  EXPECT_EQ(Invoke({"report", "--table", Path("all.csv"), "--format", "csv",
                 "--out", Path("copy.csv")})
                .code,
            kExitOk);
  EXPECT_EQ(ReadFileBytes(Path("copy.csv")), ReadFileBytes(Path("all.csv")));
  EXPECT_EQ(Invoke({"report", "--table", Path("all.csv"), "--format", "pdf",
                 "--out", Path("x")})
                .code,
            kExitValidation);
  EXPECT_EQ(Invoke({"aggregate", "--inputs", Path("a.csv"), Path("a.csv"),
                 "--out", Path("dup.csv")})
                .code,
            kExitValidation);
  EXPECT_EQ(Invoke({"report", "--table", Path("all.csv"), "--format", "csv",
                 "--out", Path("no/dir/x.csv")})
                .code,
            kExitIo);
}

}  // namespace
}  // namespace uavgeo
