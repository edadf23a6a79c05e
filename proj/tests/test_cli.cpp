#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "rotsig/cli.hpp"
#include "rotsig/dataio.hpp"
#include "rotsig/features.hpp"
#include "rotsig/validation.hpp"
#include "support.hpp"

using namespace rotsig;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rotsig_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string read_text(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

Eigen::MatrixXd read_feature_csv(const std::string& p) {
  const auto rows = read_csv(p);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(rows[0].size() - 1));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    for (std::size_t j = 1; j < rows[i].size(); ++j) m(i - 1, j - 1) = std::stod(rows[i][j]);
  }
  return m;
}

std::vector<MoleculeRecord> molecules(std::uint64_t seed, int count, std::vector<int> elements = {1, 6, 8}) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> atoms(2, 6);
  std::uniform_int_distribution<std::size_t> pick(0, elements.size() - 1);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<MoleculeRecord> out;
  for (int i = 0; i < count; ++i) {
    MoleculeRecord r;
    r.id = "m" + std::to_string(i);
    const int na = atoms(rng);
    for (int a = 0; a < na; ++a) {
      r.charges.push_back(elements[pick(rng)]);
      r.coordinates.emplace_back(u(rng), u(rng), u(rng));
    }
    r.target = static_cast<double>(i % 7) - 3.0;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ShapeRecord> shapes(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.05);
  std::vector<ShapeRecord> out;
  for (int i = 0; i < count; ++i) {
    ShapeRecord s;
    s.id = "s" + std::to_string(i);
    s.label = i % 2;
    // Class 0: points on a ring in the xy plane. Class 1: points along a line.
    for (int p = 0; p < 12; ++p) {
      const double t = 2.0 * testing::kPi * p / 12.0;
      Eigen::Vector3d v = s.label == 0 ? Eigen::Vector3d(std::cos(t), std::sin(t), 0.0)
                                       : Eigen::Vector3d(0.0, 0.0, (p - 5.5) / 6.0);
      s.points.push_back(v + Eigen::Vector3d(n(rng), n(rng), n(rng)));
    }
    const Eigen::Matrix3d q = testing::random_rotation(rng);
    for (auto& p : s.points) p = q * p;
    out.push_back(std::move(s));
  }
  return out;
}

json last_json(const std::string& text) {
  const auto end = text.find_last_not_of('\n');
  const auto start = text.rfind('\n', end);
  return json::parse(text.substr(start == std::string::npos ? 0 : start + 1, end + 1));
}

double mae_on(const std::vector<std::vector<std::string>>& pred_rows, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (auto i : idx) s += std::abs(std::stod(pred_rows[i + 1][1]) - std::stod(pred_rows[i + 1][2]));
  return s / static_cast<double>(idx.size());
}

}  // namespace

TEST_CASE("featurize writes the element-encoded matrix") {
  TempDir tmp;
  const auto mols = molecules(1, 3);
  write_xyz_dataset(tmp / "m.xyz", mols);
  const auto r = run({"featurize", "--dataset", tmp / "m.xyz", "--n-features", "4", "--band-limit", "3", "--seed",
                      "5", "--threads", "1", "--vocab", "1,6,8", "--out", tmp / "f.csv"});
  REQUIRE(r.code == 0);
  const auto summary = last_json(r.out);
  CHECK(summary["rows"] == 3);
  CHECK(summary["columns"] == 4 * 9);
  CHECK(summary["threads"] == 1);
  const Eigen::MatrixXd f = read_feature_csv(tmp / "f.csv");
  CHECK(f.rows() == 3);
  CHECK(f.cols() == 36);
  CHECK(read_csv(tmp / "f.csv.columns.csv").size() == 37);

  // Matches the library call directly.
  FeatureConfig c;
  c.band_limit = 3;
  c.n_features = 4;
  c.seed = 5;
  std::vector<LabeledPointCloud> clouds;
  for (const auto& m : mols) clouds.push_back(m.cloud());
  const std::vector<int> vocab = {1, 6, 8};
  CHECK(element_feature_matrix(clouds, sample_random_weights(c), vocab).values == f);

  // Byte-identical rerun, also with more threads.
  REQUIRE(run({"featurize", "--dataset", tmp / "m.xyz", "--n-features", "4", "--band-limit", "3", "--seed", "5",
               "--threads", "3", "--vocab", "1,6,8", "--out", tmp / "g.csv"})
              .code == 0);
  CHECK(read_text(tmp / "f.csv") == read_text(tmp / "g.csv"));

  // Rotated and translated copy.
  std::mt19937_64 rng(2);
  auto moved = mols;
  for (auto& m : moved) {
    const Eigen::Matrix3d q = testing::random_rotation(rng);
    for (auto& x : m.coordinates) x = q * x + Eigen::Vector3d(0.3, -7.0, 2.0);
  }
  write_xyz_dataset(tmp / "rot.xyz", moved);
  REQUIRE(run({"featurize", "--dataset", tmp / "rot.xyz", "--n-features", "4", "--band-limit", "3", "--seed", "5",
               "--vocab", "1,6,8", "--out", tmp / "r.csv"})
              .code == 0);
  CHECK((read_feature_csv(tmp / "r.csv") - f).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("featurize point clouds") {
  TempDir tmp;
  write_pointcloud_dataset(tmp / "s.txt", shapes(3, 4));
  const auto r = run({"featurize", "--dataset", tmp / "s.txt", "--format", "pointcloud", "--n-features", "7",
                      "--out", tmp / "f.csv"});
  REQUIRE(r.code == 0);
  const Eigen::MatrixXd f = read_feature_csv(tmp / "f.csv");
  CHECK(f.rows() == 4);
  CHECK(f.cols() == 7);
  CHECK(f.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("train fits a target that is linear in the features") {
  TempDir tmp;
  auto mols = molecules(4, 60, {1, 6});
  FeatureConfig c;
  c.band_limit = 2;
  c.n_features = 4;
  c.seed = 9;
  std::vector<LabeledPointCloud> clouds;
  for (const auto& m : mols) clouds.push_back(m.cloud());
  const std::vector<int> vocab = {1, 6};
  const Eigen::MatrixXd phi = element_feature_matrix(clouds, sample_random_weights(c), vocab).values;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  Eigen::VectorXd w(phi.cols());
  for (auto& x : w) x = n(rng);
  // Predictions are phi beta + mean(y_train), so keep phi w at zero mean over the training rows.
  const auto split = make_split(mols.size(), {}, 9);
  Eigen::VectorXd mbar = Eigen::VectorXd::Zero(phi.cols());
  for (auto i : split.train) mbar += phi.row(static_cast<Eigen::Index>(i)).transpose();
  w -= w.dot(mbar) / mbar.squaredNorm() * mbar;
  const Eigen::VectorXd y = phi * w;
  for (std::size_t i = 0; i < mols.size(); ++i) mols[i].target = y[static_cast<Eigen::Index>(i)] + 3.0;
  write_xyz_dataset(tmp / "lin.xyz", mols);

  const auto r = run({"train", "--dataset", tmp / "lin.xyz", "--n-features", "4", "--band-limit", "2", "--seed", "9",
                      "--lambda-grid", "1e-14,1e-2", "--out", tmp / "b.json"});
  REQUIRE(r.code == 0);
  const auto summary = last_json(r.out);
  CHECK(summary["lambda"] == 1e-14);
  CHECK(summary["val_metric"].get<double>() <= 1e-6);
  CHECK(summary["n_train"] == 48);
  CHECK(summary["n_val"] == 6);
  CHECK(summary["n_test"] == 6);
  const auto report = read_csv(tmp / "b.json.report.csv");
  REQUIRE(report.size() == 3);
  CHECK(report[0] == std::vector<std::string>{"lambda", "train_mae", "val_mae", "converged", "iterations", "selected"});
  CHECK(report[1][5] == "1");
  CHECK(report[2][5] == "0");
}

TEST_CASE("train on a constant target learns only the intercept") {
  TempDir tmp;
  auto mols = molecules(6, 30);
  for (auto& m : mols) m.target = -12.5;
  write_xyz_dataset(tmp / "c.xyz", mols);
  const auto r = run({"train", "--dataset", tmp / "c.xyz", "--n-features", "3", "--band-limit", "2", "--out",
                      tmp / "b.json", "--report", tmp / "rep.csv"});
  REQUIRE(r.code == 0);
  CHECK(last_json(r.out)["val_metric"].get<double>() <= 1e-12);
  const ModelBundle b = load_bundle(tmp / "b.json");
  CHECK(b.target_mean == -12.5);
  CHECK(b.beta.norm() <= 1e-12);
  CHECK(fs::exists(tmp / "rep.csv"));
}

TEST_CASE("report metrics agree with saved predictions") {
  TempDir tmp;
  write_xyz_dataset(tmp / "m.xyz", molecules(7, 40));
  for (const std::string solver : {"svd", "lsqr", "pcr"}) {
    CAPTURE(solver);
    const auto t = run({"train", "--dataset", tmp / "m.xyz", "--n-features", "3", "--band-limit", "2", "--seed",
                        "11", "--solver", solver, "--lambda-grid", "logspace:-6:0:4", "--out", tmp / "b.json"});
    REQUIRE(t.code == 0);
    const auto summary = last_json(t.out);
    const auto p = run({"predict", "--bundle", tmp / "b.json", "--dataset", tmp / "m.xyz", "--out", tmp / "p.csv"});
    REQUIRE(p.code == 0);
    const auto rows = read_csv(tmp / "p.csv");
    REQUIRE(rows.size() == 41);
    CHECK(rows[0] == std::vector<std::string>{"id", "prediction", "target"});

    const auto split = make_split(40, {}, 11);
    CHECK(mae_on(rows, split.val) == doctest::Approx(summary["val_metric"].get<double>()).epsilon(1e-12));
    CHECK(mae_on(rows, split.train) == doctest::Approx(summary["train_metric"].get<double>()).epsilon(1e-12));
    CHECK(mae_on(rows, split.test) == doctest::Approx(summary["test_metric"].get<double>()).epsilon(1e-12));
    std::vector<std::size_t> all(40);
    std::iota(all.begin(), all.end(), 0);
    CHECK(mae_on(rows, all) == doctest::Approx(last_json(p.out)["mae"].get<double>()).epsilon(1e-12));

    // The selected row of the report carries the summary numbers; ties go to the smaller lambda.
    const auto report = read_csv(tmp / "b.json.report.csv");
    double best = 1e300;
    std::size_t chosen = 0;
    for (std::size_t i = 1; i < report.size(); ++i) {
      const double v = std::stod(report[i][2]);
      if (v < best) {
        best = v;
        chosen = i;
      }
    }
    for (std::size_t i = 1; i < report.size(); ++i) CHECK(report[i][5] == (i == chosen ? "1" : "0"));
    CHECK(std::stod(report[chosen][0]) == summary["lambda"].get<double>());
  }
}

TEST_CASE("predict matches in-process prediction") {
  TempDir tmp;
  const auto mols = molecules(8, 30);
  write_xyz_dataset(tmp / "m.xyz", mols);
  REQUIRE(run({"train", "--dataset", tmp / "m.xyz", "--n-features", "5", "--band-limit", "3", "--out",
               tmp / "b.json"})
              .code == 0);
  const auto held = molecules(9, 10);
  write_xyz_dataset(tmp / "h.xyz", held);
  REQUIRE(run({"predict", "--bundle", tmp / "b.json", "--dataset", tmp / "h.xyz", "--out", tmp / "p.csv"}).code == 0);
  const auto rows = read_csv(tmp / "p.csv");

  const ModelBundle b = load_bundle(tmp / "b.json");
  std::vector<LabeledPointCloud> clouds;
  for (const auto& m : held) clouds.push_back(m.cloud());
  const Eigen::VectorXd expected =
      predict_regression(b.beta, element_feature_matrix(clouds, sample_random_weights(b.config), b.vocab).values,
                         b.target_mean);
  for (std::size_t i = 0; i < held.size(); ++i) {
    CHECK(rows[i + 1][0] == held[i].id);
    CHECK(std::stod(rows[i + 1][1]) == expected[static_cast<Eigen::Index>(i)]);
  }

  // Nitrogen is outside the trained vocabulary.
  write_xyz_dataset(tmp / "n.xyz", molecules(10, 3, {1, 7}));
  const auto bad = run({"predict", "--bundle", tmp / "b.json", "--dataset", tmp / "n.xyz", "--out", tmp / "q.csv"});
  CHECK(bad.code == 3);
  CHECK(json::parse(bad.err)["message"].get<std::string>().find("vocabulary") != std::string::npos);
  CHECK(run({"predict", "--bundle", tmp / "b.json", "--dataset", tmp / "h.xyz", "--format", "pointcloud", "--out",
             tmp / "q.csv"})
            .code == 3);
}

TEST_CASE("classification end to end") {
  TempDir tmp;
  write_pointcloud_dataset(tmp / "s.txt", shapes(12, 80));
  const auto t = run({"train", "--dataset", tmp / "s.txt", "--format", "pointcloud", "--n-features", "20",
                      "--band-limit", "3", "--lambda-grid", "1e-3,1e-1,1", "--seed", "3", "--out", tmp / "b.json"});
  REQUIRE(t.code == 0);
  const auto summary = last_json(t.out);
  CHECK(summary["task"] == "classification");
  CHECK(summary["metric"] == "accuracy");
  CHECK(summary["val_metric"].get<double>() >= 0.875);
  if (summary["val_metric"].get<double>() == 1.0) CHECK(summary["lambda"] == 1e-3);
  CHECK(read_csv(tmp / "b.json.report.csv")[0][1] == "train_accuracy");

  const auto p = run({"predict", "--bundle", tmp / "b.json", "--dataset", tmp / "s.txt", "--out", tmp / "p.csv"});
  REQUIRE(p.code == 0);
  const auto rows = read_csv(tmp / "p.csv");
  std::size_t hits = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) hits += rows[i][1] == rows[i][2] ? 1 : 0;
  CHECK(static_cast<double>(hits) / 80.0 == last_json(p.out)["accuracy"].get<double>());
}

TEST_CASE("benchmark") {
  TempDir tmp;
  write_xyz_dataset(tmp / "one.xyz", molecules(13, 1));
  REQUIRE(run({"benchmark", "--dataset", tmp / "one.xyz", "--n-features", "3", "--band-limit", "2", "--reps", "1",
               "--out", tmp / "t.csv"})
              .code == 0);
  const auto rows = read_csv(tmp / "t.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"sample_id", "N", "rep", "seconds"});
  CHECK(rows[1][0] == "m0");
  CHECK(std::stod(rows[1][3]) >= 0.0);

  const auto r = run({"benchmark", "--synthetic-sizes", "4,8,16", "--synthetic-count", "3", "--reps", "4",
                      "--n-features", "2", "--band-limit", "2", "--format", "pointcloud", "--out", tmp / "s.csv"});
  REQUIRE(r.code == 0);
  CHECK(read_csv(tmp / "s.csv").size() == 1 + 3 * 3 * 4);
  const auto summary = read_csv(tmp / "s.csv.summary.csv");
  REQUIRE(summary.size() == 4);
  for (std::size_t i = 1; i < summary.size(); ++i) {
    CHECK(summary[i][1] == "12");
    const double med = std::stod(summary[i][2]);
    CHECK(std::stod(summary[i][3]) <= med);
    CHECK(med <= std::stod(summary[i][4]));
  }
  CHECK(last_json(r.out).contains("quadratic_fit"));

  CHECK(run({"benchmark", "--reps", "0", "--synthetic-sizes", "4", "--out", tmp / "z.csv"}).code == 2);
}

TEST_CASE("sweep") {
  TempDir tmp;
  auto mols = molecules(14, 40);
  for (std::size_t i = 0; i < mols.size(); ++i) mols[i].target = static_cast<double>(mols[i].charges.size()) * 0.7 + 0.01 * i;
  write_xyz_dataset(tmp / "m.xyz", mols);
  const std::vector<std::string> common = {"--dataset", tmp / "m.xyz", "--n-features", "3", "--band-limit", "2",
                                           "--seed", "21", "--lambda-grid", "1e-6,1e-3,1"};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), common.begin(), common.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return run(head);
  };

  REQUIRE(with({"sweep"}, {"--axis", "sigma", "--values", "2", "--out", tmp / "one.csv"}).code == 0);
  const auto t = with({"train"}, {"--sigma", "2", "--out", tmp / "b.json"});
  REQUIRE(t.code == 0);
  const auto one = read_csv(tmp / "one.csv");
  REQUIRE(one.size() == 2);
  CHECK(one[0] == std::vector<std::string>{"index", "value", "seed", "status", "lambda", "train_metric", "val_metric",
                                           "test_metric", "error"});
  const auto summary = last_json(t.out);
  CHECK(one[1][2] == "21");
  CHECK(one[1][3] == "ok");
  CHECK(std::stod(one[1][4]) == summary["lambda"].get<double>());
  CHECK(std::stod(one[1][5]) == summary["train_metric"].get<double>());
  CHECK(std::stod(one[1][6]) == summary["val_metric"].get<double>());
  CHECK(std::stod(one[1][7]) == summary["test_metric"].get<double>());

  REQUIRE(with({"sweep"}, {"--axis", "sigma", "--values", "0,1,4", "--out", tmp / "s.csv"}).code == 0);
  const auto rows = read_csv(tmp / "s.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[2][2] == "22");
  CHECK(rows[3][2] == "23");
  // sigma = 0: every feature is sin(0), so the model is the training mean.
  const auto split = make_split(40, {}, 21);
  double mean = 0.0;
  for (auto i : split.train) mean += mols[i].target;
  mean /= static_cast<double>(split.train.size());
  double base = 0.0;
  for (auto i : split.val) base += std::abs(mols[i].target - mean);
  base /= static_cast<double>(split.val.size());
  CHECK(std::stod(rows[1][6]) == doctest::Approx(base).epsilon(1e-12));

  REQUIRE(with({"sweep"}, {"--axis", "sigma", "--values", "0,1,4", "--out", tmp / "s2.csv"}).code == 0);
  CHECK(read_text(tmp / "s.csv") == read_text(tmp / "s2.csv"));

  // A bad point is recorded and the sweep carries on.
  const auto mixed = with({"sweep"}, {"--axis", "L", "--values", "1,-1,2.5,2", "--out", tmp / "l.csv"});
  REQUIRE(mixed.code == 0);
  CHECK(last_json(mixed.out)["failures"] == 2);
  const auto lrows = read_csv(tmp / "l.csv");
  REQUIRE(lrows.size() == 5);
  CHECK(lrows[1][3] == "ok");
  CHECK(lrows[2][3] == "error");
  CHECK_FALSE(lrows[2][8].empty());
  CHECK(lrows[3][3] == "error");
  CHECK(lrows[4][3] == "ok");

  for (const std::string axis : {"radial_scale", "n_features"}) {
    CHECK(with({"sweep"}, {"--axis", axis, "--values", "1,2", "--out", tmp / "x.csv"}).code == 0);
    CHECK(read_csv(tmp / "x.csv")[2][3] == "ok");
  }
  CHECK(with({"sweep"}, {"--axis", "depth", "--values", "1", "--out", tmp / "x.csv"}).code == 2);
}

TEST_CASE("validate") {
  TempDir tmp;
  const auto ok = run({"validate", "--level", "fast", "--seed", "77", "--out", tmp / "v.csv"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  CHECK(ok.out.find("PASS rotation_rule") != std::string::npos);

  // Logged residuals equal a direct recomputation.
  const auto rows = read_csv(tmp / "v.csv");
  std::map<std::string, double> residual;
  for (std::size_t i = 1; i < rows.size(); ++i) residual[rows[i][0]] = std::stod(rows[i][1]);
  const WignerFn plain = [](int l, const EulerAngles<double>& a) { return wigner_D(l, a).matrix(); };
  CHECK(residual.at("rotation_rule") == check_rotation_rule(5, 10, 77, plain).residual);
  CHECK(residual.at("addition_theorem") == check_addition_theorem(10, 78).residual);
  CHECK(residual.at("pcr_full_rank") == check_pcr_full_rank(81).residual);

  const auto bad = run({"validate", "--inject-fault", "wigner-sign"});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("FAIL rotation_rule") != std::string::npos);
  CHECK(json::parse(bad.err)["exit_code"] == 1);
}

TEST_CASE("usage and data errors") {
  TempDir tmp;
  auto code_of = [](std::vector<std::string> args) {
    const auto r = run(std::move(args));
    if (r.code != 0) {
      const auto e = json::parse(r.err);
      CHECK(e["exit_code"] == r.code);
      CHECK(e.contains("error"));
      CHECK(e.contains("message"));
    }
    return r.code;
  };
  CHECK(code_of({}) == 2);
  CHECK(code_of({"frobnicate"}) == 2);
  CHECK(code_of({"featurize", "--dataset", "x", "--out", "y", "--bogus"}) == 2);
  CHECK(code_of({"featurize", "--out", "y"}) == 2);
  CHECK(code_of({"featurize", "--dataset", "x", "--out", "y", "--format", "pdb"}) == 2);
  CHECK(code_of({"train", "--dataset", "x", "--out", "y", "--solver", "qr"}) == 2);
  CHECK(code_of({"featurize", "--dataset", "x", "--out", "y", "--radial-preset", "qm7", "--radial-spec", "1:1"}) == 2);

  write_xyz_dataset(tmp / "m.xyz", molecules(15, 10));
  CHECK(code_of({"featurize", "--dataset", tmp / "m.xyz", "--out", tmp / "f.csv", "--band-limit", "-1"}) == 2);
  CHECK(code_of({"featurize", "--dataset", tmp / "m.xyz", "--out", tmp / "f.csv", "--sigma", "-1"}) == 2);
  CHECK(code_of({"train", "--dataset", tmp / "m.xyz", "--out", tmp / "b.json", "--split", "0.5,0.5"}) == 2);
  CHECK(code_of({"train", "--dataset", tmp / "m.xyz", "--out", tmp / "b.json", "--lambda-grid", "-1"}) == 2);
  CHECK(code_of({"train", "--dataset", tmp / "m.xyz", "--out", tmp / "b.json", "--lambda-grid", "logspace:1:2"}) ==
        2);

  CHECK(code_of({"featurize", "--dataset", tmp / "missing.xyz", "--out", tmp / "f.csv"}) == 3);
  std::ofstream(tmp / "bad.xyz") << "1\nenergy=0\nQq 0 0 0\n";
  const auto r = run({"featurize", "--dataset", tmp / "bad.xyz", "--out", tmp / "f.csv"});
  CHECK(r.code == 3);
  CHECK(json::parse(r.err)["message"].get<std::string>().find("line 3") != std::string::npos);
  std::ofstream(tmp / "empty.xyz") << "";
  CHECK(code_of({"featurize", "--dataset", tmp / "empty.xyz", "--out", tmp / "f.csv"}) == 3);
  CHECK(code_of({"predict", "--bundle", tmp / "m.xyz", "--dataset", tmp / "m.xyz", "--out", tmp / "p.csv"}) == 3);

  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("featurize") != std::string::npos);
}

TEST_CASE("installed binary reports exit codes") {
  TempDir tmp;
  const std::string bin = ROTSIG_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >" + (tmp / "o.txt") + " 2>" + (tmp / "e.txt")).c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status("validate --level fast") == 0);
  CHECK(read_text(tmp / "o.txt").find("PASS") != std::string::npos);
  CHECK(status("validate --inject-fault wigner-sign") == 1);
  CHECK(status("featurize --nope") == 2);
  CHECK(json::parse(read_text(tmp / "e.txt"))["exit_code"] == 2);
  CHECK(status("featurize --dataset /nonexistent.xyz --out " + (tmp / "f.csv")) == 3);

  setenv("ROTSIG_THREADS", "2", 1);
  write_xyz_dataset(tmp / "m.xyz", molecules(16, 2));
  CHECK(status("featurize --n-features 2 --band-limit 1 --dataset " + (tmp / "m.xyz") + " --out " + (tmp / "f.csv")) ==
        0);
  CHECK(json::parse(read_text(tmp / "o.txt"))["threads"] == 2);
  unsetenv("ROTSIG_THREADS");
}
