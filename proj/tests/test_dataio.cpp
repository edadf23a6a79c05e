#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "rotsig/dataio.hpp"
#include "rotsig/error.hpp"
#include "support.hpp"

using namespace rotsig;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rotsig_dataio_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<MoleculeRecord> random_molecules(std::mt19937_64& rng, int count) {
  const int elements[] = {1, 6, 7, 8, 16};
  std::uniform_int_distribution<int> atoms(1, 12);
  std::uniform_int_distribution<int> pick(0, 4);
  std::normal_distribution<double> n(0.0, 2.0);
  std::vector<MoleculeRecord> out;
  for (int i = 0; i < count; ++i) {
    MoleculeRecord r;
    r.id = "m" + std::to_string(i);
    r.target = n(rng) * 1e3 / 7.0;
    const int na = atoms(rng);
    for (int a = 0; a < na; ++a) {
      r.charges.push_back(elements[pick(rng)]);
      r.coordinates.emplace_back(n(rng), n(rng), n(rng) * 1e-7);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("element table") {
  CHECK(element_charge("H") == 1);
  CHECK(element_charge("C") == 6);
  CHECK(element_charge("Cl") == 17);
  CHECK(element_charge("8") == 8);
  CHECK(element_charge("Xx") == 0);
  CHECK(element_charge("h") == 0);
  for (int z = 1; z <= 118; ++z) CHECK(element_charge(element_symbol(z)) == z);
}

TEST_CASE("xyz parsing") {
  std::istringstream empty("");
  CHECK(read_xyz(empty).empty());

  std::istringstream one("1\nenergy=-13.6\nH 0 0 0\n");
  const auto recs = read_xyz(one);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].id == "mol0");
  CHECK(recs[0].target == -13.6);
  CHECK(recs[0].charges == std::vector<int>{1});
  CHECK(recs[0].coordinates[0].isZero(0.0));

  std::istringstream two("2\nid=water-frag energy=1.5 extra\nO 0 0 0 0.1\nH 0.96 0 0\n\n1\r\nenergy=2\r\nC 1 2 3\r\n");
  const auto both = read_xyz(two);
  REQUIRE(both.size() == 2);
  CHECK(both[0].id == "water-frag");
  CHECK(both[0].charges == std::vector<int>{8, 1});
  CHECK(both[1].id == "mol1");
  CHECK(both[1].coordinates[0] == Eigen::Vector3d(1, 2, 3));
  CHECK(charge_vocabulary(both) == std::vector<int>{1, 6, 8});
}

TEST_CASE("xyz errors carry line numbers") {
  auto parse = [](const std::string& text) {
    return error_of([&] {
      std::istringstream in(text);
      read_xyz(in);
    });
  };
  CHECK(parse("1\nenergy=0\nXq 0 0 0\n").find("line 3: unknown element") != std::string::npos);
  CHECK(parse("1\nid=a\nH 0 0 0\n").find("line 2") != std::string::npos);
  CHECK(parse("2\nenergy=0\nH 0 0 0\n").find("line 4") != std::string::npos);
  CHECK(parse("1\nenergy=0\nH 0 zero 0\n").find("line 3: non-numeric") != std::string::npos);
  CHECK(parse("x\n").find("line 1") != std::string::npos);
  CHECK(parse("1\nenergy=nan\nH 0 0 0\n").find("line 2") != std::string::npos);
  CHECK(parse("1\nenergy=0\nH 0 0\n").find("line 3") != std::string::npos);
  CHECK_THROWS_AS(read_xyz_dataset("/nonexistent/file.xyz"), DataError);
}

TEST_CASE("xyz round trip is exact") {
  TempDir tmp;
  std::mt19937_64 rng(11);
  const auto recs = random_molecules(rng, 50);
  write_xyz_dataset(tmp.path / "a.xyz", recs);
  const auto back = read_xyz_dataset(tmp.path / "a.xyz");
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].id == recs[i].id);
    CHECK(back[i].target == recs[i].target);
    CHECK(back[i].charges == recs[i].charges);
    CHECK(back[i].coordinates == recs[i].coordinates);
  }
  write_xyz_dataset(tmp.path / "b.xyz", back);
  CHECK(read_text(tmp.path / "a.xyz") == read_text(tmp.path / "b.xyz"));
}

TEST_CASE("reference energies") {
  std::vector<MoleculeRecord> recs(1);
  recs[0].charges = {1, 1, 8};
  recs[0].coordinates.resize(3, Eigen::Vector3d::Zero());
  recs[0].target = -10.0;
  subtract_reference_energies(recs, {{1, -0.5}, {8, -2.0}});
  CHECK(recs[0].target == doctest::Approx(-7.0).epsilon(1e-15));
  CHECK_THROWS_AS(subtract_reference_energies(recs, {{1, -0.5}}), DataError);
}

TEST_CASE("point cloud parsing") {
  std::istringstream empty("\n\n");
  CHECK(read_pointclouds(empty).empty());

  std::istringstream three("chair_01 4 3\n1 0 0\n0 1 0\n0 0 1\n");
  const auto recs = read_pointclouds(three);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].id == "chair_01");
  CHECK(recs[0].label == 4);
  CHECK(recs[0].points.size() == 3);
  CHECK(recs[0].points[1] == Eigen::Vector3d(0, 1, 0));

  auto parse = [](const std::string& text) {
    return error_of([&] {
      std::istringstream in(text);
      read_pointclouds(in);
    });
  };
  CHECK(parse("a 1\n").find("line 1") != std::string::npos);
  CHECK(parse("a 1 2\n0 0 0\n").find("line 3") != std::string::npos);
  CHECK(parse("a 1 1\n0 0\n").find("line 2") != std::string::npos);
  CHECK(parse("a b 1\n0 0 0\n").find("line 1") != std::string::npos);
}

TEST_CASE("point cloud round trip and unit-ball normalisation") {
  TempDir tmp;
  std::mt19937_64 rng(12);
  std::vector<ShapeRecord> shapes;
  for (int i = 0; i < 20; ++i) {
    ShapeRecord s;
    s.id = "s" + std::to_string(i);
    s.label = i % 5;
    for (const auto& p : testing::random_cloud(rng, 1 + i * 3, 7.0)) s.points.push_back(p + Eigen::Vector3d(3, -1, 2));
    shapes.push_back(std::move(s));
  }
  write_pointcloud_dataset(tmp.path / "s.txt", shapes);
  const auto back = read_pointcloud_dataset(tmp.path / "s.txt");
  REQUIRE(back.size() == shapes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    CHECK(back[i].id == shapes[i].id);
    CHECK(back[i].label == shapes[i].label);
    CHECK(back[i].points == shapes[i].points);
  }

  const auto unit = read_pointcloud_dataset(tmp.path / "s.txt", true);
  for (const auto& s : unit) {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    double radius = 0.0;
    for (const auto& p : s.points) {
      centroid += p;
      radius = std::max(radius, p.norm());
    }
    centroid /= static_cast<double>(s.points.size());
    CHECK(centroid.norm() < 1e-12);
    if (s.points.size() > 1) CHECK(radius == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("split fractions") {
  const auto f = parse_split("0.8,0.1,0.1");
  CHECK(f.train == 0.8);
  CHECK(f.val == 0.1);
  CHECK(f.test == 0.1);
  CHECK_THROWS_AS(parse_split("0.8,0.1"), ConfigError);
  CHECK_THROWS_AS(parse_split("0.8,0.1,0.2"), ConfigError);
  CHECK_THROWS_AS(parse_split("1.1,-0.1,0"), ConfigError);
  CHECK_THROWS_AS(parse_split("a,b,c"), ConfigError);
  CHECK_NOTHROW(parse_split("1,0,0"));
}

TEST_CASE("splits are seeded partitions") {
  const auto s = make_split(10, {0.8, 0.1, 0.1}, 7);
  CHECK(s.train.size() == 8);
  CHECK(s.val.size() == 1);
  CHECK(s.test.size() == 1);

  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> sizes(0, 300);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = sizes(rng);
    const SplitFractions f{0.7, 0.2, 0.1};
    const auto a = make_split(n, f, t);
    const auto b = make_split(n, f, t);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.test == b.test);
    std::set<std::size_t> all(a.train.begin(), a.train.end());
    all.insert(a.val.begin(), a.val.end());
    all.insert(a.test.begin(), a.test.end());
    CHECK(all.size() == n);
    CHECK(a.train.size() + a.val.size() + a.test.size() == n);
    if (n > 0) CHECK(*all.rbegin() == n - 1);
    CHECK(std::abs(static_cast<double>(a.train.size()) - 0.7 * static_cast<double>(n)) <= 0.5);
  }
  CHECK(make_split(100, {}, 1).train != make_split(100, {}, 2).train);

  // Every index lands first roughly uniformly often.
  std::vector<int> first(5, 0);
  for (int seed = 0; seed < 5000; ++seed) ++first[make_split(5, {1, 0, 0}, seed).train[0]];
  for (int c : first) CHECK(std::abs(c - 1000) < 150);
}

TEST_CASE("base64 arrays") {
  const std::vector<double> v = {0.0, -0.0, 1.5, 1e-308, -3.25e200, 0.1};
  const auto back = decode_f64(encode_f64(v));
  REQUIRE(back.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::bit_cast<std::uint64_t>(back[i]) == std::bit_cast<std::uint64_t>(v[i]));
  CHECK(encode_f64(std::vector<double>{1.0}) == "AAAAAAAA8D8=");
  CHECK(decode_f64("").empty());
  CHECK_THROWS_AS(decode_f64("!!!"), DataError);
  CHECK(crc32_of(v) != crc32_of(std::vector<double>{0.0, 0.0, 1.5, 1e-308, -3.25e200, 0.1}));
}

namespace {

ModelBundle regression_bundle() {
  ModelBundle b;
  b.config.band_limit = 3;
  b.config.n_features = 12;
  b.config.seed = 99;
  b.vocab = {1, 6, 8};
  b.solver = "lsqr";
  b.lambda = 1e-4;
  b.target_mean = -4.25;
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n;
  b.beta.resize(12 * 9);
  for (auto& x : b.beta) x = n(rng);
  b.notes["trained_on"] = "unit";
  return b;
}

}  // namespace

TEST_CASE("bundle round trip") {
  TempDir tmp;
  const ModelBundle reg = regression_bundle();
  save_bundle(tmp.path / "r.json", reg);
  CHECK(load_bundle(tmp.path / "r.json") == reg);

  ModelBundle cls;
  cls.task = "classification";
  cls.data_format = "pointcloud";
  cls.normalize_shapes = true;
  cls.config.radial = RadialBasis::modelnet();
  cls.config.normalize_mass = true;
  cls.config.n_features = 5;
  cls.classifier.labels = {2, 5, 9};
  cls.classifier.lambda = 0.5;
  cls.classifier.weights = Eigen::MatrixXd::Random(3, 5);
  cls.classifier.intercepts = Eigen::Vector3d(0.1, -0.2, 0.3);
  save_bundle(tmp.path / "c.json", cls);
  CHECK(load_bundle(tmp.path / "c.json") == cls);
}

TEST_CASE("bundle corruption is detected") {
  TempDir tmp;
  const fs::path p = tmp.path / "r.json";
  save_bundle(p, regression_bundle());
  const auto doc = nlohmann::json::parse(read_text(p));

  auto with = [&](const std::function<void(nlohmann::json&)>& edit) {
    auto d = doc;
    edit(d);
    write_text(p, d.dump());
    return error_of([&] { load_bundle(p); });
  };
  CHECK(with([](auto& d) { d["version"] = 2; }).find("version 2") != std::string::npos);
  CHECK(with([](auto& d) { d["format"] = "other"; }).find("not a rotsig bundle") != std::string::npos);
  CHECK(with([](auto& d) {
          auto data = d["beta"]["data"].template get<std::string>();
          data[5] = data[5] == 'A' ? 'B' : 'A';
          d["beta"]["data"] = data;
        }).find("checksum") != std::string::npos);
  CHECK(with([](auto& d) { d["rng"]["seed"] = 100; }).find("random weights") != std::string::npos);
  CHECK(with([](auto& d) { d["rng"]["algorithm"] = "mt"; }).find("algorithm") != std::string::npos);
  CHECK(with([](auto& d) { d["feature_config"]["band_limit"] = -1; }).find("invalid feature configuration") !=
        std::string::npos);
  CHECK(with([](auto& d) { d.erase("beta"); }).find("malformed") != std::string::npos);
  write_text(p, "{ not json");
  CHECK_THROWS_AS(load_bundle(p), DataError);
  CHECK_THROWS_AS(load_bundle(tmp.path / "missing.json"), DataError);
}

TEST_CASE("loaded bundles predict identically") {
  TempDir tmp;
  const ModelBundle b = regression_bundle();
  save_bundle(tmp.path / "r.json", b);
  const ModelBundle loaded = load_bundle(tmp.path / "r.json");

  std::mt19937_64 rng(15);
  auto mols = random_molecules(rng, 10);
  std::vector<LabeledPointCloud> clouds;
  for (auto& m : mols) {
    for (auto& z : m.charges) z = b.vocab[static_cast<std::size_t>(z) % 3];
    clouds.push_back(m.cloud());
  }
  const auto before = element_feature_matrix(clouds, sample_random_weights(b.config), b.vocab);
  const auto after = element_feature_matrix(clouds, sample_random_weights(loaded.config), loaded.vocab);
  const Eigen::VectorXd p0 = predict_regression(b.beta, before.values, b.target_mean);
  const Eigen::VectorXd p1 = predict_regression(loaded.beta, after.values, loaded.target_mean);
  CHECK(p0 == p1);
}

TEST_CASE("feature matrix csv") {
  TempDir tmp;
  FeatureMatrix fm;
  fm.values = Eigen::MatrixXd(2, 2);
  fm.values << 0.1, -2, 3e-20, 4;
  fm.row_ids = {"a", "b"};
  fm.columns = {{0, std::pair{1, 6}}, {1, std::nullopt}};
  write_feature_matrix(tmp.path / "f.csv", fm);
  const std::string csv = read_text(tmp.path / "f.csv");
  CHECK(csv.rfind("id,c0,c1\n", 0) == 0);
  CHECK(csv.find("a,0.10000000000000001,-2\n") != std::string::npos);
  CHECK(csv.find("b,3.0000000000000003e-20,4\n") != std::string::npos);
  const std::string cols = read_text(tmp.path / "f.csv.columns.csv");
  CHECK(cols.rfind("column,function,charge1,charge2\n", 0) == 0);
  CHECK(cols.find("0,0,1,6\n") != std::string::npos);
  CHECK(cols.find("1,1,,\n") != std::string::npos);
}
