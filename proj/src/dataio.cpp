#include "rotsig/dataio.hpp"

#include <sodium.h>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rotsig/error.hpp"

namespace rotsig {

namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, 118> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar",
    "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
    "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe",
    "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
    "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
    "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

[[noreturn]] void fail_at(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view tok, std::size_t line_no, std::string_view what) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail_at(line_no, "non-numeric " + std::string(what) + " '" + std::string(tok) + "'");
  }
  return v;
}

long long parse_int(std::string_view tok, std::size_t line_no, std::string_view what) {
  long long v = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) fail_at(line_no, "malformed " + std::string(what) + " '" + std::string(tok) + "'");
  return v;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  /// Next non-blank line.
  bool next_content(std::string& line) {
    while (next(line)) {
      if (!blank(line)) return true;
    }
    return false;
  }
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

json array_to_json(std::span<const double> values, std::vector<Eigen::Index> shape) {
  return json{{"shape", shape}, {"crc32", hex32(crc32_of(values))}, {"data", encode_f64(values)}};
}

std::vector<double> array_from_json(const json& j, std::string_view name, std::size_t expected) {
  const std::vector<double> values = decode_f64(j.at("data").get<std::string>());
  if (hex32(crc32_of(values)) != j.at("crc32").get<std::string>()) {
    throw DataError("bundle checksum mismatch in '" + std::string(name) + "'");
  }
  if (values.size() != expected) throw DataError("bundle array '" + std::string(name) + "' has the wrong size");
  return values;
}

std::uint32_t random_weights_crc(const FeatureConfig& config) {
  const RandomFunctionSet rfs = sample_random_weights(config);
  return crc32_of({rfs.weights().data(), static_cast<std::size_t>(rfs.weights().size())});
}

}  // namespace

int element_charge(std::string_view symbol) {
  for (std::size_t i = 0; i < kElements.size(); ++i) {
    if (kElements[i] == symbol) return static_cast<int>(i) + 1;
  }
  int z = 0;
  auto [ptr, ec] = std::from_chars(symbol.data(), symbol.data() + symbol.size(), z);
  if (ec == std::errc() && ptr == symbol.data() + symbol.size() && z >= 1 && z <= 118) return z;
  return 0;
}

std::string element_symbol(int charge) {
  if (charge < 1 || charge > static_cast<int>(kElements.size())) return std::to_string(charge);
  return std::string(kElements[charge - 1]);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<MoleculeRecord> read_xyz(std::istream& in) {
  std::vector<MoleculeRecord> records;
  LineReader reader(in);
  std::string line;
  while (reader.next_content(line)) {
    const auto count_tok = split_ws(line);
    if (count_tok.size() != 1) fail_at(reader.line_no(), "expected an atom count");
    const long long count = parse_int(count_tok[0], reader.line_no(), "atom count");
    if (count < 1) fail_at(reader.line_no(), "atom count must be positive");

    if (!reader.next(line)) fail_at(reader.line_no() + 1, "missing property line");
    MoleculeRecord rec;
    rec.id = "mol" + std::to_string(records.size());
    bool have_energy = false;
    for (auto tok : split_ws(line)) {
      const auto eq = tok.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = tok.substr(0, eq);
      const auto value = tok.substr(eq + 1);
      if (key == "energy") {
        rec.target = parse_double(value, reader.line_no(), "energy");
        have_energy = true;
      } else if (key == "id") {
        rec.id = std::string(value);
      }
    }
    if (!have_energy) fail_at(reader.line_no(), "property line has no energy=");

    for (long long a = 0; a < count; ++a) {
      if (!reader.next(line)) fail_at(reader.line_no() + 1, "expected " + std::to_string(count) + " atom lines");
      const auto tok = split_ws(line);
      if (tok.size() < 4) fail_at(reader.line_no(), "atom line needs element and three coordinates");
      const int z = element_charge(tok[0]);
      if (z == 0) fail_at(reader.line_no(), "unknown element '" + std::string(tok[0]) + "'");
      rec.charges.push_back(z);
      rec.coordinates.emplace_back(parse_double(tok[1], reader.line_no(), "coordinate"),
                                   parse_double(tok[2], reader.line_no(), "coordinate"),
                                   parse_double(tok[3], reader.line_no(), "coordinate"));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<MoleculeRecord> read_xyz_dataset(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_xyz(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_xyz(std::ostream& out, std::span<const MoleculeRecord> records) {
  for (const auto& rec : records) {
    if (rec.charges.size() != rec.coordinates.size()) throw DataError("record '" + rec.id + "' has mismatched lengths");
    if (rec.id.find_first_of(" \t\n") != std::string::npos) throw DataError("record id contains whitespace");
    out << rec.charges.size() << "\n";
    out << "id=" << rec.id << " energy=" << format_double(rec.target) << "\n";
    for (std::size_t a = 0; a < rec.charges.size(); ++a) {
      const auto& x = rec.coordinates[a];
      out << element_symbol(rec.charges[a]) << ' ' << format_double(x.x()) << ' ' << format_double(x.y()) << ' '
          << format_double(x.z()) << "\n";
    }
  }
}

void write_xyz_dataset(const std::filesystem::path& path, std::span<const MoleculeRecord> records) {
  auto out = open_out(path);
  write_xyz(out, records);
}

std::vector<int> charge_vocabulary(std::span<const MoleculeRecord> records) {
  std::set<int> s;
  for (const auto& r : records) s.insert(r.charges.begin(), r.charges.end());
  return {s.begin(), s.end()};
}

void subtract_reference_energies(std::vector<MoleculeRecord>& records, const std::map<int, double>& references) {
  for (auto& rec : records) {
    for (int z : rec.charges) {
      const auto it = references.find(z);
      if (it == references.end()) {
        throw DataError("no reference energy for element " + element_symbol(z) + " in '" + rec.id + "'");
      }
      rec.target -= it->second;
    }
  }
}

void normalize_to_unit_ball(ShapeRecord& shape) {
  if (shape.points.empty()) return;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : shape.points) centroid += p;
  centroid /= static_cast<double>(shape.points.size());
  double radius = 0.0;
  for (auto& p : shape.points) {
    p -= centroid;
    radius = std::max(radius, p.norm());
  }
  if (radius > 0.0) {
    for (auto& p : shape.points) p /= radius;
  }
}

std::vector<ShapeRecord> read_pointclouds(std::istream& in, bool normalize) {
  std::vector<ShapeRecord> records;
  LineReader reader(in);
  std::string line;
  while (reader.next_content(line)) {
    const auto head = split_ws(line);
    if (head.size() != 3) fail_at(reader.line_no(), "expected header 'id class N'");
    ShapeRecord rec;
    rec.id = std::string(head[0]);
    rec.label = static_cast<int>(parse_int(head[1], reader.line_no(), "class label"));
    const long long n = parse_int(head[2], reader.line_no(), "point count");
    if (n < 0) fail_at(reader.line_no(), "point count must be >= 0");
    rec.points.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
      if (!reader.next(line)) fail_at(reader.line_no() + 1, "expected " + std::to_string(n) + " point lines");
      const auto tok = split_ws(line);
      if (tok.size() != 3) fail_at(reader.line_no(), "point line needs three coordinates");
      rec.points.emplace_back(parse_double(tok[0], reader.line_no(), "coordinate"),
                              parse_double(tok[1], reader.line_no(), "coordinate"),
                              parse_double(tok[2], reader.line_no(), "coordinate"));
    }
    if (normalize) normalize_to_unit_ball(rec);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ShapeRecord> read_pointcloud_dataset(const std::filesystem::path& path, bool normalize) {
  auto in = open_in(path);
  try {
    return read_pointclouds(in, normalize);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_pointclouds(std::ostream& out, std::span<const ShapeRecord> records) {
  for (const auto& rec : records) {
    if (rec.id.empty() || rec.id.find_first_of(" \t\n") != std::string::npos) {
      throw DataError("shape id must be a non-empty token");
    }
    out << rec.id << ' ' << rec.label << ' ' << rec.points.size() << "\n";
    for (const auto& p : rec.points) {
      out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << "\n";
    }
  }
}

void write_pointcloud_dataset(const std::filesystem::path& path, std::span<const ShapeRecord> records) {
  auto out = open_out(path);
  write_pointclouds(out, records);
}

SplitFractions parse_split(std::string_view text) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto tok = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ConfigError("split must be three comma-separated fractions, got '" + std::string(text) + "'");
    }
    parts.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (parts.size() != 3) throw ConfigError("split must have exactly three fractions");
  SplitFractions f{parts[0], parts[1], parts[2]};
  if (f.train < 0.0 || f.val < 0.0 || f.test < 0.0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-12) {
    throw ConfigError("split fractions must be >= 0 and sum to 1");
  }
  return f;
}

SplitSpec make_split(std::size_t n, SplitFractions fractions, std::uint64_t seed) {
  if (fractions.train < 0.0 || fractions.val < 0.0 || fractions.test < 0.0 ||
      std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-12) {
    throw ConfigError("split fractions must be >= 0 and sum to 1");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  // The engine output is fully specified; the index draw is done by hand so the
  // permutation does not depend on the standard library's distributions.
  std::mt19937_64 engine(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(engine() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  const auto dn = static_cast<double>(n);
  const std::size_t n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(fractions.train * dn)));
  const std::size_t n_val =
      std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(fractions.val * dn)));
  SplitSpec spec;
  spec.seed = seed;
  spec.fractions = fractions;
  spec.train.assign(perm.begin(), perm.begin() + n_train);
  spec.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  spec.test.assign(perm.begin() + n_train + n_val, perm.end());
  return spec;
}

std::uint32_t crc32_of(std::span<const double> values) {
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto u = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(u >> (8 * b));
  }
  return static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::string encode_f64(std::span<const double> values) {
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto u = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(u >> (8 * b));
  }
  const std::size_t len = sodium_base64_encoded_len(bytes.size(), sodium_base64_VARIANT_ORIGINAL);
  std::string out(len, '\0');
  sodium_bin2base64(out.data(), len, bytes.data(), bytes.size(), sodium_base64_VARIANT_ORIGINAL);
  out.resize(len - 1);
  return out;
}

std::vector<double> decode_f64(std::string_view base64) {
  std::vector<unsigned char> bytes(base64.size() / 4 * 3 + 3);
  std::size_t len = 0;
  if (sodium_base642bin(bytes.data(), bytes.size(), base64.data(), base64.size(), nullptr, &len, nullptr,
                        sodium_base64_VARIANT_ORIGINAL) != 0 ||
      len % 8 != 0) {
    throw DataError("corrupt base64 array in bundle");
  }
  std::vector<double> values(len / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    values[i] = std::bit_cast<double>(u);
  }
  return values;
}

bool operator==(const ModelBundle& a, const ModelBundle& b) {
  const auto& ca = a.classifier;
  const auto& cb = b.classifier;
  return a.version == b.version && a.config == b.config && a.rng_algorithm == b.rng_algorithm && a.task == b.task &&
         a.data_format == b.data_format && a.vocab == b.vocab && a.normalize_shapes == b.normalize_shapes &&
         a.solver == b.solver && a.lambda == b.lambda && a.beta.size() == b.beta.size() && a.beta == b.beta &&
         ca.weights.rows() == cb.weights.rows() && ca.weights.cols() == cb.weights.cols() &&
         ca.weights == cb.weights && ca.intercepts.size() == cb.intercepts.size() && ca.intercepts == cb.intercepts &&
         ca.labels == cb.labels && ca.lambda == cb.lambda && a.target_mean == b.target_mean && a.notes == b.notes;
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
  const FeatureConfig& c = bundle.config;
  json radial = json::array();
  for (const auto& g : c.radial.gaussians()) radial.push_back({{"center", g.center}, {"width", g.width}});

  json doc;
  doc["format"] = kBundleFormat;
  doc["version"] = bundle.version;
  doc["feature_config"] = {{"band_limit", c.band_limit},
                           {"weight_sigma", c.weight_sigma},
                           {"n_features", c.n_features},
                           {"normalize_mass", c.normalize_mass}};
  doc["radial_basis"] = radial;
  doc["rng"] = {{"algorithm", bundle.rng_algorithm},
                {"seed", c.seed},
                {"weights_crc32", hex32(random_weights_crc(c))}};
  doc["task"] = bundle.task;
  doc["data_format"] = bundle.data_format;
  doc["vocab"] = bundle.vocab;
  doc["normalize_shapes"] = bundle.normalize_shapes;
  doc["solver"] = bundle.solver;
  doc["lambda"] = bundle.lambda;
  doc["target_mean"] = bundle.target_mean;
  doc["notes"] = bundle.notes;
  if (bundle.task == "classification") {
    const auto& cw = bundle.classifier;
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = cw.weights;
    doc["classifier"] = {{"labels", cw.labels},
                         {"lambda", cw.lambda},
                         {"weights", array_to_json({w.data(), static_cast<std::size_t>(w.size())}, {w.rows(), w.cols()})},
                         {"intercepts", array_to_json({cw.intercepts.data(), static_cast<std::size_t>(cw.intercepts.size())},
                                                      {cw.intercepts.size()})}};
  } else {
    doc["beta"] = array_to_json({bundle.beta.data(), static_cast<std::size_t>(bundle.beta.size())}, {bundle.beta.size()});
  }
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  auto in = open_in(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": not a bundle document (" + e.what() + ")");
  }
  try {
    if (doc.value("format", std::string()) != kBundleFormat) throw DataError("not a rotsig bundle");
    const int version = doc.at("version").get<int>();
    if (version != kBundleVersion) {
      throw DataError("bundle version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kBundleVersion) + ")");
    }
    ModelBundle b;
    b.version = version;
    const auto& fc = doc.at("feature_config");
    std::vector<Gaussian> gaussians;
    for (const auto& g : doc.at("radial_basis")) gaussians.push_back({g.at("center"), g.at("width")});
    b.config.band_limit = fc.at("band_limit");
    b.config.weight_sigma = fc.at("weight_sigma");
    b.config.n_features = fc.at("n_features");
    b.config.normalize_mass = fc.at("normalize_mass");
    b.config.radial = RadialBasis(std::move(gaussians));
    b.config.seed = doc.at("rng").at("seed").get<std::uint64_t>();
    b.rng_algorithm = doc.at("rng").at("algorithm");
    if (b.rng_algorithm != kRngAlgorithm) throw DataError("unsupported random-weight algorithm '" + b.rng_algorithm + "'");
    b.config.validate();
    if (hex32(random_weights_crc(b.config)) != doc.at("rng").at("weights_crc32").get<std::string>()) {
      throw DataError("regenerated random weights do not match the recorded checksum");
    }
    b.task = doc.at("task");
    b.data_format = doc.at("data_format");
    b.vocab = doc.at("vocab").get<std::vector<int>>();
    b.normalize_shapes = doc.at("normalize_shapes");
    b.solver = doc.at("solver");
    b.lambda = doc.at("lambda");
    b.target_mean = doc.at("target_mean");
    b.notes = doc.at("notes").get<std::map<std::string, std::string>>();
    if (b.task == "classification") {
      const auto& cj = doc.at("classifier");
      auto& cw = b.classifier;
      cw.labels = cj.at("labels").get<std::vector<int>>();
      cw.lambda = cj.at("lambda");
      const auto shape = cj.at("weights").at("shape").get<std::vector<Eigen::Index>>();
      if (shape.size() != 2) throw DataError("classifier weights must be two-dimensional");
      const auto w = array_from_json(cj.at("weights"), "weights", static_cast<std::size_t>(shape[0] * shape[1]));
      cw.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          w.data(), shape[0], shape[1]);
      const auto ic = array_from_json(cj.at("intercepts"), "intercepts", static_cast<std::size_t>(shape[0]));
      cw.intercepts = Eigen::Map<const Eigen::VectorXd>(ic.data(), shape[0]);
      if (cw.labels.size() != static_cast<std::size_t>(shape[0])) throw DataError("classifier label count mismatch");
    } else if (b.task == "regression") {
      const auto shape = doc.at("beta").at("shape").get<std::vector<Eigen::Index>>();
      if (shape.size() != 1) throw DataError("beta must be one-dimensional");
      const auto beta = array_from_json(doc.at("beta"), "beta", static_cast<std::size_t>(shape[0]));
      b.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), shape[0]);
    } else {
      throw DataError("unknown task '" + b.task + "'");
    }
    return b;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed bundle (" + e.what() + ")");
  } catch (const ConfigError& e) {
    throw DataError(path.string() + ": invalid feature configuration (" + e.what() + ")");
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& fm) {
  auto out = open_out(path);
  out << "id";
  for (std::size_t c = 0; c < fm.columns.size(); ++c) out << ",c" << c;
  out << "\n";
  for (Eigen::Index i = 0; i < fm.values.rows(); ++i) {
    out << (static_cast<std::size_t>(i) < fm.row_ids.size() ? fm.row_ids[i] : std::to_string(i));
    for (Eigen::Index j = 0; j < fm.values.cols(); ++j) out << ',' << format_double(fm.values(i, j));
    out << "\n";
  }
  auto meta = open_out(path.string() + ".columns.csv");
  meta << "column,function,charge1,charge2\n";
  for (std::size_t c = 0; c < fm.columns.size(); ++c) {
    const auto& col = fm.columns[c];
    meta << c << ',' << col.function << ',';
    if (col.charges) {
      meta << col.charges->first << ',' << col.charges->second;
    } else {
      meta << ',';
    }
    meta << "\n";
  }
}

}  // namespace rotsig
