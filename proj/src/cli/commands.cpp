#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rotsig/cli.hpp"
#include "rotsig/dataio.hpp"
#include "rotsig/error.hpp"
#include "rotsig/features.hpp"
#include "rotsig/parallel.hpp"
#include "rotsig/solvers.hpp"
#include "rotsig/validation.hpp"

namespace rotsig {

namespace {

using json = nlohmann::json;

std::vector<std::string> split_list(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid " + what + " '" + s + "'");
  }
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split_list(text)) out.push_back(to_double(tok, what));
  if (out.empty()) throw ConfigError("empty " + what + " list");
  return out;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(std::pow(10.0, n == 1 ? lo : lo + (hi - lo) * i / (n - 1)));
  return out;
}

/// "a,b,c" or "logspace:lo:hi:n" (exponents of ten).
std::vector<double> parse_lambda_grid(const std::string& text) {
  if (text.rfind("logspace:", 0) == 0) {
    const auto parts = split_list(text.substr(9), ':');
    if (parts.size() != 3) throw ConfigError("lambda grid must look like logspace:lo:hi:n");
    const double n = to_double(parts[2], "lambda count");
    if (n < 1 || n != std::floor(n)) throw ConfigError("lambda count must be a positive integer");
    return logspace(to_double(parts[0], "exponent"), to_double(parts[1], "exponent"), static_cast<int>(n));
  }
  auto grid = parse_doubles(text, "lambda");
  for (double l : grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambda values must be finite and >= 0");
  }
  return grid;
}

/// "center:width,center:width,..."
RadialBasis parse_radial_spec(const std::string& text) {
  std::vector<Gaussian> g;
  for (const auto& item : split_list(text)) {
    const auto parts = split_list(item, ':');
    if (parts.size() != 2) throw ConfigError("radial spec entries must be center:width");
    g.push_back({to_double(parts[0], "radial center"), to_double(parts[1], "radial width")});
  }
  return RadialBasis(std::move(g));
}

struct FeatureOptions {
  std::string dataset;
  std::string format = "xyz";
  int band_limit = 5;
  int n_features = 2000;
  double sigma = 2.0;
  std::string radial_preset;
  std::string radial_spec;
  std::uint64_t seed = 0;
  int threads = 0;
  bool normalize_mass = false;
  bool normalize_mass_given = false;
  bool normalize_shapes = false;
  std::string vocab;
};

void add_feature_options(CLI::App* app, FeatureOptions& o, bool dataset_required) {
  auto* ds = app->add_option("--dataset", o.dataset, "input dataset");
  if (dataset_required) ds->required();
  app->add_option("--format", o.format, "dataset format")->check(CLI::IsMember({"xyz", "pointcloud"}));
  app->add_option("--band-limit", o.band_limit, "maximum harmonic degree L");
  app->add_option("--n-features", o.n_features, "number of random functions D");
  app->add_option("--sigma", o.sigma, "standard deviation of the random weights");
  auto* preset = app->add_option("--radial-preset", o.radial_preset, "radial basis preset")
                     ->check(CLI::IsMember({"qm7", "modelnet"}));
  app->add_option("--radial-spec", o.radial_spec, "radial Gaussians as center:width,...")->excludes(preset);
  app->add_option("--seed", o.seed, "random-weight seed");
  app->add_option("--threads", o.threads, "worker threads (default: ROTSIG_THREADS or all cores)");
  app->add_flag("--normalize-mass", o.normalize_mass, "weight each point by 1/N (default: on for point clouds)")
      ->each([&o](const std::string&) { o.normalize_mass_given = true; });
  app->add_flag("--normalize-shapes", o.normalize_shapes, "centre point clouds and scale into the unit ball");
  app->add_option("--vocab", o.vocab, "charge vocabulary, e.g. 1,6,7,8,16 (default: from the dataset)");
}

FeatureConfig make_config(const FeatureOptions& o) {
  FeatureConfig c;
  c.band_limit = o.band_limit;
  c.n_features = o.n_features;
  c.weight_sigma = o.sigma;
  c.seed = o.seed;
  c.normalize_mass = o.normalize_mass_given ? o.normalize_mass : o.format == "pointcloud";
  if (!o.radial_spec.empty()) {
    c.radial = parse_radial_spec(o.radial_spec);
  } else {
    c.radial = RadialBasis::preset(o.radial_preset.empty() ? (o.format == "xyz" ? "qm7" : "modelnet") : o.radial_preset);
  }
  c.validate();
  return c;
}

struct Dataset {
  std::string format;
  std::vector<MoleculeRecord> molecules;
  std::vector<ShapeRecord> shapes;

  std::size_t size() const { return format == "xyz" ? molecules.size() : shapes.size(); }
  std::string id(std::size_t i) const { return format == "xyz" ? molecules[i].id : shapes[i].id; }
  double target(std::size_t i) const {
    return format == "xyz" ? molecules[i].target : static_cast<double>(shapes[i].label);
  }
  std::size_t points(std::size_t i) const {
    return format == "xyz" ? molecules[i].coordinates.size() : shapes[i].points.size();
  }
};

Dataset load_dataset(const std::string& path, const std::string& format, bool normalize_shapes) {
  Dataset d;
  d.format = format;
  if (format == "xyz") {
    d.molecules = read_xyz_dataset(path);
  } else {
    d.shapes = read_pointcloud_dataset(path, normalize_shapes);
  }
  if (d.size() == 0) throw DataError("dataset '" + path + "' is empty");
  return d;
}

std::vector<int> resolve_vocab(const FeatureOptions& o, const Dataset& d) {
  if (d.format != "xyz") return {};
  if (o.vocab.empty()) return charge_vocabulary(d.molecules);
  std::vector<int> v;
  for (const auto& tok : split_list(o.vocab)) {
    const double z = to_double(tok, "charge");
    if (z < 1 || z != std::floor(z)) throw ConfigError("vocabulary entries must be positive integers");
    v.push_back(static_cast<int>(z));
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

FeatureMatrix featurize(const Dataset& d, const RandomFunctionSet& rfs, const std::vector<int>& vocab, int threads,
                        EncodingStats* stats = nullptr) {
  FeatureMatrix fm;
  if (d.format == "xyz") {
    std::vector<LabeledPointCloud> mols;
    for (const auto& m : d.molecules) mols.push_back(m.cloud());
    fm = element_feature_matrix(mols, rfs, vocab, threads, stats);
  } else {
    std::vector<PointCloud> clouds;
    for (const auto& s : d.shapes) clouds.push_back(s.cloud(rfs.config().normalize_mass));
    fm = feature_matrix(clouds, rfs, threads);
  }
  fm.row_ids.clear();
  for (std::size_t i = 0; i < d.size(); ++i) fm.row_ids.push_back(d.id(i));
  return fm;
}

std::ofstream open_report(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct TrainOptions {
  std::string solver = "svd";
  std::string lambda_grid = "logspace:-10:2:13";
  std::string split = "0.8,0.1,0.1";
  std::optional<std::uint64_t> split_seed;
  double lsqr_tol = 1e-8;
  int lsqr_max_iter = 10000;
  int pcr_rank = 0;
  int logistic_max_iter = 500;
  double logistic_tol = 1e-6;
};

void add_train_options(CLI::App* app, TrainOptions& t) {
  app->add_option("--solver", t.solver, "ridge solver")->check(CLI::IsMember({"svd", "lsqr", "pcr"}));
  app->add_option("--lambda-grid", t.lambda_grid, "comma list or logspace:lo:hi:n");
  app->add_option("--split", t.split, "train,val,test fractions");
  app->add_option("--split-seed", t.split_seed, "split permutation seed (default: --seed)");
  app->add_option("--lsqr-tol", t.lsqr_tol, "LSQR stopping tolerance");
  app->add_option("--lsqr-max-iter", t.lsqr_max_iter, "LSQR iteration cap");
  app->add_option("--pcr-rank", t.pcr_rank, "PCR rank (default: full)");
  app->add_option("--logistic-max-iter", t.logistic_max_iter, "L-BFGS iteration cap per class");
  app->add_option("--logistic-tol", t.logistic_tol, "gradient-norm tolerance per class");
}

struct LambdaRow {
  double lambda = 0.0;
  double train_metric = 0.0;
  double val_metric = 0.0;
  bool converged = true;
  int iterations = 0;
};

struct TrainOutcome {
  ModelBundle bundle;
  std::vector<LambdaRow> rows;
  std::size_t best = 0;
  std::string metric;  // "mae" or "accuracy"
  std::optional<double> test_metric;
  SplitSpec split;
};

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

double mean_abs_error(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  return pred.size() == 0 ? 0.0 : (pred - truth).cwiseAbs().mean();
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

TrainOutcome train_model(const Dataset& d, const FeatureConfig& config, const std::vector<int>& vocab,
                         const TrainOptions& t, const SplitSpec& split, int threads) {
  std::vector<double> lambdas = parse_lambda_grid(t.lambda_grid);
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  if (split.train.empty()) throw DataError("training split is empty");

  const RandomFunctionSet rfs = sample_random_weights(config);
  EncodingStats stats;
  const FeatureMatrix fm = featurize(d, rfs, vocab, threads, &stats);
  const Eigen::MatrixXd x_train = take_rows(fm.values, split.train);
  const Eigen::MatrixXd x_val = take_rows(fm.values, split.val);
  const Eigen::MatrixXd x_test = take_rows(fm.values, split.test);
  auto targets = [&](const std::vector<std::size_t>& idx) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) y[static_cast<Eigen::Index>(i)] = d.target(idx[i]);
    return y;
  };
  const bool use_val = !split.val.empty();

  TrainOutcome out;
  out.split = split;
  ModelBundle& b = out.bundle;
  b.config = config;
  b.vocab = vocab;
  b.data_format = d.format;
  b.solver = t.solver;
  b.notes["lambda_selection"] = use_val ? "validation" : "training";
  b.notes["threads"] = std::to_string(threads);
  b.notes["split"] = t.split + " seed " + std::to_string(split.seed);
  if (d.format == "xyz") {
    b.notes["element_encoding"] = "centre atom excluded from its own cloud";
    b.notes["dropped_coincident_points"] = std::to_string(stats.dropped_points);
  }

  if (d.format == "xyz") {
    b.task = "regression";
    out.metric = "mae";
    const Eigen::VectorXd y_train = targets(split.train);
    const Eigen::VectorXd y_val = targets(split.val);
    const double mean = y_train.mean();
    const Eigen::VectorXd yc = y_train.array() - mean;
    b.target_mean = mean;
    b.notes["target_preprocessing"] = "centred";

    const RidgeProblem problem{x_train, yc, lambdas};
    std::vector<RidgeSolution> sols;
    const SolverKind kind = solver_from_string(t.solver);
    if (kind == SolverKind::svd) {
      sols = ridge_svd(problem);
    } else if (kind == SolverKind::pcr) {
      const Eigen::Index full = std::min(x_train.rows(), x_train.cols());
      sols = ridge_pcr(problem, t.pcr_rank > 0 ? t.pcr_rank : full);
    } else {
      for (double l : lambdas) sols.push_back(ridge_lsqr(problem, l, t.lsqr_tol, t.lsqr_max_iter));
    }
    for (const auto& s : sols) {
      LambdaRow row;
      row.lambda = s.lambda;
      row.train_metric = mean_abs_error(predict_regression(s.beta, x_train, mean), y_train);
      row.val_metric = use_val ? mean_abs_error(predict_regression(s.beta, x_val, mean), y_val) : row.train_metric;
      row.converged = s.diagnostics.converged;
      row.iterations = s.diagnostics.iterations;
      out.rows.push_back(row);
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
      if (out.rows[i].val_metric < out.rows[out.best].val_metric) out.best = i;
    }
    b.lambda = sols[out.best].lambda;
    b.beta = sols[out.best].beta;
    if (!split.test.empty()) out.test_metric = mean_abs_error(predict_regression(b.beta, x_test, mean), targets(split.test));
  } else {
    b.task = "classification";
    out.metric = "accuracy";
    auto labels = [&](const std::vector<std::size_t>& idx) {
      std::vector<int> l;
      for (auto i : idx) l.push_back(d.shapes[i].label);
      return l;
    };
    const auto l_train = labels(split.train);
    const auto l_val = labels(split.val);
    std::vector<ClassifierWeights> models;
    for (double lambda : lambdas) {
      ClassifierWeights cw = logistic_ovr_train(x_train, l_train, lambda, t.logistic_max_iter, t.logistic_tol);
      LambdaRow row;
      row.lambda = lambda;
      row.train_metric = accuracy(predict_classify(cw, x_train), l_train);
      row.val_metric = use_val ? accuracy(predict_classify(cw, x_val), l_val) : row.train_metric;
      row.converged = std::all_of(cw.converged.begin(), cw.converged.end(), [](bool c) { return c; });
      row.iterations = *std::max_element(cw.iterations.begin(), cw.iterations.end());
      out.rows.push_back(row);
      models.push_back(std::move(cw));
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
      if (out.rows[i].val_metric > out.rows[out.best].val_metric) out.best = i;
    }
    b.solver = "logistic-lbfgs";
    b.lambda = lambdas[out.best];
    b.classifier = std::move(models[out.best]);
    b.normalize_shapes = false;
    if (!split.test.empty()) out.test_metric = accuracy(predict_classify(b.classifier, x_test), labels(split.test));
  }
  return out;
}

void write_train_report(const std::string& path, const TrainOutcome& o) {
  auto out = open_report(path);
  out << "lambda,train_" << o.metric << ",val_" << o.metric << ",converged,iterations,selected\n";
  for (std::size_t i = 0; i < o.rows.size(); ++i) {
    const auto& r = o.rows[i];
    out << format_double(r.lambda) << ',' << format_double(r.train_metric) << ',' << format_double(r.val_metric) << ','
        << (r.converged ? 1 : 0) << ',' << r.iterations << ',' << (i == o.best ? 1 : 0) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Benchmark helpers

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

struct QuadraticFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
};

/// Least squares t = a N^2 + b.
QuadraticFit fit_quadratic(const std::vector<double>& n, const std::vector<double>& t) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = n[i] * n[i];
    x(static_cast<Eigen::Index>(i), 1) = 1.0;
    y[static_cast<Eigen::Index>(i)] = t[i];
  }
  const Eigen::Vector2d coef = x.colPivHouseholderQr().solve(y);
  const double ss_res = (x * coef - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  return {coef[0], coef[1], ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

// ---------------------------------------------------------------------------

struct CliError {
  int code;
  std::string kind;
  std::string message;
};

void report_error(std::ostream& err, const CliError& e) {
  err << json{{"error", e.kind}, {"message", e.message}, {"exit_code", e.code}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rotation-invariant random features for point clouds and molecules", "rotsig"};
  app.require_subcommand(1);

  FeatureOptions fo;
  TrainOptions to;
  std::string out_path;
  std::string bundle_path;
  std::string report_path;

  auto* featurize_cmd = app.add_subcommand("featurize", "write the feature matrix of a dataset");
  add_feature_options(featurize_cmd, fo, true);
  featurize_cmd->add_option("--out", out_path, "feature matrix CSV")->required();

  auto* train_cmd = app.add_subcommand("train", "fit a model and select lambda on the validation split");
  add_feature_options(train_cmd, fo, true);
  add_train_options(train_cmd, to);
  train_cmd->add_option("--out", out_path, "model bundle")->required();
  train_cmd->add_option("--report", report_path, "per-lambda CSV (default: <out>.report.csv)");

  std::string predict_format;
  auto* predict_cmd = app.add_subcommand("predict", "apply a model bundle to a dataset");
  predict_cmd->add_option("--bundle", bundle_path, "model bundle")->required();
  predict_cmd->add_option("--dataset", fo.dataset, "input dataset")->required();
  predict_cmd->add_option("--format", predict_format, "dataset format (default: as trained)")
      ->check(CLI::IsMember({"xyz", "pointcloud"}));
  predict_cmd->add_option("--threads", fo.threads, "worker threads");
  predict_cmd->add_flag("--normalize-shapes", fo.normalize_shapes, "centre and scale point clouds");
  predict_cmd->add_option("--out", out_path, "predictions CSV")->required();

  int reps = 5;
  std::string synthetic_sizes;
  int synthetic_count = 4;
  auto* bench_cmd = app.add_subcommand("benchmark", "per-sample prediction latency");
  add_feature_options(bench_cmd, fo, false);
  bench_cmd->add_option("--bundle", bundle_path, "model bundle (default: features from flags, zero model)");
  bench_cmd->add_option("--reps", reps, "repetitions per sample")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--synthetic-sizes", synthetic_sizes, "random clouds of these sizes instead of --dataset");
  bench_cmd->add_option("--synthetic-count", synthetic_count, "clouds per synthetic size")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", out_path, "timing CSV")->required();

  std::string axis;
  std::string values;
  auto* sweep_cmd = app.add_subcommand("sweep", "train once per value of one hyperparameter");
  add_feature_options(sweep_cmd, fo, true);
  add_train_options(sweep_cmd, to);
  sweep_cmd->add_option("--axis", axis, "hyperparameter")
      ->required()
      ->check(CLI::IsMember({"L", "sigma", "radial_scale", "n_features"}));
  sweep_cmd->add_option("--values", values, "comma-separated values")->required();
  sweep_cmd->add_option("--out", out_path, "sweep CSV")->required();

  std::string level = "fast";
  std::string fault;
  std::uint64_t validate_seed = 20240101;
  auto* validate_cmd = app.add_subcommand("validate", "run the numerical self-checks");
  validate_cmd->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  validate_cmd->add_option("--inject-fault", fault, "test hook")->check(CLI::IsMember({"wigner-sign"}));
  validate_cmd->add_option("--seed", validate_seed, "seed of the random instances");
  validate_cmd->add_option("--threads", fo.threads, "worker threads");
  validate_cmd->add_option("--out", out_path, "report CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, {kExitUsage, "usage", e.what()});
    return kExitUsage;
  }

  try {
    const int threads = resolve_threads(fo.threads);

    if (*featurize_cmd) {
      const FeatureConfig config = make_config(fo);
      const Dataset d = load_dataset(fo.dataset, fo.format, fo.normalize_shapes);
      const auto vocab = resolve_vocab(fo, d);
      EncodingStats stats;
      const FeatureMatrix fm = featurize(d, sample_random_weights(config), vocab, threads, &stats);
      write_feature_matrix(out_path, fm);
      out << json{{"command", "featurize"},
                  {"rows", fm.values.rows()},
                  {"columns", fm.values.cols()},
                  {"vocab", vocab},
                  {"dropped_coincident_points", stats.dropped_points},
                  {"threads", threads}}
                 .dump()
          << "\n";
      return kExitOk;
    }

    if (*train_cmd) {
      const FeatureConfig config = make_config(fo);
      const Dataset d = load_dataset(fo.dataset, fo.format, fo.normalize_shapes);
      const auto vocab = resolve_vocab(fo, d);
      const SplitSpec split = make_split(d.size(), parse_split(to.split), to.split_seed.value_or(fo.seed));
      TrainOutcome o = train_model(d, config, vocab, to, split, threads);
      o.bundle.normalize_shapes = fo.normalize_shapes;
      save_bundle(out_path, o.bundle);
      write_train_report(report_path.empty() ? out_path + ".report.csv" : report_path, o);
      json summary{{"command", "train"},
                   {"task", o.bundle.task},
                   {"metric", o.metric},
                   {"lambda", o.bundle.lambda},
                   {"train_metric", o.rows[o.best].train_metric},
                   {"val_metric", o.rows[o.best].val_metric},
                   {"n_train", split.train.size()},
                   {"n_val", split.val.size()},
                   {"n_test", split.test.size()},
                   {"threads", threads}};
      if (o.test_metric) summary["test_metric"] = *o.test_metric;
      out << summary.dump() << "\n";
      return kExitOk;
    }

    if (*predict_cmd) {
      const ModelBundle b = load_bundle(bundle_path);
      const std::string format = predict_format.empty() ? b.data_format : predict_format;
      if (format != b.data_format) throw DataError("bundle was trained on " + b.data_format + " data, not " + format);
      const Dataset d = load_dataset(fo.dataset, format, fo.normalize_shapes || b.normalize_shapes);
      if (format == "xyz") {
        for (const auto& m : d.molecules) {
          for (int z : m.charges) {
            if (!std::binary_search(b.vocab.begin(), b.vocab.end(), z)) {
              throw DataError("molecule '" + m.id + "' has element " + element_symbol(z) +
                              " outside the bundle vocabulary");
            }
          }
        }
      }
      const FeatureMatrix fm = featurize(d, sample_random_weights(b.config), b.vocab, threads);
      auto file = open_report(out_path);
      json summary{{"command", "predict"}, {"task", b.task}, {"rows", d.size()}, {"threads", threads}};
      if (b.task == "regression") {
        const Eigen::VectorXd pred = predict_regression(b.beta, fm.values, b.target_mean);
        file << "id,prediction,target\n";
        double abs_err = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          file << d.id(i) << ',' << format_double(pred[ii]) << ',' << format_double(d.target(i)) << "\n";
          abs_err += std::abs(pred[ii] - d.target(i));
        }
        summary["mae"] = abs_err / static_cast<double>(d.size());
      } else {
        const auto pred = predict_classify(b.classifier, fm.values);
        file << "id,prediction,target\n";
        std::vector<int> truth;
        for (std::size_t i = 0; i < d.size(); ++i) {
          file << d.id(i) << ',' << pred[i] << ',' << d.shapes[i].label << "\n";
          truth.push_back(d.shapes[i].label);
        }
        summary["accuracy"] = accuracy(pred, truth);
      }
      out << summary.dump() << "\n";
      return kExitOk;
    }

    if (*bench_cmd) {
      std::optional<ModelBundle> bundle;
      if (!bundle_path.empty()) bundle = load_bundle(bundle_path);
      const FeatureConfig config = bundle ? bundle->config : make_config(fo);
      const RandomFunctionSet rfs = sample_random_weights(config);

      Dataset d;
      std::vector<int> vocab;
      if (!synthetic_sizes.empty()) {
        d.format = "pointcloud";
        std::mt19937_64 rng(config.seed);
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> radius(0.05, 1.0);
        for (double n : parse_doubles(synthetic_sizes, "size")) {
          if (n < 1 || n != std::floor(n)) throw ConfigError("synthetic sizes must be positive integers");
          for (int c = 0; c < synthetic_count; ++c) {
            ShapeRecord s;
            s.id = "synthetic_" + std::to_string(static_cast<long>(n)) + "_" + std::to_string(c);
            for (long p = 0; p < static_cast<long>(n); ++p) {
              Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
              s.points.push_back(v.normalized() * radius(rng));
            }
            d.shapes.push_back(std::move(s));
          }
        }
      } else {
        if (fo.dataset.empty()) throw ConfigError("benchmark needs --dataset or --synthetic-sizes");
        const std::string format = bundle ? bundle->data_format : fo.format;
        d = load_dataset(fo.dataset, format, fo.normalize_shapes || (bundle && bundle->normalize_shapes));
        vocab = bundle ? bundle->vocab : resolve_vocab(fo, d);
      }
      if (bundle && bundle->data_format != d.format) throw DataError("bundle does not match the benchmark data format");

      const Eigen::Index width = d.format == "xyz" ? static_cast<Eigen::Index>(rfs.size() * vocab.size() * vocab.size())
                                                   : static_cast<Eigen::Index>(rfs.size());
      Eigen::MatrixXd model = Eigen::MatrixXd::Zero(width, 1);
      if (bundle && bundle->task == "regression") model = bundle->beta;
      if (bundle && bundle->task == "classification") model = bundle->classifier.weights.transpose();
      if (model.rows() != width) throw DataError("bundle width does not match the benchmark features");

      auto file = open_report(out_path);
      file << "sample_id,N,rep,seconds\n";
      std::map<std::size_t, std::vector<double>> by_n;
      double sink = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        for (int r = 0; r < reps; ++r) {
          const auto start = std::chrono::steady_clock::now();
          Eigen::RowVectorXd row;
          if (d.format == "xyz") {
            row = element_encoded_features(d.molecules[i].cloud(), rfs, vocab);
          } else {
            const BTensor bt = b_tensor(d.shapes[i].cloud(config.normalize_mass), config.radial, config.band_limit);
            row.resize(rfs.size());
            for (int j = 0; j < rfs.size(); ++j) row[j] = std::sin(invariant_integral(bt, rfs.function(j)));
          }
          sink += (row * model).sum();
          const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          file << d.id(i) << ',' << d.points(i) << ',' << r << ',' << format_double(seconds) << "\n";
          by_n[d.points(i)].push_back(seconds);
        }
      }

      auto summary_file = open_report(out_path + ".summary.csv");
      summary_file << "N,count,median,p25,p75\n";
      std::vector<double> ns;
      std::vector<double> medians;
      json groups = json::array();
      for (const auto& [n, times] : by_n) {
        const double med = percentile(times, 0.5);
        const double p25 = percentile(times, 0.25);
        const double p75 = percentile(times, 0.75);
        summary_file << n << ',' << times.size() << ',' << format_double(med) << ',' << format_double(p25) << ','
                     << format_double(p75) << "\n";
        groups.push_back({{"N", n}, {"median", med}, {"p25", p25}, {"p75", p75}});
        ns.push_back(static_cast<double>(n));
        medians.push_back(med);
      }
      json summary{{"command", "benchmark"}, {"groups", groups}, {"threads", 1}, {"reps", reps}, {"checksum", sink}};
      if (ns.size() >= 2) {
        const QuadraticFit fit = fit_quadratic(ns, medians);
        summary["quadratic_fit"] = {{"a", fit.a}, {"b", fit.b}, {"r2", fit.r2}};
        summary_file << "# fit t = a N^2 + b over medians: a=" << format_double(fit.a) << " b=" << format_double(fit.b)
                     << " r2=" << format_double(fit.r2) << "\n";
      }
      out << summary.dump() << "\n";
      return kExitOk;
    }

    if (*sweep_cmd) {
      const FeatureConfig base = make_config(fo);
      const Dataset d = load_dataset(fo.dataset, fo.format, fo.normalize_shapes);
      const auto vocab = resolve_vocab(fo, d);
      const SplitSpec split = make_split(d.size(), parse_split(to.split), to.split_seed.value_or(fo.seed));
      const auto points = parse_doubles(values, "sweep value");
      auto file = open_report(out_path);
      file << "index,value,seed,status,lambda,train_metric,val_metric,test_metric,error\n";
      int failures = 0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double v = points[i];
        FeatureConfig c = base;
        c.seed = base.seed + i;
        file << i << ',' << format_double(v) << ',' << c.seed << ',';
        try {
          if (axis == "L" || axis == "n_features") {
            if (v != std::floor(v)) throw ConfigError(axis + " must be an integer");
            (axis == "L" ? c.band_limit : c.n_features) = static_cast<int>(v);
          } else if (axis == "sigma") {
            c.weight_sigma = v;
          } else {
            if (!(v > 0.0)) throw ConfigError("radial_scale must be > 0");
            c.radial = base.radial.scaled(v);
          }
          c.validate();
          const TrainOutcome o = train_model(d, c, vocab, to, split, threads);
          const auto& row = o.rows[o.best];
          file << "ok," << format_double(row.lambda) << ',' << format_double(row.train_metric) << ','
               << format_double(row.val_metric) << ',' << (o.test_metric ? format_double(*o.test_metric) : "")
               << ",\n";
        } catch (const std::exception& e) {
          ++failures;
          std::string msg = e.what();
          std::replace(msg.begin(), msg.end(), ',', ';');
          std::replace(msg.begin(), msg.end(), '\n', ' ');
          file << "error,,,,," << msg << "\n";
        }
      }
      out << json{{"command", "sweep"}, {"axis", axis}, {"points", points.size()}, {"failures", failures},
                  {"threads", threads}}
                 .dump()
          << "\n";
      return kExitOk;
    }

    if (*validate_cmd) {
      ValidationOptions vo;
      vo.level = validation_level_from_string(level);
      vo.seed = validate_seed;
      vo.threads = threads;
      if (fault == "wigner-sign") vo.wigner = wigner_with_sign_fault();
      const auto results = run_validation(vo);
      bool ok = true;
      std::optional<std::ofstream> file;
      if (!out_path.empty()) {
        file = open_report(out_path);
        *file << "check,residual,tolerance,passed,detail\n";
      }
      for (const auto& r : results) {
        ok = ok && r.passed;
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " residual=" << format_double(r.residual)
            << " tolerance=" << format_double(r.tolerance) << " (" << r.detail << ")\n";
        if (file) {
          *file << r.name << ',' << format_double(r.residual) << ',' << format_double(r.tolerance) << ','
                << (r.passed ? 1 : 0) << ',' << r.detail << "\n";
        }
      }
      if (!ok) {
        report_error(err, {kExitValidation, "validation", "one or more checks failed"});
        return kExitValidation;
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    report_error(err, {kExitUsage, "usage", e.what()});
    return kExitUsage;
  } catch (const DataError& e) {
    report_error(err, {kExitData, "data", e.what()});
    return kExitData;
  } catch (const DomainError& e) {
    report_error(err, {kExitData, "data", e.what()});
    return kExitData;
  } catch (const NumericalError& e) {
    report_error(err, {kExitData, "numerical", e.what()});
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace rotsig
