#include "specnet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "specnet/errors.hpp"
#include "specnet/format.hpp"
#include "specnet/objective.hpp"
#include "specnet/rayleigh_ritz.hpp"
#include "specnet/step_constants.hpp"
#include "specnet/training.hpp"

namespace specnet {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

namespace {

const std::vector<std::pair<std::string, std::string>>& default_entries() {
  static const std::vector<std::pair<std::string, std::string>> entries = {
      {"dataset", "one-moon"},
      {"n", "500"},
      {"noise_var", "auto"},
      {"data_seed", "1"},
      {"data_file", ""},
      {"test_n", "0"},
      {"test_seed", "2"},
      {"mnist_images", ""},
      {"mnist_labels", ""},
      {"mnist_test_images", ""},
      {"mnist_test_labels", ""},
      {"graph", "auto"},
      {"sigma", "auto"},
      {"threshold", "auto"},
      {"kernel_convention", "half"},
      {"knn_k", "10"},
      {"graph_file", ""},
      {"objective", "f2"},
      {"scheme", "neighbor"},
      {"K", "2"},
      {"batch_size", "4"},
      {"epochs", "100"},
      {"alpha", "auto"},
      {"lr", "auto"},
      {"seeds", "1"},
      {"order", "cyclic"},
      {"tol", "0"},
      {"deflate", "true"},
      {"hidden", "auto"},
      {"xi_grad", "true"},
      {"oracle_cap", "2048"},
      {"checkpoint", ""},
      {"out_dir", "out"},
  };
  return entries;
}

const std::vector<std::string> kDatasets = {"one-moon", "two-moons", "mnist", "csv"};

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

void require_one_of(const std::string& key, const std::string& value,
                    const std::vector<std::string>& valid) {
  if (std::find(valid.begin(), valid.end(), value) == valid.end()) {
    throw ConfigError("invalid " + key + " '" + value + "' (valid: " + join(valid) + ")");
  }
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (const auto& [k, v] : default_entries()) values_[k] = v;
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> list = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : default_entries()) out.push_back(k);
    return out;
  }();
  return list;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = std::string(trim(value));
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

void ExperimentConfig::load_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.filename().string() + " line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    set(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
  }
}

void ExperimentConfig::write_echo(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const std::string& k : keys()) out << k << " = " << get(k) << '\n';
}

long long ExperimentConfig::integer(const std::string& key) const {
  long long v = 0;
  if (!parse_int(get(key), v)) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + get(key) + "'");
  }
  return v;
}

double ExperimentConfig::real(const std::string& key) const {
  double v = 0.0;
  if (!parse_double(get(key), v) || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + get(key) + "'");
  }
  return v;
}

bool ExperimentConfig::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<long long> ExperimentConfig::integer_list(const std::string& key) const {
  std::vector<long long> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    long long v = 0;
    if (!parse_int(trim(item), v)) {
      throw ConfigError("config key '" + key + "' expects a comma-separated integer list");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("config key '" + key + "' is empty");
  return out;
}

void ExperimentConfig::validate() const {
  require_one_of("dataset", get("dataset"), kDatasets);
  require_one_of("graph", get("graph"), {"auto", "gaussian", "knn", "file"});
  require_one_of("kernel_convention", get("kernel_convention"), {"half", "unit"});
  require_one_of("order", get("order"), {"cyclic", "reshuffle"});
  parse_objective(get("objective"));
  parse_scheme(get("scheme"));
  auto positive = [&](const std::string& k) {
    if (integer(k) < 1) throw ConfigError("config key '" + k + "' must be >= 1");
  };
  positive("n");
  positive("K");
  positive("batch_size");
  positive("knn_k");
  positive("oracle_cap");
  if (integer("epochs") < 0) throw ConfigError("config key 'epochs' must be >= 0");
  if (integer("test_n") < 0) throw ConfigError("config key 'test_n' must be >= 0");
  integer("data_seed");
  integer("test_seed");
  integer_list("seeds");
  for (const char* k : {"noise_var", "sigma", "threshold", "alpha", "lr"}) {
    if (get(k) != "auto") real(k);
  }
  if (get("noise_var") != "auto" && real("noise_var") < 0.0) {
    throw ConfigError("config key 'noise_var' must be >= 0");
  }
  if (get("alpha") != "auto" && !(real("alpha") > 0.0)) {
    throw ConfigError("config key 'alpha' must be positive");
  }
  if (get("lr") != "auto" && !(real("lr") > 0.0)) {
    throw ConfigError("config key 'lr' must be positive");
  }
  if (real("tol") < 0.0) throw ConfigError("config key 'tol' must be >= 0");
  if (get("hidden") != "auto" && get("hidden") != "none") {
    for (long long h : integer_list("hidden")) {
      if (h < 1) throw ConfigError("hidden layer widths must be positive");
    }
  }
  flag("deflate");
  flag("xi_grad");
  if (get("out_dir").empty()) throw ConfigError("config key 'out_dir' is empty");
}

int exit_code(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::kConfig: return 2;
    case ErrorCategory::kInput: return 3;
    case ErrorCategory::kParse: return 4;
    case ErrorCategory::kIo: return 5;
    case ErrorCategory::kDivergence: return 6;
    case ErrorCategory::kDegenerate: return 7;
    case ErrorCategory::kRank: return 7;
    case ErrorCategory::kNotSpd: return 7;
    case ErrorCategory::kState: return 8;
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Data and graphs

Dataset load_dataset(const ExperimentConfig& cfg, bool test) {
  const std::string name = cfg.str("dataset");
  const Index n = test ? cfg.integer("test_n") : cfg.integer("n");
  const auto seed = static_cast<std::uint64_t>(test ? cfg.integer("test_seed")
                                                    : cfg.integer("data_seed"));
  Dataset ds;
  ds.name = name;
  if (name == "one-moon") {
    const double var = cfg.get("noise_var") == "auto" ? 0.01 : cfg.real("noise_var");
    ds.points = gen_one_moon(n, var, seed);
  } else if (name == "two-moons") {
    const double var = cfg.get("noise_var") == "auto" ? 0.0036 : cfg.real("noise_var");
    if (n % 2 != 0) throw ConfigError("two-moons needs an even sample count");
    ds.points = gen_two_moons(n, seed, var);
  } else if (name == "mnist") {
    const std::string images = cfg.str(test ? "mnist_test_images" : "mnist_images");
    const std::string labels = cfg.str(test ? "mnist_test_labels" : "mnist_labels");
    if (images.empty() || labels.empty()) {
      throw ConfigError("dataset mnist needs " +
                        std::string(test ? "mnist_test_images/mnist_test_labels"
                                         : "mnist_images/mnist_labels"));
    }
    const MnistSet full = load_mnist_idx(images, labels);
    ds.points = to_point_cloud(mnist_subset(full, std::min<Index>(n, full.images.rows()), seed));
  } else if (name == "csv") {
    if (test) throw ConfigError("dataset csv has no test split");
    if (cfg.str("data_file").empty()) throw ConfigError("dataset csv needs data_file");
    ds.points = read_points_csv(cfg.str("data_file"));
  } else {
    throw ConfigError("invalid dataset '" + name + "' (valid: " + join(kDatasets) + ")");
  }
  return ds;
}

double resolved_sigma(const ExperimentConfig& cfg, Index n) {
  if (cfg.get("sigma") != "auto") return cfg.real("sigma");
  if (cfg.str("dataset") == "two-moons") return 0.15;
  // 0.1 at n = 2000; widened as sqrt(2000 / n) to keep the neighbor count.
  return 0.1 * std::sqrt(2000.0 / static_cast<double>(n));
}

double resolved_threshold(const ExperimentConfig& cfg) {
  if (cfg.get("threshold") != "auto") return cfg.real("threshold");
  return cfg.str("dataset") == "two-moons" ? 0.08 : 0.6;
}

SparseSym build_graph(const ExperimentConfig& cfg, const Dataset& data, bool test) {
  std::string kind = cfg.str("graph");
  if (kind == "auto") kind = data.name == "mnist" ? "knn" : "gaussian";
  if (kind == "file") {
    if (test) throw ConfigError("graph=file has no test graph");
    const SparseSym w = load_coo(cfg.str("graph_file"));
    if (w.size() != data.points.size()) {
      throw InputError("graph file has " + std::to_string(w.size()) + " nodes, dataset has " +
                       std::to_string(data.points.size()));
    }
    return w;
  }
  if (kind == "knn") return build_knn_affinity(data.points, cfg.integer("knn_k"));
  const auto conv = cfg.str("kernel_convention") == "unit" ? KernelConvention::kUnit
                                                           : KernelConvention::kHalf;
  return build_gaussian_affinity(data.points, resolved_sigma(cfg, data.points.size()),
                                 resolved_threshold(cfg), conv);
}

namespace {

// ---------------------------------------------------------------------------
// Output helpers

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw IoError("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
    columns_ = header.size();
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw StateError("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
};

const std::string kNoReference = "no-reference";
const std::string kNa = "na";

std::string num(double v) { return format_double(v); }

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = cfg.str("out_dir");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  cfg.write_echo(dir / "config.echo");
  return dir;
}

void write_error_record(const fs::path& dir, const std::string& context, const Error& e) {
  std::ofstream out(dir / "errors.txt", std::ios::app);
  out << context << ',' << to_string(e.category()) << ',' << e.what() << '\n';
}

std::optional<DenseEig> reference_for(const Pencil& p, Index cap) {
  if (p.n() > cap) return std::nullopt;
  return pencil_oracle(p, cap);
}

std::vector<std::string> numbered(const std::string& prefix, Index k) {
  std::vector<std::string> out;
  for (Index j = 1; j <= k; ++j) out.push_back(prefix + std::to_string(j));
  return out;
}

double default_lr(const ExperimentConfig& cfg, Objective objective) {
  if (cfg.get("lr") != "auto") return cfg.real("lr");
  const std::string& ds = cfg.str("dataset");
  if (ds == "mnist") return 1e-4;
  if (objective == Objective::kF2) return 1e-3;
  return ds == "two-moons" ? 1e-5 : 1e-4;
}

std::vector<Index> hidden_layers(const ExperimentConfig& cfg) {
  if (cfg.get("hidden") == "none") return {};
  if (cfg.get("hidden") != "auto") {
    std::vector<Index> out;
    for (long long h : cfg.integer_list("hidden")) out.push_back(h);
    return out;
  }
  if (cfg.str("dataset") == "mnist") return {256, 256};
  return {128};
}

// Labels {1, 2} from the sign structure of a nontrivial eigenvector.
std::optional<double> embedding_accuracy(const Vector& coordinate,
                                         const std::vector<int>& labels) {
  if (labels.empty()) return std::nullopt;
  for (int l : labels) {
    if (l != 1 && l != 2) return std::nullopt;
  }
  const std::vector<double> values(coordinate.data(), coordinate.data() + coordinate.size());
  try {
    return clustering_accuracy(kmeans_1d(values), labels);
  } catch (const DegenerateError&) {
    return 0.5;
  }
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Subcommands

void cmd_gen_data(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  const Dataset train = load_dataset(cfg, false);
  write_points_csv(train.points, dir / "points.csv");
  if (cfg.integer("test_n") > 0) {
    write_points_csv(load_dataset(cfg, true).points, dir / "test_points.csv");
  }
}

void cmd_build_graph(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  const Dataset train = load_dataset(cfg, false);
  save_coo(build_graph(cfg, train, false), dir / "graph.coo");
}

void cmd_solve_la(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  const Objective objective = parse_objective(cfg.str("objective"));
  const Scheme scheme = parse_scheme(cfg.str("scheme"));
  const Index k = cfg.integer("K");
  const Dataset train = load_dataset(cfg, false);
  const Pencil p = make_pencil(build_graph(cfg, train, false), cfg.flag("deflate"));
  const Index n = p.n();
  if (k >= n) throw ConfigError("K must be smaller than n");
  const std::optional<DenseEig> ref = reference_for(p, cfg.integer("oracle_cap"));
  const Matrix ref_vectors = ref ? Matrix(ref->eigenvectors.leftCols(k)) : Matrix();
  const double optimum = !ref ? 0.0
                         : objective == Objective::kF2 ? f2_optimum(ref->eigenvalues, k)
                                                       : f1_optimum(ref->eigenvalues, k);
  const BatchOrder order =
      cfg.str("order") == "reshuffle" ? BatchOrder::kReshuffle : BatchOrder::kFixedCyclic;

  std::vector<std::string> header = {"epoch", "objective_value", "objective_gap", "grad_norm"};
  for (const auto& h : numbered("rel_err_", k)) header.push_back(h);
  for (const char* h : {"ball_radius", "wall_time_s", "mean_neighborhood", "macs",
                        "cost_full", "cost_neighbor"}) {
    header.emplace_back(h);
  }

  for (long long seed : cfg.integer_list("seeds")) {
    const auto useed = static_cast<std::uint64_t>(seed);
    BatchPlan plan = BatchPlan::random(n, cfg.integer("batch_size"), useed, order);
    SolverOptions opt;
    opt.objective = objective;
    opt.scheme = scheme;
    opt.epochs = cfg.integer("epochs");
    opt.tol = cfg.real("tol");

    Matrix y0;
    if (objective == Objective::kF2) {
      const StepConstants sc = step_constants(p, k, plan.max_batch_size());
      y0 = init_embedding(p, k, sc.solver_radius(), useed);
      if (cfg.get("alpha") == "auto") {
        opt.alpha = sc.solver_alpha();
      } else {
        // A hand-picked stepsize is paired with an embedding at the scale of
        // the optimum, tr(Y^T D Y) = n^2 K, instead of the whole ball.
        opt.alpha = cfg.real("alpha");
        y0 *= static_cast<double>(n) * std::sqrt(static_cast<double>(k)) /
              (p.d.cwiseSqrt().asDiagonal() * y0).norm();
      }
    } else {
      y0 = init_orthonormal(p, k, useed);
      opt.alpha = cfg.get("alpha") == "auto" ? 0.25 : cfg.real("alpha");
    }

    CsvWriter csv(dir / ("solve_la_seed" + std::to_string(seed) + ".csv"), header);
    const double batches_per_epoch = static_cast<double>(plan.batches().size());
    double nbh_sum = 0.0;
    opt.on_epoch = [&](const EpochRecord& rec, const Embedding& emb) {
      std::vector<std::string> row = {std::to_string(rec.epoch), num(rec.objective),
                                      ref ? num(rec.objective - optimum) : kNoReference,
                                      num(rec.grad_norm)};
      if (ref) {
        Vector errs;
        try {
          errs = ritz_relative_errors(rayleigh_ritz(p, emb.y), ref_vectors);
        } catch (const DegenerateError&) {
          errs = Vector::Ones(k);
        }
        for (Index j = 0; j < k; ++j) row.push_back(num(errs[j]));
      } else {
        for (Index j = 0; j < k; ++j) row.push_back(kNoReference);
      }
      nbh_sum += rec.mean_neighborhood;
      const double epochs = static_cast<double>(rec.epoch);
      const double mean_nbh = rec.epoch > 0 ? nbh_sum / epochs : 0.0;
      const double nn = static_cast<double>(n);
      const double b = nn / batches_per_epoch;
      row.push_back(num(rec.ball_radius));
      row.push_back(num(rec.wall_time_s));
      row.push_back(num(rec.mean_neighborhood));
      row.push_back(std::to_string(rec.macs));
      row.push_back(num(nn * nn / b * epochs));
      row.push_back(num(nn * mean_nbh / b * epochs));
      csv.row(row);
    };

    try {
      const SolveResult result = run_solver(p, make_embedding(p, y0), plan, opt);
      save_embedding(result.embedding.y, dir / ("embedding_seed" + std::to_string(seed) + ".txt"));
    } catch (const Error& e) {
      write_error_record(dir, "seed " + std::to_string(seed), e);
      throw;
    }
  }
}

namespace {

struct NnSetup {
  Objective objective;
  Index k;         // nontrivial eigenvectors sought
  Index outputs;   // network output width
  bool constrained;
};

NnSetup nn_setup(const ExperimentConfig& cfg) {
  NnSetup s;
  s.objective = parse_objective(cfg.str("objective"));
  s.k = cfg.integer("K");
  s.constrained = s.objective == Objective::kF1;
  // The constrained network keeps the trivial eigenvector as an extra column.
  s.outputs = s.constrained ? s.k + 1 : s.k;
  return s;
}

// Pencil used for training: the constrained network works on the undeflated
// pencil, the unconstrained one follows `deflate`.
Pencil nn_pencil(const ExperimentConfig& cfg, const NnSetup& s, SparseSym w) {
  return make_pencil(std::move(w), s.constrained ? false : cfg.flag("deflate"));
}

// Columns of the reference compared against network columns.
Index first_compared(const NnSetup& s, const Pencil& p) {
  return (s.constrained || !p.deflated()) ? s.outputs - s.k : 0;
}

struct SplitEval {
  std::optional<Vector> errors;  // nontrivial columns
  std::optional<double> subspace;
  std::optional<double> accuracy;
};

SplitEval evaluate_split(const MlpParams& params, const Matrix* xi, const Dataset& data,
                         const Pencil& p, const std::optional<DenseEig>& ref,
                         const NnSetup& s) {
  SplitEval out;
  const Matrix y = network_output(params, data.points.points, xi);
  const RitzPairs ritz = rayleigh_ritz(p, y);
  const Index first = first_compared(s, p);
  const Vector coordinate = ritz.vectors.col(first);
  out.accuracy = embedding_accuracy(coordinate, data.points.labels);
  if (ref) {
    const Vector all = ritz_relative_errors(ritz, ref->eigenvectors.leftCols(ritz.vectors.cols()));
    out.errors = all.segment(first, s.k);
    out.subspace = subspace_error(ref->eigenvectors.middleCols(first, s.k),
                                  ritz.vectors.middleCols(first, s.k), p.d);
  }
  return out;
}

double nn_loss(const MlpParams& params, const Matrix* xi, const Matrix& x, const Pencil& p,
               const NnSetup& s) {
  const Matrix y = network_output(params, x, xi);
  if (!s.constrained) return f2_value(p, y);
  // f1 of the D-orthonormalized output.
  const QrResult qr = qr_tall(p.d.cwiseSqrt().asDiagonal() * y);
  const Matrix yt = static_cast<double>(p.n()) *
                    qr.r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(y);
  return f1_value(p, yt);
}

}  // namespace

void cmd_train_nn(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  const NnSetup s = nn_setup(cfg);
  const Scheme scheme = parse_scheme(cfg.str("scheme"));
  const Index cap = cfg.integer("oracle_cap");

  const Dataset train = load_dataset(cfg, false);
  const Pencil p = nn_pencil(cfg, s, build_graph(cfg, train, false));
  if (s.outputs >= p.n()) throw ConfigError("K must be smaller than n");
  const std::optional<DenseEig> ref = reference_for(p, cap);
  const double optimum = !ref ? 0.0
                         : s.constrained ? f1_optimum(ref->eigenvalues, s.outputs)
                                         : f2_optimum(ref->eigenvalues, s.k);

  std::optional<Dataset> test;
  std::optional<Pencil> test_p;
  std::optional<DenseEig> test_ref;
  if (cfg.integer("test_n") > 0) {
    test = load_dataset(cfg, true);
    test_p = nn_pencil(cfg, s, build_graph(cfg, *test, true));
    test_ref = reference_for(*test_p, cap);
  }

  std::vector<Index> sizes = {train.points.dim()};
  for (Index h : hidden_layers(cfg)) sizes.push_back(h);
  sizes.push_back(s.outputs);

  // Optional warm start shared by every seed.
  std::optional<MlpParams> warm;
  Matrix warm_xi;
  if (!cfg.str("checkpoint").empty()) {
    warm = load_mlp(cfg.str("checkpoint"), &warm_xi);
    if (warm->output_dim() != s.outputs) {
      throw ConfigError("checkpoint network has " + std::to_string(warm->output_dim()) +
                        " outputs but K = " + std::to_string(s.k) + " needs " +
                        std::to_string(s.outputs));
    }
    if (warm->input_dim() != train.points.dim()) {
      throw ConfigError("checkpoint input dimension does not match the dataset");
    }
  }

  std::vector<std::string> header = {"seed", "epoch", "loss", "loss_gap"};
  for (const auto& h : numbered("train_rel_err_", s.k)) header.push_back(h);
  for (const auto& h : numbered("test_rel_err_", s.k)) header.push_back(h);
  for (const char* h : {"train_accuracy", "test_accuracy", "wall_time_s"}) header.emplace_back(h);
  CsvWriter csv(dir / "train_nn.csv", header);

  std::vector<double> final_err, final_acc;
  for (long long seed : cfg.integer_list("seeds")) {
    const auto useed = static_cast<std::uint64_t>(seed);
    MlpParams params = warm ? *warm : init_mlp(sizes, useed);
    OrthLayer orth;
    if (warm && s.constrained) orth.xi = warm_xi;
    TrainOptions opt;
    opt.objective = s.objective;
    opt.scheme = scheme;
    opt.lr = default_lr(cfg, s.objective);
    opt.epochs = cfg.integer("epochs");
    opt.batch_size = cfg.integer("batch_size");
    opt.seed = useed;
    opt.xi_grad = cfg.flag("xi_grad");
    const auto start = std::chrono::steady_clock::now();
    SplitEval last_train;
    opt.on_epoch = [&](Index epoch, const MlpParams& prm, const OrthLayer& o) {
      const Matrix* xi = s.constrained && o.xi.size() > 0 ? &o.xi : nullptr;
      std::vector<std::string> row = {std::to_string(seed), std::to_string(epoch)};
      const double loss = nn_loss(prm, xi, train.points.points, p, s);
      row.push_back(num(loss));
      row.push_back(ref ? num(loss - optimum) : kNoReference);
      SplitEval tr;
      try {
        tr = evaluate_split(prm, xi, train, p, ref, s);
      } catch (const Error&) {
        tr.errors = ref ? std::optional<Vector>(Vector::Ones(s.k)) : std::nullopt;
      }
      last_train = tr;
      SplitEval te;
      if (test) {
        try {
          te = evaluate_split(prm, xi, *test, *test_p, test_ref, s);
        } catch (const Error&) {
          te.errors = test_ref ? std::optional<Vector>(Vector::Ones(s.k)) : std::nullopt;
        }
      }
      for (Index j = 0; j < s.k; ++j) {
        row.push_back(tr.errors ? num((*tr.errors)[j]) : kNoReference);
      }
      for (Index j = 0; j < s.k; ++j) {
        row.push_back(!test ? kNa : te.errors ? num((*te.errors)[j]) : kNoReference);
      }
      row.push_back(tr.accuracy ? num(*tr.accuracy) : kNa);
      row.push_back(te.accuracy ? num(*te.accuracy) : kNa);
      row.push_back(num(std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                            .count()));
      csv.row(row);
    };
    try {
      train_network(params, orth, p, train.points.points, opt);
    } catch (const Error& e) {
      // A failed factorization ends this replica only.
      write_error_record(dir, "seed " + std::to_string(seed), e);
      continue;
    }
    save_mlp(params, s.constrained ? &orth.xi : nullptr,
             dir / ("model_seed" + std::to_string(seed) + ".txt"));
    if (last_train.errors) final_err.push_back((*last_train.errors)[0]);
    if (last_train.accuracy) final_acc.push_back(*last_train.accuracy);
  }

  CsvWriter summary(dir / "train_nn_summary.csv",
                    {"runs", "mean_accuracy", "std_accuracy", "mean_rel_err_1", "std_rel_err_1",
                     "median_rel_err_1"});
  auto stat = [](const std::vector<double>& v, double (*f)(const std::vector<double>&)) {
    return v.empty() ? kNa : num(f(v));
  };
  summary.row({std::to_string(std::max(final_err.size(), final_acc.size())),
               stat(final_acc, mean_of), stat(final_acc, std_of), stat(final_err, mean_of),
               stat(final_err, std_of),
               final_err.empty() ? kNa : num(median_of(final_err))});
}

void cmd_eval(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  if (cfg.str("checkpoint").empty()) throw ConfigError("eval needs checkpoint");
  Matrix xi;
  const MlpParams params = load_mlp(cfg.str("checkpoint"), &xi);
  NnSetup s = nn_setup(cfg);
  s.constrained = xi.size() > 0;
  s.outputs = s.constrained ? s.k + 1 : s.k;
  if (params.output_dim() != s.outputs) {
    throw InputError("checkpoint has " + std::to_string(params.output_dim()) +
                     " outputs, K = " + std::to_string(s.k) + " needs " +
                     std::to_string(s.outputs));
  }
  const Index cap = cfg.integer("oracle_cap");
  std::vector<std::string> header = {"split"};
  for (const auto& h : numbered("rel_err_", s.k)) header.push_back(h);
  header.emplace_back("subspace_error");
  header.emplace_back("accuracy");
  CsvWriter csv(dir / "eval.csv", header);

  auto emit = [&](const std::string& split, const Dataset& data, SparseSym w) {
    if (data.points.dim() != params.input_dim()) {
      throw InputError("checkpoint input dimension does not match the dataset");
    }
    const Pencil p = nn_pencil(cfg, s, std::move(w));
    const std::optional<DenseEig> ref = reference_for(p, cap);
    const Matrix* xip = s.constrained ? &xi : nullptr;
    const SplitEval ev = evaluate_split(params, xip, data, p, ref, s);
    std::vector<std::string> row = {split};
    for (Index j = 0; j < s.k; ++j) row.push_back(ev.errors ? num((*ev.errors)[j]) : kNoReference);
    row.push_back(ev.subspace ? num(*ev.subspace) : kNoReference);
    row.push_back(ev.accuracy ? num(*ev.accuracy) : kNa);
    csv.row(row);
  };

  const Dataset train = load_dataset(cfg, false);
  emit("train", train, build_graph(cfg, train, false));
  if (cfg.integer("test_n") > 0) {
    const Dataset test = load_dataset(cfg, true);
    emit("test", test, build_graph(cfg, test, true));
  }
}

}  // namespace specnet
