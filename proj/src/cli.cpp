#include "intact/cli.hpp"

#include "intact/core.hpp"
#include "intact/eval.hpp"
#include "intact/inference.hpp"
#include "intact/io.hpp"
#include "intact/irr.hpp"
#include "intact/kernel.hpp"
#include "intact/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>

namespace intact::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---- logging --------------------------------------------------------------

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* env = std::getenv("INTACT_LOG");
  if (!env) return Level::Warn;
  const std::string s(env);
  if (s == "error") return Level::Error;
  if (s == "info") return Level::Info;
  if (s == "debug") return Level::Debug;
  return Level::Warn;
}

void log(Level level, const std::string& msg) {
  static const Level threshold = log_level();
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= threshold) std::clog << "[intact " << names[static_cast<int>(level)] << "] " << msg << '\n';
}

// ---- config -----------------------------------------------------------------

class Config {
 public:
  Config(const fs::path& path, const std::set<std::string>& allowed) : base_(path.parent_path()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
    try {
      doc_ = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "config " + path.string() + ": " + e.what());
    }
    if (!doc_.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
    for (const auto& [key, _] : doc_.items())
      if (!allowed.count(key)) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  }

  bool has(const std::string& key) const { return doc_.contains(key) && !doc_.at(key).is_null(); }

  template <class T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    try {
      return doc_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' has the wrong type");
    }
  }

  double number_or_inf(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = doc_.at(key);
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "+inf")) return INFINITY;
    if (!v.is_number()) throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' must be a number or \"inf\"");
    return v.get<double>();
  }

  fs::path path(const std::string& key) const {
    const fs::path p = get<std::string>(key, "");
    if (p.empty()) throw Error(ErrorCode::MissingInput, "config key '" + key + "' is required");
    return resolve(p);
  }

  std::vector<fs::path> paths(const std::string& key) const {
    std::vector<fs::path> out;
    for (const auto& s : get<std::vector<std::string>>(key, {})) out.push_back(resolve(s));
    return out;
  }

  fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : base_ / p; }

 private:
  fs::path base_;
  json doc_;
};

const std::set<std::string> kHyperKeys = {"d", "c", "C1", "C2", "max_outer", "max_inner", "tol_obj", "tol_x", "seed"};

std::set<std::string> with_hyper(std::set<std::string> keys) {
  keys.insert(kHyperKeys.begin(), kHyperKeys.end());
  return keys;
}

Hyperparams read_hyperparams(const Config& cfg, const Context& ctx) {
  Hyperparams hp;
  hp.d = cfg.get<int>("d", hp.d);
  hp.c = cfg.get<double>("c", hp.c);
  hp.C1 = cfg.get<double>("C1", hp.C1);
  hp.C2 = cfg.get<double>("C2", hp.C2);
  hp.max_outer = cfg.get<int>("max_outer", hp.max_outer);
  hp.max_inner = cfg.get<int>("max_inner", hp.max_inner);
  hp.tol_obj = cfg.get<double>("tol_obj", hp.tol_obj);
  hp.tol_x = cfg.get<double>("tol_x", hp.tol_x);
  hp.seed = ctx.seed.value_or(cfg.get<std::uint64_t>("seed", hp.seed));
  hp.validate();
  return hp;
}

struct ViewSources {
  std::vector<fs::path> views;
  std::optional<fs::path> truth;
  std::optional<fs::path> labels;
};

// Views come from an explicit "views" list or from a synth manifest.
ViewSources view_sources(const Config& cfg) {
  ViewSources src;
  if (cfg.has("manifest")) {
    const fs::path mpath = cfg.path("manifest");
    std::ifstream in(mpath);
    if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + mpath.string());
    json man;
    try {
      man = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "manifest " + mpath.string() + ": " + e.what());
    }
    const fs::path base = mpath.parent_path();
    for (const auto& v : man.at("views")) src.views.push_back(base / v.get<std::string>());
    if (man.contains("truth")) src.truth = base / man.at("truth").get<std::string>();
    if (man.contains("labels")) src.labels = base / man.at("labels").get<std::string>();
  }
  if (cfg.has("views")) src.views = cfg.paths("views");
  if (cfg.has("truth")) src.truth = cfg.path("truth");
  if (cfg.has("labels")) src.labels = cfg.path("labels");
  return src;
}

std::vector<Matrix> read_views(const std::vector<fs::path>& paths) {
  if (paths.empty()) throw Error(ErrorCode::MissingInput, "no view files given");
  std::vector<Matrix> views;
  for (const auto& p : paths) views.push_back(read_matrix_csv(p));
  return views;
}

// Raw views checked against a trained model and mapped to its feature scale.
std::vector<Matrix> model_views(const IntactModel& model, std::vector<Matrix> raw) {
  if (raw.size() != model.m())
    throw Error(ErrorCode::DimensionMismatch,
                "model has " + std::to_string(model.m()) + " views, got " + std::to_string(raw.size()));
  for (std::size_t v = 0; v < raw.size(); ++v) {
    if (raw[v].size() == 0) throw Error(ErrorCode::EmptyView, "view " + std::to_string(v) + " is empty");
    const auto expected = model.mode == ModelMode::Linear ? model.W[v].rows() : model.kernel_part->training_views[v].cols();
    if (raw[v].cols() != expected)
      throw Error(ErrorCode::DimensionMismatch, "view " + std::to_string(v) + " has " + std::to_string(raw[v].cols()) +
                                                    " columns, model expects " + std::to_string(expected));
  }
  auto data = validate_dataset(std::move(raw));
  if (model.standardization)
    for (std::size_t v = 0; v < data.views.size(); ++v) data.views[v] = model.standardization->apply(v, data.views[v]);
  return std::move(data.views);
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const auto h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

// ---- synth --------------------------------------------------------------------

void cmd_synth(const Context& ctx, std::ostream& out) {
  const Config cfg(ctx.config_path, {"generator", "n", "xyz_path", "per_class", "separation", "copies_per_base",
                                     "snr_db", "window_fraction", "seed"});
  const std::string generator = cfg.get<std::string>("generator", "s_curve");
  const std::uint64_t seed = ctx.seed.value_or(cfg.get<std::uint64_t>("seed", 0));
  NoiseSpec noise;
  noise.snr_db = cfg.number_or_inf("snr_db", noise.snr_db);
  noise.window_fraction = cfg.get<double>("window_fraction", noise.window_fraction);
  noise.copies_per_base = cfg.get<int>("copies_per_base", noise.copies_per_base);
  noise.seed = seed;
  noise.validate();

  Matrix points;
  std::optional<std::vector<int>> labels;
  if (generator == "s_curve") {
    const auto n = cfg.get<long>("n", 500);
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
    points = gen_s_curve(n, seed);
  } else if (generator == "xyz") {
    points = load_xyz_point_cloud(cfg.path("xyz_path"));
  } else if (generator == "blobs") {
    auto blobs = gen_gaussian_blobs(cfg.get<long>("per_class", 200), cfg.get<double>("separation", 6.0), seed);
    points = std::move(blobs.points);
    labels = std::move(blobs.labels);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown generator '" + generator + "'");
  }

  ensure_directory(ctx.out_dir);
  const auto views = make_noisy_views(project_to_planes(points), noise);
  json manifest;
  manifest["format"] = "intact-synth 1";
  manifest["generator"] = generator;
  manifest["n"] = points.rows();
  manifest["seed"] = seed;
  manifest["snr_db"] = std::isinf(noise.snr_db) ? json("inf") : json(noise.snr_db);
  manifest["window_fraction"] = noise.window_fraction;
  manifest["copies_per_base"] = noise.copies_per_base;
  write_matrix_csv(ctx.out_dir / "truth.csv", points, "truth dims 3");
  manifest["truth"] = "truth.csv";
  json files = json::array();
  json dims = json::array();
  for (std::size_t v = 0; v < views.size(); ++v) {
    const std::string name = "view_" + std::to_string(v) + ".csv";
    write_matrix_csv(ctx.out_dir / name, views[v],
                     "view " + std::to_string(v) + " dims " + std::to_string(views[v].cols()));
    files.push_back(name);
    dims.push_back(views[v].cols());
  }
  manifest["views"] = files;
  manifest["view_dims"] = dims;
  if (labels) {
    write_labels(ctx.out_dir / "labels.csv", *labels);
    manifest["labels"] = "labels.csv";
  }
  write_json(ctx.out_dir / "manifest.json", manifest);
  out << "views = " << views.size() << "\n"
      << "n = " << points.rows() << "\n"
      << "manifest = " << (ctx.out_dir / "manifest.json").string() << "\n";
}

// ---- train ----------------------------------------------------------------------

void cmd_train(const Context& ctx, std::ostream& out) {
  const Config cfg(ctx.config_path,
                   with_hyper({"manifest", "views", "labels", "truth", "standardize", "mode", "kernel", "gamma"}));
  const Hyperparams hp = read_hyperparams(cfg, ctx);
  const std::string mode = cfg.get<std::string>("mode", "linear");
  if (mode != "linear" && mode != "kernel") throw Error(ErrorCode::InvalidArgument, "mode must be linear or kernel");
  KernelSpec kernel;
  const std::string kname = cfg.get<std::string>("kernel", "rbf");
  if (kname == "rbf") kernel = KernelSpec::rbf(cfg.get<double>("gamma", 0.0));
  else if (kname == "linear") kernel = KernelSpec::linear();
  else throw Error(ErrorCode::InvalidArgument, "kernel must be linear or rbf");
  if (kernel.kind == KernelSpec::Kind::Rbf && kernel.gamma < 0.0)
    throw Error(ErrorCode::InvalidArgument, "gamma must be >= 0 (0 selects the median heuristic)");
  const bool standardize = cfg.get<bool>("standardize", true);
  const ViewSources src = view_sources(cfg);
  ensure_directory(ctx.out_dir);

  MultiViewDataset data = validate_dataset(read_views(src.views));
  std::optional<Standardization> record;
  if (standardize) {
    auto [scaled, rec] = standardize_views(data);
    data = std::move(scaled);
    record = std::move(rec);
  }
  log(Level::Info, "training on n=" + std::to_string(data.n()) + " m=" + std::to_string(data.m()));

  FitOptions options;
  options.threads = ctx.threads;
  FitResult result = mode == "linear" ? fit(data, hp, std::nullopt, options)
                                      : kernel_fit(data, hp, kernel, std::nullopt, options);
  result.model.standardization = record;

  save_model(ctx.out_dir / "model.txt", result.model);
  write_matrix_csv(ctx.out_dir / "embedding.csv", result.embedding.X,
                   "embedding n " + std::to_string(data.n()) + " d " + std::to_string(hp.d));
  write_history_csv(ctx.out_dir / "history.csv", result.history);

  const double final_obj =
      result.history.objective_trace.empty() ? result.history.initial_objective : result.history.objective_trace.back().objective;
  out << "objective = " << format_double(final_obj) << "\n"
      << "half_steps = " << result.history.objective_trace.size() << "\n"
      << "converged = " << (result.history.converged ? "true" : "false") << "\n"
      << "stop_reason = " << to_string(result.history.stop_reason) << "\n"
      << "monotone = " << (result.history.monotone() ? "true" : "false") << "\n";
}

// ---- embed ----------------------------------------------------------------------

void cmd_embed(const Context& ctx, std::ostream& out) {
  const Config cfg(ctx.config_path, {"model", "manifest", "views", "output"});
  const IntactModel model = load_model(cfg.path("model"));
  const ViewSources src = view_sources(cfg);
  const auto views = model_views(model, read_views(src.views));
  ensure_directory(ctx.out_dir);
  const Matrix X = embed_views(views, model, model.hyperparams, ctx.threads);
  const fs::path target = ctx.out_dir / cfg.get<std::string>("output", "embedded.csv");
  write_matrix_csv(target, X, "embedding n " + std::to_string(X.rows()) + " d " + std::to_string(X.cols()));
  out << "embedded = " << X.rows() << "\n"
      << "output = " << target.string() << "\n";
}

// ---- eval -----------------------------------------------------------------------

void cmd_eval(const Context& ctx, std::ostream& out) {
  const Config cfg(ctx.config_path,
                   {"embedding", "truth", "labels", "k", "train_fraction", "seed", "model", "manifest", "views"});
  const ViewSources src = view_sources(cfg);
  if (!src.truth && !src.labels) throw Error(ErrorCode::MissingInput, "eval needs truth or labels");
  const int k = cfg.get<int>("k", 3);
  const double train_fraction = cfg.get<double>("train_fraction", 0.5);
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "train_fraction must lie in (0, 1)");
  const std::uint64_t seed = ctx.seed.value_or(cfg.get<std::uint64_t>("seed", 0));
  const Matrix X = read_matrix_csv(cfg.path("embedding"));
  if (X.size() == 0) throw Error(ErrorCode::EmptyView, "embedding file is empty");

  json metrics;
  std::vector<std::pair<std::string, std::string>> lines;

  if (cfg.has("model") && !src.views.empty()) {
    const IntactModel model = load_model(cfg.path("model"));
    if (model.mode == ModelMode::Linear) {
      auto data = validate_dataset(model_views(model, read_views(src.views)));
      const double err = reconstruction_error(data, model, IntactEmbedding{X});
      metrics["reconstruction_error"] = err;
      lines.emplace_back("reconstruction_error", format_double(err));
    } else {
      log(Level::Warn, "reconstruction_error is only reported for linear models");
    }
  }
  if (src.truth) {
    const Matrix truth = read_matrix_csv(*src.truth);
    const auto score = align_to_truth(X, truth);
    metrics["alignment_residual"] = score.relative_residual;
    lines.emplace_back("alignment_residual", format_double(score.relative_residual));
  }
  if (src.labels) {
    const auto labels = read_labels(*src.labels);
    if (static_cast<Eigen::Index>(labels.size()) != X.rows())
      throw Error(ErrorCode::ShapeMismatch, "label count differs from embedding rows");
    // stratified split: train_fraction of every class trains
    std::map<int, std::vector<Eigen::Index>> by_class;
    for (Eigen::Index i = 0; i < X.rows(); ++i) by_class[labels[static_cast<std::size_t>(i)]].push_back(i);
    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> train_idx, test_idx;
    for (auto& [label, idx] : by_class) {
      std::shuffle(idx.begin(), idx.end(), rng);
      const auto cut = static_cast<std::size_t>(std::max<long>(1, std::lround(train_fraction * static_cast<double>(idx.size()))));
      for (std::size_t j = 0; j < idx.size(); ++j) (j < cut ? train_idx : test_idx).push_back(idx[j]);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    Matrix train(static_cast<Eigen::Index>(train_idx.size()), X.cols());
    Matrix test(static_cast<Eigen::Index>(test_idx.size()), X.cols());
    std::vector<int> train_labels, test_labels;
    for (std::size_t j = 0; j < train_idx.size(); ++j) {
      train.row(static_cast<Eigen::Index>(j)) = X.row(train_idx[j]);
      train_labels.push_back(labels[static_cast<std::size_t>(train_idx[j])]);
    }
    for (std::size_t j = 0; j < test_idx.size(); ++j) {
      test.row(static_cast<Eigen::Index>(j)) = X.row(test_idx[j]);
      test_labels.push_back(labels[static_cast<std::size_t>(test_idx[j])]);
    }
    const auto result = knn_classify(train, train_labels, test, k, test_labels);
    metrics["knn_accuracy"] = *result.accuracy;
    metrics["k"] = k;
    lines.emplace_back("knn_accuracy", format_double(*result.accuracy));
    lines.emplace_back("k", std::to_string(k));
  }

  ensure_directory(ctx.out_dir);
  write_json(ctx.out_dir / "metrics.json", metrics);
  for (const auto& [key, value] : lines) out << key << " = " << value << "\n";
}

// ---- probe ----------------------------------------------------------------------

void cmd_probe(const Context& ctx, std::ostream& out) {
  const Config cfg(ctx.config_path, {"model", "manifest", "views", "taus", "probes", "seed"});
  const IntactModel model = load_model(cfg.path("model"));
  if (model.mode != ModelMode::Linear) throw Error(ErrorCode::InvalidArgument, "probe needs a linear model");
  const Hyperparams& hp = model.hyperparams;
  if (!(hp.C2 > 0.0)) throw Error(ErrorCode::ZeroRegularizer, "the stability bound is undefined for C2 = 0");
  const auto taus = cfg.get<std::vector<double>>("taus", {1e-3, 1e-2});
  if (taus.empty()) throw Error(ErrorCode::InvalidArgument, "taus must not be empty");
  const int probes = cfg.get<int>("probes", 100);
  if (probes < 1) throw Error(ErrorCode::InvalidArgument, "probes must be >= 1");
  const std::uint64_t seed = ctx.seed.value_or(cfg.get<std::uint64_t>("seed", 0));
  const auto views = model_views(model, read_views(view_sources(cfg).views));
  const auto n = views.front().rows();

  std::mt19937_64 rng(seed);
  struct Pick {
    Eigen::Index example;
    std::size_t view;
    Eigen::Index coord;
    double tau;
  };
  std::vector<Pick> picks;
  for (int p = 0; p < probes; ++p) {
    Pick pk;
    pk.example = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
    pk.view = std::uniform_int_distribution<std::size_t>(0, views.size() - 1)(rng);
    pk.coord = std::uniform_int_distribution<Eigen::Index>(0, views[pk.view].cols() - 1)(rng);
    pk.tau = taus[static_cast<std::size_t>(p) % taus.size()];
    picks.push_back(pk);
  }

  ensure_directory(ctx.out_dir);
  std::string table = "probe,example,view,coord,tau,measured_deviation,beta_bound,holds,locally_convex\n";
  int violations = 0;
  int unexplained = 0;
  for (std::size_t p = 0; p < picks.size(); ++p) {
    std::vector<Vector> z;
    for (const auto& v : views) z.emplace_back(v.row(picks[p].example).transpose());
    const auto r = stability_probe(z, model, hp, picks[p].tau, picks[p].view, picks[p].coord);
    if (!r.holds) {
      ++violations;
      if (r.locally_convex) ++unexplained;
      log(Level::Warn, "probe " + std::to_string(p) + " exceeded the bound (locally_convex=" +
                           (r.locally_convex ? "true" : "false") + ")");
    }
    table += std::to_string(p) + ',' + std::to_string(picks[p].example) + ',' + std::to_string(picks[p].view) + ',' +
             std::to_string(picks[p].coord) + ',' + format_double(r.tau) + ',' + format_double(r.measured_deviation) +
             ',' + format_double(r.beta_bound) + ',' + (r.holds ? "true" : "false") + ',' +
             (r.locally_convex ? "true" : "false") + '\n';
  }
  std::ofstream f(ctx.out_dir / "probe.csv", std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write probe.csv");
  f << table;
  out << table << "probes = " << picks.size() << "\n"
      << "violations = " << violations << "\n"
      << "violations_with_convexity = " << unexplained << "\n";
}

// ---- bench ----------------------------------------------------------------------

void cmd_bench(const Context& ctx, std::ostream& out) {
  const Config cfg(ctx.config_path,
                   with_hyper({"rates", "magnitude", "n", "views", "view_dim", "noise_sd", "seeds"}));
  Hyperparams hp = read_hyperparams(cfg, ctx);
  const auto rates = cfg.get<std::vector<double>>("rates", {0.0, 0.1, 0.2, 0.3});
  for (double r : rates)
    if (!(r >= 0.0 && r < 0.5)) throw Error(ErrorCode::InvalidArgument, "contamination rate " + format_double(r) + " is outside [0, 0.5)");
  const double magnitude = cfg.get<double>("magnitude", 10.0);
  const auto n = cfg.get<long>("n", 200);
  const auto m = cfg.get<std::size_t>("views", 3);
  const auto view_dim = cfg.get<long>("view_dim", 5);
  const double noise_sd = cfg.get<double>("noise_sd", 0.1);
  const int seeds = cfg.get<int>("seeds", 10);
  if (n < 2 || m < 1 || view_dim < 1 || seeds < 1 || noise_sd < 0.0)
    throw Error(ErrorCode::InvalidArgument, "bench sizes must be positive");

  FitOptions options;
  options.threads = ctx.threads;
  ensure_directory(ctx.out_dir);
  std::string table = "rate,cauchy_error,l2_error,ratio\n";
  const std::uint64_t base_seed = hp.seed;
  for (double rate : rates) {
    std::vector<double> ce, le, ratio;
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
      const auto planted = gen_planted_linear(n, m, view_dim, hp.d, noise_sd, seed);
      hp.seed = seed;
      const auto r = robustness_benchmark(planted.views, rate, magnitude, hp, options);
      ce.push_back(r.cauchy_error);
      le.push_back(r.l2_error);
      ratio.push_back(r.ratio);
    }
    table += format_double(rate) + ',' + format_double(median(ce)) + ',' + format_double(median(le)) + ',' +
             format_double(median(ratio)) + '\n';
  }
  std::ofstream f(ctx.out_dir / "bench.csv", std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write bench.csv");
  f << table;
  out << table;
}

// ---- entry point -------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust multi-view latent representation learning"};
  app.require_subcommand(1);
  Context ctx;
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;

  using Command = void (*)(const Context&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"synth", "generate synthetic multi-view data", cmd_synth},
      {"train", "fit generation maps and the latent embedding", cmd_train},
      {"embed", "embed new multi-view examples with a trained model", cmd_embed},
      {"eval", "score an embedding against truth and/or labels", cmd_eval},
      {"probe", "run multi-view stability probes on a trained model", cmd_probe},
      {"bench", "Cauchy versus L2 contamination benchmark", cmd_bench},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (const auto& [name, help, _] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", ctx.threads, "worker threads (0 = default)")->check(CLI::NonNegativeNumber);
    seed_opts.push_back(sub->add_option("--seed", seed, "seed overriding the config"));
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? 0 : 2;
  }

  ctx.config_path = config;
  ctx.out_dir = out_dir;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    if (seed_opts[i]->count()) ctx.seed = seed;
    try {
      std::get<2>(commands[i])(ctx, out);
      return 0;
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      switch (e.code()) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::NonPositiveScale:
        case ErrorCode::MissingInput:
        case ErrorCode::ParseError:
          return 2;
        default:
          return 1;
      }
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}

}  // namespace intact::cli
