// Command-line front end: dataset generation with cached reference optima,
// training (dll / dc3), evaluation reports, and a cone-projection debugger.
//
// Flag precedence: command line > --config JSON (per-subcommand sections) >
// built-in defaults. Relative paths are resolved against $DLL_DATA_DIR when
// it is set.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dll/cones.hpp"
#include "dll/problems.hpp"
#include "dll/refsolve.hpp"
#include "dll/training.hpp"

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string resolve_path(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  const char* base = std::getenv("DLL_DATA_DIR");
  if (!base || !*base) return path;
  return std::string(base) + "/" + path;
}

json load_config_section(int argc, char** argv, const std::string& section) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(resolve_path(argv[i + 1]));
      if (!in) {
        throw std::runtime_error(std::string("cannot open config: ") +
                                 argv[i + 1]);
      }
      json j;
      in >> j;
      if (j.contains(section)) return j.at(section);
      return json::object();
    }
  }
  return json::object();
}

template <typename T>
void from_config(const json& cfg, const char* key, T& value) {
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

dll::cones::ConeSpec parse_cone(const std::string& name, double alpha,
                                bool dual) {
  using dll::cones::ConeSpec;
  auto sized = [&](const std::string& prefix) -> long {
    if (name.rfind(prefix, 0) != 0) return -1;
    const std::string digits = name.substr(prefix.size());
    if (digits.empty()) return -1;
    return std::stol(digits);
  };
  ConeSpec spec;
  if (long n = sized("orthant"); n > 0) {
    spec = ConeSpec::nonneg_orthant(static_cast<std::size_t>(n));
  } else if (long n = sized("soc"); n > 0) {
    spec = ConeSpec::soc(static_cast<std::size_t>(n));
  } else if (long n = sized("rsoc"); n > 0) {
    spec = ConeSpec::rsoc(static_cast<std::size_t>(n));
  } else if (long n = sized("psd"); n > 0) {
    spec = ConeSpec::psd(static_cast<std::size_t>(n));
  } else if (name == "exp") {
    spec = ConeSpec::exponential();
  } else if (name == "dualexp") {
    spec = ConeSpec::dual_exponential();
  } else if (name == "power") {
    spec = ConeSpec::power(alpha);
  } else {
    throw std::runtime_error(
        "unknown cone '" + name +
        "' (use orthantN, socN, rsocN, psdN, exp, dualexp, power)");
  }
  return dual ? dll::cones::dual_cone(spec) : spec;
}

struct GenArgs {
  std::string family;
  std::size_t m = 5;
  std::size_t n = 0;
  std::size_t count = 0;
  std::size_t train = 0, val = 0, test = 0;
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 1;
};

int cmd_gen(const GenArgs& args) {
  using dll::problems::Family;
  const Family family = dll::problems::family_from_name(args.family);
  dll::problems::Dataset ds =
      family == Family::Knapsack
          ? dll::problems::gen_knapsack(args.m, args.n, args.count, args.seed)
          : dll::problems::gen_prodplan(args.n, args.count, args.seed);

  std::size_t val = args.val, test = args.test, train = args.train;
  if (train + val + test == 0) {
    val = args.count / 6;
    test = args.count / 6;
    train = args.count - val - test;
  }
  dll::problems::assign_splits(ds, train, val, test);
  dll::refsolve::annotate_with_oracles(ds, args.jobs);

  const std::string path = resolve_path(args.out);
  dll::problems::save_dataset(ds, path);

  double mean = 0.0;
  for (const auto& rec : ds.records) mean += rec.oracle->value;
  mean /= static_cast<double>(ds.records.size());
  std::cout << "wrote " << ds.records.size() << " " << args.family
            << " instances (train/val/test = " << train << "/" << val << "/"
            << test << ") to " << path << "\n"
            << "mean oracle value: " << fmt(mean) << "\n";
  return 0;
}

// Sentinel values keep the per-family protocol defaults unless overridden.
struct TrainArgs {
  std::string data;
  std::string method = "dll";
  std::string out;
  std::string history;
  std::vector<std::size_t> hidden;
  double lr0 = -1.0;
  int patience = -1;
  int max_epochs = -1;
  int warmup = -1;
  std::size_t batch = 0;
  std::uint64_t seed = 0;
  int correction_steps = -1;
  double correction_rate = -1.0;
  double rho = -1.0;
};

int cmd_train(const TrainArgs& args) {
  using dll::problems::Family;
  const auto ds = dll::problems::load_dataset(resolve_path(args.data));
  std::size_t m = 0, n = 0;
  if (ds.family == Family::Knapsack) {
    const auto& inst =
        std::get<dll::problems::KnapsackInstance>(ds.records.at(0).instance);
    m = inst.m;
    n = inst.n;
  } else {
    n = std::get<dll::problems::ProdPlanInstance>(ds.records.at(0).instance).n;
  }

  dll::training::TrainConfig cfg = dll::training::default_config(
      ds.family, dll::training::method_from_name(args.method), m, n);
  if (!args.hidden.empty()) cfg.hidden = args.hidden;
  if (args.lr0 > 0.0) cfg.lr0 = args.lr0;
  if (args.patience >= 0) cfg.patience = args.patience;
  if (args.max_epochs > 0) cfg.max_epochs = args.max_epochs;
  if (args.warmup >= 0) cfg.warmup = args.warmup;
  if (args.batch > 0) cfg.batch_size = args.batch;
  cfg.seed = args.seed;
  if (args.correction_steps >= 0) cfg.correction_steps = args.correction_steps;
  if (args.correction_rate > 0.0) cfg.correction_rate = args.correction_rate;
  if (args.rho > 0.0) cfg.penalty_rho = args.rho;

  const auto result = cfg.method == dll::training::Method::Dll
                          ? dll::training::dll_train(ds, cfg)
                          : dll::training::dc3_train(ds, cfg);

  const std::string ckpt = resolve_path(args.out);
  dll::training::save_checkpoint(result, ckpt);
  const std::string history_path = args.history.empty()
                                       ? ckpt + ".history.csv"
                                       : resolve_path(args.history);
  dll::training::write_history_csv(result.history, history_path);

  const auto& last = result.history.back();
  double best_val = result.history.front().val_loss;
  for (const auto& e : result.history) best_val = std::min(best_val, e.val_loss);
  std::cout << "trained " << args.method << " for " << last.epoch
            << " epochs; best validation loss " << fmt(best_val)
            << "; checkpoint " << ckpt << "\n";
  return 0;
}

struct EvalArgs {
  std::string data;
  std::string checkpoint;
  std::string out_csv;
  std::string out_rows;
  std::string out_json;
  int jobs = 1;
};

int cmd_eval(const EvalArgs& args) {
  const auto ds = dll::problems::load_dataset(resolve_path(args.data));
  const auto tm = dll::training::load_checkpoint(resolve_path(args.checkpoint));
  const auto rep = dll::training::evaluate(tm, ds, args.jobs);

  const std::string csv = dll::training::report_csv(rep);
  std::cout << csv;
  if (!args.out_csv.empty()) {
    std::ofstream out(resolve_path(args.out_csv));
    out << csv;
  }
  if (!args.out_rows.empty()) {
    std::ofstream out(resolve_path(args.out_rows));
    out << dll::training::report_rows_csv(rep);
  }
  if (!args.out_json.empty()) {
    std::ofstream out(resolve_path(args.out_json));
    out << dll::training::report_json(rep).dump(2) << "\n";
  }
  if (rep.weak_duality_violations > 0) {
    std::cerr << "weak duality violated on " << rep.weak_duality_violations
              << " instances\n";
    return 1;
  }
  return 0;
}

struct ProjectArgs {
  std::string cone;
  std::string mode = "radial";
  double alpha = 0.5;
  bool dual = false;
  std::vector<double> values;
};

int cmd_project(const ProjectArgs& args) {
  const auto spec = parse_cone(args.cone, args.alpha, args.dual);
  const dll::linalg::Vec x = args.values;
  if (args.mode == "euclidean") {
    const auto p = dll::cones::project_euclidean(spec, x);
    std::cout << "projected:";
    for (double v : p) std::cout << ' ' << fmt(v);
    std::cout << "\nslack: " << fmt(dll::cones::membership_slack(spec, p))
              << "\n";
    return 0;
  }
  if (args.mode != "radial") {
    throw std::runtime_error("mode must be euclidean or radial");
  }
  const auto rp = dll::cones::project_radial_step(spec, x);
  std::cout << "projected:";
  for (double v : rp.point) std::cout << ' ' << fmt(v);
  std::cout << "\nslack: " << fmt(dll::cones::membership_slack(spec, rp.point))
            << "\nlambda: " << fmt(rp.step) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual conic optimization proxies with certified bounds"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config with per-subcommand sections");

  GenArgs gen_args;
  TrainArgs train_args;
  EvalArgs eval_args;
  ProjectArgs project_args;

  try {
    const json gen_cfg = load_config_section(argc, argv, "gen");
    from_config(gen_cfg, "family", gen_args.family);
    from_config(gen_cfg, "m", gen_args.m);
    from_config(gen_cfg, "n", gen_args.n);
    from_config(gen_cfg, "count", gen_args.count);
    from_config(gen_cfg, "seed", gen_args.seed);
    from_config(gen_cfg, "out", gen_args.out);
    from_config(gen_cfg, "jobs", gen_args.jobs);

    const json train_cfg = load_config_section(argc, argv, "train");
    from_config(train_cfg, "data", train_args.data);
    from_config(train_cfg, "method", train_args.method);
    from_config(train_cfg, "out", train_args.out);
    from_config(train_cfg, "history", train_args.history);
    from_config(train_cfg, "hidden", train_args.hidden);
    from_config(train_cfg, "lr0", train_args.lr0);
    from_config(train_cfg, "patience", train_args.patience);
    from_config(train_cfg, "max_epochs", train_args.max_epochs);
    from_config(train_cfg, "warmup", train_args.warmup);
    from_config(train_cfg, "batch", train_args.batch);
    from_config(train_cfg, "seed", train_args.seed);
    from_config(train_cfg, "correction_steps", train_args.correction_steps);
    from_config(train_cfg, "correction_rate", train_args.correction_rate);
    from_config(train_cfg, "rho", train_args.rho);

    const json eval_cfg = load_config_section(argc, argv, "eval");
    from_config(eval_cfg, "data", eval_args.data);
    from_config(eval_cfg, "checkpoint", eval_args.checkpoint);
    from_config(eval_cfg, "out_csv", eval_args.out_csv);
    from_config(eval_cfg, "out_rows", eval_args.out_rows);
    from_config(eval_cfg, "out_json", eval_args.out_json);
    from_config(eval_cfg, "jobs", eval_args.jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  auto* gen = app.add_subcommand("gen", "generate instances + oracle values");
  gen->add_option("--family", gen_args.family, "knapsack or prodplan")
      ->required(gen_args.family.empty());
  gen->add_option("--m", gen_args.m, "knapsack resource count");
  gen->add_option("--n", gen_args.n, "item count")
      ->required(gen_args.n == 0);
  gen->add_option("--count", gen_args.count, "total instances")
      ->check(CLI::PositiveNumber)
      ->required(gen_args.count == 0);
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--train", gen_args.train, "train split size");
  gen->add_option("--val", gen_args.val, "validation split size");
  gen->add_option("--test", gen_args.test, "test split size");
  gen->add_option("--out", gen_args.out, "output JSONL (.gz supported)")
      ->required(gen_args.out.empty());
  gen->add_option("--jobs", gen_args.jobs, "oracle solver workers");

  auto* train = app.add_subcommand("train", "train a dual proxy");
  train->add_option("--data", train_args.data, "dataset JSONL")
      ->required(train_args.data.empty());
  train->add_option("--method", train_args.method, "dll or dc3");
  train->add_option("--out", train_args.out, "checkpoint JSON path")
      ->required(train_args.out.empty());
  train->add_option("--history", train_args.history, "per-epoch CSV path");
  train->add_option("--hidden", train_args.hidden, "hidden layer sizes")
      ->delimiter(',');
  train->add_option("--lr0", train_args.lr0, "initial learning rate");
  train->add_option("--patience", train_args.patience, "patience epochs");
  train->add_option("--max-epochs", train_args.max_epochs, "epoch cap");
  train->add_option("--warmup", train_args.warmup,
                    "epochs with patience disabled");
  train->add_option("--batch", train_args.batch, "mini-batch size");
  train->add_option("--seed", train_args.seed, "training seed");
  train->add_option("--correction-steps", train_args.correction_steps,
                    "dc3 correction steps");
  train->add_option("--correction-rate", train_args.correction_rate,
                    "dc3 correction learning rate");
  train->add_option("--rho", train_args.rho, "dc3 soft penalty weight");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--data", eval_args.data, "dataset JSONL with oracles")
      ->required(eval_args.data.empty());
  eval->add_option("--checkpoint", eval_args.checkpoint, "checkpoint JSON")
      ->required(eval_args.checkpoint.empty());
  eval->add_option("--out-csv", eval_args.out_csv, "aggregate CSV path");
  eval->add_option("--out-rows", eval_args.out_rows, "per-instance CSV path");
  eval->add_option("--out-json", eval_args.out_json, "full JSON report path");
  eval->add_option("--jobs", eval_args.jobs, "inference workers");

  auto* project = app.add_subcommand("project", "debug cone projections");
  project->add_option("--cone", project_args.cone,
                      "orthantN, socN, rsocN, psdN, exp, dualexp, power")
      ->required();
  project->add_option("--mode", project_args.mode, "euclidean or radial");
  project->add_option("--alpha", project_args.alpha, "power cone exponent");
  project->add_flag("--dual", project_args.dual, "project onto the dual cone");
  project->add_option("values", project_args.values,
                      "point coordinates (PSD: packed upper triangle)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (train->parsed()) return cmd_train(train_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (project->parsed()) return cmd_project(project_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
