#include "graphite/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "graphite/cli/experiment.hpp"
#include "graphite/data/synthetic.hpp"
#include "graphite/errors.hpp"
#include "graphite/io.hpp"

namespace graphite::cli {

namespace fs = std::filesystem;
using evaluation::ResultRow;

namespace {

constexpr const char* kWorkersEnv = "GRAPHITE_WORKERS";

std::size_t default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw UsageError(std::string(kWorkersEnv) + " must be a positive integer");
  }
  return 1;
}

// Flags shared by train / evaluate / sweep that override manifest fields.
struct Overrides {
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta;
  std::optional<double> lambda;
  std::vector<double> lambda_grid;
  std::optional<std::size_t> epochs;

  void add_to(CLI::App& cmd, bool with_method, bool with_eta) {
    if (with_method) {
      cmd.add_option("--method", method,
                     "graphite | gnn | gnn_mmd | embedding | ols | mean (default: manifest)");
    }
    cmd.add_option("--seed", seed,
                   "seed for bias sampling, splits and training (default: manifest seeds)");
    if (with_eta) cmd.add_option("--eta", eta, "bias strength (default: manifest)");
    cmd.add_option("--lambda", lambda, "fixed lambda, disables the grid (default: manifest)");
    cmd.add_option("--lambda-grid", lambda_grid, "lambda grid (default: manifest)")
        ->delimiter(',');
    cmd.add_option("--epochs", epochs, "training epochs (default: manifest)");
  }

  void apply(ExperimentManifest& m) const {
    if (method) m.method = method_from_string(*method);
    if (seed) {
      m.bias.seed = *seed;
      m.split.seed = *seed;
      m.train.seed = *seed;
    }
    if (eta) m.bias.eta = *eta;
    if (lambda) {
      m.train.lambda = *lambda;
      m.train.lambda_grid.clear();
    }
    if (!lambda_grid.empty()) m.train.lambda_grid = lambda_grid;
    if (epochs) m.train.epochs = *epochs;
    m.train.validate();
  }
};

struct LoadedData {
  graphs::TreatmentCatalog catalog;
  data::OutcomeTable table;
};

LoadedData load_data(const ExperimentManifest& m) {
  data::DatasetPaths paths;
  paths.catalog = m.catalog;
  paths.covariates = m.covariates;
  paths.outcomes = m.outcomes;
  auto ds = data::load_dataset(paths);
  if (!ds.table) throw SchemaError("manifest: outcome table missing");
  return {std::move(ds.catalog), std::move(*ds.table)};
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(evaluation::kResultsHeader) + "\n";
  for (const auto& r : rows) out += evaluation::row_to_csv(r) + "\n";
  return out;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  data::SyntheticConfig cfg;
  std::string out = "data";
  bool write_manifest = false;
};

void cmd_generate(const GenerateArgs& a) {
  if (a.cfg.min_nodes > a.cfg.max_nodes) throw UsageError("--min-nodes exceeds --max-nodes");
  auto synth = data::generate_synthetic(a.cfg);
  const fs::path dir = a.out;
  data::Dataset ds{synth.catalog, synth.table.covariates(), synth.table, std::nullopt};
  data::save_dataset(data::DatasetPaths::in_directory(dir), ds);
  if (a.write_manifest) {
    const auto paths = data::DatasetPaths::in_directory(".");
    nlohmann::json m = {{"data",
                         {{"catalog", paths.catalog.filename().string()},
                          {"covariates", paths.covariates.filename().string()},
                          {"outcomes", paths.outcomes->filename().string()}}},
                        {"method", "graphite"},
                        {"output", "run"}};
    io::write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
  }
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string out;
  Overrides overrides;
};

void cmd_train(const TrainArgs& a) {
  auto manifest = ExperimentManifest::load(a.config);
  a.overrides.apply(manifest);
  const fs::path out = a.out.empty() ? manifest.output : fs::path(a.out);
  try {
    const auto start = std::chrono::steady_clock::now();
    const auto loaded = load_data(manifest);
    const auto prepared = prepare(loaded.table, loaded.catalog, manifest.bias, manifest.split);
    const auto trained = train_method(manifest.method, manifest.model, manifest.train, prepared,
                                      loaded.table, loaded.catalog);
    save_trained(out, trained);
    io::write_file_atomic(out / "manifest.json", manifest.to_json_text());
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    nlohmann::json timing = {{"wall_seconds", seconds}};
    io::write_file_atomic(out / "timing.json", timing.dump(2) + "\n");
  } catch (const Error& e) {
    // Keep the error category, add the manifest for context.
    const std::string msg = a.config + ": " + e.what();
    if (dynamic_cast<const CapabilityError*>(&e)) throw CapabilityError(msg);
    if (dynamic_cast<const UsageError*>(&e)) throw UsageError(msg);
    if (dynamic_cast<const SchemaError*>(&e)) throw SchemaError(msg);
    if (dynamic_cast<const NumericError*>(&e)) throw NumericError(msg);
    throw ContractError(msg);
  }
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string checkpoint;
  std::string config;
  std::string out;
  bool zero_shot = false;
  Overrides overrides;
};

void cmd_evaluate(const EvaluateArgs& a) {
  const fs::path dir = a.checkpoint;
  if (!fs::exists(dir / "model.json")) {
    throw SchemaError("no trained model in " + dir.string());
  }
  const fs::path config = a.config.empty() ? dir / "manifest.json" : fs::path(a.config);
  auto manifest = ExperimentManifest::load(config);
  a.overrides.apply(manifest);
  const auto trained = load_trained(dir);
  const auto loaded = load_data(manifest);
  const auto prepared = prepare(loaded.table, loaded.catalog, manifest.bias, manifest.split);
  if (a.zero_shot && prepared.held_out.empty()) {
    throw UsageError("--zero-shot needs a manifest with split.zero_shot enabled");
  }
  auto predictor = trained.predictor(loaded.catalog);
  CellEvaluation eval;
  if (a.zero_shot) {
    eval.zero_shot = evaluation::zero_shot_eval(*predictor, loaded.table, prepared.units.test,
                                                prepared.held_out);
  }
  eval.test = evaluation::evaluate(*predictor, loaded.table, prepared.units.test,
                                   prepared.available, prepared.train);

  nlohmann::json doc = {{"method", to_string(trained.method)},
                        {"test", nlohmann::json::parse(evaluation::eval_to_json(eval.test))}};
  if (eval.zero_shot) {
    doc["zero_shot"] = nlohmann::json::parse(evaluation::eval_to_json(*eval.zero_shot));
  }
  const fs::path out = a.out.empty() ? dir : fs::path(a.out);
  io::write_file_atomic(out / "eval.json", doc.dump(2) + "\n");
  io::write_file_atomic(out / "eval.csv",
                        rows_to_csv(cell_rows(eval, trained.method, manifest.bias.eta,
                                              trained.lambda, manifest.train.seed)));
}

// --- sweep ------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string out;
  std::vector<double> etas{0.0, 10.0, 20.0, 40.0};
  std::vector<std::string> methods{"graphite", "gnn", "gnn_mmd", "embedding", "ols", "mean"};
  std::vector<std::uint64_t> seeds{0};
  std::size_t workers = 1;
  bool breakdown = false;
  Overrides overrides;
};

using CellKey = std::tuple<std::string, double, std::uint64_t>;
using MetricKey = std::tuple<std::string, std::string, std::string>;

CellKey cell_of(const ResultRow& r) { return {r.method, r.eta, r.seed}; }

bool row_less(const ResultRow& a, const ResultRow& b) {
  return std::tie(a.method, a.eta, a.seed, a.split, a.group, a.metric) <
         std::tie(b.method, b.eta, b.seed, b.split, b.group, b.metric);
}

bool supports_zero_shot(Method m) { return m != Method::kEmbedding && m != Method::kOls; }

std::set<MetricKey> expected_metrics(Method method, bool zero_shot_split, bool breakdown) {
  std::set<MetricKey> keys{{"test", "all", "rmse"}};
  if (!breakdown) return keys;
  for (const std::string group : {"all", "q1", "q2", "q3", "q4", "q5"}) {
    keys.insert({"test", group, "rmse"});
    keys.insert({"test", group, "ci"});
  }
  if (zero_shot_split && supports_zero_shot(method)) {
    keys.insert({"zero_shot", "all", "rmse"});
    keys.insert({"zero_shot", "all", "ci"});
  }
  return keys;
}

std::vector<ResultRow> read_results(const fs::path& path) {
  std::vector<ResultRow> rows;
  if (!fs::exists(path)) return rows;
  std::istringstream in(io::read_file(path));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line != evaluation::kResultsHeader) {
        throw SchemaError(path.string() + ": unexpected header '" + line + "'");
      }
      continue;
    }
    rows.push_back(evaluation::row_from_csv(line));
  }
  return rows;
}

void cmd_sweep(const SweepArgs& a) {
  auto base = ExperimentManifest::load(a.config);
  a.overrides.apply(base);
  const fs::path out = a.out.empty() ? base.output / "results.csv" : fs::path(a.out);
  std::vector<Method> methods;
  for (const auto& name : a.methods) methods.push_back(method_from_string(name));

  const auto loaded = load_data(base);
  auto rows = read_results(out);

  struct Cell {
    Method method;
    double eta;
    std::uint64_t seed;
  };
  std::vector<Cell> todo;
  std::set<CellKey> seen;
  for (double eta : a.etas) {
    for (Method m : methods) {
      for (std::uint64_t seed : a.seeds) {
        const CellKey key{to_string(m), eta, seed};
        if (!seen.insert(key).second) continue;
        std::set<MetricKey> have;
        for (const auto& r : rows) {
          if (cell_of(r) == key) have.insert({r.split, r.group, r.metric});
        }
        const auto need = expected_metrics(m, base.split.zero_shot, a.breakdown);
        if (!std::includes(have.begin(), have.end(), need.begin(), need.end())) {
          todo.push_back({m, eta, seed});
        }
      }
    }
  }
  // Stale rows of cells about to be recomputed go away.
  std::set<CellKey> redo;
  for (const auto& c : todo) redo.insert({to_string(c.method), c.eta, c.seed});
  std::erase_if(rows, [&](const ResultRow& r) { return redo.contains(cell_of(r)); });
  std::sort(rows.begin(), rows.end(), row_less);
  io::write_file_atomic(out, rows_to_csv(rows));

  std::mutex writer;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;

  auto run_cell = [&](const Cell& cell) {
    ExperimentManifest m = base;
    m.method = cell.method;
    m.bias.eta = cell.eta;
    m.bias.seed = cell.seed;
    m.split.seed = cell.seed;
    m.train.seed = cell.seed;
    const auto prepared = prepare(loaded.table, loaded.catalog, m.bias, m.split);
    const auto trained =
        train_method(m.method, m.model, m.train, prepared, loaded.table, loaded.catalog);
    const auto eval = evaluate_trained(trained, prepared, loaded.table, loaded.catalog);
    auto produced = cell_rows(eval, cell.method, cell.eta, trained.lambda, cell.seed);
    if (!a.breakdown) {
      std::erase_if(produced, [](const ResultRow& r) {
        return !(r.split == "test" && r.group == "all" && r.metric == "rmse");
      });
    }
    std::lock_guard lock(writer);
    rows.insert(rows.end(), produced.begin(), produced.end());
    std::sort(rows.begin(), rows.end(), row_less);
    io::write_file_atomic(out, rows_to_csv(rows));
  };

  auto worker = [&] {
    while (!failed) {
      const std::size_t i = next++;
      if (i >= todo.size()) return;
      try {
        run_cell(todo[i]);
      } catch (...) {
        std::lock_guard lock(writer);
        if (!failed.exchange(true)) first_error = std::current_exception();
      }
    }
  };

  const std::size_t width = std::max<std::size_t>(1, std::min(a.workers, todo.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < width; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"graphite: outcome prediction for graph-structured treatments"};
  app.name(args.empty() ? "graphite" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a synthetic catalog, covariates and outcomes");
  generate->add_option("--units", gen.cfg.units, "number of units")->check(CLI::PositiveNumber);
  generate->add_option("--treatments", gen.cfg.treatments, "number of treatment graphs")
      ->check(CLI::PositiveNumber);
  generate->add_option("--covariate-dim", gen.cfg.covariate_dim, "covariate dimension")
      ->check(CLI::PositiveNumber);
  generate->add_option("--min-nodes", gen.cfg.min_nodes, "smallest graph size")
      ->check(CLI::PositiveNumber);
  generate->add_option("--max-nodes", gen.cfg.max_nodes, "largest graph size")
      ->check(CLI::PositiveNumber);
  generate->add_option("--label-vocab", gen.cfg.label_vocab, "number of node labels")
      ->check(CLI::PositiveNumber);
  generate->add_option("--extra-edge-rate", gen.cfg.extra_edge_rate,
                       "extra edges per node beyond the spanning tree")
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--seed", gen.cfg.seed, "random seed");
  generate->add_option("--out", gen.out, "output directory");
  generate->add_flag("--write-manifest", gen.write_manifest,
                     "also write manifest.json referencing the files");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "fit one method from a manifest");
  train->add_option("--config", tr.config, "manifest file")->required();
  train->add_option("--out", tr.out, "model directory (default: manifest output)");
  tr.overrides.add_to(*train, true, true);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "score a trained model on the test units");
  evaluate->add_option("--checkpoint", ev.checkpoint, "model directory written by train")
      ->required();
  evaluate->add_option("--config", ev.config,
                       "manifest file (default: the manifest stored with the model)");
  evaluate->add_option("--out", ev.out, "output directory (default: model directory)");
  evaluate->add_flag("--zero-shot", ev.zero_shot, "also evaluate on held-out treatments");
  ev.overrides.add_to(*evaluate, false, true);

  SweepArgs sw;
  sw.workers = default_workers();
  auto* sweep = app.add_subcommand("sweep", "run every (eta, method, seed) cell into one CSV");
  sweep->add_option("--config", sw.config, "manifest file")->required();
  sweep->add_option("--out", sw.out, "results CSV (default: <manifest output>/results.csv)");
  sweep->add_option("--eta-list", sw.etas, "bias strengths")->delimiter(',');
  sweep->add_option("--methods", sw.methods, "methods")->delimiter(',');
  sweep->add_option("--seeds", sw.seeds, "seeds")->delimiter(',');
  sweep->add_option("--workers", sw.workers,
                    std::string("parallel cells (default from ") + kWorkersEnv + ")")
      ->check(CLI::PositiveNumber);
  sweep->add_flag("--breakdown", sw.breakdown,
                  "write CI, popularity groups and zero-shot rows as well");
  sw.overrides.add_to(*sweep, false, false);

  try {
    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) cmd_generate(gen);
    if (*train) cmd_train(tr);
    if (*evaluate) cmd_evaluate(ev);
    if (*sweep) cmd_sweep(sw);
  } catch (const CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return kExitCapability;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}

}  // namespace graphite::cli
