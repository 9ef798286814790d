#include "graphite/cli/experiment.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "graphite/errors.hpp"
#include "graphite/io.hpp"
#include "graphite/numerics/checkpoint.hpp"
#include "graphite/numerics/random.hpp"

namespace graphite::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kTrainSampleSalt = 41;
constexpr std::uint64_t kValSampleSalt = 42;

const std::vector<std::pair<Method, std::string>>& method_table() {
  static const std::vector<std::pair<Method, std::string>> table = {
      {Method::kGraphite, "graphite"}, {Method::kGnn, "gnn"},
      {Method::kGnnMmd, "gnn_mmd"},    {Method::kEmbedding, "embedding"},
      {Method::kOls, "ols"},           {Method::kMean, "mean"}};
  return table;
}

bool is_network(Method m) { return m != Method::kOls && m != Method::kMean; }

void check_keys(const json& object, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!object.is_object()) throw SchemaError("manifest: '" + where + "' must be an object");
  for (const auto& [key, _] : object.items()) {
    if (!allowed.contains(key)) {
      throw SchemaError("manifest: unknown key '" + key + "' in '" + where + "'");
    }
  }
}

template <typename T>
void read_opt(const json& object, const char* key, T& out, const std::string& where) {
  if (!object.contains(key)) return;
  try {
    out = object.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError("manifest: bad value for '" + where + "." + key + "'");
  }
}

std::string readout_name(graphs::ReadoutActivation r) {
  return r == graphs::ReadoutActivation::kSoftmax ? "softmax" : "sigmoid";
}

graphs::ReadoutActivation readout_from(const std::string& name) {
  if (name == "softmax") return graphs::ReadoutActivation::kSoftmax;
  if (name == "sigmoid") return graphs::ReadoutActivation::kSigmoid;
  throw SchemaError("unknown readout activation '" + name + "'");
}

json model_config_json(const encoders::ModelConfig& c) {
  return {{"covariate_dim", c.covariate_dim},
          {"treatment_count", c.treatment_count},
          {"label_vocab", c.label_vocab},
          {"psi_mode", encoders::to_string(c.psi_mode)},
          {"phi_layers", c.phi_layers},
          {"phi_dim", c.phi_dim},
          {"g_layers", c.g_layers},
          {"g_hidden", c.g_hidden},
          {"gnn_layers", c.gnn.layers},
          {"gnn_dim", c.gnn.hidden_dim},
          {"readout", readout_name(c.gnn.readout)},
          {"shared_weights", c.gnn.shared_weights},
          {"embedding_dim", c.embedding_dim},
          {"seed", c.seed}};
}

encoders::ModelConfig model_config_from(const json& j) {
  encoders::ModelConfig c;
  c.covariate_dim = j.at("covariate_dim").get<std::size_t>();
  c.treatment_count = j.at("treatment_count").get<std::size_t>();
  c.label_vocab = j.at("label_vocab").get<std::size_t>();
  c.psi_mode = encoders::psi_mode_from_string(j.at("psi_mode").get<std::string>());
  c.phi_layers = j.at("phi_layers").get<std::size_t>();
  c.phi_dim = j.at("phi_dim").get<std::size_t>();
  c.g_layers = j.at("g_layers").get<std::size_t>();
  c.g_hidden = j.at("g_hidden").get<std::size_t>();
  c.gnn.layers = j.at("gnn_layers").get<std::size_t>();
  c.gnn.hidden_dim = j.at("gnn_dim").get<std::size_t>();
  c.gnn.readout = readout_from(j.at("readout").get<std::string>());
  c.gnn.shared_weights = j.at("shared_weights").get<bool>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::vector<int> id_values(const std::set<TreatmentId>& ids) {
  std::vector<int> out;
  for (const auto& id : ids) out.push_back(static_cast<int>(id.value()));
  return out;
}

}  // namespace

std::string to_string(Method method) {
  for (const auto& [m, name] : method_table()) {
    if (m == method) return name;
  }
  throw ContractError("unknown method");
}

Method method_from_string(const std::string& name) {
  for (const auto& [m, n] : method_table()) {
    if (n == name) return m;
  }
  throw UsageError("unknown method '" + name + "' (expected one of graphite, gnn, gnn_mmd, "
                   "embedding, ols, mean)");
}

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [_, n] : method_table()) out.push_back(n);
    return out;
  }();
  return names;
}

ExperimentManifest::ExperimentManifest() { train.lambda_grid = training::default_lambda_grid(); }

ExperimentManifest ExperimentManifest::from_json_text(const std::string& text,
                                                      const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("manifest: invalid JSON: ") + e.what());
  }
  check_keys(root, {"data", "method", "bias", "split", "train", "model", "output"}, "manifest");
  ExperimentManifest m;
  if (!root.contains("data")) throw SchemaError("manifest: missing 'data' section");
  const json& data = root.at("data");
  check_keys(data, {"catalog", "covariates", "outcomes"}, "data");
  auto resolve = [&](const char* key) {
    if (!data.contains(key) || !data.at(key).is_string()) {
      throw SchemaError(std::string("manifest: missing path 'data.") + key + "'");
    }
    fs::path p = data.at(key).get<std::string>();
    return fs::absolute(p.is_absolute() ? p : base_dir / p).lexically_normal();
  };
  m.catalog = resolve("catalog");
  m.covariates = resolve("covariates");
  m.outcomes = resolve("outcomes");

  if (root.contains("method")) {
    if (!root.at("method").is_string()) throw SchemaError("manifest: 'method' must be a string");
    m.method = method_from_string(root.at("method").get<std::string>());
  }
  if (root.contains("bias")) {
    const json& b = root.at("bias");
    check_keys(b, {"eta", "seed", "samples_per_unit"}, "bias");
    read_opt(b, "eta", m.bias.eta, "bias");
    read_opt(b, "seed", m.bias.seed, "bias");
    read_opt(b, "samples_per_unit", m.bias.samples_per_unit, "bias");
  }
  if (root.contains("split")) {
    const json& s = root.at("split");
    check_keys(s, {"train", "val", "test", "zero_shot", "zero_shot_fraction", "seed"}, "split");
    read_opt(s, "train", m.split.train, "split");
    read_opt(s, "val", m.split.val, "split");
    read_opt(s, "test", m.split.test, "split");
    read_opt(s, "zero_shot", m.split.zero_shot, "split");
    read_opt(s, "zero_shot_fraction", m.split.zero_shot_fraction, "split");
    read_opt(s, "seed", m.split.seed, "split");
  }
  if (root.contains("train")) {
    const json& t = root.at("train");
    check_keys(t,
               {"lambda", "lambda_grid", "batch_size", "epochs", "learning_rate", "seed",
                "regularizer", "patience"},
               "train");
    read_opt(t, "lambda", m.train.lambda, "train");
    read_opt(t, "lambda_grid", m.train.lambda_grid, "train");
    read_opt(t, "batch_size", m.train.batch_size, "train");
    read_opt(t, "epochs", m.train.epochs, "train");
    read_opt(t, "learning_rate", m.train.learning_rate, "train");
    read_opt(t, "seed", m.train.seed, "train");
    read_opt(t, "patience", m.train.patience, "train");
    if (t.contains("regularizer")) {
      std::string name;
      read_opt(t, "regularizer", name, "train");
      m.train.regularizer = training::regularizer_from_string(name);
    }
  }
  if (root.contains("model")) {
    const json& d = root.at("model");
    check_keys(d,
               {"phi_layers", "phi_dim", "g_layers", "g_hidden", "gnn_layers", "gnn_dim",
                "readout", "shared_weights", "embedding_dim"},
               "model");
    read_opt(d, "phi_layers", m.model.phi_layers, "model");
    read_opt(d, "phi_dim", m.model.phi_dim, "model");
    read_opt(d, "g_layers", m.model.g_layers, "model");
    read_opt(d, "g_hidden", m.model.g_hidden, "model");
    read_opt(d, "gnn_layers", m.model.gnn_layers, "model");
    read_opt(d, "gnn_dim", m.model.gnn_dim, "model");
    read_opt(d, "shared_weights", m.model.shared_weights, "model");
    read_opt(d, "embedding_dim", m.model.embedding_dim, "model");
    if (d.contains("readout")) {
      std::string name;
      read_opt(d, "readout", name, "model");
      m.model.readout = readout_from(name);
    }
  }
  if (root.contains("output")) {
    if (!root.at("output").is_string()) throw SchemaError("manifest: 'output' must be a string");
    fs::path out = root.at("output").get<std::string>();
    m.output = fs::absolute(out.is_absolute() ? out : base_dir / out).lexically_normal();
  } else {
    m.output = fs::absolute(base_dir / "run").lexically_normal();
  }

  for (const auto* p : {&m.catalog, &m.covariates, &m.outcomes}) {
    if (!fs::exists(*p)) throw SchemaError("manifest: file not found: " + p->string());
  }
  m.split.validate();
  m.train.validate();
  return m;
}

ExperimentManifest ExperimentManifest::load(const fs::path& path) {
  if (!fs::exists(path)) throw SchemaError("manifest not found: " + path.string());
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return from_json_text(io::read_file(path), base);
}

std::string ExperimentManifest::to_json_text() const {
  json root = {
      {"data",
       {{"catalog", catalog.string()},
        {"covariates", covariates.string()},
        {"outcomes", outcomes.string()}}},
      {"method", cli::to_string(method)},
      {"bias", {{"eta", bias.eta}, {"seed", bias.seed}, {"samples_per_unit", bias.samples_per_unit}}},
      {"split",
       {{"train", split.train},
        {"val", split.val},
        {"test", split.test},
        {"zero_shot", split.zero_shot},
        {"zero_shot_fraction", split.zero_shot_fraction},
        {"seed", split.seed}}},
      {"train",
       {{"lambda", train.lambda},
        {"lambda_grid", train.lambda_grid},
        {"batch_size", train.batch_size},
        {"epochs", train.epochs},
        {"learning_rate", train.learning_rate},
        {"seed", train.seed},
        {"regularizer", training::to_string(train.regularizer)},
        {"patience", train.patience}}},
      {"model",
       {{"phi_layers", model.phi_layers},
        {"phi_dim", model.phi_dim},
        {"g_layers", model.g_layers},
        {"g_hidden", model.g_hidden},
        {"gnn_layers", model.gnn_layers},
        {"gnn_dim", model.gnn_dim},
        {"readout", readout_name(model.readout)},
        {"shared_weights", model.shared_weights},
        {"embedding_dim", model.embedding_dim}}},
      {"output", output.string()}};
  return root.dump(2) + "\n";
}

PreparedData prepare(const data::OutcomeTable& table, const graphs::TreatmentCatalog& catalog,
                     const data::BiasConfig& bias, const data::SplitSpec& split) {
  if (table.treatments() != catalog.size()) {
    throw ContractError("outcome table has " + std::to_string(table.treatments()) +
                        " treatments but the catalog has " + std::to_string(catalog.size()));
  }
  PreparedData out;
  out.units = data::split_units(table.units(), split);
  if (split.zero_shot) {
    auto ts = data::split_treatments_zero_shot(catalog.size(), split);
    out.available = std::move(ts.observed);
    out.held_out = std::move(ts.held_out);
  } else {
    out.available = catalog.ids();
  }
  data::BiasConfig train_bias = bias;
  train_bias.seed = num::derive_seed(bias.seed, kTrainSampleSalt);
  data::BiasConfig val_bias = bias;
  val_bias.seed = num::derive_seed(bias.seed, kValSampleSalt);
  out.train = data::bias_sample(table, train_bias, out.units.train, out.available);
  if (!out.units.val.empty()) {
    out.val = data::bias_sample(table, val_bias, out.units.val, out.available);
  }
  return out;
}

encoders::ModelConfig model_config(const ModelSettings& s, Method method,
                                   const data::OutcomeTable& table,
                                   const graphs::TreatmentCatalog& catalog) {
  encoders::ModelConfig c;
  c.covariate_dim = table.covariate_dim();
  c.treatment_count = catalog.size();
  c.label_vocab = catalog.label_vocab();
  c.psi_mode = method == Method::kEmbedding ? encoders::PsiMode::kEmbeddingTable
                                            : encoders::PsiMode::kGraphEncoder;
  c.phi_layers = s.phi_layers;
  c.phi_dim = s.phi_dim;
  c.g_layers = s.g_layers;
  c.g_hidden = s.g_hidden;
  c.gnn.layers = s.gnn_layers;
  c.gnn.hidden_dim = s.gnn_dim;
  c.gnn.readout = s.readout;
  c.gnn.shared_weights = s.shared_weights;
  c.embedding_dim = s.embedding_dim;
  return c;
}

training::TrainConfig train_config_for(Method method, training::TrainConfig base) {
  switch (method) {
    case Method::kGraphite:
      if (base.regularizer != training::Regularizer::kHsic) {
        base.regularizer = training::Regularizer::kNhsic;
      }
      break;
    case Method::kGnnMmd:
      base.regularizer = training::Regularizer::kMmdPivot;
      break;
    default:
      base.regularizer = training::Regularizer::kNone;
      base.lambda = 0.0;
      base.lambda_grid.clear();
      break;
  }
  return base;
}

std::unique_ptr<encoders::OutcomePredictor> TrainedMethod::predictor(
    const graphs::TreatmentCatalog& catalog) const {
  if (network) return std::make_unique<encoders::BundlePredictor>(*network, catalog);
  if (ols) return std::make_unique<encoders::OlsBaseline>(*ols);
  if (mean) return std::make_unique<encoders::MeanBaseline>(*mean);
  throw ContractError("trained method holds no model");
}

TrainedMethod train_method(Method method, const ModelSettings& settings,
                           const training::TrainConfig& train, const PreparedData& prepared,
                           const data::OutcomeTable& table,
                           const graphs::TreatmentCatalog& catalog) {
  TrainedMethod out;
  out.method = method;
  const auto samples = data::as_factual(prepared.train);
  if (method == Method::kMean) {
    out.mean = encoders::MeanBaseline::fit(samples);
    return out;
  }
  if (method == Method::kOls) {
    out.ols = encoders::OlsBaseline::fit(samples, catalog.size(), prepared.available);
    return out;
  }
  const auto cfg = train_config_for(method, train);
  const auto mcfg = model_config(settings, method, table, catalog);
  if (!cfg.lambda_grid.empty()) {
    auto sel = training::select_lambda(prepared.train, prepared.val, catalog, mcfg, cfg,
                                       prepared.available);
    out.network = std::move(sel.model);
    out.lambda = sel.best_lambda;
    out.reports = std::move(sel.reports);
  } else {
    auto result = training::fit(prepared.train, prepared.val, catalog, mcfg, cfg,
                                prepared.available);
    out.network = std::move(result.model);
    out.lambda = cfg.lambda;
    out.reports.push_back(std::move(result.report));
  }
  return out;
}

void save_trained(const fs::path& dir, const TrainedMethod& trained) {
  json model = {{"format", "graphite-model/1"}, {"method", to_string(trained.method)}};
  if (trained.network) {
    const auto& net = *trained.network;
    model["psi_mode"] = encoders::to_string(net.psi_mode());
    model["config"] = model_config_json(net.config());
    model["observed"] = id_values(net.observed_ids());
    model["lambda"] = trained.lambda.value_or(0.0);
    auto params = net.parameters();
    io::write_file_atomic(dir / "checkpoint.json", num::checkpoint_to_string(params));
  } else if (trained.ols) {
    model["ols"] = {{"weights", trained.ols->weights()},
                    {"covariate_dim", trained.ols->covariate_dim()},
                    {"treatment_count", trained.ols->treatment_count()},
                    {"observed", id_values(trained.ols->observed_ids())}};
  } else if (trained.mean) {
    model["mean"] = trained.mean->value();
  }
  json reports = json::array();
  for (const auto& r : trained.reports) reports.push_back(json::parse(training::report_to_json(r)));
  json report = {{"method", to_string(trained.method)}, {"runs", reports}};
  if (trained.lambda) report["selected_lambda"] = *trained.lambda;
  io::write_file_atomic(dir / "report.json", report.dump(2) + "\n");
  io::write_file_atomic(dir / "model.json", model.dump(2) + "\n");
}

TrainedMethod load_trained(const fs::path& dir) {
  const fs::path model_path = dir / "model.json";
  if (!fs::exists(model_path)) throw SchemaError("no model found at " + model_path.string());
  json model;
  try {
    model = json::parse(io::read_file(model_path));
  } catch (const json::parse_error& e) {
    throw SchemaError(model_path.string() + ": invalid JSON: " + e.what());
  }
  TrainedMethod out;
  try {
    out.method = method_from_string(model.at("method").get<std::string>());
    if (is_network(out.method)) {
      const fs::path ckpt = dir / "checkpoint.json";
      if (!fs::exists(ckpt)) throw SchemaError("missing checkpoint " + ckpt.string());
      encoders::ModelBundle bundle(model_config_from(model.at("config")));
      for (int v : model.at("observed").get<std::vector<int>>()) {
        bundle.mark_observed(TreatmentId(v));
      }
      auto params = bundle.parameters();
      num::restore(params, num::load_checkpoint(ckpt));
      out.network = std::move(bundle);
      out.lambda = model.at("lambda").get<double>();
    } else if (out.method == Method::kOls) {
      const json& o = model.at("ols");
      std::set<TreatmentId> observed;
      for (int v : o.at("observed").get<std::vector<int>>()) observed.insert(TreatmentId(v));
      out.ols = encoders::OlsBaseline(o.at("weights").get<std::vector<double>>(),
                                      o.at("covariate_dim").get<std::size_t>(),
                                      o.at("treatment_count").get<std::size_t>(),
                                      std::move(observed));
    } else {
      out.mean = encoders::MeanBaseline(model.at("mean").get<double>());
    }
  } catch (const json::exception& e) {
    throw SchemaError(model_path.string() + ": " + e.what());
  }
  return out;
}

CellEvaluation evaluate_trained(const TrainedMethod& trained, const PreparedData& prepared,
                                const data::OutcomeTable& table,
                                const graphs::TreatmentCatalog& catalog) {
  auto predictor = trained.predictor(catalog);
  CellEvaluation out;
  out.test = evaluation::evaluate(*predictor, table, prepared.units.test, prepared.available,
                                  prepared.train);
  if (!prepared.held_out.empty() && predictor->supports_zero_shot()) {
    out.zero_shot =
        evaluation::zero_shot_eval(*predictor, table, prepared.units.test, prepared.held_out);
  }
  return out;
}

std::vector<evaluation::ResultRow> cell_rows(const CellEvaluation& eval, Method method, double eta,
                                             std::optional<double> lambda, std::uint64_t seed) {
  auto rows = evaluation::to_rows(eval.test, to_string(method), eta, lambda, seed, "test");
  if (eval.zero_shot) {
    auto zs = evaluation::to_rows(*eval.zero_shot, to_string(method), eta, lambda, seed,
                                  "zero_shot");
    rows.insert(rows.end(), zs.begin(), zs.end());
  }
  return rows;
}

}  // namespace graphite::cli
