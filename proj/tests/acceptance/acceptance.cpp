// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include "../support/gradcheck.hpp"
#include "graphite/cli/commands.hpp"
#include "graphite/cli/experiment.hpp"
#include "graphite/data/bias.hpp"
#include "graphite/data/synthetic.hpp"
#include "graphite/encoders/mlp.hpp"
#include "graphite/errors.hpp"
#include "graphite/evaluation/metrics.hpp"
#include "graphite/independence/kernels.hpp"
#include "graphite/io.hpp"
#include "graphite/numerics/ops.hpp"
#include "graphite/training/trainer.hpp"

namespace {

using namespace graphite;
namespace fs = std::filesystem;
namespace ops = num::ops;
using num::Parameter;
using num::Tensor;
using num::Var;

// Tolerances and thresholds.
constexpr double kGradRelTol = 1e-4;
constexpr int kGradSeeds = 20;
constexpr double kGradBudgetSeconds = 120.0;
constexpr double kHsicExactTol = 1e-12;
constexpr double kNhsicSelfTol = 1e-10;
constexpr double kIndependentNhsic = 0.02;
constexpr int kIndependentMinPasses = 19;
constexpr std::size_t kIndependentDim = 4;
constexpr double kMiniBatchTol = 0.05;
constexpr double kMetricTol = 1e-12;
constexpr double kChiSquareMinP = 0.001;
constexpr double kSoftmaxTol = 1e-12;
constexpr double kPermutationTol = 1e-9;
constexpr int kEndToEndSeeds = 10;
constexpr int kEndToEndMinWins = 7;
constexpr double kEndToEndBudgetSeconds = 30 * 60;
constexpr int kZeroShotMinWins = 6;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor random_tensor(num::Shape shape, num::Rng& rng) {
  Tensor t(shape);
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// --- 1 ----------------------------------------------------------------------

Verdict gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, double> worst;
  std::map<std::string, int> failures;
  auto record = [&](const std::string& name, const testing::GradCheck& c) {
    worst[name] = std::max(worst[name], c.max_rel_error);
    failures[name] += c.max_rel_error >= kGradRelTol;
  };

  for (int seed = 0; seed < kGradSeeds; ++seed) {
    num::Rng rng(1000 + seed);

    {  // message-passing layer
      const auto g = data::random_connected_graph(6, 3, 0.5, rng);
      Parameter v("v", random_tensor({6, 5}, rng));
      Parameter w("w", random_tensor({5, 5}, rng));
      Parameter m("m", random_tensor({5, 5}, rng));
      const Tensor r = random_tensor({6, 5}, rng);
      record("gnn_layer", testing::gradient_check({&v, &w, &m}, [&] {
               return ops::sum_all(ops::mul(graphs::gnn_layer(v.var(), g, w.var(), m.var()),
                                            num::constant(r)));
             }));
    }
    for (auto act : {graphs::ReadoutActivation::kSoftmax, graphs::ReadoutActivation::kSigmoid}) {
      std::vector<Parameter> layers;
      for (int c = 0; c < 3; ++c) layers.emplace_back("h" + std::to_string(c), random_tensor({7, 4}, rng));
      const Tensor r = random_tensor({2, 4}, rng);
      std::vector<Parameter*> ptrs;
      for (auto& l : layers) ptrs.push_back(&l);
      record("readout", testing::gradient_check(ptrs, [&] {
               std::vector<Var> vars;
               for (auto& l : layers) vars.push_back(l.var());
               return ops::sum_all(
                   ops::mul(graphs::gnn_readout(vars, {{0, 1, 2}, {3, 4, 5, 6}}, act),
                            num::constant(r)));
             }));
    }
    {  // whole graph encoder
      graphs::GraphEncoder enc(3, {.layers = 2, .hidden_dim = 5, .shared_weights = seed % 2 == 0},
                               rng);
      const auto g = data::random_connected_graph(5, 3, 0.4, rng);
      const Tensor r = random_tensor({1, 5}, rng);
      record("graph_encoder", testing::gradient_check(enc.parameters(), [&] {
               return ops::sum_all(ops::mul(enc.encode(g), num::constant(r)));
             }));
    }
    {
      encoders::Mlp net("mlp", {.input_dim = 4, .widths = {6, 6, 3}}, rng);
      Parameter x("x", random_tensor({5, 4}, rng));
      auto params = net.parameters();
      params.push_back(&x);
      const Tensor r = random_tensor({5, 3}, rng);
      record("mlp", testing::gradient_check(params, [&] {
               return ops::sum_all(ops::mul(net.forward(x.var()), num::constant(r)));
             }));
    }
    {
      Parameter phi("phi", random_tensor({8, 3}, rng));
      Parameter psi("psi", random_tensor({8, 2}, rng));
      const double bx = independence::median_bandwidth(phi.value());
      const double by = independence::median_bandwidth(psi.value());
      auto kernels = [&] {
        return std::pair{independence::gaussian_kernel(phi.var(), bx),
                         independence::gaussian_kernel(psi.var(), by)};
      };
      record("hsic", testing::gradient_check({&phi, &psi}, [&] {
               auto [a, b] = kernels();
               return independence::hsic(a, b);
             }));
      record("nhsic", testing::gradient_check({&phi, &psi}, [&] {
               auto [a, b] = kernels();
               return independence::nhsic(a, b);
             }));
      std::vector<TreatmentId> ts;
      for (int i = 0; i < 8; ++i) ts.push_back(TreatmentId(1 + i % 3));
      record("mmd", testing::gradient_check({&phi}, [&] {
               return independence::mmd_pivot(phi.var(), ts, TreatmentId(1), bx);
             }));
    }
    {  // full regularised objective on a 4-sample batch, 8-dim model
      data::SyntheticConfig sc;
      sc.units = 8;
      sc.treatments = 5;
      sc.covariate_dim = 4;
      sc.seed = static_cast<std::uint64_t>(seed);
      const auto synth = data::generate_synthetic(sc);
      const auto obs = data::bias_sample(synth.table, {.eta = 40.0, .seed = sc.seed});
      const std::vector<std::size_t> rows{0, 1, 2, 3};
      const auto batch = training::Batch::gather(obs, rows);
      encoders::ModelConfig mc;
      mc.covariate_dim = 4;
      mc.treatment_count = 5;
      mc.label_vocab = synth.catalog.label_vocab();
      mc.phi_dim = mc.g_hidden = mc.gnn.hidden_dim = 8;
      mc.seed = sc.seed;
      encoders::ModelBundle model(mc);
      const auto fwd = model.forward(batch.covariates, batch.treatments, synth.catalog);
      const training::Bandwidths bw{independence::median_bandwidth(fwd.phi.value()),
                                    independence::median_bandwidth(fwd.psi.value())};
      for (auto reg : {training::Regularizer::kNhsic, training::Regularizer::kHsic,
                       training::Regularizer::kMmdPivot}) {
        record("objective_" + training::to_string(reg),
               testing::gradient_check(model.parameters(), [&] {
                 return training::objective(model, batch, synth.catalog, reg, 1.0,
                                            batch.treatments.front(), bw)
                     .total;
               }));
      }
    }
  }
  const double elapsed = seconds_since(t0);
  bool ok = elapsed < kGradBudgetSeconds;
  std::string detail;
  for (const auto& [name, w] : worst) {
    ok = ok && failures[name] == 0;
    detail += name + "=" + fmt(w, 2) + (failures[name] ? "(" + std::to_string(failures[name]) + " bad)" : "") + " ";
  }
  detail += "max rel err over " + std::to_string(kGradSeeds) + " seeds; " + fmt(elapsed, 3) + " s";
  return {ok, detail};
}

// --- 2 ----------------------------------------------------------------------

Verdict hsic_oracle() {
  bool ok = true;
  std::string detail;
  for (double a : {0.0, 0.5, 0.9}) {
    const Tensor k = Tensor::matrix({{1.0, a}, {a, 1.0}});
    const double err = std::abs(independence::hsic(k, k) - (1 - a) * (1 - a));
    ok = ok && err <= kHsicExactTol;
    detail += "a=" + fmt(a, 2) + " err=" + fmt(err, 2) + "; ";
  }
  num::Rng rng(7);
  const Tensor x = random_tensor({50, 3}, rng);
  const Tensor kx = independence::gaussian_kernel_matrix(x, independence::median_bandwidth(x));
  const double self = independence::nhsic(kx, kx);
  ok = ok && std::abs(self - 1.0) <= kNhsicSelfTol;
  detail += "nhsic(K,K)-1=" + fmt(self - 1.0, 2) + "; ";

  int passes = 0;
  double largest = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    num::Rng r(seed);
    Tensor a(num::Shape{512, kIndependentDim}), b(num::Shape{512, kIndependentDim});
    for (auto& v : a.data()) v = r.normal();
    for (auto& v : b.data()) v = r.normal();
    const double n = independence::nhsic(
        independence::gaussian_kernel_matrix(a, independence::median_bandwidth(a)),
        independence::gaussian_kernel_matrix(b, independence::median_bandwidth(b)));
    passes += n < kIndependentNhsic;
    largest = std::max(largest, n);
  }
  ok = ok && passes >= kIndependentMinPasses;
  detail += "independent n=512 d=" + std::to_string(kIndependentDim) + ": " + std::to_string(passes) + "/20 below " +
            fmt(kIndependentNhsic) + " (max " + fmt(largest) + ")";
  return {ok, detail};
}

// --- 3 ----------------------------------------------------------------------

Verdict minibatch_consistency() {
  data::SyntheticConfig sc;
  sc.units = 2048;
  sc.treatments = 30;
  sc.seed = 3;
  const auto synth = data::generate_synthetic(sc);
  const auto obs = data::bias_sample(synth.table, {.eta = 40.0, .seed = 3});
  encoders::ModelConfig mc;
  mc.covariate_dim = synth.table.covariate_dim();
  mc.treatment_count = synth.catalog.size();
  mc.label_vocab = synth.catalog.label_vocab();
  mc.seed = 3;
  training::TrainConfig tc;
  tc.lambda = 1.0;
  tc.epochs = 20;
  tc.seed = 3;
  // Representations as the regulariser sees them part way through training.
  const encoders::ModelBundle model = training::fit(obs, {}, synth.catalog, mc, tc).model;

  std::vector<std::size_t> all(obs.size());
  std::iota(all.begin(), all.end(), 0);
  const auto full = training::Batch::gather(obs, all);
  const auto fwd = model.forward(full.covariates, full.treatments, synth.catalog);
  const Tensor& phi = fwd.phi.value();
  const Tensor& psi = fwd.psi.value();
  auto nhsic_of = [](const Tensor& a, const Tensor& b) {
    return independence::nhsic(
        independence::gaussian_kernel_matrix(a, independence::median_bandwidth(a)),
        independence::gaussian_kernel_matrix(b, independence::median_bandwidth(b)));
  };
  const double reference = nhsic_of(phi, psi);

  auto rows_of = [](const Tensor& t, const std::vector<std::size_t>& rows) {
    Tensor out(num::Shape{rows.size(), t.cols()});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy(t.row(rows[i]).begin(), t.row(rows[i]).end(), out.row(i).begin());
    }
    return out;
  };
  // Consecutive shuffled partitions into disjoint batches of 64.
  num::Rng rng(33);
  double total = 0.0;
  int count = 0;
  while (count < 200) {
    for (const auto& rows : training::epoch_batches(obs.size(), 64, rng)) {
      if (count == 200) break;
      total += nhsic_of(rows_of(phi, rows), rows_of(psi, rows));
      ++count;
    }
  }
  const double mean = total / count;
  return {std::abs(mean - reference) <= kMiniBatchTol,
          "full=" + fmt(reference) + " mean of 200 batches=" + fmt(mean) + " |diff|=" +
              fmt(std::abs(mean - reference)) + " (tol " + fmt(kMiniBatchTol) + ")"};
}

// --- 4 ----------------------------------------------------------------------

double rank_sum_auc(const std::vector<double>& s, const std::vector<int>& y) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] < s[b]; });
  std::vector<double> rank(s.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && s[order[j + 1]] == s[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = 0.5 * double(i + j) + 1.0;
    i = j + 1;
  }
  double pos = 0, neg = 0, sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i]) {
      pos += 1;
      sum += rank[i];
    } else {
      neg += 1;
    }
  }
  return (sum - pos * (pos + 1) / 2) / (pos * neg);
}

Verdict metric_oracles() {
  num::Rng rng(4);
  double worst_auc = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t units = 1 + rng.below(4);
    const std::size_t t = 4 + rng.below(10);
    Tensor f(num::Shape{units, t}), y(num::Shape{units, t});
    double auc_sum = 0.0;
    for (std::size_t u = 0; u < units; ++u) {
      std::vector<double> s(t);
      std::vector<int> lab(t);
      for (std::size_t j = 0; j < t; ++j) {
        lab[j] = j == 0 ? 1 : j == 1 ? 0 : rng.uniform() < 0.5;
        s[j] = std::round(rng.uniform(0, 5));
        f.at(u, j) = s[j];
        y.at(u, j) = lab[j];
      }
      auc_sum += rank_sum_auc(s, lab);
    }
    worst_auc = std::max(worst_auc,
                         std::abs(*evaluation::concordance_index(f, y) - auc_sum / units));
  }
  const double hand = *evaluation::concordance_index(Tensor::matrix({{1.0, 2.0, 3.0}}),
                                                     Tensor::matrix({{3.0, 1.0, 2.0}}));
  const double theta0 = evaluation::heaviside(0.0);
  double worst_rmse = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Tensor a(num::Shape{3 + rng.below(5), 4}), b(a.shape());
    for (auto& v : a.data()) v = rng.normal();
    for (auto& v : b.data()) v = rng.normal();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    worst_rmse = std::max(worst_rmse, std::abs(evaluation::rmse(a, b) - std::sqrt(s / a.size())));
  }
  const bool ok = worst_auc <= kMetricTol && std::abs(hand - 1.0 / 3.0) <= kMetricTol &&
                  theta0 == 0.5 && worst_rmse <= kMetricTol;
  return {ok, "CI vs AUC max err=" + fmt(worst_auc, 2) + "; hand CI=" + fmt(hand, 17) +
                  "; theta(0)=" + fmt(theta0) + "; RMSE vs loop max err=" + fmt(worst_rmse, 2)};
}

// --- 5 ----------------------------------------------------------------------

Verdict bias_sampler() {
  constexpr std::size_t kT = 10;
  constexpr std::size_t kDraws = 50000;
  Tensor y(num::Shape{1, kT});
  for (std::size_t j = 0; j < kT; ++j) y.at(0, j) = std::sin(double(j));
  const data::OutcomeTable one(Tensor(num::Shape{1, 1}, 0.0), y);
  const auto obs = data::bias_sample(one, {.eta = 0.0, .seed = 5, .samples_per_unit = kDraws});
  std::vector<double> counts(kT, 0.0);
  for (const auto& o : obs) counts[o.treatment.index()] += 1;
  double chi = 0.0;
  const double expected = double(kDraws) / kT;
  for (double c : counts) chi += (c - expected) * (c - expected) / expected;
  const double p = boost::math::cdf(
      boost::math::complement(boost::math::chi_squared(kT - 1), chi));

  const double rho = 0.25;
  const std::vector<double> row{0.0, std::log(4.0) / rho};
  const std::vector<TreatmentId> ids{TreatmentId(1), TreatmentId(2)};
  const auto probs = data::selection_probabilities(row, rho, ids);
  const double fixture_err = std::max(std::abs(probs[0] - 0.2), std::abs(probs[1] - 0.8));

  data::SyntheticConfig sc;
  sc.units = 10000;
  sc.treatments = 20;
  sc.seed = 5;
  const auto synth = data::generate_synthetic(sc);
  std::vector<double> freq;
  for (double eta : {0.0, 10.0, 40.0}) {
    const auto sample = data::bias_sample(synth.table, {.eta = eta, .seed = 55});
    std::size_t hits = 0;
    for (const auto& o : sample) {
      const auto r = synth.table.outcomes().row(o.unit);
      const auto best = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
      hits += o.treatment.index() == best;
    }
    freq.push_back(double(hits) / sample.size());
  }
  const bool monotone = freq[0] < freq[1] && freq[1] < freq[2];
  const bool ok = p > kChiSquareMinP && fixture_err <= kSoftmaxTol && monotone;
  return {ok, "chi2 p=" + fmt(p) + "; softmax fixture err=" + fmt(fixture_err, 2) +
                  "; argmax freq eta 0/10/40=" + fmt(freq[0]) + "/" + fmt(freq[1]) + "/" +
                  fmt(freq[2])};
}

// --- 6 ----------------------------------------------------------------------

Verdict permutation_invariance() {
  num::Rng rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    graphs::GraphEncoder enc(5, {.layers = 3, .hidden_dim = 16,
                                 .shared_weights = trial % 2 == 0},
                             rng);
    const auto g = data::random_connected_graph(2 + rng.below(12), 5, 0.4, rng);
    std::vector<std::size_t> perm(g.node_count());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const Tensor a = enc.encode(g).value();
    const Tensor b = enc.encode(g.relabeled(perm)).value();
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return {worst <= kPermutationTol, "max |psi(G) - psi(pi G)| over 100 pairs=" + fmt(worst, 2)};
}

// --- 7 / 8 ------------------------------------------------------------------

struct Experiment {
  data::SyntheticDataset synth;
  cli::PreparedData prepared;
  cli::ExperimentManifest manifest;
};

Experiment experiment(std::size_t units, std::size_t treatments, std::uint64_t seed,
                      bool zero_shot) {
  data::SyntheticConfig sc;
  sc.units = units;
  sc.treatments = treatments;
  sc.seed = seed;
  Experiment e{data::generate_synthetic(sc), {}, {}};
  e.manifest.bias.eta = 40.0;
  e.manifest.bias.seed = seed;
  e.manifest.split.seed = seed;
  e.manifest.split.zero_shot = zero_shot;
  e.manifest.train.seed = seed;
  e.prepared = cli::prepare(e.synth.table, e.synth.catalog, e.manifest.bias, e.manifest.split);
  return e;
}

cli::CellEvaluation run_method(const Experiment& e, cli::Method m, std::optional<double>* lambda = nullptr) {
  const auto trained = cli::train_method(m, e.manifest.model, e.manifest.train, e.prepared,
                                         e.synth.table, e.synth.catalog);
  if (lambda) *lambda = trained.lambda;
  return cli::evaluate_trained(trained, e.prepared, e.synth.table, e.synth.catalog);
}

Verdict end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  double sum_g = 0, sum_gnn = 0, sum_emb = 0;
  int wins_gnn = 0, wins_emb = 0;
  std::string lambdas;
  for (int seed = 0; seed < kEndToEndSeeds; ++seed) {
    const auto e = experiment(500, 50, 700 + seed, false);
    std::optional<double> lambda;
    const double g = run_method(e, cli::Method::kGraphite, &lambda).test.rmse;
    const double gnn = run_method(e, cli::Method::kGnn).test.rmse;
    const double emb = run_method(e, cli::Method::kEmbedding).test.rmse;
    sum_g += g;
    sum_gnn += gnn;
    sum_emb += emb;
    wins_gnn += g < gnn;
    wins_emb += g < emb;
    lambdas += fmt(*lambda, 1) + (seed + 1 < kEndToEndSeeds ? "," : "");
    std::printf("    seed %d: graphite %.4f (lambda %s)  gnn %.4f  embedding %.4f\n", seed, g,
                fmt(*lambda, 1).c_str(), gnn, emb);
    std::fflush(stdout);
  }
  const double n = kEndToEndSeeds;
  const double elapsed = seconds_since(t0);
  const bool ok = sum_g / n < sum_gnn / n && sum_g / n < sum_emb / n &&
                  wins_gnn >= kEndToEndMinWins && wins_emb >= kEndToEndMinWins &&
                  elapsed < kEndToEndBudgetSeconds;
  return {ok, "mean test RMSE graphite=" + fmt(sum_g / n) + " gnn=" + fmt(sum_gnn / n) +
                  " embedding=" + fmt(sum_emb / n) + "; wins vs gnn " +
                  std::to_string(wins_gnn) + "/10, vs embedding " + std::to_string(wins_emb) +
                  "/10; selected lambda " + lambdas + "; " + fmt(elapsed, 4) + " s"};
}

Verdict zero_shot() {
  int wins = 0;
  bool finite = true;
  bool refused = true;
  double sum_g = 0, sum_mean = 0;
  for (int seed = 0; seed < kEndToEndSeeds; ++seed) {
    const auto e = experiment(1000, 100, 800 + seed, true);
    const auto g = run_method(e, cli::Method::kGraphite);
    const auto mean = run_method(e, cli::Method::kMean);
    if (!g.zero_shot || !mean.zero_shot) return {false, "zero-shot evaluation missing"};
    finite = finite && std::isfinite(g.zero_shot->rmse) && g.zero_shot->ci &&
             std::isfinite(*g.zero_shot->ci);
    wins += g.zero_shot->rmse < mean.zero_shot->rmse;
    sum_g += g.zero_shot->rmse;
    sum_mean += mean.zero_shot->rmse;
    std::printf("    seed %d: held-out RMSE graphite %.4f  mean %.4f\n", seed, g.zero_shot->rmse,
                mean.zero_shot->rmse);
    std::fflush(stdout);

    // Representations without graph structure must refuse held-out ids.
    for (auto m : {cli::Method::kEmbedding, cli::Method::kOls}) {
      training::TrainConfig quick = e.manifest.train;
      quick.epochs = 1;
      quick.lambda_grid.clear();
      const auto trained = cli::train_method(m, e.manifest.model, quick, e.prepared, e.synth.table,
                                             e.synth.catalog);
      const auto predictor = trained.predictor(e.synth.catalog);
      try {
        evaluation::zero_shot_eval(*predictor, e.synth.table, e.prepared.units.test,
                                   e.prepared.held_out);
        refused = false;
      } catch (const CapabilityError&) {
      }
    }
    encoders::ModelConfig one_hot = cli::model_config(e.manifest.model, cli::Method::kGnn,
                                                      e.synth.table, e.synth.catalog);
    one_hot.psi_mode = encoders::PsiMode::kOneHot;
    encoders::ModelBundle bundle(one_hot);
    for (auto id : e.prepared.available) bundle.mark_observed(id);
    try {
      evaluation::zero_shot_eval(encoders::BundlePredictor(bundle, e.synth.catalog),
                                 e.synth.table, e.prepared.units.test, e.prepared.held_out);
      refused = false;
    } catch (const CapabilityError&) {
    }
  }
  const bool ok = finite && refused && wins >= kZeroShotMinWins;
  return {ok, "held-out RMSE graphite=" + fmt(sum_g / 10) + " mean=" + fmt(sum_mean / 10) +
                  "; wins " + std::to_string(wins) + "/10; finite=" + (finite ? "yes" : "no") +
                  "; embedding/one-hot/ols refused=" + (refused ? "yes" : "no")};
}

// --- 9 ----------------------------------------------------------------------

Verdict reproducibility() {
  const fs::path root = fs::temp_directory_path() / "graphite_acceptance_repro";
  fs::remove_all(root);
  auto run = [](std::vector<std::string> args) {
    args.insert(args.begin(), "graphite");
    return cli::run(args);
  };
  std::vector<std::string> compared;
  bool ok = true;
  for (const char* tag : {"a", "b"}) {
    const fs::path d = root / tag;
    ok = ok && run({"generate", "--units", "120", "--treatments", "12", "--seed", "9", "--out",
                    (d / "data").string()}) == 0;
    nlohmann::json m = {
        {"data", {{"catalog", "catalog.json"}, {"covariates", "covariates.csv"}, {"outcomes", "outcomes.csv"}}},
        {"split", {{"zero_shot", true}}},
        {"train", {{"epochs", 5}, {"lambda_grid", {0.01, 1.0}}}},
        {"model", {{"phi_dim", 16}, {"g_hidden", 16}, {"gnn_dim", 16}, {"embedding_dim", 16}}}};
    io::write_file_atomic(d / "data" / "manifest.json", m.dump(2));
    const std::string manifest = (d / "data" / "manifest.json").string();
    ok = ok && run({"train", "--config", manifest, "--seed", "4", "--eta", "40", "--out",
                    (d / "model").string()}) == 0;
    ok = ok && run({"evaluate", "--checkpoint", (d / "model").string(), "--zero-shot"}) == 0;
    ok = ok && run({"sweep", "--config", manifest, "--eta-list", "0,40", "--methods",
                    "graphite,gnn,embedding,ols,mean", "--seeds", "1,2", "--breakdown", "--out",
                    (d / "results.csv").string()}) == 0;
  }
  if (!ok) return {false, "a CLI command failed"};
  for (const std::string f : {"data/catalog.json", "data/covariates.csv", "data/outcomes.csv",
                              "model/model.json", "model/checkpoint.json", "model/report.json",
                              "model/eval.csv", "model/eval.json", "results.csv"}) {
    const bool same = io::read_file(root / "a" / f) == io::read_file(root / "b" / f);
    ok = ok && same;
    compared.push_back(f + (same ? "" : " DIFFERS"));
  }
  fs::remove_all(root);
  std::string detail = "byte-identical across two runs:";
  for (const auto& c : compared) detail += " " + c;
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"gradient checks", gradient_suite},
      {"HSIC oracles", hsic_oracle},
      {"mini-batch nHSIC consistency", minibatch_consistency},
      {"metric oracles", metric_oracles},
      {"bias sampler", bias_sampler},
      {"permutation invariance", permutation_invariance},
      {"end-to-end bias robustness", end_to_end},
      {"zero-shot capability", zero_shot},
      {"CLI reproducibility", reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.contains(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %d %s: %s | %s\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first,
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
