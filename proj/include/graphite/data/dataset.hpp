#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "graphite/encoders/baselines.hpp"
#include "graphite/graphs/graph.hpp"
#include "graphite/numerics/tensor.hpp"
#include "graphite/treatment_id.hpp"

namespace graphite::data {

// One logged (covariates, treatment, factual outcome) record.
struct Observation {
  std::size_t unit = 0;
  std::vector<double> covariates;
  TreatmentId treatment;
  double outcome = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

using ObservationSet = std::vector<Observation>;

// Ground-truth outcomes for every (unit, treatment) pair plus unit covariates.
class OutcomeTable {
 public:
  OutcomeTable() = default;
  // covariates: (units x D), outcomes: (units x |T|). Throws on mismatched
  // row counts or non-finite entries.
  OutcomeTable(num::Tensor covariates, num::Tensor outcomes);

  std::size_t units() const noexcept { return outcomes_.rows(); }
  std::size_t treatments() const noexcept { return outcomes_.cols(); }
  std::size_t covariate_dim() const noexcept { return covariates_.cols(); }
  const num::Tensor& covariates() const noexcept { return covariates_; }
  const num::Tensor& outcomes() const noexcept { return outcomes_; }
  double outcome(std::size_t unit, TreatmentId t) const { return outcomes_.at(unit, t.index()); }

  // Population standard deviation over every entry of the table.
  double outcome_std() const;
  // Covariate rows of the listed units, stacked.
  num::Tensor covariates_of(std::span<const std::size_t> units) const;
  // (units.size() x treatments.size()) block of the outcome matrix.
  num::Tensor outcomes_of(std::span<const std::size_t> units,
                          std::span<const TreatmentId> treatments) const;

  friend bool operator==(const OutcomeTable&, const OutcomeTable&) = default;

 private:
  num::Tensor covariates_;
  num::Tensor outcomes_;
};

// Stacks observation covariates into a (n x D) tensor.
num::Tensor stack_covariates(std::span<const Observation> observations,
                             std::span<const std::size_t> rows);
std::vector<encoders::FactualSample> as_factual(std::span<const Observation> observations);

// --- files -----------------------------------------------------------------
// covariates.csv:   unit_id,x1..xD         (unit_id = row position, from 0)
// outcomes.csv:     unit_id,1..|T|         (one column per treatment id)
// observations.csv: unit_id,treatment_id,outcome

std::string covariates_to_csv(const num::Tensor& covariates);
std::string outcomes_to_csv(const num::Tensor& outcomes);
std::string observations_to_csv(std::span<const Observation> observations);

num::Tensor covariates_from_csv(const std::string& text, const std::string& source = "covariates");
num::Tensor outcomes_from_csv(const std::string& text, const std::string& source = "outcomes");
// Covariates are attached from `covariates`; unit and treatment references
// are checked against it and the catalog size.
ObservationSet observations_from_csv(const std::string& text, const num::Tensor& covariates,
                                     std::size_t treatment_count,
                                     const std::string& source = "observations");

struct DatasetPaths {
  std::filesystem::path catalog;
  std::filesystem::path covariates;
  std::optional<std::filesystem::path> outcomes;
  std::optional<std::filesystem::path> observations;

  static DatasetPaths in_directory(const std::filesystem::path& dir);
};

struct Dataset {
  graphs::TreatmentCatalog catalog;
  num::Tensor covariates;
  std::optional<OutcomeTable> table;
  std::optional<ObservationSet> observations;
};

void save_dataset(const DatasetPaths& paths, const Dataset& dataset);
Dataset load_dataset(const DatasetPaths& paths);

}  // namespace graphite::data
