#include "graphite/data/dataset.hpp"

#include <cmath>
#include <sstream>

#include "graphite/errors.hpp"
#include "graphite/io.hpp"

namespace graphite::data {

OutcomeTable::OutcomeTable(num::Tensor covariates, num::Tensor outcomes)
    : covariates_(std::move(covariates)), outcomes_(std::move(outcomes)) {
  if (covariates_.rank() != 2 || outcomes_.rank() != 2) {
    throw DimensionError("outcome table needs (units x D) covariates and (units x |T|) outcomes");
  }
  if (covariates_.rows() != outcomes_.rows()) {
    throw DimensionError("covariates have " + std::to_string(covariates_.rows()) +
                         " units, outcomes have " + std::to_string(outcomes_.rows()));
  }
  if (!covariates_.all_finite() || !outcomes_.all_finite()) {
    throw NumericError("outcome table contains non-finite entries");
  }
}

double OutcomeTable::outcome_std() const {
  const auto values = outcomes_.data();
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / n);
}

num::Tensor OutcomeTable::covariates_of(std::span<const std::size_t> units) const {
  if (units.empty()) throw ContractError("covariates_of: no units");
  num::Tensor out({units.size(), covariate_dim()});
  for (std::size_t r = 0; r < units.size(); ++r) {
    auto src = covariates_.row(units[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

num::Tensor OutcomeTable::outcomes_of(std::span<const std::size_t> units,
                                      std::span<const TreatmentId> treatments) const {
  if (units.empty() || treatments.empty()) throw ContractError("outcomes_of: empty selection");
  num::Tensor out({units.size(), treatments.size()});
  for (std::size_t r = 0; r < units.size(); ++r) {
    for (std::size_t c = 0; c < treatments.size(); ++c) {
      if (!treatments[c].valid_for(this->treatments())) {
        throw OutOfRangeError("treatment id " + to_string(treatments[c]) + " outside table");
      }
      out.at(r, c) = outcomes_.at(units[r], treatments[c].index());
    }
  }
  return out;
}

num::Tensor stack_covariates(std::span<const Observation> observations,
                             std::span<const std::size_t> rows) {
  if (rows.empty()) throw ContractError("stack_covariates: no rows");
  const std::size_t d = observations[rows.front()].covariates.size();
  num::Tensor out({rows.size(), d});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& x = observations[rows[r]].covariates;
    if (x.size() != d) throw DimensionError("observations have ragged covariate widths");
    std::copy(x.begin(), x.end(), out.row(r).begin());
  }
  return out;
}

std::vector<encoders::FactualSample> as_factual(std::span<const Observation> observations) {
  std::vector<encoders::FactualSample> out;
  out.reserve(observations.size());
  for (const auto& o : observations) out.push_back({o.covariates, o.treatment, o.outcome});
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Parsed CSV body: header plus rows of fields, blank lines skipped.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

Csv parse_csv(const std::string& text, const std::string& source) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    for (auto& f : fields) f = trim(f);
    if (csv.header.empty()) {
      csv.header = std::move(fields);
      continue;
    }
    if (fields.size() != csv.header.size()) {
      throw SchemaError(source + " line " + std::to_string(line_no) + ": expected " +
                        std::to_string(csv.header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    csv.rows.emplace_back(line_no, std::move(fields));
  }
  if (csv.header.empty()) throw SchemaError(source + ": missing header row");
  if (csv.header.front() != "unit_id") {
    throw SchemaError(source + " line 1: first column must be 'unit_id'");
  }
  return csv;
}

double field_number(const std::string& value, const std::string& source, std::size_t line,
                    const std::string& column) {
  try {
    const double v = io::parse_double(value);
    if (!std::isfinite(v)) throw SchemaError("non-finite");
    return v;
  } catch (const SchemaError&) {
    throw SchemaError(source + " line " + std::to_string(line) + ", field '" + column +
                      "': not a finite number: '" + value + "'");
  }
}

std::size_t field_index(const std::string& value, const std::string& source, std::size_t line,
                        const std::string& column) {
  const double v = field_number(value, source, line, column);
  if (v < 0 || v != std::floor(v)) {
    throw SchemaError(source + " line " + std::to_string(line) + ", field '" + column +
                      "': expected a non-negative integer, got '" + value + "'");
  }
  return static_cast<std::size_t>(v);
}

// Reads a unit-indexed numeric matrix whose unit_id column must count 0..n-1.
num::Tensor matrix_from_csv(const std::string& text, const std::string& source) {
  const Csv csv = parse_csv(text, source);
  const std::size_t cols = csv.header.size() - 1;
  if (cols == 0) throw SchemaError(source + ": no value columns");
  if (csv.rows.empty()) throw SchemaError(source + ": no data rows");
  num::Tensor out({csv.rows.size(), cols});
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& [line, fields] = csv.rows[r];
    const auto unit = field_index(fields[0], source, line, "unit_id");
    if (unit != r) {
      throw SchemaError(source + " line " + std::to_string(line) + ", field 'unit_id': expected " +
                        std::to_string(r) + ", got " + fields[0]);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      out.at(r, c) = field_number(fields[c + 1], source, line, csv.header[c + 1]);
    }
  }
  return out;
}

}  // namespace

std::string covariates_to_csv(const num::Tensor& covariates) {
  std::string out = "unit_id";
  for (std::size_t k = 0; k < covariates.cols(); ++k) out += ",x" + std::to_string(k + 1);
  out += '\n';
  for (std::size_t i = 0; i < covariates.rows(); ++i) {
    out += std::to_string(i);
    for (double v : covariates.row(i)) out += "," + io::format_double(v);
    out += '\n';
  }
  return out;
}

std::string outcomes_to_csv(const num::Tensor& outcomes) {
  std::string out = "unit_id";
  for (std::size_t j = 0; j < outcomes.cols(); ++j) out += "," + std::to_string(j + 1);
  out += '\n';
  for (std::size_t i = 0; i < outcomes.rows(); ++i) {
    out += std::to_string(i);
    for (double v : outcomes.row(i)) out += "," + io::format_double(v);
    out += '\n';
  }
  return out;
}

std::string observations_to_csv(std::span<const Observation> observations) {
  std::string out = "unit_id,treatment_id,outcome\n";
  for (const auto& o : observations) {
    out += std::to_string(o.unit) + "," + to_string(o.treatment) + "," +
           io::format_double(o.outcome) + "\n";
  }
  return out;
}

num::Tensor covariates_from_csv(const std::string& text, const std::string& source) {
  return matrix_from_csv(text, source);
}

num::Tensor outcomes_from_csv(const std::string& text, const std::string& source) {
  const Csv csv = parse_csv(text, source);
  for (std::size_t c = 1; c < csv.header.size(); ++c) {
    if (csv.header[c] != std::to_string(c)) {
      throw SchemaError(source + " line 1: column " + std::to_string(c + 1) +
                        " must be treatment id " + std::to_string(c) + ", found '" +
                        csv.header[c] + "'");
    }
  }
  return matrix_from_csv(text, source);
}

ObservationSet observations_from_csv(const std::string& text, const num::Tensor& covariates,
                                     std::size_t treatment_count, const std::string& source) {
  const Csv csv = parse_csv(text, source);
  const std::vector<std::string> expected{"unit_id", "treatment_id", "outcome"};
  if (csv.header != expected) {
    throw SchemaError(source + " line 1: header must be unit_id,treatment_id,outcome");
  }
  ObservationSet out;
  out.reserve(csv.rows.size());
  for (const auto& [line, fields] : csv.rows) {
    Observation o;
    o.unit = field_index(fields[0], source, line, "unit_id");
    if (o.unit >= covariates.rows()) {
      throw SchemaError(source + " line " + std::to_string(line) + ", field 'unit_id': unit " +
                        fields[0] + " has no covariate row");
    }
    const auto t = field_index(fields[1], source, line, "treatment_id");
    o.treatment = TreatmentId(t);
    if (!o.treatment.valid_for(treatment_count)) {
      throw SchemaError(source + " line " + std::to_string(line) +
                        ", field 'treatment_id': treatment " + fields[1] +
                        " has no graph in the catalog");
    }
    o.outcome = field_number(fields[2], source, line, "outcome");
    auto row = covariates.row(o.unit);
    o.covariates.assign(row.begin(), row.end());
    out.push_back(std::move(o));
  }
  return out;
}

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "catalog.json", dir / "covariates.csv", dir / "outcomes.csv", std::nullopt};
}

void save_dataset(const DatasetPaths& paths, const Dataset& dataset) {
  graphs::save_catalog(paths.catalog, dataset.catalog);
  io::write_file_atomic(paths.covariates, covariates_to_csv(dataset.covariates));
  if (dataset.table) {
    if (!paths.outcomes) throw ContractError("save_dataset: no path for the outcome table");
    io::write_file_atomic(*paths.outcomes, outcomes_to_csv(dataset.table->outcomes()));
  }
  if (dataset.observations) {
    if (!paths.observations) throw ContractError("save_dataset: no path for observations");
    io::write_file_atomic(*paths.observations, observations_to_csv(*dataset.observations));
  }
}

Dataset load_dataset(const DatasetPaths& paths) {
  Dataset out;
  out.catalog = graphs::load_catalog(paths.catalog);
  out.covariates = covariates_from_csv(io::read_file(paths.covariates), paths.covariates.string());
  if (paths.outcomes) {
    auto outcomes = outcomes_from_csv(io::read_file(*paths.outcomes), paths.outcomes->string());
    if (outcomes.cols() != out.catalog.size()) {
      throw SchemaError(paths.outcomes->string() + ": " + std::to_string(outcomes.cols()) +
                        " treatment columns but the catalog has " +
                        std::to_string(out.catalog.size()) + " graphs");
    }
    if (outcomes.rows() != out.covariates.rows()) {
      throw SchemaError(paths.outcomes->string() + ": " + std::to_string(outcomes.rows()) +
                        " units but covariates have " + std::to_string(out.covariates.rows()));
    }
    out.table = OutcomeTable(out.covariates, std::move(outcomes));
  }
  if (paths.observations) {
    out.observations = observations_from_csv(io::read_file(*paths.observations), out.covariates,
                                             out.catalog.size(), paths.observations->string());
  }
  return out;
}

}  // namespace graphite::data
