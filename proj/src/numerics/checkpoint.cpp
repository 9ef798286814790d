#include "graphite/numerics/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "graphite/errors.hpp"
#include "graphite/io.hpp"

namespace graphite::num {

using nlohmann::json;

std::string checkpoint_to_string(std::span<const Parameter* const> params) {
  json doc;
  doc["engine_version"] = kEngineVersion;
  json entries = json::object();
  for (const Parameter* p : params) {
    if (entries.contains(p->id())) throw ContractError("duplicate parameter id '" + p->id() + "'");
    entries[p->id()] = {{"shape", p->value().shape()}, {"values", p->value().values()}};
  }
  doc["parameters"] = std::move(entries);
  return doc.dump(1) + "\n";
}

std::map<std::string, Tensor> checkpoint_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("engine_version", "") != kEngineVersion) {
    throw SchemaError("checkpoint engine_version missing or not " + std::string(kEngineVersion));
  }
  if (!doc.contains("parameters") || !doc["parameters"].is_object()) {
    throw SchemaError("checkpoint has no 'parameters' object");
  }
  std::map<std::string, Tensor> out;
  for (const auto& [id, entry] : doc["parameters"].items()) {
    try {
      out.emplace(id, Tensor(entry.at("shape").get<Shape>(),
                             entry.at("values").get<std::vector<double>>()));
    } catch (const json::exception& e) {
      throw SchemaError("checkpoint parameter '" + id + "': " + e.what());
    } catch (const DimensionError& e) {
      throw SchemaError("checkpoint parameter '" + id + "': " + e.what());
    }
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path,
                     std::span<const Parameter* const> params) {
  io::write_file_atomic(path, checkpoint_to_string(params));
}

std::map<std::string, Tensor> load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_string(io::read_file(path));
}

void restore(std::span<Parameter* const> params, const std::map<std::string, Tensor>& stored) {
  for (Parameter* p : params) {
    auto it = stored.find(p->id());
    if (it == stored.end()) throw SchemaError("checkpoint lacks parameter '" + p->id() + "'");
    if (it->second.shape() != p->value().shape()) {
      throw SchemaError("checkpoint parameter '" + p->id() + "' has shape " +
                        to_string(it->second.shape()) + ", expected " +
                        to_string(p->value().shape()));
    }
    p->set_value(it->second);
  }
}

}  // namespace graphite::num
