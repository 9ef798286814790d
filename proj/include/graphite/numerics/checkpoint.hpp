#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>

#include "graphite/numerics/autodiff.hpp"

namespace graphite::num {

inline constexpr const char* kEngineVersion = "graphite-numerics/1";

// Parameter checkpoint: JSON object
//   {"engine_version": "...", "parameters": {id: {"shape": [...], "values": [...]}}}
// Doubles are written in shortest round-trip form, so load(save(x)) == x.
std::string checkpoint_to_string(std::span<const Parameter* const> params);
std::map<std::string, Tensor> checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, std::span<const Parameter* const> params);
std::map<std::string, Tensor> load_checkpoint(const std::filesystem::path& path);

// Copies stored values into `params`; every parameter must be present with a
// matching shape.
void restore(std::span<Parameter* const> params, const std::map<std::string, Tensor>& stored);

}  // namespace graphite::num
