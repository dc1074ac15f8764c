#pragma once

#include <optional>
#include <string>

#include "core/admm.hpp"
#include "core/experiments.hpp"
#include "core/model.hpp"

namespace lqrlr {

// On-disk model document: plant, block structure and (for generated models)
// the layout provenance. JSON schema is documented in the README.
struct ModelFile {
  StateSpaceModel model;
  BlockStructure structure;
  std::optional<AgentLayout> layout;
  std::optional<int> coupling_sign;
  std::optional<std::uint64_t> gen_seed;
};

ModelFile parse_model_json(const std::string& text);
ModelFile load_model_file(const std::string& path);

// Deterministic emitter; doubles written with 17 significant digits so the
// file parses back to bit-identical matrices.
std::string model_file_to_json(const ModelFile& mf);
void save_model_file(const ModelFile& mf, const std::string& path);

// Result document for the design command: gains, costs, residual history and
// the optimality diagnostics, plus a manifest echoing the resolved options.
std::string design_result_to_json(const StateSpaceModel& model, const DesignResult& result,
                                  const OptimalityReport& optimality, const AdmmConfig& cfg,
                                  const std::string& variant_label,
                                  const std::string& model_path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace lqrlr
