#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "minlqg/closed_loop_sim.h"
#include "minlqg/fixed_point.h"
#include "minlqg/plant_model.h"

namespace minlqg::cli {

enum class Units { kNats, kBits };

struct SimSettings {
  std::optional<std::int64_t> steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> burn_in;
  int batches = 20;
};

/// One JSON problem document: plant, cost, and optional solver / simulation
/// overrides. Matrices may be flat row-major arrays, nested row arrays or
/// {"rows", "cols", "data"} objects.
struct ProblemFile {
  PlantSpec plant;
  CostSpec cost;
  Units units = Units::kNats;
  SolverConfig solver;
  SimSettings sim;
};

/// Throws ArgumentError on malformed input and the core validation errors on
/// an invalid plant.
ProblemFile ParseProblem(const nlohmann::json& doc);
ProblemFile LoadProblem(const std::string& path);

nlohmann::json ReadJsonFile(const std::string& path);

Eigen::MatrixXd ReadMatrix(const nlohmann::json& value, int rows, int cols,
                           const std::string& name);
nlohmann::json WriteMatrix(const Eigen::MatrixXd& m);

/// Finite values as numbers, ±infinity as "inf" / "-inf".
nlohmann::json WriteNumber(double v);
double ReadNumber(const nlohmann::json& value, const std::string& name);

/// Pretty JSON with every double printed to 17 significant digits.
std::string Dump(const nlohmann::json& doc);

}  // namespace minlqg::cli
