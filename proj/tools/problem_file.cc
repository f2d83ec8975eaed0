#include "problem_file.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "minlqg/errors.h"

namespace minlqg::cli {

using nlohmann::json;

namespace {

const json& Require(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ArgumentError(std::string("missing field \"") + key + "\"");
  return doc.at(key);
}

int ReadDim(const json& doc, const char* key) {
  const json& v = Require(doc, key);
  if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1000) {
    throw ArgumentError(std::string("\"") + key + "\" must be a positive integer");
  }
  return v.get<int>();
}

void Format(const json& v, int indent, int depth, std::string* out) {
  const std::string pad(static_cast<size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<size_t>(indent * depth), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        *out += "{}";
        return;
      }
      *out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) *out += ",\n";
        first = false;
        *out += pad + json(it.key()).dump() + ": ";
        Format(it.value(), indent, depth + 1, out);
      }
      *out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      // Numeric arrays stay on one line; matrices are short enough.
      bool flat = true;
      for (const auto& e : v) flat = flat && e.is_primitive();
      if (v.empty() || flat) {
        *out += "[";
        for (size_t i = 0; i < v.size(); ++i) {
          if (i > 0) *out += ", ";
          Format(v[i], indent, depth + 1, out);
        }
        *out += "]";
        return;
      }
      *out += "[\n";
      for (size_t i = 0; i < v.size(); ++i) {
        if (i > 0) *out += ",\n";
        *out += pad;
        Format(v[i], indent, depth + 1, out);
      }
      *out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      std::string s = buf;
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      *out += s;
      return;
    }
    default:
      *out += v.dump();
  }
}

}  // namespace

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ArgumentError(path + ": " + e.what());
  }
}

double ReadNumber(const json& value, const std::string& name) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  throw ArgumentError(name + ": expected a number");
}

json WriteNumber(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v == 0.0 ? 0.0 : v;  // no "-0.0"
}

Eigen::MatrixXd ReadMatrix(const json& value, int rows, int cols, const std::string& name) {
  Eigen::MatrixXd m(rows, cols);
  const json* data = &value;
  if (value.is_object()) {
    const int r = value.value("rows", -1), c = value.value("cols", -1);
    if (r != rows || c != cols) {
      throw ArgumentError(name + ": declared shape does not match " + std::to_string(rows) +
                          "x" + std::to_string(cols));
    }
    data = &Require(value, "data");
  }
  if (!data->is_array()) throw ArgumentError(name + ": expected an array");
  const bool nested = !data->empty() && data->front().is_array();
  if (nested) {
    if (static_cast<int>(data->size()) != rows) {
      throw ArgumentError(name + ": expected " + std::to_string(rows) + " rows");
    }
    for (int i = 0; i < rows; ++i) {
      const json& row = (*data)[i];
      if (!row.is_array() || static_cast<int>(row.size()) != cols) {
        throw ArgumentError(name + ": row " + std::to_string(i) + " must have " +
                            std::to_string(cols) + " entries");
      }
      for (int j = 0; j < cols; ++j) m(i, j) = ReadNumber(row[j], name);
    }
  } else {
    if (static_cast<long long>(data->size()) != static_cast<long long>(rows) * cols) {
      throw ArgumentError(name + ": expected " + std::to_string(rows * cols) + " entries");
    }
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = ReadNumber((*data)[i * cols + j], name);
    }
  }
  if (!m.allFinite()) throw ArgumentError(name + ": entries must be finite");
  return m;
}

json WriteMatrix(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(WriteNumber(m(i, j)));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

ProblemFile ParseProblem(const json& doc) {
  if (!doc.is_object()) throw ArgumentError("problem file must be a JSON object");
  const int n = ReadDim(doc, "n"), k = ReadDim(doc, "k"), l = ReadDim(doc, "l");
  ProblemFile p;
  p.plant.A = ReadMatrix(Require(doc, "A"), n, n, "A");
  p.plant.B = ReadMatrix(Require(doc, "B"), n, l, "B");
  p.plant.C = ReadMatrix(Require(doc, "C"), k, n, "C");
  p.plant.process_noise = ReadMatrix(Require(doc, "process_noise_cov"), n, n, "process_noise_cov");
  p.plant.observation_noise =
      ReadMatrix(Require(doc, "observation_noise_cov"), k, k, "observation_noise_cov");
  p.cost.Q = ReadMatrix(Require(doc, "Q"), n, n, "Q");
  p.cost.R = ReadMatrix(Require(doc, "R"), l, l, "R");

  if (doc.contains("units")) {
    const std::string u = doc.at("units").get<std::string>();
    if (u == "nats") {
      p.units = Units::kNats;
    } else if (u == "bits") {
      p.units = Units::kBits;
    } else {
      throw ArgumentError("units must be \"nats\" or \"bits\"");
    }
  }
  try {
    if (doc.contains("solver")) {
      const json& s = doc.at("solver");
      SolverConfig& c = p.solver;
      c.max_outer_iters = s.value("max_outer_iters", c.max_outer_iters);
      c.damping = s.value("damping", c.damping);
      c.fixed_point_tol = s.value("fixed_point_tol", c.fixed_point_tol);
      c.multi_starts = s.value("multi_starts", c.multi_starts);
      c.multi_start_seed = s.value("multi_start_seed", c.multi_start_seed);
      c.tol.rank = s.value("rank_tol", c.tol.rank);
      c.tol.sym = s.value("sym_tol", c.tol.sym);
      c.tol.res = s.value("res_tol", c.tol.res);
    }
    if (doc.contains("simulate")) {
      const json& s = doc.at("simulate");
      if (s.contains("steps")) p.sim.steps = s.at("steps").get<std::int64_t>();
      if (s.contains("seed")) p.sim.seed = s.at("seed").get<std::uint64_t>();
      if (s.contains("burn_in")) p.sim.burn_in = s.at("burn_in").get<std::int64_t>();
      p.sim.batches = s.value("batches", p.sim.batches);
    }
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("bad solver/simulate section: ") + e.what());
  }
  p.solver.Validate();
  if (p.sim.batches < 2) throw ArgumentError("simulate.batches must be at least 2");
  ValidateOrThrow(p.plant, p.cost, p.solver.tol);
  return p;
}

ProblemFile LoadProblem(const std::string& path) {
  const json doc = ReadJsonFile(path);
  try {
    return ParseProblem(doc);
  } catch (const json::exception& e) {
    throw ArgumentError(path + ": " + e.what());
  }
}

std::string Dump(const json& doc) {
  std::string out;
  Format(doc, 2, 0, &out);
  out += "\n";
  return out;
}

}  // namespace minlqg::cli
