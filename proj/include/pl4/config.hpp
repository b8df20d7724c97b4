#pragma once

// Run configuration: defaults, a JSON file, then command-line overrides.
//
// File format (every key optional):
//   {"orth_tol": 1e-9, "angle_tol": 1e-7, "snap_tol": 1e-7, "distance_tol": 0.03,
//    "budget_multiplier": 64, "complex_subdivision": 3, "surface_subdivision": 8,
//    "distance_samples": 4, "seed": 20240611}

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "json.hpp"
#include "pl4/error.hpp"
#include "pl4/split.hpp"

namespace pl4 {

struct Config {
  SplitOptions options;
  std::string source = "defaults";  // file the values came from
};

inline void check_config(const SplitOptions& o) {
  auto positive = [](double x, const char* name) {
    if (!(x > 0) || !std::isfinite(x)) throw Error(ErrorCode::InvalidInput, std::string(name) + " must be positive");
  };
  positive(o.orth_tol, "orth_tol");
  positive(o.angle_tol, "angle_tol");
  positive(o.snap_tol, "snap_tol");
  positive(o.distance_tol, "distance_tol");
  if (o.budget_multiplier < 1) throw Error(ErrorCode::InvalidInput, "budget_multiplier must be at least 1");
  if (o.complex_subdivision < 1 || o.surface_subdivision < 1) {
    throw Error(ErrorCode::InvalidInput, "subdivision factors must be at least 1");
  }
  if (o.distance_samples < 1) throw Error(ErrorCode::InvalidInput, "distance_samples must be at least 1");
}

inline SplitOptions parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "config: expected a JSON object");
  SplitOptions o;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "orth_tol") o.orth_tol = value.get<double>();
      else if (key == "angle_tol") o.angle_tol = value.get<double>();
      else if (key == "snap_tol") o.snap_tol = value.get<double>();
      else if (key == "distance_tol") o.distance_tol = value.get<double>();
      else if (key == "budget_multiplier") o.budget_multiplier = value.get<int>();
      else if (key == "complex_subdivision") o.complex_subdivision = value.get<int>();
      else if (key == "surface_subdivision") o.surface_subdivision = value.get<int>();
      else if (key == "distance_samples") o.distance_samples = value.get<int>();
      else if (key == "seed") o.seed = value.get<std::uint64_t>();
      else throw Error(ErrorCode::InvalidInput, "config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw Error(ErrorCode::InvalidInput, std::string("config: ") + e.what());
  }
  check_config(o);
  return o;
}

// Reads `path`, or the file named by PL4_CONFIG when path is empty; with
// neither, the defaults.
inline Config load_config(const std::string& path) {
  std::string p = path;
  if (p.empty()) {
    if (const char* env = std::getenv("PL4_CONFIG"); env != nullptr && *env != '\0') p = env;
  }
  Config c;
  if (p.empty()) return c;
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open config file '" + p + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  c.options = parse_config(text);
  c.source = p;
  return c;
}

}  // namespace pl4
