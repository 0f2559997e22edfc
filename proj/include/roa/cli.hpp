#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "roa/dynamics.hpp"
#include "roa/hierarchy.hpp"
#include "roa/power.hpp"
#include "roa/roa.hpp"

namespace roa::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PolynomialSystem {
  std::vector<std::string> vars;
  std::vector<std::string> f;
  std::vector<std::string> trig_angles;
  std::vector<std::string> equalities;
  std::optional<std::vector<double>> target_center;
};

enum class SolverKind { embedded, exported };

struct RunConfig {
  std::string system_type;  ///< "power_network" or "polynomial"
  PowerNetwork network;
  PolynomialSystem polynomial;
  std::map<std::string, Interval> box;
  std::optional<double> omega_max;
  double T = 8.0;
  double eps = 0.1;
  int order = 3;
  std::string mode = "outer";  ///< outer, inner or both
  SolverKind solver = SolverKind::embedded;
  std::uint64_t seed = 1;
  std::size_t samples = 500;
  double band = 1e-3;
  bool normalize_time = true;
  int max_iter = 200;
  /// Canonical serialization of the validated input, hashed into certificates.
  std::string canonical;
};

/// Validates against the schema (unknown keys rejected) and fills defaults.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

DynSystem build_system(const RunConfig& cfg);
HierarchyOptions hierarchy_options(const RunConfig& cfg);

nlohmann::json poly_to_json(const Poly& p);
Poly poly_from_json(const nlohmann::json& j);

nlohmann::json certificate_to_json(const Certificate& cert, const std::string& hash);
Certificate certificate_from_json(const nlohmann::json& j);

struct CommandOptions {
  std::string config_path;
  std::optional<int> order;
  std::optional<std::string> mode;
  std::string out_dir;
  std::vector<std::string> certificates;
  std::string plane;
  std::vector<std::string> fix;
  std::size_t resolution = 101;
  bool original = false;
};

int cmd_recast(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_certify(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_verify(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_grid(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);

/// Parses argv, dispatches and maps exceptions to exit codes.
int run(int argc, char** argv);

}  // namespace roa::cli
