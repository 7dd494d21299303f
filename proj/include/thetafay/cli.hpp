#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace thetafay {

// Everything one CLI invocation needs.  Built from a JSON config file, a
// surface bundle and flags, in that order of increasing precedence.
struct RunConfig {
  std::string command;                  // surface | check | solve | kp | scan
  nlohmann::json surface;               // SurfaceConfig JSON
  std::string surfaceBaseDir = ".";     // for relative directFile paths
  nlohmann::json points = nlohmann::json::object();  // a, b, c, d
  nlohmann::json params = nlohmann::json::object();  // solution parameters
  std::string identity;                 // fay | new | degenerate | q2-oracle
  std::string solution;                 // nls | ds | ds1 | ds2 | nnls
  std::optional<nlohmann::json> grid;   // GridSpec JSON
  int gridN = 0;                        // points per axis override
  double gridRange = 0.0;               // symmetric range override
  std::optional<double> tol;
  std::uint64_t seed = 1;
  int samples = 100;
  std::string out;
  std::string csv;
  std::string cacheDir;
  bool useCache = true;

  // Merges a config or surface bundle: keys present in j replace current values.
  void merge(const nlohmann::json& j, const std::string& baseDir);
  nlohmann::json to_json() const;
};

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitTolerance = 2 };

// Runs one command.  The report is written to cfg.out (when set) and also
// returned through report; diagnostics go to log.
int run(const RunConfig& cfg, std::ostream& log, nlohmann::json* report = nullptr);

// Flag parsing front end used by the thetafay executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace thetafay
