#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace qcdet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitExhausted = 3;

struct ConsensusParams {
  std::string graph = "star:10";  // star:N | path:N | complete:N | random:N:M:SEED | file:PATH
  std::vector<double> data;
  double a = 0.0;
  double big_delta = 1.0;
  double delta = 0.5;
  double rho = 0.01;
  std::int64_t max_iter = 1'000'000;
  int cycle_window = 256;
  bool bounds = false;
  std::string trace;  // per-iteration CSV; empty for none
};

struct DetectParams {
  std::string model = "gauss:1,-1,10";  // gauss:MU1,MU2,VAR | discrete:PATH
  std::string criterion = "map";        // np-const | map | np-exp | finite-n
  double delta = 0.0;                   // np-const; <= 0 selects the Hoeffding schedule
  double pi1 = 0.5;
  bool prior_adjusted = false;
  double tau = 0.0;
  bool has_gamma = false;
  double gamma = 0.0;
  double tau_star = 0.0;
  std::string rho_choice = "recipe";  // recipe | practical | fixed
  double rho = 0.0;                   // finite-n rho, or the fixed value
  std::string cycle_policy = "accept-h1";
  bool two_stage = false;
  std::string schedule = "fixed";  // fixed | decreasing
  std::string topology = "star";
  std::vector<int> n_values{10};
  std::int64_t trials = 10'000;
  std::uint64_t seed = 1;
  std::int64_t max_iter = 1'000'000;
  int cycle_window = 256;
  bool check_bounds = false;
  std::string out;
};

struct SweepTimeParams {
  std::string model = "gauss:1,-1,10";
  std::vector<std::string> topologies{"star"};
  std::vector<int> n_values{10};
  std::int64_t trials = 2'000;
  std::uint64_t seed = 1;
  std::string schedule = "fixed";
  std::int64_t max_iter = 1'000'000;
  int cycle_window = 256;
  std::string out;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ConsensusParams, graph, data, a, big_delta, delta, rho, max_iter, cycle_window,
                                   bounds, trace)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DetectParams, model, criterion, delta, pi1, prior_adjusted, tau, has_gamma, gamma,
                                   tau_star, rho_choice, rho, cycle_policy, two_stage, schedule, topology, n_values,
                                   trials, seed, max_iter, cycle_window, check_bounds, out)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SweepTimeParams, model, topologies, n_values, trials, seed, schedule, max_iter,
                                   cycle_window, out)

using Params = std::variant<ConsensusParams, DetectParams, SweepTimeParams>;

// Full configuration of one CLI run; written next to every CSV.
struct RunManifest {
  std::string subcommand;
  std::string version;
  Params params;
};

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest read_manifest(const std::string& path);

// "10", "10,20,40" or "start:stop:step" (inclusive stop). Throws on bad syntax or an empty range.
std::vector<int> parse_range(const std::string& text);

// "out.csv" -> "out.manifest.json"
std::string manifest_path(const std::string& csv_path);

// Default output location: $QCDET_OUT_DIR/<name>, or ./<name>.
std::string default_output(const std::string& name);

// Runs the manifest and writes its CSV plus manifest JSON. Returns an exit code.
// Thread count only affects speed, never results, so it is not part of the manifest.
int execute(const RunManifest& manifest, std::ostream& out, std::ostream& err, int threads = 0);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qcdet::cli
