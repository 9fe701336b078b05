#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ppc/certify.hpp"
#include "ppc/graph.hpp"
#include "ppc/performance.hpp"
#include "ppc/sim.hpp"

namespace ppc {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownPreset : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name;
  Topology topology;
  PerformanceSpec perf;         // shared across all edges
  std::vector<double> gains;    // diagonal of G, length m
  Eigen::VectorXd xbar0;        // initial relative positions, length m
  SimConfig sim;
  bool inferred_topology = false;
};

struct RunSummary {
  std::string scenario;
  bool approved = false;
  std::string method;
  GammaBarKind gamma_bar_kind = GammaBarKind::infeasible;
  double gamma_bar = 0.0;
  int violation_count = 0;
  std::optional<double> first_violation;
  std::optional<double> converged_at;
  double final_max_xbar = 0.0;
  double centroid_drift = 0.0;
  bool v_monotone = false;
};

Scenario load_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);
std::string scenario_to_json(const Scenario& sc);

std::vector<EdgeChannel> make_channels(const Scenario& sc);

/// Certify first (chain/star special path by topology detection, Theorem 1
/// otherwise), then simulate.
std::pair<SimTrace, RunSummary> run(const Scenario& sc);

FeasibilityReport certify_scenario(const Scenario& sc);

void emit_csv(const SimTrace& trace, const Scenario& sc,
              const std::string& path);
std::string summary_to_json(const RunSummary& s);
void emit_summary(const RunSummary& s, const std::string& path);

std::vector<std::string> preset_names();
Scenario preset(const std::string& name);

}  // namespace ppc
