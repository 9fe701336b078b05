#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ppc/graph.hpp"
#include "ppc/performance.hpp"

namespace ppc {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InitialConditionOutsideFunnel : SimError {
  using SimError::SimError;
};
struct NumericalBlowup : SimError {
  using SimError::SimError;
};

enum class ControlMode { no_control, leader_ppc, all_agents_ppc };

struct SimConfig {
  double dt = 1e-3;
  double t_end = 10.0;
  double violation_margin = 0.0;
  double consensus_tol = 0.1;
  ControlMode mode = ControlMode::leader_ppc;
  double lyapunov_gamma = 1.0;  // gamma used for the recorded V values
};

struct Violation {
  double time;
  int edge;      // 0-based edge index
  double value;  // xbar at the violation
  double bound;  // funnel bound that was crossed
};

struct SimTrace {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> x;     // node positions per step
  std::vector<Eigen::VectorXd> xbar;  // edge errors per step
  std::vector<Eigen::VectorXd> u;     // leader inputs per step
  std::vector<double> rho;            // shared funnel radius per step
  std::vector<double> V;              // Lyapunov value per step
  std::vector<char> clamped;          // RK4 stage hit the funnel boundary
  std::vector<Violation> violations;
  std::optional<double> converged_at;
};

/// Stacked leader input u = -D_i J_T(xhat,t) G eps(xhat), length n_l.
Eigen::VectorXd control_input(const DerivedMatrices& dm,
                              const std::vector<EdgeChannel>& channels,
                              const Eigen::VectorXd& x, double t);

Eigen::VectorXd node_rhs(const DerivedMatrices& dm,
                         const std::vector<EdgeChannel>& channels,
                         const Eigen::VectorXd& x, double t, ControlMode mode);

/// Fixed-step classical RK4 over [0, t_end]. Funnel violations are recorded,
/// not fatal; RK4 stage states that momentarily exit a funnel are evaluated
/// with the modulated error clamped just inside the region boundary.
SimTrace integrate(const Topology& topo,
                   const std::vector<EdgeChannel>& channels,
                   const Eigen::VectorXd& x0, const SimConfig& cfg);

/// V = 1/2 eps^T G eps + gamma/2 xbar^T xbar.
double lyapunov(const std::vector<EdgeChannel>& channels, double gamma,
                const Eigen::VectorXd& xbar, double t);

double centroid(const Eigen::VectorXd& x);

/// Recover node positions from relative positions xbar = D^T x by pinning
/// the highest-index leader at 0 and walking the tree.
Eigen::VectorXd positions_from_relative(const Topology& topo,
                                        const Eigen::VectorXd& xbar0);

}  // namespace ppc
