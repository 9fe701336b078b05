#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppc/graph.hpp"

namespace ppc {

struct NotSymmetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct WrongTopology : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class GammaBarKind { value, unbounded_above, infeasible };

struct GammaVerdict {
  double gamma;
  double min_eig;
  bool psd;
};

struct FeasibilityReport {
  GammaBarKind kind = GammaBarKind::infeasible;
  double gamma_bar = 0.0;  // meaningful when kind == value
  double l_max = 0.0;
  bool approved = false;
  std::string method = "theorem1";  // theorem1 | chain_special | star_special
  std::vector<GammaVerdict> grid;
};

/// Verdict of the chain special-case decay bound.
struct ChainBound {
  enum class Kind { defer_theorem1, bound, no_guarantee };
  Kind kind;
  double l_bound = 0.0;  // meaningful when kind == bound
};

/// Zero-input growth analysis of the chain follower-edge block.
struct ChainAnalysis {
  int n_f = 0;
  Eigen::MatrixXd A;  // (n_f-1)x(n_f-1) tridiagonal, diag -2, off-diag 1
  double lambda_max = 0.0;
  double k_factor = 1.0;
  std::optional<double> admissible_l;  // decay bound when k == 1
};

/// The 2m x 2m block matrix whose positive semidefiniteness certifies the
/// decay rate gamma:
///   [ Di^T Di                S        ]      S = (Le - gamma (I - Di^T Di))/2
///   [ S                      gamma Le ]
Eigen::MatrixXd gamma_matrix(const DerivedMatrices& dm, double gamma);

/// Min eigenvalue of a symmetric matrix; psd iff min_eig >= -tol.
std::pair<double, bool> min_eig_psd(const Eigen::MatrixXd& m,
                                    double tol = 1e-9);

/// Largest gamma for which gamma_matrix is PSD. Scans a log-spaced grid,
/// exploits concavity of the min eigenvalue in gamma to catch feasible
/// sets narrower than the grid spacing, and refines the supremum by
/// bisection. Every grid verdict is cross-checked against the Schur
/// complement form.
FeasibilityReport max_gamma(const DerivedMatrices& dm, double gamma_cap = 1e3);

FeasibilityReport check_theorem1(const DerivedMatrices& dm, double l_max);

ChainBound chain_bound(int n_f);

ChainAnalysis chain_k_factor(int n_f, double t_end = 10.0, double dt = 1e-3);

/// Decay bound for a star with the centering node as only leader.
double star_bound(const Topology& topo);

}  // namespace ppc
