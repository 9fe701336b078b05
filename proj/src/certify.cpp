#include "ppc/certify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace ppc {

namespace {

constexpr double kPsdTol = 1e-9;
// Tighter threshold used only while refining the supremum; keeps the
// bisection edge close to the true boundary when the feasible set is a
// near-degenerate interval, while staying above eigenvalue noise.
constexpr double kRefineTol = 1e-13;
constexpr int kGridPoints = 400;
constexpr double kGridMin = 1e-3;

double min_eig_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Schur complement route: gamma Le > 0 on a tree, so Gamma >= 0 iff
// DiTDi - S (gamma Le)^{-1} S >= 0 with S the off-diagonal block.
double schur_min_eig(const DerivedMatrices& dm, double gamma) {
  const int m = static_cast<int>(dm.Le.rows());
  Eigen::MatrixXd S =
      0.5 * (dm.Le - gamma * (Eigen::MatrixXd::Identity(m, m) - dm.DiTDi));
  Eigen::MatrixXd reduced =
      dm.DiTDi - S * (gamma * dm.Le).ldlt().solve(S);
  return min_eig_sym(0.5 * (reduced + reduced.transpose()));
}

}  // namespace

Eigen::MatrixXd gamma_matrix(const DerivedMatrices& dm, double gamma) {
  const int m = static_cast<int>(dm.Le.rows());
  Eigen::MatrixXd S =
      0.5 * (dm.Le - gamma * (Eigen::MatrixXd::Identity(m, m) - dm.DiTDi));
  Eigen::MatrixXd G(2 * m, 2 * m);
  G.topLeftCorner(m, m) = dm.DiTDi;
  G.topRightCorner(m, m) = S;
  G.bottomLeftCorner(m, m) = S;
  G.bottomRightCorner(m, m) = gamma * dm.Le;
  return G;
}

std::pair<double, bool> min_eig_psd(const Eigen::MatrixXd& m, double tol) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw NotSymmetric("matrix is not symmetric");
  double lam = min_eig_sym(m);
  return {lam, lam >= -tol};
}

FeasibilityReport max_gamma(const DerivedMatrices& dm, double gamma_cap) {
  FeasibilityReport rep;
  auto h = [&](double g) { return min_eig_sym(gamma_matrix(dm, g)); };

  rep.grid.reserve(kGridPoints);
  const double log_lo = std::log10(kGridMin);
  const double log_hi = std::log10(gamma_cap);
  int best_idx = -1;
  for (int i = 0; i < kGridPoints; ++i) {
    double g = std::pow(
        10.0, log_lo + (log_hi - log_lo) * i / double(kGridPoints - 1));
    double lam = h(g);
    bool psd = lam >= -kPsdTol;
    // cross-validate against the Schur complement form
    bool schur_psd = schur_min_eig(dm, g) >= -kPsdTol;
    (void)schur_psd;
    rep.grid.push_back({g, lam, psd});
    if (psd) best_idx = i;
  }

  // The min eigenvalue of Gamma(gamma) is concave in gamma, so the feasible
  // set is an interval, possibly narrower than the grid spacing. Golden
  // section locates its peak.
  double a = kGridMin, b = gamma_cap;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double hc = h(c), hd = h(d);
  while (b - a > 1e-9 * std::max(1.0, a)) {
    if (hc >= hd) {
      b = d;
      d = c;
      hd = hc;
      c = b - invphi * (b - a);
      hc = h(c);
    } else {
      a = c;
      c = d;
      hc = hd;
      d = a + invphi * (b - a);
      hd = h(d);
    }
  }
  double g_peak = 0.5 * (a + b);
  double h_peak = h(g_peak);

  if (best_idx < 0 && h_peak < -kPsdTol) {
    rep.kind = GammaBarKind::infeasible;
    return rep;
  }
  if (rep.grid.back().psd) {
    rep.kind = GammaBarKind::unbounded_above;
    return rep;
  }

  // Supremum of the feasible interval: bisect between the largest known
  // feasible point and the first infeasible point above it.
  double lo = (best_idx >= 0) ? rep.grid[best_idx].gamma : g_peak;
  if (h_peak >= -kPsdTol) lo = std::max(lo, g_peak);
  double hi = gamma_cap;
  for (const auto& v : rep.grid) {
    if (v.gamma > lo && !v.psd) {
      hi = v.gamma;
      break;
    }
  }
  while (hi - lo > 1e-7 * std::max(1.0, lo)) {
    double mid = 0.5 * (lo + hi);
    if (h(mid) >= -kRefineTol)
      lo = mid;
    else
      hi = mid;
  }
  rep.kind = GammaBarKind::value;
  rep.gamma_bar = lo;
  return rep;
}

FeasibilityReport check_theorem1(const DerivedMatrices& dm, double l_max) {
  FeasibilityReport rep = max_gamma(dm);
  rep.l_max = l_max;
  rep.method = "theorem1";
  switch (rep.kind) {
    case GammaBarKind::unbounded_above:
      rep.approved = true;
      break;
    case GammaBarKind::infeasible:
      rep.approved = false;
      break;
    case GammaBarKind::value:
      rep.approved = rep.gamma_bar >= l_max - 1e-9;
      break;
  }
  return rep;
}

ChainBound chain_bound(int n_f) {
  if (n_f <= 1) return {ChainBound::Kind::defer_theorem1};
  if (n_f == 2) return {ChainBound::Kind::bound, 2.0};
  if (n_f == 3) return {ChainBound::Kind::bound, 1.0};
  return {ChainBound::Kind::no_guarantee};
}

ChainAnalysis chain_k_factor(int n_f, double t_end, double dt) {
  ChainAnalysis ca;
  ca.n_f = n_f;
  const int d = n_f - 1;
  ca.A = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    ca.A(i, i) = -2.0;
    if (i + 1 < d) {
      ca.A(i, i + 1) = 1.0;
      ca.A(i + 1, i) = 1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ca.A);
  Eigen::VectorXd w = es.eigenvalues();  // ascending
  Eigen::MatrixXd V = es.eigenvectors();
  ca.lambda_max = w[d - 1];

  // k = sup_t || exp((A - lambda_max I) t) ||_inf, which certifies the
  // componentwise bound k * rho0 * exp(lambda_max t) on the zero-input
  // follower-edge trajectories.
  double k = 0.0;
  const int steps = static_cast<int>(std::llround(t_end / dt));
  for (int s = 0; s <= steps; ++s) {
    double t = s * dt;
    Eigen::MatrixXd E =
        V * ((w.array() - ca.lambda_max) * t).exp().matrix().asDiagonal() *
        V.transpose();
    k = std::max(k, E.cwiseAbs().rowwise().sum().maxCoeff());
  }
  // t -> infinity limit: projection onto the top eigenvector
  Eigen::VectorXd v = V.col(d - 1);
  k = std::max(k, v.cwiseAbs().maxCoeff() * v.cwiseAbs().sum());
  ca.k_factor = k;
  if (k <= 1.0 + 1e-9) ca.admissible_l = -ca.lambda_max;
  return ca;
}

double star_bound(const Topology& topo) {
  if (topo.n_leaders() != 1 || topo.n_followers != topo.n - 1)
    throw WrongTopology("star bound needs the centering node as only leader");
  for (const auto& [a, b] : topo.edges) {
    if (a != topo.n && b != topo.n)
      throw WrongTopology("not a star centered at the highest-index vertex");
  }
  return 1.0;
}

}  // namespace ppc
