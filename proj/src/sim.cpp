#include "ppc/sim.hpp"

#include <cmath>

namespace ppc {

namespace {

constexpr double kBoundaryClamp = 1e-9;

// eps and J for every edge; optionally clamps the modulated error just
// inside the region boundary instead of throwing.
struct EdgeEval {
  Eigen::VectorXd eps;
  Eigen::VectorXd jac;
  bool clamped = false;
};

EdgeEval eval_edges(const std::vector<EdgeChannel>& channels,
                    const Eigen::VectorXd& xbar, double t, bool clamp) {
  const int m = static_cast<int>(channels.size());
  EdgeEval ev;
  ev.eps.resize(m);
  ev.jac.resize(m);
  for (int k = 0; k < m; ++k) {
    const EdgeChannel& ch = channels[k];
    double r = rho(ch.spec, t);
    double xh = xbar[k] / r;
    if (xh <= ch.region_lo || xh >= ch.region_hi) {
      if (!clamp) throw OutOfFunnel("edge left the funnel", k);
      xh = std::clamp(xh, ch.region_lo + kBoundaryClamp,
                      ch.region_hi - kBoundaryClamp);
      ev.clamped = true;
    }
    ev.eps[k] = transform(ch, xh);
    ev.jac[k] = transform_slope(ch, xh) / r;
  }
  return ev;
}

Eigen::VectorXd gains_vector(const std::vector<EdgeChannel>& channels) {
  Eigen::VectorXd g(channels.size());
  for (size_t k = 0; k < channels.size(); ++k) g[k] = channels[k].g;
  return g;
}

Eigen::VectorXd rhs_impl(const DerivedMatrices& dm,
                         const std::vector<EdgeChannel>& channels,
                         const Eigen::VectorXd& x, double t, ControlMode mode,
                         bool clamp, bool* clamped_flag) {
  Eigen::VectorXd xd = -(dm.L * x);
  if (mode == ControlMode::no_control) return xd;
  EdgeEval ev = eval_edges(channels, dm.D.transpose() * x, t, clamp);
  if (clamped_flag && ev.clamped) *clamped_flag = true;
  Eigen::VectorXd forcing =
      ev.jac.cwiseProduct(gains_vector(channels)).cwiseProduct(ev.eps);
  if (mode == ControlMode::leader_ppc) {
    xd += dm.B * (-(dm.Di * forcing));
  } else {
    xd += -(dm.D * forcing);
  }
  return xd;
}

}  // namespace

Eigen::VectorXd control_input(const DerivedMatrices& dm,
                              const std::vector<EdgeChannel>& channels,
                              const Eigen::VectorXd& x, double t) {
  EdgeEval ev = eval_edges(channels, dm.D.transpose() * x, t, false);
  return -(dm.Di *
           ev.jac.cwiseProduct(gains_vector(channels)).cwiseProduct(ev.eps));
}

Eigen::VectorXd node_rhs(const DerivedMatrices& dm,
                         const std::vector<EdgeChannel>& channels,
                         const Eigen::VectorXd& x, double t,
                         ControlMode mode) {
  return rhs_impl(dm, channels, x, t, mode, false, nullptr);
}

double lyapunov(const std::vector<EdgeChannel>& channels, double gamma,
                const Eigen::VectorXd& xbar, double t) {
  double v = 0.5 * gamma * xbar.squaredNorm();
  for (int k = 0; k < xbar.size(); ++k) {
    const EdgeChannel& ch = channels[k];
    double xh = xbar[k] / rho(ch.spec, t);
    double e = transform(ch, xh);
    v += 0.5 * ch.g * e * e;
  }
  return v;
}

double centroid(const Eigen::VectorXd& x) { return x.mean(); }

Eigen::VectorXd positions_from_relative(const Topology& topo,
                                        const Eigen::VectorXd& xbar0) {
  const int n = topo.n;
  // adjacency with edge index and sign seen from the visited side
  std::vector<std::vector<std::pair<int, int>>> adj(n + 1);
  for (int k = 0; k < topo.m(); ++k) {
    adj[topo.edges[k].first].emplace_back(topo.edges[k].second, k);
    adj[topo.edges[k].second].emplace_back(topo.edges[k].first, k);
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<char> seen(n + 1, 0);
  std::vector<int> stack{n};  // highest-index leader pinned at 0
  seen[n] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (auto [w, k] : adj[v]) {
      if (seen[w]) continue;
      // edge k = (head, tail): xbar_k = x_head - x_tail
      if (w == topo.edges[k].first)
        x[w - 1] = x[v - 1] + xbar0[k];
      else
        x[w - 1] = x[v - 1] - xbar0[k];
      seen[w] = 1;
      stack.push_back(w);
    }
  }
  return x;
}

SimTrace integrate(const Topology& topo,
                   const std::vector<EdgeChannel>& channels,
                   const Eigen::VectorXd& x0, const SimConfig& cfg) {
  const DerivedMatrices dm = derive_matrices(topo);
  const int m = topo.m();
  const bool controlled = cfg.mode != ControlMode::no_control;

  {
    Eigen::VectorXd xb0 = dm.D.transpose() * x0;
    for (int k = 0; k < m; ++k) {
      const EdgeChannel& ch = channels[k];
      double xh = xb0[k] / rho(ch.spec, 0.0);
      if (xh <= ch.region_lo || xh >= ch.region_hi)
        throw InitialConditionOutsideFunnel(
            "initial relative position outside the funnel on edge " +
            std::to_string(k + 1));
    }
  }

  const int steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
  SimTrace tr;
  tr.times.reserve(steps + 1);
  tr.x.reserve(steps + 1);
  tr.xbar.reserve(steps + 1);

  Eigen::VectorXd x = x0;
  for (int s = 0; s <= steps; ++s) {
    const double t = s * cfg.dt;
    if (!x.allFinite()) throw NumericalBlowup("non-finite state at t=" +
                                              std::to_string(t));
    Eigen::VectorXd xb = dm.D.transpose() * x;
    double r = rho(channels.empty() ? PerformanceSpec{} : channels[0].spec, t);

    bool violated = false;
    for (int k = 0; k < m; ++k) {
      const EdgeChannel& ch = channels[k];
      double rk = rho(ch.spec, t);
      double lo = ch.region_lo * rk * (1.0 + cfg.violation_margin);
      double hi = ch.region_hi * rk * (1.0 + cfg.violation_margin);
      if (xb[k] <= lo || xb[k] >= hi) {
        tr.violations.push_back({t, k, xb[k], xb[k] <= lo ? lo : hi});
        violated = true;
      }
    }
    (void)violated;

    bool clamped = false;
    EdgeEval ev = eval_edges(channels, xb, t, true);
    clamped = ev.clamped;
    double V = 0.5 * cfg.lyapunov_gamma * xb.squaredNorm();
    for (int k = 0; k < m; ++k) V += 0.5 * channels[k].g * ev.eps[k] * ev.eps[k];

    Eigen::VectorXd u = Eigen::VectorXd::Zero(dm.Di.rows());
    if (controlled && cfg.mode == ControlMode::leader_ppc)
      u = -(dm.Di *
            ev.jac.cwiseProduct(gains_vector(channels)).cwiseProduct(ev.eps));

    tr.times.push_back(t);
    tr.x.push_back(x);
    tr.xbar.push_back(xb);
    tr.u.push_back(u);
    tr.rho.push_back(r);
    tr.V.push_back(V);

    if (s == steps) {
      tr.clamped.push_back(clamped ? 1 : 0);
      break;
    }

    const double h = cfg.dt;
    Eigen::VectorXd k1 =
        rhs_impl(dm, channels, x, t, cfg.mode, true, &clamped);
    Eigen::VectorXd k2 = rhs_impl(dm, channels, x + 0.5 * h * k1, t + 0.5 * h,
                                  cfg.mode, true, &clamped);
    Eigen::VectorXd k3 = rhs_impl(dm, channels, x + 0.5 * h * k2, t + 0.5 * h,
                                  cfg.mode, true, &clamped);
    Eigen::VectorXd k4 =
        rhs_impl(dm, channels, x + h * k3, t + h, cfg.mode, true, &clamped);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    tr.clamped.push_back(clamped ? 1 : 0);
  }

  // converged_at: first time max|xbar| drops below tol and stays there
  int first_good = -1;
  for (int s = static_cast<int>(tr.times.size()) - 1; s >= 0; --s) {
    if (tr.xbar[s].cwiseAbs().maxCoeff() < cfg.consensus_tol)
      first_good = s;
    else
      break;
  }
  if (first_good >= 0) tr.converged_at = tr.times[first_good];
  return tr;
}

}  // namespace ppc
