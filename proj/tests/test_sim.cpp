#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "ppc/sim.hpp"
#include "test_util.hpp"

using namespace ppc;

namespace {

const PerformanceSpec kBaseSpec{5.0, 0.1, 1.0, 1.0};

std::vector<EdgeChannel> unit_channels(const Topology& t,
                                       const Eigen::VectorXd& xbar0,
                                       const PerformanceSpec& spec,
                                       std::vector<double> gains = {}) {
  std::vector<EdgeChannel> chs;
  for (int k = 0; k < t.m(); ++k)
    chs.push_back(make_channel(spec, xbar0[k],
                               gains.empty() ? 1.0 : gains[k]));
  return chs;
}

// per-leader summation form of the control law, written independently of
// the stacked matrix form
Eigen::VectorXd control_by_sums(const Topology& t,
                                const std::vector<EdgeChannel>& chs,
                                const Eigen::VectorXd& x, double time) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(t.n_leaders());
  for (int k = 0; k < t.m(); ++k) {
    auto [head, tail] = t.edges[k];
    double xhat = (x[head - 1] - x[tail - 1]) / rho(chs[k].spec, time);
    double eps = transform(chs[k], xhat);
    double jac = jacobian(chs[k], xhat, time);
    // the channel stores the head->tail direction; seen from the tail the
    // transformed error flips sign while the Jacobian is shared
    if (t.is_leader(head))
      u[head - t.n_followers - 1] -= chs[k].g * jac * eps;
    if (t.is_leader(tail))
      u[tail - t.n_followers - 1] -= chs[k].g * jac * (-eps);
  }
  return u;
}

}  // namespace

TEST_CASE("control_input hand values") {
  SUBCASE("consensus gives zero input") {
    auto t = make_star(4, {4});
    auto dm = derive_matrices(t);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 2.5);
    auto chs = unit_channels(t, Eigen::VectorXd::Ones(3), kBaseSpec);
    CHECK(control_input(dm, chs, x, 0.0).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single edge hand evaluation") {
    auto t = build_topology(2, {{1, 2}}, {2});
    auto dm = derive_matrices(t);
    Eigen::VectorXd x(2);
    x << 1.0, 0.0;
    auto chs = unit_channels(t, Eigen::VectorXd::Ones(1), kBaseSpec);
    Eigen::VectorXd u = control_input(dm, chs, x, 0.0);
    // xhat = 0.2, eps = ln(1.2/0.8), J = 2/(1-0.04)/5, leader row is -1
    double eps = std::log(1.2 / 0.8);
    double jac = 2.0 / (1.0 - 0.04) / 5.0;
    CHECK(u[0] == doctest::Approx(eps * jac).epsilon(1e-12));
    CHECK(u[0] == doctest::Approx(0.168944).epsilon(1e-4));
  }
  SUBCASE("symmetric star state cancels at the center") {
    auto t = make_star(3, {3});
    auto dm = derive_matrices(t);
    Eigen::VectorXd x(3);
    x << 1.7, -1.7, 0.0;
    auto chs = unit_channels(t, Eigen::VectorXd::Ones(2), kBaseSpec);
    CHECK(std::abs(control_input(dm, chs, x, 0.0)[0]) < 1e-15);
  }
}

TEST_CASE("node_rhs") {
  SUBCASE("constant vector is an equilibrium in every mode") {
    auto t = make_chain(4, 2);
    auto dm = derive_matrices(t);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(4, -3.2);
    auto chs = unit_channels(t, Eigen::VectorXd::Zero(3), kBaseSpec);
    for (auto mode : {ControlMode::no_control, ControlMode::leader_ppc,
                      ControlMode::all_agents_ppc})
      CHECK(node_rhs(dm, chs, x, 0.5, mode).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("chain n=3 without control") {
    auto t = make_chain(3, 1);
    auto dm = derive_matrices(t);
    Eigen::VectorXd x(3);
    x << 1, 0, 0;
    auto chs = unit_channels(t, dm.D.transpose() * x, kBaseSpec);
    Eigen::VectorXd xd =
        node_rhs(dm, chs, x, 0.0, ControlMode::no_control);
    Eigen::VectorXd want(3);
    want << -1, 1, 0;
    CHECK((xd - want).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("edge dynamics consistency under leader control") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    auto t = testutil::random_tree(7, 2, rng);
    auto dm = derive_matrices(t);
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd x(t.n);
      for (int v = 0; v < t.n; ++v) x[v] = u(rng);
      auto chs = unit_channels(t, Eigen::VectorXd::Ones(t.m()), kBaseSpec);
      double time = 0.2;
      Eigen::VectorXd xb = dm.D.transpose() * x;
      Eigen::VectorXd eps(t.m()), jac(t.m());
      for (int k = 0; k < t.m(); ++k) {
        double xh = xb[k] / rho(kBaseSpec, time);
        eps[k] = transform(chs[k], xh);
        jac[k] = jacobian(chs[k], xh, time);
      }
      Eigen::VectorXd lhs =
          dm.D.transpose() *
          node_rhs(dm, chs, x, time, ControlMode::leader_ppc);
      Eigen::VectorXd rhs =
          -dm.Le * xb - dm.DiTDi * jac.cwiseProduct(eps);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("stacked control equals per-leader summation form") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int rep = 0; rep < 3; ++rep) {
    auto t = testutil::random_tree(8, 3, rng);
    auto dm = derive_matrices(t);
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd x(t.n);
      for (int v = 0; v < t.n; ++v) x[v] = u(rng);
      auto chs = unit_channels(t, Eigen::VectorXd::Ones(t.m()), kBaseSpec);
      Eigen::VectorXd a = control_input(dm, chs, x, 0.1);
      Eigen::VectorXd b = control_by_sums(t, chs, x, 0.1);
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("integrate") {
  SUBCASE("follower edge closed form exp(-2t)") {
    // the decoupled follower-edge block of a chain obeys xbar' = -2 xbar;
    // realized exactly by the two-node chain without control
    auto t = make_chain(2, 1);
    Eigen::VectorXd xbar0(1);
    xbar0 << 3.7;
    auto chs = unit_channels(t, xbar0, kBaseSpec);
    SimConfig cfg;
    cfg.mode = ControlMode::no_control;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    auto tr = integrate(t, chs, positions_from_relative(t, xbar0), cfg);
    double got = tr.xbar.back()[0];
    CHECK(std::abs(got - 3.7 * std::exp(-2.0)) < 1e-8);
  }
  SUBCASE("consensus start stays put") {
    auto t = make_star(5, {5});
    Eigen::VectorXd xbar0 = Eigen::VectorXd::Zero(4);
    auto chs = unit_channels(t, xbar0, kBaseSpec);
    SimConfig cfg;
    cfg.consensus_tol = 0.1;
    auto tr = integrate(t, chs, Eigen::VectorXd::Constant(5, 1.0), cfg);
    REQUIRE(tr.converged_at.has_value());
    CHECK(*tr.converged_at == 0.0);
    CHECK(tr.xbar.back().cwiseAbs().maxCoeff() == 0.0);
    CHECK(tr.violations.empty());
  }
  SUBCASE("spectral oracle on star n=4 without control") {
    auto t = make_star(4, {4});
    auto dm = derive_matrices(t);
    Eigen::VectorXd xbar0(3);
    xbar0 << 2.0, -1.0, 0.5;
    auto chs = unit_channels(t, xbar0, kBaseSpec);
    SimConfig cfg;
    cfg.mode = ControlMode::no_control;
    cfg.dt = 1e-3;
    cfg.t_end = 10.0;
    auto tr = integrate(t, chs, positions_from_relative(t, xbar0), cfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dm.Le);
    double worst = 0.0;
    for (size_t s = 0; s < tr.times.size(); s += 100) {
      Eigen::VectorXd want =
          es.eigenvectors() *
          (es.eigenvalues().array() * -tr.times[s]).exp().matrix()
              .asDiagonal() *
          es.eigenvectors().transpose() * xbar0;
      worst = std::max(worst, (tr.xbar[s] - want).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("edge/node consistency along a controlled trajectory") {
    auto t = make_star(4, {4});
    auto dm = derive_matrices(t);
    Eigen::VectorXd xbar0(3);
    xbar0 << 2.0, -1.0, 0.5;
    auto chs = unit_channels(t, xbar0, kBaseSpec);
    SimConfig cfg;
    cfg.dt = 2e-4;
    cfg.t_end = 2.0;
    auto tr = integrate(t, chs, positions_from_relative(t, xbar0), cfg);
    for (size_t s = 0; s < tr.times.size(); s += 37)
      CHECK((dm.D.transpose() * tr.x[s] - tr.xbar[s]).cwiseAbs().maxCoeff() <
            1e-9);
    // times strictly increasing by dt
    for (size_t s = 1; s < tr.times.size(); ++s)
      CHECK(tr.times[s] - tr.times[s - 1] ==
            doctest::Approx(cfg.dt).epsilon(1e-12));
  }
  SUBCASE("initial condition outside the funnel is rejected") {
    auto t = make_chain(2, 1);
    Eigen::VectorXd bad(1);
    bad << 5.1;
    auto chs = unit_channels(t, Eigen::VectorXd::Ones(1), kBaseSpec);
    CHECK_THROWS_AS(
        integrate(t, chs, positions_from_relative(t, bad), SimConfig{}),
        InitialConditionOutsideFunnel);
  }
}

TEST_CASE("RK4 order check against the spectral oracle") {
  auto t = make_star(4, {4});
  auto dm = derive_matrices(t);
  Eigen::VectorXd xbar0(3);
  xbar0 << 2.0, -1.0, 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dm.Le);
  auto worst_err = [&](double dt) {
    auto chs = unit_channels(t, xbar0, kBaseSpec);
    SimConfig cfg;
    cfg.mode = ControlMode::no_control;
    cfg.dt = dt;
    cfg.t_end = 2.0;
    auto tr = integrate(t, chs, positions_from_relative(t, xbar0), cfg);
    double w = 0.0;
    for (size_t s = 0; s < tr.times.size(); ++s) {
      Eigen::VectorXd want =
          es.eigenvectors() *
          (es.eigenvalues().array() * -tr.times[s]).exp().matrix()
              .asDiagonal() *
          es.eigenvectors().transpose() * xbar0;
      w = std::max(w, (tr.xbar[s] - want).cwiseAbs().maxCoeff());
    }
    return w;
  };
  double ratio = worst_err(0.1) / worst_err(0.05);
  CHECK(ratio >= 8.0);
  CHECK(ratio <= 32.0);
}

TEST_CASE("lyapunov") {
  auto t = make_chain(2, 1);
  Eigen::VectorXd xbar(1);
  xbar << 1.0;
  auto chs = unit_channels(t, xbar, kBaseSpec);
  SUBCASE("zero at consensus") {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(1);
    CHECK(lyapunov(chs, 1.0, z, 0.0) == 0.0);
  }
  SUBCASE("single edge hand value") {
    double eps = std::log(1.2 / 0.8);
    CHECK(lyapunov(chs, 1.0, xbar, 0.0) ==
          doctest::Approx(0.5 * eps * eps + 0.5).epsilon(1e-12));
    CHECK(lyapunov(chs, 1.0, xbar, 0.0) ==
          doctest::Approx(0.582201).epsilon(1e-5));
  }
}

TEST_CASE("centroid") {
  Eigen::VectorXd x(3);
  x << 1, 2, 3;
  CHECK(centroid(x) == 2.0);

  // conserved without control
  auto t = make_star(5, {5});
  Eigen::VectorXd xbar0(4);
  xbar0 << 2, -1, 0.5, 1.5;
  auto chs = unit_channels(t, xbar0, kBaseSpec);
  SimConfig cfg;
  cfg.mode = ControlMode::no_control;
  auto tr = integrate(t, chs, positions_from_relative(t, xbar0), cfg);
  double c0 = centroid(tr.x.front());
  for (size_t s = 0; s < tr.x.size(); s += 211)
    CHECK(std::abs(centroid(tr.x[s]) - c0) < 1e-6);
}

TEST_CASE("positions_from_relative inverts D^T on trees") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int rep = 0; rep < 10; ++rep) {
    auto t = testutil::random_tree(9, 2, rng);
    auto dm = derive_matrices(t);
    Eigen::VectorXd xbar0(t.m());
    for (int k = 0; k < t.m(); ++k) xbar0[k] = u(rng);
    Eigen::VectorXd x = positions_from_relative(t, xbar0);
    CHECK((dm.D.transpose() * x - xbar0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(x[t.n - 1] == 0.0);  // highest-index leader pinned
  }
}
