#include "ppc/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ppc {

using nlohmann::json;

namespace {

ControlMode mode_from_string(const std::string& s) {
  if (s == "no_control") return ControlMode::no_control;
  if (s == "leader_ppc") return ControlMode::leader_ppc;
  if (s == "all_agents_ppc") return ControlMode::all_agents_ppc;
  throw ValidationError("unknown mode: " + s);
}

std::string mode_to_string(ControlMode m) {
  switch (m) {
    case ControlMode::no_control: return "no_control";
    case ControlMode::leader_ppc: return "leader_ppc";
    case ControlMode::all_agents_ppc: return "all_agents_ppc";
  }
  return "leader_ppc";
}

bool is_chain(const Topology& t) {
  std::vector<char> present(t.n, 0);
  for (const auto& [a, b] : t.edges) {
    int lo = std::min(a, b), hi = std::max(a, b);
    if (hi != lo + 1) return false;
    present[lo - 1] = 1;
  }
  for (int i = 0; i < t.n - 1; ++i)
    if (!present[i]) return false;
  return true;
}

bool is_center_leader_star(const Topology& t) {
  if (t.n_leaders() != 1) return false;
  for (const auto& [a, b] : t.edges)
    if (a != t.n && b != t.n) return false;
  return true;
}

}  // namespace

std::vector<EdgeChannel> make_channels(const Scenario& sc) {
  std::vector<EdgeChannel> chs;
  chs.reserve(sc.topology.m());
  for (int k = 0; k < sc.topology.m(); ++k)
    chs.push_back(make_channel(sc.perf, sc.xbar0[k], sc.gains[k]));
  return chs;
}

Scenario load_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad scenario document: ") + e.what());
  }
  Scenario sc;
  try {
    sc.name = j.at("name").get<std::string>();
    int n = j.at("n").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges"))
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    std::vector<int> leaders = j.at("leaders").get<std::vector<int>>();
    try {
      sc.topology = build_topology(n, edges, leaders);
    } catch (const GraphError& e) {
      throw ValidationError(e.what());
    }
    const auto& p = j.at("perf");
    sc.perf.rho0 = p.at("rho0").get<double>();
    sc.perf.rho_inf = p.at("rho_inf").get<double>();
    sc.perf.l = p.at("l").get<double>();
    sc.perf.M = p.at("M").get<double>();
    sc.gains = j.at("gains").get<std::vector<double>>();
    std::vector<double> xb = j.at("xbar0").get<std::vector<double>>();
    sc.xbar0 = Eigen::Map<Eigen::VectorXd>(xb.data(), xb.size());
    sc.sim.mode = mode_from_string(j.value("mode", "leader_ppc"));
    sc.sim.dt = j.value("dt", 1e-3);
    sc.sim.t_end = j.value("t_end", 10.0);
    sc.inferred_topology = j.value("inferred_topology", false);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad scenario document: ") + e.what());
  }

  const int m = sc.topology.m();
  if (static_cast<int>(sc.gains.size()) != m)
    throw ValidationError("gains length must equal the edge count");
  if (sc.xbar0.size() != m)
    throw ValidationError("xbar0 length must equal the edge count");
  for (double g : sc.gains)
    if (g <= 0.0) throw ValidationError("gains must be positive");
  if (!(sc.perf.rho0 > sc.perf.rho_inf && sc.perf.rho_inf > 0.0))
    throw ValidationError("need rho0 > rho_inf > 0");
  if (sc.perf.M <= 0.0) throw ValidationError("need M > 0");
  if (sc.perf.l < 0.0) throw ValidationError("need l >= 0");
  for (int k = 0; k < m; ++k) {
    auto [lo, hi] = select_region(sc.xbar0[k], sc.perf.M);
    double xh = sc.xbar0[k] / sc.perf.rho0;
    if (xh <= lo || xh >= hi)
      throw ValidationError("xbar0 entry " + std::to_string(k + 1) +
                            " is outside the initial funnel");
  }
  sc.sim.consensus_tol = sc.perf.rho_inf;
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["n"] = sc.topology.n;
  json edges = json::array();
  for (const auto& [a, b] : sc.topology.edges) edges.push_back({a, b});
  j["edges"] = edges;
  j["leaders"] = sc.topology.leaders();
  j["perf"] = {{"rho0", sc.perf.rho0},
               {"rho_inf", sc.perf.rho_inf},
               {"l", sc.perf.l},
               {"M", sc.perf.M}};
  j["gains"] = sc.gains;
  j["xbar0"] = std::vector<double>(sc.xbar0.data(),
                                   sc.xbar0.data() + sc.xbar0.size());
  j["mode"] = mode_to_string(sc.sim.mode);
  j["dt"] = sc.sim.dt;
  j["t_end"] = sc.sim.t_end;
  if (sc.inferred_topology) j["inferred_topology"] = true;
  return j.dump(2);
}

FeasibilityReport certify_scenario(const Scenario& sc) {
  const Topology& t = sc.topology;
  DerivedMatrices dm = derive_matrices(t);
  if (is_center_leader_star(t)) {
    FeasibilityReport rep;
    rep.kind = GammaBarKind::value;
    rep.gamma_bar = star_bound(t);
    rep.l_max = sc.perf.l;
    rep.method = "star_special";
    rep.approved = sc.perf.l <= rep.gamma_bar + 1e-12;
    return rep;
  }
  if (is_chain(t) && t.n_followers >= 2) {
    ChainBound cb = chain_bound(t.n_followers);
    FeasibilityReport rep;
    rep.method = "chain_special";
    rep.l_max = sc.perf.l;
    if (cb.kind == ChainBound::Kind::bound) {
      rep.kind = GammaBarKind::value;
      rep.gamma_bar = cb.l_bound;
      rep.approved = sc.perf.l <= cb.l_bound + 1e-12;
    } else {
      rep.kind = GammaBarKind::infeasible;
      rep.approved = false;
    }
    return rep;
  }
  return check_theorem1(dm, sc.perf.l);
}

std::pair<SimTrace, RunSummary> run(const Scenario& sc) {
  FeasibilityReport rep = certify_scenario(sc);

  SimConfig cfg = sc.sim;
  if (rep.method == "theorem1" && rep.kind == GammaBarKind::value)
    cfg.lyapunov_gamma = rep.gamma_bar;
  else if (rep.method == "theorem1")
    cfg.lyapunov_gamma = std::max(1.0, sc.perf.l);
  else
    cfg.lyapunov_gamma = 1.0;  // chain/star special-case approvals

  std::vector<EdgeChannel> chs = make_channels(sc);
  Eigen::VectorXd x0 = positions_from_relative(sc.topology, sc.xbar0);
  SimTrace tr = integrate(sc.topology, chs, x0, cfg);

  RunSummary s;
  s.scenario = sc.name;
  s.approved = rep.approved;
  s.method = rep.method;
  s.gamma_bar_kind = rep.kind;
  s.gamma_bar = rep.gamma_bar;
  s.violation_count = static_cast<int>(tr.violations.size());
  if (!tr.violations.empty()) s.first_violation = tr.violations.front().time;
  s.converged_at = tr.converged_at;
  s.final_max_xbar = tr.xbar.back().cwiseAbs().maxCoeff();
  double c0 = centroid(tr.x.front());
  double drift = 0.0;
  for (const auto& xs : tr.x)
    drift = std::max(drift, std::abs(centroid(xs) - c0));
  s.centroid_drift = drift;
  double worst = 0.0;
  for (size_t i = 1; i < tr.V.size(); ++i)
    worst = std::max(worst, tr.V[i] - tr.V[i - 1]);
  s.v_monotone = worst <= 1e-8;
  return {std::move(tr), std::move(s)};
}

void emit_csv(const SimTrace& trace, const Scenario& sc,
              const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path);
  const int n = sc.topology.n;
  const int m = sc.topology.m();
  std::fputs("t", f);
  for (int i = 1; i <= n; ++i) std::fprintf(f, ",x_%d", i);
  for (int k = 1; k <= m; ++k) std::fprintf(f, ",xbar_%d", k);
  std::fputs(",rho,neg_rho,V,viol_flag\n", f);

  size_t vi = 0;
  for (size_t s = 0; s < trace.times.size(); ++s) {
    double t = trace.times[s];
    int flag = 0;
    while (vi < trace.violations.size() &&
           trace.violations[vi].time <= t + 1e-15) {
      if (std::abs(trace.violations[vi].time - t) <= 1e-15) flag = 1;
      ++vi;
    }
    std::fprintf(f, "%.15g", t);
    for (int i = 0; i < n; ++i) std::fprintf(f, ",%.15g", trace.x[s][i]);
    for (int k = 0; k < m; ++k) std::fprintf(f, ",%.15g", trace.xbar[s][k]);
    std::fprintf(f, ",%.15g,%.15g,%.15g,%d\n", trace.rho[s], -trace.rho[s],
                 trace.V[s], flag);
  }
  std::fclose(f);
}

std::string summary_to_json(const RunSummary& s) {
  json j;
  j["scenario"] = s.scenario;
  j["approved"] = s.approved;
  j["method"] = s.method;
  switch (s.gamma_bar_kind) {
    case GammaBarKind::value: j["gamma_bar"] = s.gamma_bar; break;
    case GammaBarKind::unbounded_above: j["gamma_bar"] = "unbounded_above"; break;
    case GammaBarKind::infeasible: j["gamma_bar"] = "infeasible"; break;
  }
  j["violations"] = s.violation_count;
  if (s.first_violation)
    j["first_violation"] = *s.first_violation;
  else
    j["first_violation"] = nullptr;
  if (s.converged_at)
    j["converged_at"] = *s.converged_at;
  else
    j["converged_at"] = nullptr;
  j["final_max_xbar"] = s.final_max_xbar;
  j["centroid_drift"] = s.centroid_drift;
  j["v_monotone"] = s.v_monotone;
  return j.dump(2);
}

void emit_summary(const RunSummary& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << summary_to_json(s) << "\n";
}

namespace {

Scenario base_scenario(const std::string& name, Topology topo, double l,
                       std::vector<double> gains, std::vector<double> xbar0,
                       double dt) {
  Scenario sc;
  sc.name = name;
  sc.topology = std::move(topo);
  sc.perf = {5.0, 0.1, l, 1.0};
  sc.gains = std::move(gains);
  sc.xbar0 =
      Eigen::Map<Eigen::VectorXd>(xbar0.data(), xbar0.size()).eval();
  sc.sim.dt = dt;
  sc.sim.t_end = 10.0;
  sc.sim.mode = ControlMode::leader_ppc;
  sc.sim.consensus_tol = sc.perf.rho_inf;
  return sc;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"tree6",        "chain5_f2",     "chain5_f2_g10", "chain5_f2_g200",
          "chain5_f3",    "chain5_f3_g10", "chain5_f3_g100", "star11"};
}

Scenario preset(const std::string& name) {
  // The 6-node tree: three followers on one leader, then a leader chain.
  auto tree6 = [] {
    return build_topology(6, {{1, 4}, {2, 4}, {3, 4}, {4, 5}, {5, 6}},
                          {4, 5, 6});
  };
  if (name == "tree6") {
    Scenario sc = base_scenario("tree6", tree6(), 1.0, {1, 1, 1, 1, 1},
                                {4.6, 4.9, 4.5, 4.7, 4.5}, 5e-4);
    sc.inferred_topology = true;
    return sc;
  }
  if (name == "star11") {
    return base_scenario("star11", make_star(11, {11}), 1.0,
                         std::vector<double>(10, 1.0),
                         {4, 3, -2, -3, 4.9, 1, 4.7, -4, 1, 4.8}, 2e-4);
  }
  const std::vector<double> chain_xbar0{4.8, 3, -2, 1};
  if (name == "chain5_f2")
    return base_scenario(name, make_chain(5, 2), 2.0, {1, 1, 1, 1},
                         chain_xbar0, 2e-4);
  if (name == "chain5_f2_g10")
    return base_scenario(name, make_chain(5, 2), 2.0, {1, 10, 1, 1},
                         chain_xbar0, 2e-4);
  if (name == "chain5_f2_g200")
    return base_scenario(name, make_chain(5, 2), 2.0, {1, 200, 1, 1},
                         chain_xbar0, 1e-5);
  if (name == "chain5_f3")
    return base_scenario(name, make_chain(5, 3), 1.0, {1, 1, 1, 1},
                         chain_xbar0, 2e-4);
  if (name == "chain5_f3_g10")
    return base_scenario(name, make_chain(5, 3), 1.0, {1, 1, 10, 1},
                         chain_xbar0, 2e-4);
  if (name == "chain5_f3_g100")
    return base_scenario(name, make_chain(5, 3), 1.0, {1, 1, 100, 1},
                         chain_xbar0, 2e-5);
  throw UnknownPreset("unknown preset: " + name);
}

}  // namespace ppc
