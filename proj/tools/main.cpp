// ppcsim: simulate and certify leader-follower consensus under funnel
// performance bounds.

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "ppc/scenario.hpp"

namespace fs = std::filesystem;

namespace {

ppc::Scenario resolve(const std::string& spec_or_file, bool is_preset) {
  if (is_preset) return ppc::preset(spec_or_file);
  return ppc::load_scenario_file(spec_or_file);
}

void apply_overrides(ppc::Scenario& sc, double dt, double t_end,
                     const std::string& mode) {
  if (dt > 0) sc.sim.dt = dt;
  if (t_end > 0) sc.sim.t_end = t_end;
  if (mode == "no_control")
    sc.sim.mode = ppc::ControlMode::no_control;
  else if (mode == "leader_ppc")
    sc.sim.mode = ppc::ControlMode::leader_ppc;
  else if (mode == "all_agents_ppc")
    sc.sim.mode = ppc::ControlMode::all_agents_ppc;
  else if (!mode.empty())
    throw ppc::ValidationError("unknown mode: " + mode);
}

// Runs one scenario, writes outputs, returns 0 clean+approved else 2.
int run_one(const ppc::Scenario& sc, const std::string& out_dir,
            const std::string& format, std::mutex& io) {
  auto [trace, summary] = ppc::run(sc);
  fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(dir);
  if (format == "csv" || format == "both")
    ppc::emit_csv(trace, sc, (dir / (sc.name + "_trace.csv")).string());
  if (format == "json" || format == "both")
    ppc::emit_summary(summary, (dir / (sc.name + "_summary.json")).string());
  {
    std::lock_guard<std::mutex> lk(io);
    std::cout << ppc::summary_to_json(summary) << "\n";
  }
  return (summary.approved && summary.violation_count == 0) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"leader-follower consensus simulator with prescribed "
               "performance funnels"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "certify then simulate scenarios");
  std::vector<std::string> files;
  std::vector<std::string> presets;
  double dt = 0, t_end = 0;
  std::string mode, out_dir, format = "both";
  int jobs = 1;
  sim->add_option("scenario", files, "scenario JSON files");
  sim->add_option("--preset", presets, "built-in scenario names");
  sim->add_option("--dt", dt, "integration step override");
  sim->add_option("--t-end", t_end, "horizon override");
  sim->add_option("--mode", mode,
                  "no_control | leader_ppc | all_agents_ppc");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--format", format, "csv | json | both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  sim->add_option("--jobs", jobs, "parallel scenario runs")
      ->check(CLI::PositiveNumber);

  // certify
  auto* cert = app.add_subcommand("certify", "feasibility check only");
  std::string cert_file, cert_preset;
  cert->add_option("scenario", cert_file, "scenario JSON file");
  cert->add_option("--preset", cert_preset, "built-in scenario name");

  auto* pres = app.add_subcommand("presets", "list built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pres->parsed()) {
      for (const auto& n : ppc::preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (cert->parsed()) {
      if (cert_file.empty() == cert_preset.empty()) {
        std::cerr << "certify needs exactly one of <scenario> or --preset\n";
        return 1;
      }
      ppc::Scenario sc = resolve(cert_preset.empty() ? cert_file : cert_preset,
                                 !cert_preset.empty());
      ppc::FeasibilityReport rep = ppc::certify_scenario(sc);
      std::cout << "scenario: " << sc.name << "\n"
                << "method: " << rep.method << "\n";
      switch (rep.kind) {
        case ppc::GammaBarKind::value:
          std::cout << "gamma_bar: " << rep.gamma_bar << "\n";
          break;
        case ppc::GammaBarKind::unbounded_above:
          std::cout << "gamma_bar: unbounded_above\n";
          break;
        case ppc::GammaBarKind::infeasible:
          std::cout << "gamma_bar: infeasible\n";
          break;
      }
      std::cout << "l_max: " << rep.l_max << "\n"
                << "approved: " << (rep.approved ? "true" : "false") << "\n";
      return rep.approved ? 0 : 2;
    }

    // simulate
    std::vector<ppc::Scenario> scs;
    for (const auto& f : files) {
      ppc::Scenario sc = resolve(f, false);
      apply_overrides(sc, dt, t_end, mode);
      scs.push_back(std::move(sc));
    }
    for (const auto& p : presets) {
      ppc::Scenario sc = resolve(p, true);
      apply_overrides(sc, dt, t_end, mode);
      scs.push_back(std::move(sc));
    }
    if (scs.empty()) {
      std::cerr << "nothing to simulate; pass scenario files or --preset\n";
      return 1;
    }
    std::mutex io;
    std::atomic<int> worst{0};
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    auto worker = [&] {
      for (size_t i = next.fetch_add(1); i < scs.size();
           i = next.fetch_add(1)) {
        try {
          std::string dir = out_dir;
          if (!dir.empty() && scs.size() > 1)
            dir = (fs::path(out_dir) / scs[i].name).string();
          int rc = run_one(scs[i], dir, format, io);
          int cur = worst.load();
          while (rc > cur && !worst.compare_exchange_weak(cur, rc)) {
          }
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lk(io);
          failed = true;
          if (first_error.empty()) first_error = e.what();
        }
      }
    };
    int nthreads = std::min<size_t>(jobs, scs.size());
    std::vector<std::thread> pool;
    for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failed) {
      std::cerr << "error: " << first_error << "\n";
      return 1;
    }
    return worst.load();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
