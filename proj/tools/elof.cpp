// elof: run, relax, verify and inspect nematic flow simulations.
//
//   elof run <config>              coupled flow; writes diagnostics.csv and snapshots
//   elof minimize <config>         director gradient flow with v = 0
//   elof check [ids...]            acceptance criteria table
//   elof diag <name> <snap> [snap] quantities of stored snapshots
//
// Exit status: 0 success, 1 configuration or I/O error (or a failed check),
// 2 blow-up ceiling or non-finite state.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "elof/config.hpp"
#include "elof/diagnostics.hpp"
#include "elof/io.hpp"
#include "elof/run.hpp"
#include "elof/verify/criteria.hpp"

namespace {

using namespace elof;

constexpr int kExitError = 1;

std::string read_text(const std::string& path) {
  const auto bytes = elof::detail::read_file(path);
  return {bytes.begin(), bytes.end()};
}

int do_run(const std::string& path, RunMode mode, bool quiet) {
  const RunConfig c = parse_config(read_text(path));
  const RunOutcome out = run(c, mode);
  if (!quiet) {
    const auto& last = out.records.back();
    std::printf("t = %.6g  steps = %lld  E_total = %.10g  rows = %zu  output = %s\n", out.state.t,
                static_cast<long long>(out.state.steps), last.E_total, out.records.size(), c.output.dir.c_str());
  }
  if (out.blowup) std::fprintf(stderr, "blow-up at t = %.6g: %s\n", out.blowup_time, out.reason.c_str());
  return exit_code(out);
}

int do_check(const std::vector<int>& ids) {
  const int count = static_cast<int>(verify::all_criteria().size());
  std::vector<int> todo = ids;
  if (todo.empty())
    for (int i = 1; i <= count; ++i) todo.push_back(i);
  int failed = 0;
  for (int id : todo) {
    if (id < 1 || id > count) {
      std::fprintf(stderr, "no criterion %d (1..%d)\n", id, count);
      return kExitError;
    }
    const auto r = verify::run_criterion(id);
    std::printf("%s\n", verify::format_result(r).c_str());
    std::fflush(stdout);
    failed += !r.pass;
  }
  std::printf("%zu criteria, %d failed\n", todo.size(), failed);
  return failed ? kExitError : 0;
}

FrankConstants constants_from(const std::string& config_path) {
  return config_path.empty() ? FrankConstants::equal() : parse_config(read_text(config_path)).frank;
}

int do_diag(const std::string& name, const std::vector<std::string>& snaps, const std::string& config_path,
            double radius, int stride) {
  auto need = [&](std::size_t n) {
    if (snaps.size() != n)
      throw ValidationError("diag " + name, "expects " + std::to_string(n) + " snapshot path(s)");
  };
  if (name == "uniqueness_gap") {
    need(2);
    const auto g = uniqueness_gap(read_snapshot(snaps[0]), read_snapshot(snaps[1]));
    std::printf("phi = %.17g\nxi_sq = %.17g\ngrad_xi_sq = %.17g\nw_sq = %.17g\n", g.phi, g.xi_sq, g.grad_xi_sq,
                g.w_sq);
  } else if (name == "energy") {
    need(1);
    const FlowState s = read_snapshot(snaps[0]);
    const FrankConstants k = constants_from(config_path);
    const auto e = total_energy(s, k);
    std::printf("t = %.17g\nE_total = %.17g\nE_elastic = %.17g\nE_kinetic = %.17g\ndissipation_rate = %.17g\n", s.t,
                e.total, e.elastic, e.kinetic, dissipation_rate(s, k));
  } else if (name == "checksum") {
    need(1);
    std::printf("%016llx\n", static_cast<unsigned long long>(snapshot_checksum(read_snapshot(snaps[0]))));
  } else if (name == "l3_uloc") {
    need(1);
    const FlowState s = read_snapshot(snaps[0]);
    std::printf("l3_uloc_v = %.17g\nl3_uloc_gradu = %.17g\nl3_uloc_pair = %.17g\n", l3_uloc(s.v, radius, stride),
                l3_uloc(gradient(s.u), radius, stride), l3_uloc_pair(s.v, gradient(s.u), radius, stride));
  } else if (name == "constraints") {
    need(1);
    const FlowState s = read_snapshot(snaps[0]);
    std::printf("div_v_inf = %.17g\nmax_unit_drift = %.17g\n", max_abs(divergence(s.v)), max_unit_drift(s.u));
  } else {
    throw ValidationError("diag", "unknown diagnostic '" + name +
                                      "' (uniqueness_gap, energy, checksum, l3_uloc, constraints)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nematic liquid crystal flow solver"};
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "Run the coupled flow described by a config file");
  run_cmd->add_option("config", config_path, "INI configuration")->required();
  run_cmd->add_flag("-q,--quiet", quiet, "Suppress the summary line");

  auto* min_cmd = app.add_subcommand("minimize", "Relax the director by its elastic gradient flow (v = 0)");
  min_cmd->add_option("config", config_path, "INI configuration")->required();
  min_cmd->add_flag("-q,--quiet", quiet, "Suppress the summary line");

  std::vector<int> ids;
  auto* check_cmd = app.add_subcommand("check", "Run the acceptance criteria and print a PASS/FAIL table");
  check_cmd->add_option("ids", ids, "Criterion numbers (default: all)");

  std::string diag_name;
  std::vector<std::string> snaps;
  std::string diag_config;
  double radius = 1.0;
  int stride = 1;
  auto* diag_cmd = app.add_subcommand("diag", "Evaluate a diagnostic on stored snapshots");
  diag_cmd->add_option("name", diag_name, "uniqueness_gap | energy | checksum | l3_uloc | constraints")->required();
  diag_cmd->add_option("snapshots", snaps, "Snapshot path(s)")->required();
  diag_cmd->add_option("-c,--config", diag_config, "Config supplying the Frank constants (default: equal)");
  diag_cmd->add_option("-r,--radius", radius, "Ball radius for l3_uloc");
  diag_cmd->add_option("-s,--stride", stride, "Center stride for l3_uloc");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }

  try {
    if (*run_cmd) return do_run(config_path, RunMode::flow, quiet);
    if (*min_cmd) return do_run(config_path, RunMode::gradient_flow, quiet);
    if (*check_cmd) return do_check(ids);
    if (*diag_cmd) return do_diag(diag_name, snaps, diag_config, radius, stride);
  } catch (const BlowupDetected& e) {
    std::fprintf(stderr, "blow-up: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return 0;
}
