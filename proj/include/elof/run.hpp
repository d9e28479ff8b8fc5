#pragma once

// Run orchestration: builds the initial state from a RunConfig, steps to
// T_end, emits a diagnostics row every `cadence` steps and snapshots, and
// stops at the blow-up ceiling or at the first non-finite value.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "elof/config.hpp"
#include "elof/diagnostics.hpp"
#include "elof/initial_data.hpp"
#include "elof/io.hpp"
#include "elof/solver.hpp"

namespace elof {

enum class RunMode {
  flow,           // full coupled system
  gradient_flow,  // v = 0, director relaxes by its elastic gradient flow
};

struct RunOutcome {
  FlowState state;                       // last finite state
  std::vector<DiagnosticsRecord> records;
  bool blowup = false;
  double blowup_time = 0.0;
  std::string reason;
};

/// Initial state described by the config; the velocity is zero for gradient flow.
inline FlowState initial_state(const RunConfig& c, RunMode mode = RunMode::flow) {
  const Grid g = c.make_grid();
  VelocityField v = mode == RunMode::flow ? make_velocity(c.velocity_spec(), g) : VelocityField(g);
  return make_state(std::move(v), make_director(c.initial, g), c.frank, 0.0, c.scheme);
}

/// Collects per-step integrals and assembles diagnostics rows.
class RunMonitor {
 public:
  RunMonitor(const RunConfig& c, const FlowState& s0)
      : cfg_(c),
        tracker_(s0.grid(), local_ball(c), c.diag.radii.front(), c.frank, c.scheme.diff) {
    observe(s0, StepReport{});
  }

  /// Local energy inequality ball: centered in the box, radius = first diagnostic radius.
  static Ball local_ball(const RunConfig& c) {
    const double m = 0.5 * c.grid.length;
    return Ball{{m, m, m}, c.diag.radii.front()};
  }

  void observe(const FlowState& s, const StepReport& rep) {
    balance_.add({s.t, total_energy(s, cfg_.frank, cfg_.scheme).total, dissipation_rate(s, cfg_.frank, cfg_.scheme)});
    tracker_.add(s);
    drift_ = std::max(drift_, rep.max_unit_drift);
    div_ = std::max(div_, rep.div_v_inf);
  }

  /// Row for the latest observed state; resets the per-row maxima.
  DiagnosticsRecord record(const FlowState& s) {
    const auto e = total_energy(s, cfg_.frank, cfg_.scheme);
    const double r = cfg_.diag.radii.front();
    const int stride = cfg_.diag.center_stride;
    DiagnosticsRecord out;
    out.t = s.t;
    out.E_total = e.total;
    out.E_elastic = e.elastic;
    out.E_kinetic = e.kinetic;
    out.dissipation_rate = dissipation_rate(s, cfg_.frank, cfg_.scheme);
    out.energy_balance_residual = balance_.residual();
    out.l3_uloc_v = l3_uloc(s.v, r, stride);
    out.l3_uloc_gradu = l3_uloc(gradient(s.u, cfg_.scheme.diff), r, stride);
    out.max_unit_drift = drift_;
    out.div_v_inf = std::max(div_, max_abs(divergence(s.v, cfg_.scheme.diff)));
    out.interpolation_ratio_max = interpolation_ratio_max(s, r, stride, cfg_.scheme.diff);
    out.local_energy_margin = tracker_.report(1.0).margin;
    drift_ = 0.0;
    div_ = 0.0;
    return out;
  }

  const EnergyBalance& balance() const noexcept { return balance_; }
  const LocalEnergyTracker& tracker() const noexcept { return tracker_; }

 private:
  const RunConfig& cfg_;
  EnergyBalance balance_;
  LocalEnergyTracker tracker_;
  double drift_ = 0.0;
  double div_ = 0.0;
};

/// Runs to T_end. When write_output is set, output.dir receives
/// diagnostics.csv (rows flushed as produced), snapshot_<step>.elof every
/// snapshot_every steps and final.elof. A blow-up ends the run early with
/// its last finite row and snapshot written.
inline RunOutcome run(const RunConfig& c, RunMode mode = RunMode::flow, bool write_output = true) {
  validate(c);
  namespace fs = std::filesystem;
  const fs::path dir(c.output.dir);
  const std::string csv = (dir / "diagnostics.csv").string();
  if (write_output) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    fs::remove(csv, ec);
  }

  RunOutcome out{initial_state(c, mode), {}, false, 0.0, {}};
  RunMonitor monitor(c, out.state);
  auto emit = [&](const FlowState& s) {
    out.records.push_back(monitor.record(s));
    if (write_output) append_diagnostics(out.records.back(), csv);
  };
  auto snapshot = [&](const FlowState& s, const std::string& name) {
    if (write_output) write_snapshot(s, (dir / name).string());
  };
  auto ceiling = [&](const FlowState& s) {
    const auto verdict = blowup_monitor(s, c.diag.eps0, c.diag.radii, c.diag.center_stride, c.scheme.diff);
    if (!verdict.any) return false;
    for (std::size_t j = 0; j < verdict.radii.size(); ++j)
      if (verdict.flagged[j]) {
        out.reason = "ball norm " + detail::format_double(verdict.norms[j]) + " at R=" +
                     detail::format_double(verdict.radii[j]) + " exceeds ceiling " + detail::format_double(c.diag.eps0);
        break;
      }
    return true;
  };

  emit(out.state);
  bool flagged = ceiling(out.state);
  const double t_tol = 1e-12 * c.t_end;
  while (!flagged && out.state.t < c.t_end - t_tol) {
    FlowState& s = out.state;
    SchemeConfig sc = c.scheme;
    StepReport rep;
    try {
      double dt = time_step_size(s, c.frank, sc);
      if (s.t + dt > c.t_end) {
        dt = c.t_end - s.t;
        sc.dt = dt;
      }
      if (mode == RunMode::flow) {
        s = step(s, sc, c.frank, &rep);
      } else {
        DirectorField u = gradient_flow_step(s.u, dt, c.frank, sc, &rep);
        FlowState next = make_state(VelocityField(s.grid()), std::move(u), c.frank, s.t + dt, sc);
        next.steps = s.steps + 1;
        s = std::move(next);
      }
    } catch (const BlowupDetected& e) {
      out.blowup = true;
      out.blowup_time = e.time();
      out.reason = e.what();
      break;
    }
    monitor.observe(s, rep);
    flagged = ceiling(s);
    const bool last = s.t >= c.t_end - t_tol;
    if (flagged || last || s.steps % c.diag.cadence == 0) emit(s);
    if (c.output.snapshot_every > 0 && s.steps % c.output.snapshot_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%06lld.elof", static_cast<long long>(s.steps));
      snapshot(s, name);
    }
  }
  if (flagged) {
    out.blowup = true;
    out.blowup_time = out.state.t;
  } else if (out.blowup && out.records.back().t != out.state.t) {
    emit(out.state);
  }
  snapshot(out.state, "final.elof");
  return out;
}

/// Process exit status for a finished run: 0 completed, 2 blow-up.
inline int exit_code(const RunOutcome& r) noexcept { return r.blowup ? 2 : 0; }

}  // namespace elof
