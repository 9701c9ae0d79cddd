#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kchem/agents.hpp"
#include "kchem/config.hpp"
#include "kchem/io.hpp"
#include "kchem/kinetic.hpp"
#include "kchem/monitor.hpp"

namespace kchem {

struct CompareRow {
  double t = 0.0;
  double l1 = 0.0;  //!< int |n_kinetic - n_agent| dx / mass
};

struct RunSummary {
  std::string mode;
  std::string hash;
  std::size_t steps = 0;
  double dt = 0.0;
  double t_final = 0.0;
  double mass_initial = 0.0;
  double mass_final = 0.0;
  double mass_drift = 0.0;  //!< relative
  double f_l1 = 0.0;
  double f_l2 = 0.0;
  double n_l1 = 0.0;
  double n_l2 = 0.0;
  double y1_mean = 0.0;
  ConcentrationMetrics metrics;
  std::size_t ledger_rows = 0;
  std::size_t violations = 0;
  std::size_t snapshots = 0;
  double clipped_mass = 0.0;
  double min_before_clip = 0.0;
  double escaped_mass = 0.0;
  //! Largest relative gap between the flux-based dS/dt and the difference quotient.
  double dt_signal_mismatch = 0.0;
  std::vector<CompareRow> compare;
  std::size_t agents_initial = 0;
  std::size_t agents_final = 0;
  double agent_y1_mean = 0.0;
  double agent_y1_max_abs = 0.0;
  AgentStepStats agent_stats;
  double wall_seconds = 0.0;
  std::vector<std::string> regimes;
  std::vector<std::string> notes;
};

PhaseSpaceGrid make_grid(ScenarioConfig const& cfg);

//! Cell averages of the separable initial density, scaled to the configured mass.
PhaseSpaceField initial_field(ScenarioConfig const& cfg);

//! S0: elliptic solution for n0, or the configured uniform values with
//! dS/dt from the parabolic equation.
SignalField initial_signal(ScenarioConfig const& cfg, Moments const& m0, SpectralOps const& ops);

EnvelopeConstants envelope_constants(ScenarioConfig const& cfg, PhaseSpaceGrid const& grid,
                                     SignalField const& s0);

//! Samples rebuilt from a moments.csv series.
std::vector<MonitorSample> samples_from_series(CsvTable const& table, std::size_t components);

//! Monitor-only evaluation of a recorded series.
BoundLedger ledger_from_series(ScenarioConfig const& cfg, CsvTable const& table);

//! Executes the configured mode and writes every output into out_dir.
RunSummary run_scenario(ScenarioConfig const& cfg, std::filesystem::path const& out_dir);

//! Pretty-printed JSON form of a summary (wall time excluded).
std::string summary_json(RunSummary const& s);

}  // namespace kchem
