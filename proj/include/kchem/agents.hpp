#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kchem/characteristics.hpp"
#include "kchem/growth.hpp"
#include "kchem/kinetic.hpp"
#include "kchem/model.hpp"
#include "kchem/rng.hpp"

namespace kchem {

struct Agent {
  double x = 0.0;
  std::uint32_t velocity = 0;
  InternalState y{0.0, 0.0};
  std::uint64_t draws = 0;  //!< position in the agent's counter stream
};

//! Agents with one counter-based stream each, keyed by (seed, agent index).
struct AgentEnsemble {
  std::vector<Agent> agents;
  double t = 0.0;
  std::uint64_t seed = 0;
  double mass_per_agent = 1.0;
};

struct TrajectoryRecord {
  std::uint64_t id = 0;
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
  InternalState y{0.0, 0.0};
  bool event = false;
};

struct AgentStepOptions {
  double rate_bound = 0.0;           //!< thinning bound lambda_max
  double max_substep = 0.05;         //!< quadrature sub-interval for y
  GrowthSpec const* growth = nullptr;  //!< runtime check of the rate growth bound
  bool check_box = false;
  YBox box;                          //!< admissible y range
  std::size_t log_agents = 0;        //!< trajectory records for ids below this
  std::vector<TrajectoryRecord>* log = nullptr;
};

struct AgentStepStats {
  std::uint64_t candidates = 0;
  std::uint64_t accepted = 0;
  std::uint64_t growth_violations = 0;
  std::uint64_t box_exits = 0;
  double max_ratio = 0.0;  //!< largest lambda / lambda_max seen
};

//! Advance every agent to ens.t + dt; throws ThinningBoundError if lambda
//! exceeded the thinning bound anywhere.
AgentStepStats step_agents(AgentEnsemble& ens, SignalHistory const& history, double dt,
                           ModelConfig const& cfg, AgentStepOptions const& opts);

//! Histogram normalized so that sum n h equals the ensemble mass.
std::vector<double> empirical_density(AgentEnsemble const& ens, PeriodicGrid const& grid);

//! Draw agents from the cell masses of a discretized phase-space density.
AgentEnsemble sample_agents(PhaseSpaceField const& f, std::size_t count, std::uint64_t seed);

//! Event times of an inhomogeneous Poisson process with rate(t) <= bound
//! on (t0, t1], sampled by thinning.
std::vector<double> thinning_events(std::function<double(double)> const& rate, double bound,
                                    double t0, double t1, CounterStream& rng);

}  // namespace kchem
