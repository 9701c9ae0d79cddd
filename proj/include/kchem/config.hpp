#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kchem/characteristics.hpp"
#include "kchem/growth.hpp"
#include "kchem/model.hpp"
#include "kchem/monitor.hpp"

namespace kchem {

enum class RunMode { kinetic, agent, compare, monitor };
enum class Shape { gaussian, box, uniform };

//! Separable initial data f0(x, v, y) = mass * X(x) * P(v) * Y1(y1) * Y2(y2).
struct InitialData {
  double mass = 1.0;
  Shape x_shape = Shape::gaussian;
  double x_center = 0.0;
  double x_width = 1.0;  //!< gaussian sigma (truncated at 4 sigma) or box width
  std::vector<double> v_weights;  //!< relative weights; empty means uniform
  Shape y_shape = Shape::gaussian;
  std::array<double, 2> y_center{0.0, 0.0};
  std::array<double, 2> y_width{0.1, 0.1};
  bool s0_elliptic = true;
  std::vector<double> s0_value;  //!< uniform initial signal when not elliptic

  //! Half-width of the x support (gaussians are truncated at 4 sigma).
  double x_half_support() const;
  //! Coordinate box containing the y support.
  YBox y_support() const;
};

struct RunSettings {
  double horizon = 1.0;
  double dt = 0.01;
  std::size_t snapshot_every = 100;
  std::size_t monitor_every = 1;
  std::uint64_t seed = 1;
  int workers = 0;  //!< 0: environment default
  std::size_t agents = 10000;
  std::vector<double> compare_times;
  bool agent_feedback = true;
  std::size_t trajectory_dump = 0;
  double envelope_scale = 1.0;
  std::string series;
  double y_inflation = 0.2;
};

struct ScenarioConfig {
  ModelConfig model;
  GrowthSpec growth;
  RunMode mode = RunMode::kinetic;
  SignalMode signal_mode = SignalMode::elliptic;
  InitialData initial;
  RunSettings run;

  std::string hash;         //!< FNV-1a of the source text and overrides
  std::string source_path;
  //! Derived at load time.
  double signal_bound = 0.0;  //!< bound on sup |S| over the run
  InternalStateBox state_box;
  YBox grid_box;              //!< inflated, y1-aligned grid box
  SampleBox sample_box;
  ValidationReport validation;
  std::vector<std::string> notes;
};

//! Parse and validate; throws ConfigError listing every problem found.
//! Overrides have the form "section.key=value".
ScenarioConfig parse_config(std::string const& text, std::vector<std::string> const& overrides = {},
                            std::string const& origin = "<string>");

ScenarioConfig load_config(std::string const& path, std::vector<std::string> const& overrides = {});

//! Hex FNV-1a 64-bit hash.
std::string fnv1a_hex(std::string const& data);

char const* to_string(RunMode mode);
char const* to_string(SignalMode mode);

}  // namespace kchem
