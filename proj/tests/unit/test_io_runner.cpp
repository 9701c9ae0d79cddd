#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "kchem/error.hpp"
#include "kchem/io.hpp"
#include "kchem/runner.hpp"

using namespace kchem;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(std::string const& name)
{
  auto const p = fs::temp_directory_path() / ("kchem_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ScenarioConfig small_standard(std::vector<std::string> extra = {})
{
  std::vector<std::string> o{"grid.nx=32", "grid.ny1=16", "grid.ny2=16", "run.T=0.2", "run.dt=0.05",
                             "run.snapshot_every=2", "run.monitor_every=1", "run.compare_times=[0.1]",
                             "run.agents=200"};
  o.insert(o.end(), extra.begin(), extra.end());
  return load_config(std::string(KCHEM_SCENARIO_DIR) + "/standard.cfg", o);
}

}  // namespace

TEST_CASE("csv round trip keeps every bit")
{
  auto const dir = scratch_dir("csv");
  std::vector<std::vector<double>> rows{{0.1, 1.0 / 3.0, -2.5e-300}, {std::nextafter(1.0, 2.0), 1e300, 0.0}};
  write_csv(dir / "t.csv", "abc123", {"a", "b", "c"}, rows, {"note=1"});
  auto const t = read_csv(dir / "t.csv");
  CHECK(t.hash == "abc123");
  CHECK(t.columns == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows == rows);
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(t.column("zzz"), ArgumentError);
  CHECK(std::stod(format_double(0.1)) == 0.1);
}

TEST_CASE("field binary round trip")
{
  auto const dir = scratch_dir("bin");
  auto const cfg = small_standard();
  auto f = initial_field(cfg);
  f.t = 1.25;
  write_field_binary(dir / "f.bin", cfg.hash, f);
  std::string hash;
  auto const g = read_field_binary(dir / "f.bin", &hash);
  CHECK(hash == cfg.hash);
  CHECK(g.t == 1.25);
  CHECK(g.grid.x.cells == f.grid.x.cells);
  CHECK(g.grid.y1.lower == f.grid.y1.lower);
  CHECK(g.grid.v.speeds == f.grid.v.speeds);
  CHECK(g.values == f.values);
}

TEST_CASE("initial field carries the configured mass")
{
  auto const cfg = small_standard({"initial.mass=2.5"});
  auto const f = initial_field(cfg);
  CHECK(density_and_flux(f).mass == doctest::Approx(2.5).epsilon(1e-12));
  for (double v : f.values)
    CHECK(v >= 0.0);
}

TEST_CASE("kinetic run writes its outputs")
{
  auto const dir = scratch_dir("run");
  auto const sum = run_scenario(small_standard(), dir);
  CHECK(sum.steps == 4);
  CHECK(sum.snapshots == 3);
  CHECK(std::abs(sum.mass_drift) < 1e-12);
  CHECK(sum.violations == 0);
  for (char const* name : {"moments.csv", "ledger.csv", "summary.json", "timing.json"})
    CHECK(fs::exists(dir / name));
  auto const moments = read_csv(dir / "moments.csv");
  CHECK(moments.rows.size() == 5);
  CHECK(moments.rows.front()[moments.column("mass")] == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("T = 0 gives a single row")
  {
    auto const zero = scratch_dir("zero");
    auto const s = run_scenario(small_standard({"run.T=0"}), zero);
    CHECK(s.steps == 0);
    CHECK(read_csv(zero / "moments.csv").rows.size() == 1);
  }
  SUBCASE("compare mode reports the L1 distance")
  {
    auto const cmp = scratch_dir("cmp");
    auto const s = run_scenario(small_standard({"run.mode=compare"}), cmp);
    REQUIRE(s.compare.size() == 1);
    CHECK(s.compare[0].t == doctest::Approx(0.1));
    CHECK(s.compare[0].l1 >= 0.0);
    CHECK(s.compare[0].l1 < 2.0);
    CHECK(s.agents_final == 200);
  }
  SUBCASE("compare times off the step grid are rejected")
  {
    CHECK_THROWS_AS(run_scenario(small_standard({"run.mode=compare", "run.compare_times=[0.07]"}), scratch_dir("bad")),
                    ConfigError);
  }
}
