#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "warpflow/assumptions.hpp"
#include "warpflow/errors.hpp"
#include "warpflow/flow.hpp"
#include "warpflow/persistence.hpp"

using namespace warpflow;

TEST_CASE("homogeneous solution is reproduced to rounding") {
  const Example ex = build_cylinder(1.0, 1.0, 2, 0.0, {129, 5.0, 0.0});
  IntegratorConfig cfg;
  cfg.stop_time = 0.5;
  const RunResult r = run(ex.spec, ex.state, cfg);
  const FlowState& last = r.trajectory.frames.back();
  CHECK(last.t == doctest::Approx(0.5).epsilon(1e-14));
  for (std::size_t i = 0; i < last.size(); ++i) CHECK(std::abs(warping(ex.spec, last, 0, i) - 0.5) < 1e-12);
  CHECK(r.report.stop_reason == "stop_time");
}

TEST_CASE("perturbed cylinder keeps v positive and reaches the floor near t_form") {
  const Example ex = build_perturbed_cylinder(0.1, 2, {257, 100.0, 2.0});
  IntegratorConfig cfg;
  const RunResult r = run(ex.spec, ex.state, cfg, ex.grid.r);
  CHECK(r.report.stop_reason == "u_floor");
  for (const auto& f : r.trajectory.frames)
    for (double v : f.v[0]) CHECK(v > 0.0);
  CHECK(r.report.t_sing_est == doctest::Approx(0.1).epsilon(1e-3));
  CHECK(r.report.at_spatial_infinity);
}

TEST_CASE("step sizes respect the parabolic limit") {
  const Example ex = build_perturbed_cylinder(0.1, 2, {257, 10.0, 0.0});
  IntegratorConfig cfg;
  const double h = ex.state.spacing();
  CHECK(stable_dt(ex.spec, ex.state, cfg) <= cfg.cfl_safety * h * h / 2.0 + 1e-15);
}

TEST_CASE("integrator config validation") {
  IntegratorConfig cfg;
  cfg.cfl_safety = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.dt_max = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("boundary modes round-trip through strings") {
  for (BoundaryMode m : {BoundaryMode::asymptotic_dirichlet, BoundaryMode::neumann})
    CHECK(boundary_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(boundary_mode_from_string("periodic"), Error);
}

TEST_CASE("interior minimum pinches away from the ends") {
  const Example ex = build_interior_minimum(0.1, 2, {257, 10.0, 0.0});
  IntegratorConfig cfg;
  const RunResult r = run(ex.spec, ex.state, cfg, ex.grid.r);
  CHECK_FALSE(r.report.at_spatial_infinity);
}

TEST_CASE("checkpoints and trajectories round-trip exactly") {
  const Example ex = build_canonical_example(2.0, 0.1, 2, {65, 10.0, 1.0});
  IntegratorConfig cfg;
  cfg.stop_time = 0.01;
  const RunResult r = run(ex.spec, ex.state, cfg, ex.grid.r);
  const auto dir = std::filesystem::temp_directory_path() / "warpflow_unit_persist";
  std::filesystem::create_directories(dir);

  const std::string ck = (dir / "ck.json").string();
  save_checkpoint(ck, ex.spec, r.trajectory.frames.back());
  WarpedProductSpec spec;
  FlowState s;
  load_checkpoint(ck, spec, s);
  CHECK(spec.fibers.size() == 2);
  CHECK(s.t == r.trajectory.frames.back().t);
  CHECK(s.v == r.trajectory.frames.back().v);
  CHECK(s.phi == r.trajectory.frames.back().phi);

  const std::string tf = (dir / "tr.wftrj").string();
  save_trajectory(tf, r.trajectory);
  const Trajectory back = load_trajectory(tf);
  REQUIRE(back.frames.size() == r.trajectory.frames.size());
  CHECK(back.frames.back().v == r.trajectory.frames.back().v);
  CHECK(back.radius == r.trajectory.radius);

  std::FILE* f = std::fopen(tf.c_str(), "r+b");
  std::fputc('X', f);
  std::fclose(f);
  CHECK_THROWS_AS(load_trajectory(tf), Error);
  std::filesystem::remove_all(dir);
}
