#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "imin/cfm/calibrate.hpp"
#include "imin/cfm/krauss.hpp"
#include "imin/error.hpp"
#include "imin/rng.hpp"

using namespace imin;
using namespace imin::cfm;

namespace {

// Independently written evaluators of the two Krauss rules.
double oracle_safe(double vl, double vf, double g, double b, double tr) {
  const double tau_b = (vl + vf) / (2.0 * b);
  const double v = vl + (g - vl * tr) / (tau_b + tr);
  return v < 0.0 ? 0.0 : v;
}

double oracle_desired(double v_safe, double v, double a, double dt, double v_max) {
  double out = v_safe;
  if (v + a * dt < out) out = v + a * dt;
  if (v_max < out) out = v_max;
  return out;
}

sim::RawState free_road(double speed) {
  sim::RawState s;
  s.speed = speed;
  s.speed_limit = 30.0;
  s.phase = 1.0;
  s.is_leading = 1.0;
  s.leader_gap = 300.0;
  s.leader_speed = 30.0;
  return s;
}

traj::Scenario small_ring() {
  auto sc = traj::ring_scenario();
  sc.horizon = 120.0;
  return sc;
}

}  // namespace

TEST_CASE("safe speed examples") {
  KraussParams p;
  p.decel = 4.5;
  p.reaction = 1.0;
  CHECK(krauss_safe_speed(p, 0.0, 10.0, 0.0) == 0.0);
  CHECK(krauss_safe_speed(p, 5.0, 15.0, 5.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::abs(krauss_safe_speed(p, 10.0, 10.0, 20.0) - 13.103448275862069) < 1e-9);
  CHECK_THROWS_AS(krauss_safe_speed(p, -1.0, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(krauss_safe_speed(p, 0.0, 0.0, -1.0), ValidationError);
}

TEST_CASE("desired speed examples") {
  KraussParams p;
  p.accel = 2.0;
  p.dt = 1.0;
  p.v_max = 16.67;
  CHECK(krauss_desired_speed(p, 0.0, 5.0) == 0.0);
  CHECK(krauss_desired_speed(p, 30.0, 0.0) == 2.0);
  CHECK(krauss_desired_speed(p, 30.0, 16.0) == 16.67);
}

TEST_CASE("Krauss rules agree with the scalar oracle on random inputs") {
  Rng rng(2024);
  for (int i = 0; i < 10000; ++i) {
    KraussParams p;
    p.accel = 0.5 + 4.5 * uniform01(rng);
    p.decel = 1.0 + 8.0 * uniform01(rng);
    p.v_max = 5.0 + 25.0 * uniform01(rng);
    p.reaction = 0.1 + 2.0 * uniform01(rng);
    p.dt = 0.5 + uniform01(rng);
    const double vl = 30.0 * uniform01(rng);
    const double vf = 30.0 * uniform01(rng);
    const double g = 100.0 * uniform01(rng);
    const double vs = krauss_safe_speed(p, vl, vf, g);
    CHECK(std::abs(vs - oracle_safe(vl, vf, g, p.decel, p.reaction)) <= 1e-9);
    const double vd = krauss_desired_speed(p, vs, vf);
    CHECK(std::abs(vd - oracle_desired(vs, vf, p.accel, p.dt, p.v_max)) <= 1e-9);
    CHECK(vd <= p.v_max);
    CHECK(vd <= vf + p.accel * p.dt + 1e-12);
  }
}

TEST_CASE("Krauss policy on a free road accelerates by a dt up to v_max") {
  KraussParams p;
  p.accel = 2.0;
  p.v_max = 13.0;
  double v = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double next = krauss_command(p, free_road(v));
    CHECK(next == doctest::Approx(std::min(v + 2.0, 13.0)));
    v = next;
  }
  CHECK(v == 13.0);
}

TEST_CASE("Krauss policy slows to a stop behind a stopped leader") {
  const KraussParams p;
  double prev = std::numeric_limits<double>::infinity();
  for (double gap : {40.0, 20.0, 10.0, 5.0, 1.0, 0.0}) {
    auto s = free_road(10.0);
    s.is_leading = 0.0;
    s.leader_speed = 0.0;
    s.leader_gap = gap;
    const double v = krauss_command(p, s);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("follower behind a leader at v_max converges to v_max") {
  KraussParams p;
  p.v_max = 15.0;
  double xl = 200.0;
  double xf = 0.0;
  double vf = 0.0;
  for (int k = 0; k < 200; ++k) {
    auto s = free_road(vf);
    s.is_leading = 0.0;
    s.leader_speed = p.v_max;
    s.leader_gap = xl - xf;
    vf = krauss_command(p, s);
    xf += vf * p.dt;
    xl += p.v_max * p.dt;
  }
  CHECK(vf == doctest::Approx(p.v_max).epsilon(1e-9));
}

TEST_CASE("Krauss parameters round-trip through text") {
  KraussParams p;
  p.accel = 1.234567890123;
  p.decel = 3.5;
  p.v_max = 12.25;
  p.reaction = 2.0;
  p.min_gap = 10.0;
  std::stringstream ss;
  save_krauss(p, ss);
  const auto q = load_krauss(ss);
  CHECK(q.accel == p.accel);
  CHECK(q.decel == p.decel);
  CHECK(q.v_max == p.v_max);
  CHECK(q.reaction == p.reaction);
  CHECK(q.min_gap == p.min_gap);
  std::stringstream bad("krauss accel 1 decel");
  CHECK_THROWS_AS(load_krauss(bad), ValidationError);
}

TEST_CASE("random search: single trial and bounds") {
  const auto sc = small_ring();
  const KraussParams truth;
  const auto expert = traj::rollout(sc, traj::krauss_controller(truth, sim::FeatureScaler(sim::build_network(sc.network))),
                                    traj::Provenance::kExpert);
  const ParamBounds bounds;
  const auto r1 = calibrate_random(expert, bounds, 1, 3, sc);
  REQUIRE(r1.history.size() == 1);
  CHECK(r1.trials == 1);
  CHECK(r1.best_score == r1.history[0].score);
  CHECK(r1.best.v_max == r1.history[0].params.v_max);
  CHECK_THROWS_AS(calibrate_random(expert, bounds, 0, 3, sc), ValidationError);
  CHECK_THROWS_AS(calibrate_random(traj::TrajectorySet{}, bounds, 1, 3, sc), ValidationError);

  // A box of width 2e-6 around the truth reproduces the expert.
  ParamBounds tight;
  tight.accel = {truth.accel - 1e-6, truth.accel + 1e-6};
  tight.decel = {truth.decel - 1e-6, truth.decel + 1e-6};
  tight.v_max = {truth.v_max - 1e-6, truth.v_max + 1e-6};
  const auto rt = calibrate_random(expert, tight, 3, 1, sc);
  CHECK(rt.best_score < 1e-3);
}

TEST_CASE("random search best beats 95% of the same triples") {
  const auto sc = small_ring();
  KraussParams truth;
  truth.accel = 1.5;
  truth.v_max = 11.0;
  const auto expert = traj::rollout(sc, traj::krauss_controller(truth, sim::FeatureScaler(sim::build_network(sc.network))),
                                    traj::Provenance::kExpert);
  const auto r = calibrate_random(expert, ParamBounds{}, 200, 11, sc);
  REQUIRE(r.history.size() == 200);
  // Oracle: rescore every sampled triple independently.
  const auto objective = travel_time_objective(expert, sc);
  int worse_or_equal = 0;
  double min_score = std::numeric_limits<double>::infinity();
  for (const auto& t : r.history) {
    const double s = objective(t.params);
    CHECK(s == t.score);
    CHECK(s >= 0.0);
    min_score = std::min(min_score, s);
    if (s >= r.best_score) ++worse_or_equal;
  }
  CHECK(r.best_score == min_score);
  CHECK(worse_or_equal >= 190);
  const auto best = r.best_so_far();
  for (std::size_t i = 1; i < best.size(); ++i) CHECK(best[i] <= best[i - 1]);

  const auto again = calibrate_random(expert, ParamBounds{}, 200, 11, sc);
  CHECK(again.best_score == r.best_score);
  CHECK(again.best.accel == r.best.accel);
}

TEST_CASE("tabu search on a convex one-parameter slice") {
  // Objective depends on v_max only; the other two are pinned by the box.
  ParamBounds b;
  b.accel = {2.0, 2.0 + 1e-9};
  b.decel = {4.0, 4.0 + 1e-9};
  b.v_max = {5.0, 25.0};
  const Objective f = [](const KraussParams& p) { return (p.v_max - 12.3) * (p.v_max - 12.3); };
  TabuConfig cfg;
  cfg.iterations = 60;
  cfg.step_fraction = 0.05;  // grid step 1 m/s
  cfg.tabu_len = 5;
  const auto r = calibrate_tabu(f, b, KraussParams{}, cfg, 4);
  const auto best = r.best_so_far();
  for (std::size_t i = 1; i < best.size(); ++i) CHECK(best[i] <= best[i - 1]);
  CHECK(r.best.v_max == doctest::Approx(12.0));
  CHECK(r.best_score == best.back());

  const auto again = calibrate_tabu(f, b, KraussParams{}, cfg, 4);
  REQUIRE(again.history.size() == r.history.size());
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    CHECK(again.history[i].params.v_max == r.history[i].params.v_max);
    CHECK(again.history[i].score == r.history[i].score);
  }
}

TEST_CASE("tabu_len 0 is plain neighbourhood descent") {
  ParamBounds b;
  b.v_max = {5.0, 25.0};
  const Objective f = [](const KraussParams& p) {
    return (p.v_max - 12.3) * (p.v_max - 12.3) + (p.accel - 2.0) * (p.accel - 2.0) +
           (p.decel - 4.0) * (p.decel - 4.0);
  };
  TabuConfig cfg;
  cfg.iterations = 200;
  cfg.tabu_len = 0;
  const auto r = calibrate_tabu(f, b, KraussParams{}, cfg, 9);
  // Independent descent on the same grid from the same start point.
  const double sa = 0.05 * 4.5, sb = 0.05 * 8.0, sv = 0.05 * 20.0;
  KraussParams cur = r.history.front().params;
  double cur_score = f(cur);
  while (true) {
    KraussParams best_n = cur;
    double best_s = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      for (double d : {-1.0, 1.0}) {
        KraussParams n = cur;
        if (k == 0) n.accel += d * sa;
        if (k == 1) n.decel += d * sb;
        if (k == 2) n.v_max += d * sv;
        if (n.accel < 0.5 - 1e-9 || n.accel > 5.0 + 1e-9 || n.decel < 1.0 - 1e-9 || n.decel > 9.0 + 1e-9 ||
            n.v_max < 5.0 - 1e-9 || n.v_max > 25.0 + 1e-9) {
          continue;
        }
        const double s = f(n);
        if (s < best_s) {
          best_s = s;
          best_n = n;
        }
      }
    }
    if (best_s >= cur_score) break;
    cur = best_n;
    cur_score = best_s;
  }
  CHECK(r.best_score == doctest::Approx(cur_score).epsilon(1e-9));
  CHECK(r.best.v_max == doctest::Approx(cur.v_max));
}

TEST_CASE("tabu rejects a non-positive step") {
  TabuConfig cfg;
  cfg.step_fraction = 0.0;
  const Objective f = [](const KraussParams&) { return 0.0; };
  CHECK_THROWS_AS(calibrate_tabu(f, ParamBounds{}, KraussParams{}, cfg, 0), ValidationError);
}

TEST_CASE("calibration CSV lists every trial") {
  const Objective f = [](const KraussParams& p) { return p.accel; };
  const auto r = calibrate_random(f, ParamBounds{}, KraussParams{}, 5, 1);
  std::stringstream ss;
  write_calibration_csv(r, ss);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "trial,a,b,v_max,score");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 5);
}
