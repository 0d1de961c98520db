// Acceptance suite: one PASS/FAIL line per criterion. Exits 0 unless a
// criterion throws; pass --strict to exit 1 when any criterion fails.

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "imin/cfm/calibrate.hpp"
#include "imin/cfm/krauss.hpp"
#include "imin/cli/commands.hpp"
#include "imin/imitation/imitation.hpp"
#include "imin/indnet/indnet.hpp"
#include "imin/metrics/metrics.hpp"
#include "imin/metrics/sparsity.hpp"
#include "imin/nn/gradcheck.hpp"
#include "imin/policy/beta.hpp"
#include "imin/policy/beta_policy.hpp"
#include "imin/rng.hpp"
#include "imin/traj/downsample.hpp"
#include "imin/traj/rollout.hpp"

using namespace imin;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Ring expert used for the imitation comparisons.
cfm::KraussParams ring_expert() {
  cfm::KraussParams p;
  p.reaction = 2.0;
  p.min_gap = 10.0;
  return p;
}

traj::TrajectorySet krauss_rollout(const traj::Scenario& sc, const cfm::KraussParams& p) {
  return traj::rollout(sc, traj::krauss_controller(p, sim::FeatureScaler(sim::build_network(sc.network))),
                       traj::Provenance::kExpert);
}

traj::DrivingPoint random_point(Rng& rng, double t) {
  traj::PointVector f{};
  for (double& x : f) x = 2.0 * uniform01(rng) - 1.0;
  return traj::DrivingPoint::from_features(f, t);
}

// ---------------------------------------------------------------- 1

double oracle_safe(double vl, double vf, double g, double b, double tr) {
  const double v = vl + (g - vl * tr) / ((vl + vf) / (2.0 * b) + tr);
  return v < 0.0 ? 0.0 : v;
}

double oracle_desired(double v_safe, double v, double a, double dt, double v_max) {
  return std::min({v_safe, v + a * dt, v_max});
}

traj::Trajectory timed(int id, double entry, double exit, std::vector<double> odometers) {
  traj::Trajectory t;
  t.vehicle_id = id;
  t.entry_time = entry;
  t.exit_time = exit;
  for (std::size_t i = 0; i < odometers.size(); ++i) {
    traj::DrivingPoint p;
    p.t = entry + static_cast<double>(i);
    p.odometer = odometers[i];
    t.points.push_back(p);
  }
  return t;
}

Outcome formula_oracles() {
  Rng rng(1);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    cfm::KraussParams p;
    p.accel = 0.5 + 4.5 * uniform01(rng);
    p.decel = 1.0 + 8.0 * uniform01(rng);
    p.v_max = 5.0 + 25.0 * uniform01(rng);
    p.reaction = 0.5 + 1.5 * uniform01(rng);
    const double vl = 30.0 * uniform01(rng), vf = 30.0 * uniform01(rng), g = 200.0 * uniform01(rng);
    const double vs = cfm::krauss_safe_speed(p, vl, vf, g);
    worst = std::max(worst, std::abs(vs - oracle_safe(vl, vf, g, p.decel, p.reaction)));
    const double v = 30.0 * uniform01(rng);
    worst = std::max(worst, std::abs(cfm::krauss_desired_speed(p, vs, v) - oracle_desired(vs, v, p.accel, p.dt, p.v_max)));
  }
  auto set = [](std::vector<traj::Trajectory> ts) {
    traj::TrajectorySet s;
    s.trajectories = std::move(ts);
    return s;
  };
  const double t1 = metrics::rmse_time(set({timed(0, 0, 100, {0}), timed(1, 10, 210, {0})}),
                                       set({timed(0, 0, 103, {0}), timed(1, 10, 206, {0})}));
  const double p1 = metrics::rmse_pos(set({timed(0, 0, 2, {0, 5})}), set({timed(0, 0, 2, {10, 15})}));
  const double p2 = metrics::rmse_pos(set({timed(0, 0, 1, {0}), timed(1, 0, 1, {100})}),
                                      set({timed(0, 0, 1, {30}), timed(1, 0, 1, {60})}));
  const double rmse_err = std::max({std::abs(t1 - std::sqrt(12.5)), std::abs(p1 - 0.01),
                                    std::abs(p2 - std::sqrt(1250.0) / 1000.0)});
  return {worst <= 1e-9 && rmse_err <= 1e-9,
          fmt("max Krauss error %.2e over 1e4 inputs, RMSE example error %.2e (3.5355 s, 0.01 km, 0.03536 km)", worst,
              rmse_err)};
}

// ---------------------------------------------------------------- 2

nn::MlpSpec spec_of(const nn::MlpParams& p, std::uint64_t seed) {
  nn::MlpSpec s;
  s.widths.push_back(static_cast<int>(p.layers.front().weight.rows()));
  for (const auto& l : p.layers) {
    s.widths.push_back(static_cast<int>(l.weight.cols()));
    s.activations.push_back(l.activation);
  }
  s.seed = seed;
  return s;
}

double policy_head_check() {
  auto p = policy::init_policy({32, 2, 7}, 16.67);
  Rng rng(21);
  std::vector<sim::StateVector> states;
  std::vector<double> us;
  for (int i = 0; i < 6; ++i) {
    sim::StateVector s{};
    for (double& x : s) x = 2.0 * uniform01(rng) - 1.0;
    states.push_back(s);
    us.push_back(0.05 + 0.9 * uniform01(rng));
  }
  const nn::Matrix x = policy::to_matrix(states);
  auto loss = [&] {
    const auto bp = policy::beta_params(p, x);
    double l = 0.0;
    for (int i = 0; i < x.rows(); ++i) {
      l += 0.7 * policy::beta_log_density(bp.alpha(i), bp.beta(i), us[static_cast<std::size_t>(i)]) -
           0.3 * policy::beta_entropy(bp.alpha(i), bp.beta(i));
    }
    return l;
  };
  nn::ForwardCache cache;
  const auto bp = policy::beta_params(p, x, &cache);
  Eigen::VectorXd da(x.rows()), db(x.rows());
  for (int i = 0; i < x.rows(); ++i) {
    const auto g = policy::beta_log_density_grad(bp.alpha(i), bp.beta(i), us[static_cast<std::size_t>(i)]);
    const auto e = policy::beta_entropy_grad(bp.alpha(i), bp.beta(i));
    da(i) = 0.7 * g.da - 0.3 * e.da;
    db(i) = 0.7 * g.db - 0.3 * e.db;
  }
  auto grads = nn::MlpGrads::zeros_like(p.net);
  policy::backward_beta(p, cache, da, db, grads);
  return nn::max_relative_error(nn::flatten(grads), nn::numeric_gradient(nn::parameter_refs(p.net), loss));
}

double combined_loss_check(double lambda) {
  indnet::InDNetConfig c;
  c.seed = 17;
  c.lambda = lambda;
  auto p = indnet::init_indnet(c);
  Rng rng(7);
  for (auto* net : {&p.embed_start, &p.embed_end, &p.interp, &p.disc}) {
    for (auto& l : net->layers) {
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.1 * normal01(rng);
    }
  }
  auto triples = [&](int n) {
    std::vector<traj::InterpTriple> out;
    for (int i = 0; i < n; ++i) {
      const double gap = 1.0 + std::floor(20.0 * uniform01(rng));
      const auto s = random_point(rng, 10.0);
      const auto e = random_point(rng, 10.0 + gap);
      const double off = std::floor(gap * uniform01(rng));
      out.push_back({s, e, off, random_point(rng, 10.0 + off)});
    }
    return out;
  };
  const auto tb = triples(6);
  std::vector<indnet::LabeledPoint> db;
  for (int i = 0; i < 6; ++i) {
    db.push_back({random_point(rng, 0).features(), i % 2 ? indnet::Label::kExpert : indnet::Label::kGenerated});
  }
  std::vector<indnet::InterpQuery> qb;
  for (const auto& tr : triples(4)) qb.push_back({tr.start, tr.end, tr.offset});
  auto g = indnet::InDNetGrads::zeros_like(p);
  indnet::indnet_loss(p, tb, db, qb, &g);
  std::vector<double> analytic;
  std::vector<double*> refs;
  for (auto* net : {&g.embed_start, &g.embed_end, &g.interp, &g.disc}) {
    const auto f = nn::flatten(*net);
    analytic.insert(analytic.end(), f.begin(), f.end());
  }
  for (auto* net : {&p.embed_start, &p.embed_end, &p.interp, &p.disc}) {
    const auto r = nn::parameter_refs(*net);
    refs.insert(refs.end(), r.begin(), r.end());
  }
  const auto numeric = nn::numeric_gradient(refs, [&] { return indnet::indnet_loss(p, tb, db, qb, nullptr).total; });
  return nn::max_relative_error(analytic, numeric);
}

Outcome gradient_suite() {
  const auto net = indnet::init_indnet({});
  const auto pol = policy::init_policy({}, 16.67);
  const double e_policy_net = nn::grad_check(spec_of(pol.net, 1), 1);
  const double e_policy_head = policy_head_check();
  const double e_embed = std::max(nn::grad_check(spec_of(net.embed_start, 2), 2), nn::grad_check(spec_of(net.embed_end, 3), 3));
  const double e_interp = nn::grad_check(spec_of(net.interp, 4), 4);
  const double e_disc = nn::grad_check(spec_of(net.disc, 5), 5);
  double e_comb = 0.0;
  for (double lambda : {0.0, 0.5, 1.0}) e_comb = std::max(e_comb, combined_loss_check(lambda));
  const double worst = std::max({e_policy_net, e_policy_head, e_embed, e_interp, e_disc, e_comb});
  std::string d = fmt("max rel. error: policy %.1e / head %.1e, embedding %.1e, ", e_policy_net, e_policy_head, e_embed);
  d += fmt("interpolator %.1e, discriminator %.1e, combined loss %.1e", e_interp, e_disc, e_comb);
  return {worst <= 1e-4, d};
}

// ---------------------------------------------------------------- 3

Outcome distribution_checks() {
  boost::math::quadrature::tanh_sinh<double> quad;
  const auto p = policy::init_policy({32, 2, 5}, 16.67);
  Rng rng(3);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    sim::StateVector s{};
    for (double& x : s) x = 2.0 * uniform01(rng) - 1.0;
    const double total = quad.integrate([&](double u) { return std::exp(policy::log_prob(p, s, u)); }, 0.0, 1.0);
    worst = std::max(worst, std::abs(total - 1.0));
  }
  const double h11 = policy::beta_entropy(1.0, 1.0);

  auto sym = policy::init_policy({}, 16.67);
  sym.net.layers.back().weight.setZero();
  sym.net.layers.back().bias.setConstant(std::log(std::expm1(2.0)));  // alpha = beta = 3
  Rng draw(99);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += policy::act(sym, {}, draw).u;
  const double mean = sum / n;
  return {worst <= 1e-6 && std::abs(h11) < 1e-12 && std::abs(mean - 0.5) <= 0.005,
          fmt("density integral error %.1e, H[Beta(1,1)] = %.1e, symmetric mean %.4f", worst, h11, mean)};
}

// ---------------------------------------------------------------- 4

bool identical(const traj::TrajectorySet& a, const traj::TrajectorySet& b) {
  if (a.trajectories.size() != b.trajectories.size()) return false;
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    const auto& x = a.trajectories[i].points;
    const auto& y = b.trajectories[i].points;
    if (x.size() != y.size()) return false;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k].t != y[k].t || x[k].features() != y[k].features()) return false;
    }
  }
  return true;
}

Outcome downsampler_identities() {
  const auto dense = krauss_rollout(traj::ring_scenario(), ring_expert());
  const bool fixed = identical(traj::downsample(dense, traj::SamplingStrategy{traj::FixedInterval{1}}), dense);
  const bool random = identical(traj::downsample(dense, traj::SamplingStrategy{traj::RandomRate{1.0, 3}}), dense);
  const auto cams = traj::ring_cameras(0, 230.0, 4, 10.0);
  const auto sparse = traj::downsample(dense, traj::SamplingStrategy{cams});
  int mismatches = 0, passes_total = 0;
  for (std::size_t i = 0; i < dense.trajectories.size(); ++i) {
    int passes = 0;
    for (const auto& c : cams.cameras) {
      bool inside = false;
      for (const auto& p : dense.trajectories[i].points) {
        const bool now = p.lane == c.lane && std::abs(p.lane_pos - c.position) <= c.radius;
        passes += now && !inside;
        inside = now;
      }
    }
    passes_total += passes;
    mismatches += static_cast<int>(sparse.trajectories[i].points.size()) != passes;
  }
  return {fixed && random && mismatches == 0,
          fmt("FixedInterval(1) identity %.0f, Random(1.0) identity %.0f, camera passes %.0f, count mismatches %.0f",
              fixed, random, passes_total, mismatches)};
}

// ---------------------------------------------------------------- 5

double position_of(const sim::FeatureScaler& scaler, const traj::PointVector& f) {
  return scaler.denormalize(traj::DrivingPoint::from_features(f, 0.0).state).position;
}

// Midpoint error on constant-speed ring rollouts, relative to segment
// length. Trained on five speeds, scored on four speeds in between.
double constant_speed_error() {
  auto sc = traj::ring_scenario();
  sc.demand.ring_vehicles = 11;
  const sim::FeatureScaler scaler(sim::build_network(sc.network));
  const traj::SamplingStrategy strat = traj::ring_cameras(0, 230.0, 4, 10.0);
  auto cruise = [&](double v) {
    const traj::Controller c = [&, v](double, const std::vector<sim::Observation>& obs,
                                      const std::vector<sim::StateVector>&, std::vector<traj::Command>& cmds) {
      for (std::size_t i = 0; i < obs.size(); ++i) cmds[i] = {v, scaler.normalize_action(v)};
    };
    auto dense = traj::rollout(sc, c, traj::Provenance::kGenerated);
    auto sparse = traj::downsample(dense, strat);
    return std::make_pair(std::move(dense), std::move(sparse));
  };
  std::vector<traj::InterpTriple> triples;
  for (double v : {3.0, 4.0, 5.0, 6.0, 7.0}) {
    const auto [dense, sparse] = cruise(v);
    const auto t = traj::make_triples(dense, sparse, 4, 1);
    triples.insert(triples.end(), t.begin(), t.end());
  }
  auto net = indnet::init_indnet({});
  indnet::InDNetOptimizer opt(net, 1e-3);
  Rng rng(3);
  indnet::train_interpolator(net, opt, triples, {32, 400, 1e-3, 4}, rng);
  indnet::InDNetOptimizer fine(net, 1e-4);
  indnet::train_interpolator(net, fine, triples, {32, 100, 1e-4, 4}, rng);

  double sum = 0.0;
  int n = 0;
  for (double v : {3.5, 4.5, 5.5, 6.5}) {
    const auto [dense, sparse] = cruise(v);
    for (const auto& sp : sparse.trajectories) {
      const auto* d = dense.find(sp.vehicle_id);
      for (std::size_t i = 1; i < sp.points.size(); ++i) {
        const auto& s = sp.points[i - 1];
        const auto& e = sp.points[i];
        if (e.t - s.t < 2.0) continue;
        const double off = std::floor((e.t - s.t) / 2.0);
        const auto truth = std::find_if(d->points.begin(), d->points.end(), [&](const auto& q) { return q.t == s.t + off; });
        double err = std::abs(position_of(scaler, indnet::interpolate_point(net, s, e, off)) - truth->lane_pos);
        err = std::min(err, 230.0 - err);  // ring wrap
        sum += err / (e.odometer - s.odometer);
        ++n;
      }
    }
  }
  return sum / n;
}

// Mean position error on held-out stop-and-go segments at a red signal.
std::pair<double, double> stop_and_go_errors() {
  auto sc = traj::intersection_scenario();
  cfm::KraussParams expert;
  expert.min_gap = 2.5;
  const sim::FeatureScaler scaler(sim::build_network(sc.network));
  // Gaps as long as one red phase.
  const traj::SamplingStrategy strat = traj::FixedInterval{30};
  std::vector<traj::InterpTriple> triples;
  for (std::uint64_t seed : {1, 2, 3}) {
    sc.seed = seed;
    const auto dense = krauss_rollout(sc, expert);
    const auto t = traj::make_triples(dense, traj::downsample(dense, strat), 4, seed);
    triples.insert(triples.end(), t.begin(), t.end());
  }
  auto net = indnet::init_indnet({});
  indnet::InDNetOptimizer opt(net, 1e-3);
  Rng rng(4);
  indnet::train_interpolator(net, opt, triples, {32, 150, 1e-3, 4}, rng);

  sc.seed = 0;
  const auto dense = krauss_rollout(sc, expert);
  const auto sparse = traj::downsample(dense, strat);
  double e_net = 0.0, e_lin = 0.0;
  int n = 0;
  for (const auto& sp : sparse.trajectories) {
    const auto* d = dense.find(sp.vehicle_id);
    for (std::size_t i = 1; i < sp.points.size(); ++i) {
      const auto& s = sp.points[i - 1];
      const auto& e = sp.points[i];
      std::vector<const traj::DrivingPoint*> inner;
      for (const auto& q : d->points) {
        if (q.t > s.t && q.t < e.t) inner.push_back(&q);
      }
      // Segments on one lane where a moving vehicle comes to a halt.
      const bool one_lane = s.lane == e.lane && std::all_of(inner.begin(), inner.end(), [&](const auto* q) {
                              return q->lane == s.lane;
                            });
      const bool stops = std::any_of(inner.begin(), inner.end(), [&](const auto* q) {
        return scaler.denormalize(q->state).speed < 0.5;
      });
      if (!one_lane || !stops || scaler.denormalize(s.state).speed < 1.0) continue;
      for (const auto* q : inner) {
        const double off = q->t - s.t;
        const double lin = s.lane_pos + (e.lane_pos - s.lane_pos) * off / (e.t - s.t);
        e_net += std::abs(position_of(scaler, indnet::interpolate_point(net, s, e, off)) - q->lane_pos);
        e_lin += std::abs(lin - q->lane_pos);
        ++n;
      }
    }
  }
  return {e_net / n, e_lin / n};
}

Outcome interpolator_oracle() {
  const double mid = constant_speed_error();
  const auto [net, lin] = stop_and_go_errors();
  return {mid < 0.05 && net < lin,
          fmt("constant-speed midpoint error %.2f%% of segment; red-signal segments: net %.3f m vs linear %.3f m",
              100.0 * mid, net, lin)};
}

// ---------------------------------------------------------------- 6

Outcome calibration_recovery() {
  const auto sc = traj::ring_scenario();
  cfm::KraussParams truth;
  truth.v_max = 8.0;
  const auto expert = krauss_rollout(sc, truth);
  const auto rs = cfm::calibrate_random(expert, cfm::ParamBounds{}, 200, 0, sc);
  const double v_err = std::abs(rs.best.v_max - truth.v_max) / truth.v_max;
  const auto ts = cfm::calibrate_tabu(expert, cfm::ParamBounds{}, cfm::TabuConfig{}, 0, sc);
  const auto best = ts.best_so_far();
  bool monotone = true;
  for (std::size_t i = 1; i < best.size(); ++i) monotone = monotone && best[i] <= best[i - 1];
  return {rs.best_score <= 2.0 && v_err <= 0.1 && monotone,
          fmt("CFM-RS RMSE_time %.3f s, v_max %.2f (truth 8, error %.1f%%); CFM-TS best-ever monotone %.0f",
              rs.best_score, rs.best.v_max, 100.0 * v_err, monotone)};
}

// ---------------------------------------------------------------- 7, 8

struct RingRuns {
  traj::TrajectorySet dense;
  imitation::ExpertData expert;
  traj::Scenario scenario;
  imitation::TrainConfig config;
};

RingRuns ring_runs() {
  RingRuns r;
  r.scenario = traj::ring_scenario();
  r.dense = krauss_rollout(r.scenario, ring_expert());
  const traj::SamplingStrategy cams = traj::ring_cameras(0, 230.0, 4, 10.0);
  r.expert = {traj::downsample(r.dense, cams), cams};
  r.config.iterations = 300;
  r.config.rollouts_per_iter = 4;
  return r;
}

std::vector<double> scores(const RingRuns& runs, imitation::Method m) {
  std::vector<double> out;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto cfg = runs.config;
    cfg.seed = seed;
    if (m == imitation::Method::kCfmRsTwoStep) {
      // CFM-RS baseline: calibrate directly on the sparse expert.
      const auto cal = cfm::calibrate_random(runs.expert.sparse, cfm::ParamBounds{}, 200, seed, runs.scenario);
      out.push_back(metrics::rmse_time(runs.dense, krauss_rollout(runs.scenario, cal.best)));
    } else {
      const auto r = imitation::train(m, runs.expert, runs.scenario, cfg);
      out.push_back(imitation::evaluate_policy(r.policy, runs.scenario, runs.dense).rmse_time);
    }
    std::fprintf(stderr, "  %s seed %llu: RMSE_time %.2f s\n",
                 m == imitation::Method::kCfmRsTwoStep ? "cfm-rs" : imitation::method_name(m).c_str(),
                 static_cast<unsigned long long>(seed), out.back());
  }
  return out;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : "/") + fmt("%.2f", x);
  return s;
}

double g_gail_median = -1.0;

Outcome table3_direction() {
  const auto runs = ring_runs();
  const auto imin = scores(runs, imitation::Method::kIminGail);
  const auto gail = scores(runs, imitation::Method::kGail);
  const auto bc = scores(runs, imitation::Method::kBc);
  const auto rs = scores(runs, imitation::Method::kCfmRsTwoStep);
  const double mi = median(imin), mg = median(gail), mb = median(bc), mr = median(rs);
  g_gail_median = mg;
  const bool pass = mi <= 0.8 * mg && std::max(mi, mg) < std::min(mb, mr);
  std::string d = fmt("median RMSE_time: ImIn-GAIL %.2f, GAIL %.2f, BC %.2f, CFM-RS %.2f s", mi, mg, mb, mr);
  d += " (seeds " + list(imin) + " | " + list(gail) + " | " + list(bc) + " | " + list(rs) + ")";
  d += fmt("; ImIn/GAIL ratio %.2f (need <= 0.80)", mi / mg);
  return {pass, d};
}

Outcome table4_direction() {
  const auto runs = ring_runs();
  const auto two = scores(runs, imitation::Method::kGailTwoStep);
  const double gail = g_gail_median >= 0.0 ? g_gail_median : median(scores(runs, imitation::Method::kGail));
  const double mt = median(two);
  return {mt >= gail, fmt("median RMSE_time: GAIL(two-step) %.2f s vs GAIL %.2f s", mt, gail) + " (seeds " + list(two) + ")"};
}

// ---------------------------------------------------------------- 9

Outcome sparsity_trend() {
  const auto runs = ring_runs();
  const auto rows = metrics::sparsity_study(imitation::Method::kIminGail, runs.dense, runs.scenario, runs.config,
                                            {0.02, 1.0}, {0, 1, 2});
  const double lo = metrics::median_rmse_time(rows, 0.02);
  const double hi = metrics::median_rmse_time(rows, 1.0);
  std::vector<double> a, b;
  for (const auto& r : rows) (r.rate == 1.0 ? a : b).push_back(r.rmse_time);
  return {hi < lo, fmt("median ImIn-GAIL RMSE_time: %.2f s at 100%% vs %.2f s at 2%%", hi, lo) + " (seeds " +
                       list(a) + " | " + list(b) + ")"};
}

// ---------------------------------------------------------------- 10

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "imin_acceptance_determinism";
  fs::remove_all(base);
  std::vector<fs::path> dirs = {base / "a", base / "b"};
  for (const auto& d : dirs) {
    config::RunConfig c;
    c.scenario = traj::ring_scenario();
    c.expert = ring_expert();
    c.sampling = traj::ring_cameras(0, 230.0, 4, 10.0);
    c.output_dir = d.string();
    c.seed = 3;
    c.training.seed = 3;
    c.training.iterations = 3;
    c.training.rollouts_per_iter = 2;
    c.training.pretrain_epochs = 5;
    c.training.calib_trials = 5;
    c.calibration.trials = 10;
    c.calibration.tabu.iterations = 3;
    std::ostringstream log;
    cli::cmd_gen_expert(c, log);
    for (auto m : {imitation::Method::kIminGail, imitation::Method::kGail, imitation::Method::kBc,
                   imitation::Method::kGailTwoStep, imitation::Method::kCfmRsTwoStep}) {
      cli::cmd_train(c, m, false, log);
      if (m != imitation::Method::kCfmRsTwoStep) cli::cmd_evaluate(c, cli::train_dir(c, m), cli::train_dir(c, m), log);
    }
    cli::cmd_calibrate(c, "rs", log);
    cli::cmd_calibrate(c, "tabu", log);
    auto sc = c;
    sc.training.iterations = 1;
    cli::cmd_sparsity(sc, imitation::Method::kIminGail, {0.5, 1.0}, {0, 1}, log);
  }
  int files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    differ += slurp(e.path()) != slurp(dirs[1] / fs::relative(e.path(), dirs[0]));
  }
  fs::remove_all(base);
  return {files > 0 && differ == 0, fmt("%.0f CSV files compared across two runs, %.0f differ", files, differ)};
}

}  // namespace

// Usage: acceptance [--strict] [criterion ids...]
int main(int argc, char** argv) {
  bool strict = false;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else {
      only.push_back(std::atoi(argv[i]));
    }
  }
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "formula oracles", 1, formula_oracles},
      {2, "gradient suite", 60, gradient_suite},
      {3, "distribution checks", 0, distribution_checks},
      {4, "downsampler identities", 0, downsampler_identities},
      {5, "interpolator oracle", 300, interpolator_oracle},
      {6, "calibration recovery", 600, calibration_recovery},
      {7, "ring comparison: ImIn-GAIL, GAIL, BC, CFM-RS", 2700, table3_direction},
      {8, "ring ablation: GAIL two-step vs GAIL", 2700, table4_direction},
      {9, "sparsity trend", 3600, sparsity_trend},
      {10, "determinism", 0, determinism},
  };
  int failed = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      std::printf("criterion %d (%s): FAIL threw: %s\n", c.id, c.name, e.what());
      return 2;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = c.budget_s <= 0 || secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    failed += !pass;
    std::printf("criterion %d (%s): %s %s [%.1f s%s]\n", c.id, c.name, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                in_budget ? "" : fmt(", over the %.0f s budget", c.budget_s).c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return strict && failed > 0 ? 1 : 0;
}
