#include "imin/config/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "imin/error.hpp"

namespace imin::config {

namespace {

namespace pt = boost::property_tree;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) {
    const auto b = cur.find_first_not_of(' ');
    const auto e = cur.find_last_not_of(' ');
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  return out;
}

// Sampling is assembled after all keys are read.
struct SamplingKeys {
  std::string kind = "fixed";
  int k = 1;
  double rate = 1.0;
  std::uint64_t seed = 0;
  int ring_cameras = 0;
  double radius = 10.0;
  std::string cameras;
};

struct Parser {
  RunConfig& cfg;
  SamplingKeys& smp;
  std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters;

  Parser(RunConfig& c, SamplingKeys& s) : cfg(c), smp(s) {
    auto& sc = cfg.scenario;
    auto& tc = cfg.training;
    auto& cal = cfg.calibration;
    auto dbl = [](double& x) { return [&x](const std::string& k, const std::string& v) { x = to_double(k, v); }; };
    auto num = [](int& x) { return [&x](const std::string& k, const std::string& v) { x = static_cast<int>(to_int(k, v)); }; };
    auto u64 = [](std::uint64_t& x) { return [&x](const std::string& k, const std::string& v) { x = to_u64(k, v); }; };

    setters["scenario.kind"] = [&sc](const std::string& k, const std::string& v) {
      if (v == "ring") {
        sc.network.kind = sim::NetworkKind::kRing;
      } else if (v == "intersection") {
        sc.network.kind = sim::NetworkKind::kIntersection;
      } else {
        throw ConfigError(k + ": expected ring or intersection, got '" + v + "'");
      }
    };
    setters["scenario.ring_length"] = dbl(sc.network.ring_length);
    setters["scenario.approach_length"] = dbl(sc.network.approach_length);
    setters["scenario.lanes_per_approach"] = num(sc.network.lanes_per_approach);
    setters["scenario.speed_limit"] = dbl(sc.network.speed_limit);
    setters["scenario.signal_cycle"] = [&sc](const std::string& k, const std::string& v) {
      sc.network.signal_cycle.clear();
      if (v.empty()) return;
      int id = 0;
      for (const auto& g : split(v, ',')) sc.network.signal_cycle.push_back({id++, to_double(k, g)});
    };
    setters["scenario.ring_vehicles"] = num(sc.demand.ring_vehicles);
    setters["scenario.ring_laps"] = num(sc.demand.ring_laps);
    setters["scenario.min_spacing"] = dbl(sc.demand.min_spacing);
    setters["scenario.west_east_rate"] = dbl(sc.demand.west_east_rate);
    setters["scenario.south_north_rate"] = dbl(sc.demand.south_north_rate);
    setters["scenario.dt"] = dbl(sc.sim.dt);
    setters["scenario.safety_decel"] = dbl(sc.sim.safety.decel);
    setters["scenario.safety_reaction"] = dbl(sc.sim.safety.reaction);
    setters["scenario.horizon"] = dbl(sc.horizon);
    setters["scenario.demand_seed"] = u64(sc.seed);

    setters["expert.accel"] = dbl(cfg.expert.accel);
    setters["expert.decel"] = dbl(cfg.expert.decel);
    setters["expert.v_max"] = dbl(cfg.expert.v_max);
    setters["expert.reaction"] = dbl(cfg.expert.reaction);
    setters["expert.min_gap"] = dbl(cfg.expert.min_gap);

    setters["sampling.kind"] = [&s](const std::string&, const std::string& v) { s.kind = v; };
    setters["sampling.k"] = num(s.k);
    setters["sampling.rate"] = dbl(s.rate);
    setters["sampling.seed"] = u64(s.seed);
    setters["sampling.ring_cameras"] = num(s.ring_cameras);
    setters["sampling.radius"] = dbl(s.radius);
    setters["sampling.cameras"] = [&s](const std::string&, const std::string& v) { s.cameras = v; };

    setters["training.iterations"] = num(tc.iterations);
    setters["training.rollouts_per_iter"] = num(tc.rollouts_per_iter);
    setters["training.gen_batch"] = num(tc.gen_batch);
    setters["training.gen_epochs"] = num(tc.gen_epochs);
    setters["training.gen_lr"] = dbl(tc.gen_lr);
    setters["training.policy_hidden"] = num(tc.policy_hidden);
    setters["training.ind_batch"] = num(tc.ind_batch);
    setters["training.ind_epochs"] = num(tc.ind_epochs);
    setters["training.ind_lr"] = dbl(tc.ind_lr);
    setters["training.per_gap"] = num(tc.per_gap);
    setters["training.lambda"] = dbl(tc.lambda);
    setters["training.embed_dim"] = num(tc.embed_dim);
    setters["training.hidden"] = num(tc.hidden);
    setters["training.entropy_coef"] = dbl(tc.entropy_coef);
    setters["training.gamma"] = dbl(tc.gamma);
    setters["training.clip"] = dbl(tc.clip);
    setters["training.kl_stop"] = dbl(tc.kl_stop);
    setters["training.pretrain_rollouts"] = num(tc.pretrain_rollouts);
    setters["training.pretrain_epochs"] = num(tc.pretrain_epochs);
    setters["training.pretrain_lr"] = dbl(tc.pretrain_lr);
    setters["training.calib_trials"] = num(tc.calib_trials);
    setters["training.seed"] = u64(tc.seed);

    setters["calibration.trials"] = num(cal.trials);
    setters["calibration.accel_low"] = dbl(cal.bounds.accel[0]);
    setters["calibration.accel_high"] = dbl(cal.bounds.accel[1]);
    setters["calibration.decel_low"] = dbl(cal.bounds.decel[0]);
    setters["calibration.decel_high"] = dbl(cal.bounds.decel[1]);
    setters["calibration.v_max_low"] = dbl(cal.bounds.v_max[0]);
    setters["calibration.v_max_high"] = dbl(cal.bounds.v_max[1]);
    setters["calibration.tabu_iterations"] = num(cal.tabu.iterations);
    setters["calibration.step_fraction"] = dbl(cal.tabu.step_fraction);
    setters["calibration.tabu_len"] = num(cal.tabu.tabu_len);

    setters["output.dir"] = [&c](const std::string&, const std::string& v) { c.output_dir = v; };
    setters["output.seed"] = u64(cfg.seed);
  }

  void set(const std::string& key, const std::string& value) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
};

traj::SamplingStrategy build_sampling(const SamplingKeys& s, const traj::Scenario& scenario) {
  traj::SamplingStrategy out;
  if (s.kind == "fixed") {
    out = traj::FixedInterval{s.k};
  } else if (s.kind == "random") {
    out = traj::RandomRate{s.rate, s.seed};
  } else if (s.kind == "cameras") {
    if (s.ring_cameras > 0) {
      if (scenario.network.kind != sim::NetworkKind::kRing) {
        throw ConfigError("sampling.ring_cameras is only valid on the ring");
      }
      out = traj::ring_cameras(0, scenario.network.ring_length, s.ring_cameras, s.radius);
    } else {
      traj::AtLocations loc;
      // "lane:position[:radius]" entries separated by ';'.
      for (const auto& entry : split(s.cameras, ';')) {
        if (entry.empty()) continue;
        const auto f = split(entry, ':');
        if (f.size() < 2 || f.size() > 3) throw ConfigError("sampling.cameras: bad entry '" + entry + "'");
        loc.cameras.push_back({static_cast<int>(to_int("sampling.cameras", f[0])),
                               to_double("sampling.cameras", f[1]),
                               f.size() == 3 ? to_double("sampling.cameras", f[2]) : s.radius});
      }
      out = std::move(loc);
    }
  } else {
    throw ConfigError("sampling.kind: expected fixed, random or cameras, got '" + s.kind + "'");
  }
  try {
    traj::validate(out);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("sampling: ") + e.what());
  }
  return out;
}

SamplingKeys keys_of(const traj::SamplingStrategy& s) {
  SamplingKeys k;
  if (const auto* f = std::get_if<traj::FixedInterval>(&s)) {
    k.kind = "fixed";
    k.k = f->k;
  } else if (const auto* r = std::get_if<traj::RandomRate>(&s)) {
    k.kind = "random";
    k.rate = r->rate;
    k.seed = r->seed;
  } else {
    k.kind = "cameras";
    std::string c;
    for (const auto& cam : std::get<traj::AtLocations>(s).cameras) {
      if (!c.empty()) c += ';';
      c += std::to_string(cam.lane) + ':' + fmt(cam.position) + ':' + fmt(cam.radius);
    }
    k.cameras = c;
  }
  return k;
}

void finish(RunConfig& cfg, const SamplingKeys& smp) {
  auto& net = cfg.scenario.network;
  if (net.kind == sim::NetworkKind::kIntersection && net.signal_cycle.empty()) {
    net.signal_cycle = sim::default_signal_cycle();
  }
  if (net.kind == sim::NetworkKind::kRing) net.signal_cycle.clear();
  cfg.expert.dt = cfg.scenario.sim.dt;
  cfg.sampling = build_sampling(smp, cfg.scenario);
  cfg.validate();
}

}  // namespace

void RunConfig::validate() const {
  try {
    scenario.validate();
    expert.validate();
    traj::validate(sampling);
    training.validate();
    calibration.bounds.validate();
    require(calibration.trials >= 1, "calibration.trials must be >= 1");
    require(calibration.tabu.iterations >= 1 && calibration.tabu.tabu_len >= 0 &&
                calibration.tabu.step_fraction > 0.0 && calibration.tabu.step_fraction <= 1.0,
            "tabu settings out of range");
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }
  RunConfig cfg;
  SamplingKeys smp;
  Parser parser(cfg, smp);
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' must be inside a section");
    for (const auto& [key, value] : body) parser.set(section + "." + key, value.get_value<std::string>());
  }
  finish(cfg, smp);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like section.key=value: " + assignment);
  // Re-serialize, patch and re-parse so overrides follow the file rules.
  std::ostringstream text;
  write_config(config, text);
  pt::ptree tree;
  std::istringstream in(text.str());
  pt::read_ini(in, tree);
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  if (key.find('.') == std::string::npos) throw ConfigError("override key must be section.key: " + key);
  tree.put(pt::ptree::path_type(key, '.'), value);
  std::ostringstream patched;
  pt::write_ini(patched, tree);
  std::istringstream back(patched.str());
  config = parse_config(back);
}

void write_config(const RunConfig& c, std::ostream& out) {
  const auto& sc = c.scenario;
  out << "[scenario]\nkind = " << (sc.network.kind == sim::NetworkKind::kRing ? "ring" : "intersection") << '\n'
      << "ring_length = " << fmt(sc.network.ring_length) << '\n'
      << "approach_length = " << fmt(sc.network.approach_length) << '\n'
      << "lanes_per_approach = " << sc.network.lanes_per_approach << '\n'
      << "speed_limit = " << fmt(sc.network.speed_limit) << '\n';
  std::string cycle;
  for (const auto& ph : sc.network.signal_cycle) cycle += (cycle.empty() ? "" : ",") + fmt(ph.green);
  out << "signal_cycle = " << cycle << '\n'
      << "ring_vehicles = " << sc.demand.ring_vehicles << '\n'
      << "ring_laps = " << sc.demand.ring_laps << '\n'
      << "min_spacing = " << fmt(sc.demand.min_spacing) << '\n'
      << "west_east_rate = " << fmt(sc.demand.west_east_rate) << '\n'
      << "south_north_rate = " << fmt(sc.demand.south_north_rate) << '\n'
      << "dt = " << fmt(sc.sim.dt) << '\n'
      << "safety_decel = " << fmt(sc.sim.safety.decel) << '\n'
      << "safety_reaction = " << fmt(sc.sim.safety.reaction) << '\n'
      << "horizon = " << fmt(sc.horizon) << '\n'
      << "demand_seed = " << sc.seed << "\n\n";
  out << "[expert]\naccel = " << fmt(c.expert.accel) << "\ndecel = " << fmt(c.expert.decel)
      << "\nv_max = " << fmt(c.expert.v_max) << "\nreaction = " << fmt(c.expert.reaction)
      << "\nmin_gap = " << fmt(c.expert.min_gap) << "\n\n";
  const SamplingKeys k = keys_of(c.sampling);
  out << "[sampling]\nkind = " << k.kind << '\n';
  if (k.kind == "fixed") out << "k = " << k.k << '\n';
  if (k.kind == "random") out << "rate = " << fmt(k.rate) << "\nseed = " << k.seed << '\n';
  if (k.kind == "cameras") out << "cameras = " << k.cameras << '\n';
  const auto& t = c.training;
  out << "\n[training]\niterations = " << t.iterations << "\nrollouts_per_iter = " << t.rollouts_per_iter
      << "\ngen_batch = " << t.gen_batch << "\ngen_epochs = " << t.gen_epochs << "\ngen_lr = " << fmt(t.gen_lr)
      << "\npolicy_hidden = " << t.policy_hidden << "\nind_batch = " << t.ind_batch
      << "\nind_epochs = " << t.ind_epochs << "\nind_lr = " << fmt(t.ind_lr) << "\nper_gap = " << t.per_gap
      << "\nlambda = " << fmt(t.lambda) << "\nembed_dim = " << t.embed_dim << "\nhidden = " << t.hidden
      << "\nentropy_coef = " << fmt(t.entropy_coef) << "\ngamma = " << fmt(t.gamma) << "\nclip = " << fmt(t.clip)
      << "\nkl_stop = " << fmt(t.kl_stop) << "\npretrain_rollouts = " << t.pretrain_rollouts
      << "\npretrain_epochs = " << t.pretrain_epochs << "\npretrain_lr = " << fmt(t.pretrain_lr)
      << "\ncalib_trials = " << t.calib_trials << "\nseed = " << t.seed << "\n\n";
  const auto& cal = c.calibration;
  out << "[calibration]\ntrials = " << cal.trials << "\naccel_low = " << fmt(cal.bounds.accel[0])
      << "\naccel_high = " << fmt(cal.bounds.accel[1]) << "\ndecel_low = " << fmt(cal.bounds.decel[0])
      << "\ndecel_high = " << fmt(cal.bounds.decel[1]) << "\nv_max_low = " << fmt(cal.bounds.v_max[0])
      << "\nv_max_high = " << fmt(cal.bounds.v_max[1]) << "\ntabu_iterations = " << cal.tabu.iterations
      << "\nstep_fraction = " << fmt(cal.tabu.step_fraction) << "\ntabu_len = " << cal.tabu.tabu_len << "\n\n";
  out << "[output]\ndir = " << c.output_dir << "\nseed = " << c.seed << '\n';
}

}  // namespace imin::config
