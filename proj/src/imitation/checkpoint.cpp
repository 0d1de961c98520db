#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "imin/error.hpp"
#include "imin/imitation/imitation.hpp"
#include "imin/traj/csv.hpp"

namespace imin::imitation {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return in;
}

}  // namespace

void write_curve_csv(const std::vector<CurveRow>& curve, std::ostream& out) {
  out << "iteration,rmse_time,rmse_pos,mean_reward,kl\n";
  for (const auto& r : curve) {
    out << r.iteration << ',' << fmt(r.rmse_time) << ',' << fmt(r.rmse_pos) << ',' << fmt(r.mean_reward)
        << ',' << fmt(r.kl) << '\n';
  }
}

std::vector<CurveRow> read_curve_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != "iteration,rmse_time,rmse_pos,mean_reward,kl") {
    throw ParseError("bad training-curve header", lineno);
  }
  std::vector<CurveRow> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    CurveRow r;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(ss >> r.iteration >> c1 >> r.rmse_time >> c2 >> r.rmse_pos >> c3 >> r.mean_reward >> c4 >> r.kl) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
      throw ParseError("malformed training-curve row", lineno);
    }
    out.push_back(r);
  }
  return out;
}

void save_checkpoint(const TrainState& state, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  {
    auto out = open_out(d / "state.txt");
    out << "method " << method_name(state.method) << "\niteration " << state.iteration << "\nbest_iteration "
        << state.best_iteration << "\nbest_score " << fmt(state.best_score) << '\n';
  }
  {
    auto out = open_out(d / "policy.txt");
    policy::save_policy(state.policy, out);
  }
  {
    auto out = open_out(d / "best_policy.txt");
    policy::save_policy(state.best_policy, out);
  }
  {
    auto out = open_out(d / "policy_opt.txt");
    state.policy_opt.save(out);
  }
  {
    auto out = open_out(d / "net.txt");
    indnet::save_indnet(state.net, out);
  }
  {
    auto out = open_out(d / "net_opt.txt");
    state.net_opt.embed_start.save(out);
    state.net_opt.embed_end.save(out);
    state.net_opt.interp.save(out);
    state.net_opt.disc.save(out);
  }
  {
    auto out = open_out(d / "curve.csv");
    write_curve_csv(state.curve, out);
  }
  if (state.densified) traj::write_csv(*state.densified, (d / "densified.csv").string());
}

TrainState load_checkpoint(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path d(dir);
  TrainState s;
  {
    auto in = open_in(d / "state.txt");
    std::string k1, method, k2, k3, k4;
    if (!(in >> k1 >> method >> k2 >> s.iteration >> k3 >> s.best_iteration >> k4 >> s.best_score) ||
        k1 != "method" || k2 != "iteration" || k3 != "best_iteration" || k4 != "best_score") {
      throw ValidationError("malformed checkpoint state in " + dir);
    }
    s.method = method_from_name(method);
  }
  {
    auto in = open_in(d / "policy.txt");
    s.policy = policy::load_policy(in);
  }
  {
    auto in = open_in(d / "best_policy.txt");
    s.best_policy = policy::load_policy(in);
  }
  {
    auto in = open_in(d / "policy_opt.txt");
    s.policy_opt = nn::Adam(s.policy.net, {});
    s.policy_opt.load(in);
  }
  {
    auto in = open_in(d / "net.txt");
    s.net = indnet::load_indnet(in);
  }
  {
    auto in = open_in(d / "net_opt.txt");
    s.net_opt = indnet::InDNetOptimizer(s.net, 1e-3);
    s.net_opt.embed_start.load(in);
    s.net_opt.embed_end.load(in);
    s.net_opt.interp.load(in);
    s.net_opt.disc.load(in);
  }
  {
    auto in = open_in(d / "curve.csv");
    s.curve = read_curve_csv(in);
  }
  if (fs::exists(d / "densified.csv")) s.densified = traj::read_csv((d / "densified.csv").string());
  return s;
}

}  // namespace imin::imitation
