#include "imin/indnet/indnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "imin/error.hpp"

namespace imin::indnet {

namespace {

nn::MlpParams make_mlp(std::vector<int> widths, nn::Activation hidden, nn::Activation last,
                       std::uint64_t seed) {
  nn::MlpSpec spec;
  spec.widths = std::move(widths);
  spec.activations.assign(spec.widths.size() - 2, hidden);
  spec.activations.push_back(last);
  spec.seed = seed;
  return nn::init_mlp(spec);
}

nn::RowVector row(const traj::PointVector& f) {
  nn::RowVector r(kPointDim);
  for (int i = 0; i < kPointDim; ++i) r(i) = f[static_cast<std::size_t>(i)];
  return r;
}

// Embeds start/end rows and runs the interpolator on every query.
struct InterpPass {
  nn::ForwardCache es, ee, ip;
  nn::Matrix out;
};

// `fractions` holds (t_i - t_s) / (t_e - t_s) per query.
void run_interp(const InDNetParams& p, const nn::Matrix& starts, const nn::Matrix& ends,
                const Eigen::VectorXd& fractions, InterpPass& pass) {
  const nn::Matrix hs = nn::forward(p.embed_start, starts, &pass.es);
  const nn::Matrix he = nn::forward(p.embed_end, ends, &pass.ee);
  nn::Matrix x(starts.rows(), hs.cols() + he.cols() + 1);
  x << hs, he, fractions;
  pass.out = nn::forward(p.interp, x, &pass.ip);
}

double gap_fraction(const traj::DrivingPoint& start, const traj::DrivingPoint& end, double offset) {
  require(offset >= 0.0 && std::isfinite(offset), "interpolation offset must be >= 0");
  const double gap = end.t - start.t;
  require(offset <= gap + 1e-9, "interpolation offset exceeds the gap");
  return gap > 0.0 ? offset / gap : 0.0;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

InDNetParams init_indnet(const InDNetConfig& c) {
  require(c.embed_dim >= 1 && c.interp_layers >= 1 && c.interp_hidden >= 1 && c.disc_layers >= 1 &&
              c.disc_hidden >= 1,
          "InDNet sizes must be >= 1");
  require(c.lambda >= 0.0 && c.lambda <= 1.0, "lambda must be in [0, 1]");
  InDNetParams p;
  p.embed_start = make_mlp({kPointDim, c.embed_dim}, nn::Activation::kRelu, nn::Activation::kRelu,
                           derive_seed(c.seed, 1));
  p.embed_end = make_mlp({kPointDim, c.embed_dim}, nn::Activation::kRelu, nn::Activation::kRelu,
                         derive_seed(c.seed, 2));
  // W_0 maps the embedded pair into the first hidden layer, L - 1 more
  // ReLU layers follow, then the tanh output layer.
  std::vector<int> iw{2 * c.embed_dim + 1};
  for (int i = 0; i < c.interp_layers; ++i) iw.push_back(c.interp_hidden);
  iw.push_back(kPointDim);
  p.interp = make_mlp(iw, nn::Activation::kRelu, nn::Activation::kTanh, derive_seed(c.seed, 3));
  std::vector<int> dw{kPointDim};
  for (int i = 0; i + 1 < c.disc_layers; ++i) dw.push_back(c.disc_hidden);
  dw.push_back(1);
  p.disc = make_mlp(dw, nn::Activation::kRelu, nn::Activation::kSigmoid, derive_seed(c.seed, 4));
  p.lambda = c.lambda;
  return p;
}

Embedding embed_pair(const InDNetParams& params, const traj::DrivingPoint& start,
                     const traj::DrivingPoint& end) {
  return {nn::forward(params.embed_start, row(start.features())),
          nn::forward(params.embed_end, row(end.features()))};
}

traj::PointVector interpolate_point(const InDNetParams& params, const traj::DrivingPoint& start,
                                    const traj::DrivingPoint& end, double offset) {
  InterpPass pass;
  Eigen::VectorXd off(1);
  off(0) = gap_fraction(start, end, offset);
  run_interp(params, row(start.features()), row(end.features()), off, pass);
  traj::PointVector f{};
  for (int i = 0; i < kPointDim; ++i) f[static_cast<std::size_t>(i)] = pass.out(0, i);
  return f;
}

double discriminate(const InDNetParams& params, const traj::PointVector& point) {
  return nn::forward(params.disc, row(point))(0, 0);
}

nn::Matrix point_matrix(const std::vector<traj::PointVector>& points) {
  nn::Matrix m(static_cast<Eigen::Index>(points.size()), kPointDim);
  for (std::size_t i = 0; i < points.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = row(points[i]);
  return m;
}

Eigen::VectorXd discriminate_batch(const InDNetParams& params, const nn::Matrix& points) {
  return nn::forward(params.disc, points).col(0);
}

InDNetGrads InDNetGrads::zeros_like(const InDNetParams& p) {
  return {nn::MlpGrads::zeros_like(p.embed_start), nn::MlpGrads::zeros_like(p.embed_end),
          nn::MlpGrads::zeros_like(p.interp), nn::MlpGrads::zeros_like(p.disc)};
}

LossParts indnet_loss(const InDNetParams& params, const std::vector<traj::InterpTriple>& interp_batch,
                      const std::vector<LabeledPoint>& disc_batch,
                      const std::vector<InterpQuery>& expert_queries, InDNetGrads* grads) {
  require(!interp_batch.empty() || !disc_batch.empty() || !expert_queries.empty(),
          "indnet_loss needs a non-empty batch");
  const double lambda = params.lambda;
  const auto nt = static_cast<Eigen::Index>(interp_batch.size());
  const auto nq = static_cast<Eigen::Index>(expert_queries.size());
  const Eigen::Index ni = nt + nq;

  // Interpolator pass over training triples followed by expert queries.
  InterpPass pass;
  nn::Matrix targets(nt, kPointDim);
  if (ni > 0) {
    nn::Matrix starts(ni, kPointDim), ends(ni, kPointDim);
    Eigen::VectorXd offsets(ni);
    for (Eigen::Index i = 0; i < nt; ++i) {
      const auto& tr = interp_batch[static_cast<std::size_t>(i)];
      starts.row(i) = row(tr.start.features());
      ends.row(i) = row(tr.end.features());
      offsets(i) = gap_fraction(tr.start, tr.end, tr.offset);
      targets.row(i) = row(tr.target.features());
    }
    for (Eigen::Index i = 0; i < nq; ++i) {
      const auto& q = expert_queries[static_cast<std::size_t>(i)];
      starts.row(nt + i) = row(q.start.features());
      ends.row(nt + i) = row(q.end.features());
      offsets(nt + i) = gap_fraction(q.start, q.end, q.offset);
    }
    run_interp(params, starts, ends, offsets, pass);
  }

  LossParts parts;
  nn::Matrix d_interp_out = nn::Matrix::Zero(ni, kPointDim);
  if (nt > 0) {
    const nn::Matrix diff = pass.out.topRows(nt) - targets;
    const double denom = static_cast<double>(nt * kPointDim);
    parts.interp = diff.squaredNorm() / denom;
    d_interp_out.topRows(nt) = lambda * 2.0 * diff / denom;
  }

  // Discriminator rows: interpolated expert queries, then labeled points.
  const auto nd = static_cast<Eigen::Index>(disc_batch.size());
  int n_pos = static_cast<int>(nq);
  int n_neg = 0;
  for (const auto& lp : disc_batch) {
    if (lp.label == Label::kExpert) {
      ++n_pos;
    } else if (lp.label == Label::kGenerated) {
      ++n_neg;
    } else {
      throw ValidationError("discriminator labels must be expert or generated");
    }
  }
  if (nq + nd > 0) {
    nn::Matrix x(nq + nd, kPointDim);
    if (nq > 0) x.topRows(nq) = pass.out.bottomRows(nq);
    for (Eigen::Index i = 0; i < nd; ++i) x.row(nq + i) = row(disc_batch[static_cast<std::size_t>(i)].x);
    nn::ForwardCache dc;
    const nn::Matrix p = nn::forward(params.disc, x, &dc);
    nn::Matrix dp = nn::Matrix::Zero(p.rows(), 1);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const bool expert = i < nq || disc_batch[static_cast<std::size_t>(i - nq)].label == Label::kExpert;
      const double pi = p(i, 0);
      if (expert) {
        parts.disc -= std::log(std::max(pi, 1e-300)) / n_pos;
        dp(i, 0) = -(1.0 - lambda) / (n_pos * std::max(pi, 1e-12));
      } else {
        parts.disc -= std::log(std::max(1.0 - pi, 1e-300)) / n_neg;
        dp(i, 0) = (1.0 - lambda) / (n_neg * std::max(1.0 - pi, 1e-12));
      }
    }
    if (grads != nullptr) {
      const nn::Matrix dx = nn::backward(params.disc, dc, dp, grads->disc);
      if (nq > 0) d_interp_out.bottomRows(nq) += dx.topRows(nq);
    }
  }
  parts.total = lambda * parts.interp + (1.0 - lambda) * parts.disc;

  if (grads != nullptr && ni > 0) {
    const nn::Matrix dx = nn::backward(params.interp, pass.ip, d_interp_out, grads->interp);
    const Eigen::Index m = params.embed_start.output_dim();
    nn::backward(params.embed_start, pass.es, dx.leftCols(m), grads->embed_start);
    nn::backward(params.embed_end, pass.ee, dx.middleCols(m, params.embed_end.output_dim()), grads->embed_end);
  }
  return parts;
}

InDNetOptimizer::InDNetOptimizer(const InDNetParams& params, double lr)
    : embed_start(params.embed_start, {lr}),
      embed_end(params.embed_end, {lr}),
      interp(params.interp, {lr}),
      disc(params.disc, {lr}) {}

void InDNetOptimizer::step(InDNetParams& params, const InDNetGrads& grads) {
  embed_start.step(params.embed_start, grads.embed_start);
  embed_end.step(params.embed_end, grads.embed_end);
  interp.step(params.interp, grads.interp);
  disc.step(params.disc, grads.disc);
}

double max_gap(const traj::TrajectorySet& sparse) {
  double g = sparse.dt;
  for (const auto& t : sparse.trajectories) {
    for (std::size_t i = 1; i < t.points.size(); ++i) g = std::max(g, t.points[i].t - t.points[i - 1].t);
  }
  return g;
}

std::vector<InterpQuery> interior_queries(const traj::TrajectorySet& sparse) {
  std::vector<InterpQuery> out;
  for (const auto& t : sparse.trajectories) {
    for (std::size_t i = 1; i < t.points.size(); ++i) {
      const auto& s = t.points[i - 1];
      const auto& e = t.points[i];
      const auto n = std::llround((e.t - s.t) / sparse.dt);
      for (long long k = 1; k < n; ++k) out.push_back({s, e, static_cast<double>(k) * sparse.dt});
    }
  }
  return out;
}

namespace {

std::size_t draw(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

void shuffle(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[draw(rng, i)]);
}

}  // namespace

InDNetTrainStats train_indnet(InDNetParams& params, InDNetOptimizer& opt,
                              const traj::TrajectorySet& generated_dense,
                              const traj::TrajectorySet& generated_sparse,
                              const traj::TrajectorySet& expert_sparse,
                              const InDNetTrainConfig& config, Rng& rng) {
  require(config.batch >= 2 && config.epochs >= 1, "InDNet batch must be >= 2 and epochs >= 1");
  require(generated_dense.num_points() > 0 && expert_sparse.num_points() > 0,
          "InDNet training needs non-empty generated and expert sets");

  auto triples = traj::make_triples(generated_dense, generated_sparse, config.per_gap, rng());
  if (config.max_triples > 0 && triples.size() > static_cast<std::size_t>(config.max_triples)) {
    std::vector<std::size_t> pick(triples.size());
    std::iota(pick.begin(), pick.end(), 0);
    shuffle(pick, rng);
    pick.resize(static_cast<std::size_t>(config.max_triples));
    std::sort(pick.begin(), pick.end());
    std::vector<traj::InterpTriple> kept;
    kept.reserve(pick.size());
    for (std::size_t i : pick) kept.push_back(triples[i]);
    triples = std::move(kept);
  }
  const auto queries = interior_queries(expert_sparse);
  std::vector<traj::PointVector> expert_raw, generated;
  for (const auto& t : expert_sparse.trajectories) {
    for (const auto& p : t.points) expert_raw.push_back(p.features());
  }
  for (const auto& t : generated_dense.trajectories) {
    for (const auto& p : t.points) generated.push_back(p.features());
  }

  const std::size_t half = static_cast<std::size_t>(config.batch) / 2;
  const std::size_t n_batches =
      std::max<std::size_t>(1, (triples.size() + static_cast<std::size_t>(config.batch) - 1) /
                                   static_cast<std::size_t>(config.batch));
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);

  InDNetTrainStats stats;
  InDNetGrads grads = InDNetGrads::zeros_like(params);
  std::vector<traj::InterpTriple> tb;
  std::vector<LabeledPoint> db;
  std::vector<InterpQuery> qb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    double loss = 0.0, li = 0.0, ld = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      tb.clear();
      db.clear();
      qb.clear();
      for (std::size_t k = b * config.batch; k < std::min(order.size(), (b + 1) * config.batch); ++k) {
        tb.push_back(triples[order[k]]);
      }
      // Positives: uniform over the densified expert set, i.e. observed
      // points and interpolated points in their natural proportion.
      for (std::size_t k = 0; k < half; ++k) {
        const std::size_t j = draw(rng, expert_raw.size() + queries.size());
        if (j < expert_raw.size()) {
          db.push_back({expert_raw[j], Label::kExpert});
        } else {
          qb.push_back(queries[j - expert_raw.size()]);
        }
      }
      for (std::size_t k = 0; k < half; ++k) db.push_back({generated[draw(rng, generated.size())], Label::kGenerated});
      grads.embed_start.set_zero();
      grads.embed_end.set_zero();
      grads.interp.set_zero();
      grads.disc.set_zero();
      const LossParts parts = indnet_loss(params, tb, db, qb, &grads);
      opt.step(params, grads);
      ++stats.updates;
      loss += parts.total;
      li += parts.interp;
      ld += parts.disc;
    }
    stats.loss = loss / n_batches;
    stats.interp = li / n_batches;
    stats.disc = ld / n_batches;
  }
  return stats;
}

InDNetTrainStats train_interpolator(InDNetParams& params, InDNetOptimizer& opt,
                                    const std::vector<traj::InterpTriple>& triples,
                                    const InDNetTrainConfig& config, Rng& rng) {
  require(!triples.empty(), "interpolator training needs triples");
  require(config.batch >= 1 && config.epochs >= 1, "batch and epochs must be >= 1");
  const double saved_lambda = params.lambda;
  params.lambda = 1.0;
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = static_cast<std::size_t>(config.batch);
  InDNetTrainStats stats;
  InDNetGrads grads = InDNetGrads::zeros_like(params);
  std::vector<traj::InterpTriple> tb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    double li = 0.0;
    std::size_t nb = 0;
    for (std::size_t b = 0; b < order.size(); b += bs, ++nb) {
      tb.clear();
      for (std::size_t k = b; k < std::min(order.size(), b + bs); ++k) tb.push_back(triples[order[k]]);
      grads.embed_start.set_zero();
      grads.embed_end.set_zero();
      grads.interp.set_zero();
      grads.disc.set_zero();
      li += indnet_loss(params, tb, {}, {}, &grads).interp;
      opt.embed_start.step(params.embed_start, grads.embed_start);
      opt.embed_end.step(params.embed_end, grads.embed_end);
      opt.interp.step(params.interp, grads.interp);
      ++stats.updates;
    }
    stats.interp = li / static_cast<double>(nb);
    stats.loss = stats.interp;
  }
  params.lambda = saved_lambda;
  return stats;
}

traj::Trajectory interpolate_trajectory(const InDNetParams& params, const traj::Trajectory& sparse,
                                        double dt, const sim::FeatureScaler* scaler) {
  require(sparse.points.size() >= 2, "interpolation needs at least two observed points");
  require(dt > 0.0, "dt must be > 0");
  traj::Trajectory out;
  out.vehicle_id = sparse.vehicle_id;
  out.density = traj::Density::kDense;
  out.entry_time = sparse.entry_time;
  out.exit_time = sparse.exit_time;
  out.points.push_back(sparse.points.front());
  for (std::size_t i = 1; i < sparse.points.size(); ++i) {
    const auto& s = sparse.points[i - 1];
    const auto& e = sparse.points[i];
    const auto n = std::llround((e.t - s.t) / dt);
    require(n >= 1 && std::abs(static_cast<double>(n) * dt - (e.t - s.t)) < 1e-6,
            "observed timestamps must lie on the dt grid");
    for (long long k = 1; k < n; ++k) {
      const double off = static_cast<double>(k) * dt;
      traj::DrivingPoint p = traj::DrivingPoint::from_features(interpolate_point(params, s, e, off), s.t + off);
      p.lane = s.lane;
      const double frac = off / (e.t - s.t);
      if (scaler != nullptr && s.lane == e.lane) {
        p.lane_pos = scaler->denormalize(p.state).position;
        p.odometer = s.odometer + (p.lane_pos - s.lane_pos);
      } else {
        p.lane_pos = s.lane_pos + frac * (e.lane_pos - s.lane_pos);
        p.odometer = s.odometer + frac * (e.odometer - s.odometer);
      }
      out.points.push_back(p);
    }
    out.points.push_back(e);
  }
  return out;
}

traj::TrajectorySet interpolate_set(const InDNetParams& params, const traj::TrajectorySet& sparse,
                                    const sim::FeatureScaler* scaler) {
  traj::TrajectorySet out;
  out.provenance = sparse.provenance;
  out.density = traj::Density::kDense;
  out.dt = sparse.dt;
  out.horizon = sparse.horizon;
  for (const auto& t : sparse.trajectories) {
    if (t.points.size() >= 2) {
      out.trajectories.push_back(interpolate_trajectory(params, t, sparse.dt, scaler));
    } else {
      traj::Trajectory copy = t;
      copy.density = traj::Density::kDense;
      out.trajectories.push_back(std::move(copy));
    }
  }
  return out;
}

void save_indnet(const InDNetParams& params, std::ostream& out) {
  out << "indnet lambda " << fmt(params.lambda) << '\n';
  nn::save_mlp(params.embed_start, out);
  nn::save_mlp(params.embed_end, out);
  nn::save_mlp(params.interp, out);
  nn::save_mlp(params.disc, out);
}

InDNetParams load_indnet(std::istream& in) {
  std::string tag, k1;
  InDNetParams p;
  if (!(in >> tag >> k1 >> p.lambda) || tag != "indnet" || k1 != "lambda") {
    throw ValidationError("not an InDNet checkpoint");
  }
  p.embed_start = nn::load_mlp(in);
  p.embed_end = nn::load_mlp(in);
  p.interp = nn::load_mlp(in);
  p.disc = nn::load_mlp(in);
  require(p.embed_start.input_dim() == kPointDim && p.embed_end.input_dim() == kPointDim &&
              p.interp.input_dim() == p.embed_start.output_dim() + p.embed_end.output_dim() + 1 &&
              p.interp.output_dim() == kPointDim && p.disc.input_dim() == kPointDim &&
              p.disc.output_dim() == 1,
          "InDNet checkpoint has inconsistent shapes");
  return p;
}

}  // namespace imin::indnet
