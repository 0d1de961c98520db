#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "imin/nn/adam.hpp"
#include "imin/nn/mlp.hpp"
#include "imin/rng.hpp"
#include "imin/traj/downsample.hpp"

namespace imin::indnet {

inline constexpr int kPointDim = static_cast<int>(traj::kPointDim);  // K

struct InDNetConfig {
  int embed_dim = 10;       // M
  int interp_layers = 3;    // L
  int interp_hidden = 64;
  int disc_layers = 2;      // H
  int disc_hidden = 64;
  double lambda = 0.5;
  std::uint64_t seed = 0;
};

// Joint interpolation-discriminator network.
//   h_s = ReLU(x_s W_s + b_s), h_e = ReLU(x_e W_e + b_e)            (K -> M)
//   interp: [h_s, h_e, (t_i - t_s) / (t_e - t_s)] -> ... -> tanh      (2M+1 -> K)
//   disc:   point -> ... -> sigmoid, p = P(expert origin)            (K -> 1)
struct InDNetParams {
  nn::MlpParams embed_start;
  nn::MlpParams embed_end;
  nn::MlpParams interp;
  nn::MlpParams disc;
  double lambda = 0.5;
};

InDNetParams init_indnet(const InDNetConfig& config);

struct Embedding {
  nn::RowVector h_start;
  nn::RowVector h_end;
};

Embedding embed_pair(const InDNetParams& params, const traj::DrivingPoint& start,
                     const traj::DrivingPoint& end);

traj::PointVector interpolate_point(const InDNetParams& params, const traj::DrivingPoint& start,
                                    const traj::DrivingPoint& end, double offset);

double discriminate(const InDNetParams& params, const traj::PointVector& point);

// Batched variants; rows are samples.
nn::Matrix point_matrix(const std::vector<traj::PointVector>& points);
Eigen::VectorXd discriminate_batch(const InDNetParams& params, const nn::Matrix& points);

// An expert-side interpolation query: its output is scored as expert.
struct InterpQuery {
  traj::DrivingPoint start;
  traj::DrivingPoint end;
  double offset = 0.0;
};

enum class Label : int { kGenerated = 0, kExpert = 1 };

struct LabeledPoint {
  traj::PointVector x{};
  Label label = Label::kExpert;
};

struct LossParts {
  double total = 0.0;
  double interp = 0.0;  // L_INT, mean squared error per component
  double disc = 0.0;    // L_D = -E_expert[ln p] - E_generated[ln(1 - p)]
};

struct InDNetGrads {
  nn::MlpGrads embed_start;
  nn::MlpGrads embed_end;
  nn::MlpGrads interp;
  nn::MlpGrads disc;

  static InDNetGrads zeros_like(const InDNetParams& params);
};

// L = lambda * L_INT + (1 - lambda) * L_D. Discriminator positives are the
// raw expert points plus the interpolator outputs for `expert_queries`
// (gradients flow back through the interpolator and embeddings);
// negatives are the raw generated points. Accumulates into `grads` when
// non-null.
LossParts indnet_loss(const InDNetParams& params, const std::vector<traj::InterpTriple>& interp_batch,
                      const std::vector<LabeledPoint>& disc_batch,
                      const std::vector<InterpQuery>& expert_queries, InDNetGrads* grads);

struct InDNetOptimizer {
  nn::Adam embed_start;
  nn::Adam embed_end;
  nn::Adam interp;
  nn::Adam disc;

  InDNetOptimizer() = default;
  InDNetOptimizer(const InDNetParams& params, double lr);
  void step(InDNetParams& params, const InDNetGrads& grads);
};

struct InDNetTrainConfig {
  int batch = 32;
  int epochs = 10;
  double lr = 1e-4;
  int per_gap = 4;  // interior targets per sparse gap
  // Triples per call are subsampled to at most this many (0: no cap), so a
  // near-dense observation pattern does not multiply the epoch length.
  int max_triples = 2048;
};

struct InDNetTrainStats {
  double loss = 0.0;  // mean over minibatches of the last epoch
  double interp = 0.0;
  double disc = 0.0;
  int updates = 0;
};

// One interpolation-discriminator phase: self-supervised triples from the
// generated dense/sparse pair, discriminator positives from the expert
// sparse set (raw and interpolated), negatives from generated dense points.
InDNetTrainStats train_indnet(InDNetParams& params, InDNetOptimizer& opt,
                              const traj::TrajectorySet& generated_dense,
                              const traj::TrajectorySet& generated_sparse,
                              const traj::TrajectorySet& expert_sparse,
                              const InDNetTrainConfig& config, Rng& rng);

// Interpolation-only training (lambda forced to 1); used to pre-train.
InDNetTrainStats train_interpolator(InDNetParams& params, InDNetOptimizer& opt,
                                    const std::vector<traj::InterpTriple>& triples,
                                    const InDNetTrainConfig& config, Rng& rng);

// Largest gap between consecutive sparse points, at least `dt`.
double max_gap(const traj::TrajectorySet& sparse);

// Fills the dt grid strictly between consecutive observed points; the
// observed points are kept bit-exactly. When `scaler` is given, lane_pos
// and odometer of filled points are recovered from the position feature.
traj::Trajectory interpolate_trajectory(const InDNetParams& params, const traj::Trajectory& sparse,
                                        double dt, const sim::FeatureScaler* scaler = nullptr);
// Trajectories with fewer than two points are passed through unchanged.
traj::TrajectorySet interpolate_set(const InDNetParams& params, const traj::TrajectorySet& sparse,
                                    const sim::FeatureScaler* scaler = nullptr);

// Every dt-grid interior query of a sparse set.
std::vector<InterpQuery> interior_queries(const traj::TrajectorySet& sparse);

void save_indnet(const InDNetParams& params, std::ostream& out);
InDNetParams load_indnet(std::istream& in);

}  // namespace imin::indnet
