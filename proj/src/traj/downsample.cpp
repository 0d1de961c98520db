#include "imin/traj/downsample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "imin/error.hpp"
#include "imin/rng.hpp"

namespace imin::traj {

namespace {

Trajectory select(const Trajectory& dense, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  Trajectory out;
  out.vehicle_id = dense.vehicle_id;
  out.density = Density::kSparse;
  out.entry_time = dense.entry_time;
  out.exit_time = dense.exit_time;
  out.points.reserve(idx.size());
  for (std::size_t i : idx) out.points.push_back(dense.points[i]);
  return out;
}

}  // namespace

void validate(const SamplingStrategy& strategy) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FixedInterval>) {
          require(s.k >= 1, "FixedInterval k must be >= 1");
        } else if constexpr (std::is_same_v<T, AtLocations>) {
          require(!s.cameras.empty(), "AtLocations needs at least one camera");
          for (const auto& c : s.cameras) require(c.radius > 0.0, "camera radius must be > 0");
        } else {
          require(s.rate > 0.0 && s.rate <= 1.0, "random sampling rate must be in (0, 1]");
        }
      },
      strategy);
}

bool operator==(const Camera& a, const Camera& b) {
  return a.lane == b.lane && a.position == b.position && a.radius == b.radius;
}

bool same_strategy(const SamplingStrategy& a, const SamplingStrategy& b) {
  if (a.index() != b.index()) return false;
  if (const auto* fa = std::get_if<FixedInterval>(&a)) return fa->k == std::get<FixedInterval>(b).k;
  if (const auto* la = std::get_if<AtLocations>(&a)) return la->cameras == std::get<AtLocations>(b).cameras;
  const auto& ra = std::get<RandomRate>(a);
  const auto& rb = std::get<RandomRate>(b);
  return ra.rate == rb.rate && ra.seed == rb.seed;
}

AtLocations ring_cameras(int lane, double ring_length, int n, double radius) {
  require(n >= 1, "need at least one camera");
  AtLocations s;
  const double spacing = ring_length / n;
  for (int i = 0; i < n; ++i) s.cameras.push_back({lane, spacing * (i + 0.5), radius});
  return s;
}

Trajectory downsample(const Trajectory& dense, const SamplingStrategy& strategy) {
  validate(strategy);
  require(!dense.points.empty(), "cannot downsample an empty trajectory");
  require(dense.density == Density::kDense, "downsample expects a dense trajectory");
  const std::size_t n = dense.points.size();
  std::vector<std::size_t> keep;

  if (const auto* fixed = std::get_if<FixedInterval>(&strategy)) {
    for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(fixed->k)) keep.push_back(i);
    keep.push_back(n - 1);
  } else if (const auto* random = std::get_if<RandomRate>(&strategy)) {
    Rng rng(derive_seed(random->seed, static_cast<std::uint64_t>(dense.vehicle_id)));
    for (std::size_t i = 0; i < n; ++i) {
      if (uniform01(rng) < random->rate) keep.push_back(i);
    }
    keep.push_back(0);
    keep.push_back(n - 1);
  } else {
    // One point per pass through each camera's radius: the nearest one.
    for (const auto& cam : std::get<AtLocations>(strategy).cameras) {
      std::size_t best = n;
      double best_d = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        bool inside = false;
        double d = 0.0;
        if (i < n) {
          const auto& p = dense.points[i];
          d = std::abs(p.lane_pos - cam.position);
          inside = p.lane == cam.lane && d <= cam.radius;
        }
        if (inside) {
          if (best == n || d < best_d) {
            best = i;
            best_d = d;
          }
        } else if (best != n) {
          keep.push_back(best);
          best = n;
        }
      }
    }
  }
  return select(dense, std::move(keep));
}

TrajectorySet downsample(const TrajectorySet& dense, const SamplingStrategy& strategy) {
  TrajectorySet out;
  out.provenance = dense.provenance;
  out.density = Density::kSparse;
  out.dt = dense.dt;
  out.horizon = dense.horizon;
  for (const auto& t : dense.trajectories) {
    if (t.points.empty()) continue;
    out.trajectories.push_back(downsample(t, strategy));
  }
  return out;
}

std::vector<InterpTriple> make_triples(const TrajectorySet& dense, const TrajectorySet& sparse,
                                       int per_gap, std::uint64_t seed) {
  require(per_gap >= 0, "per_gap must be >= 0");
  std::vector<InterpTriple> out;
  for (const auto& sp : sparse.trajectories) {
    const Trajectory* dn = dense.find(sp.vehicle_id);
    require(dn != nullptr, "make_triples: vehicle " + std::to_string(sp.vehicle_id) +
                               " missing from the dense set");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(sp.vehicle_id)));
    for (std::size_t g = 0; g + 1 < sp.points.size(); ++g) {
      const DrivingPoint& s = sp.points[g];
      const DrivingPoint& e = sp.points[g + 1];
      std::vector<std::size_t> interior;
      for (std::size_t i = 0; i < dn->points.size(); ++i) {
        const double t = dn->points[i].t;
        if (t > s.t && t < e.t) interior.push_back(i);
      }
      // Partial Fisher-Yates: first `take` entries become the draw.
      const std::size_t take = std::min(interior.size(), static_cast<std::size_t>(per_gap));
      for (std::size_t k = 0; k < take; ++k) {
        const auto r = k + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(interior.size() - k));
        std::swap(interior[k], interior[std::min(r, interior.size() - 1)]);
      }
      interior.resize(take);
      std::sort(interior.begin(), interior.end());
      out.push_back({s, e, 0.0, s});
      for (std::size_t i : interior) {
        const DrivingPoint& tgt = dn->points[i];
        out.push_back({s, e, tgt.t - s.t, tgt});
      }
      out.push_back({s, e, e.t - s.t, e});
    }
  }
  return out;
}

}  // namespace imin::traj
