#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "crtlab/rng.hpp"

namespace crt {

/// Time-gridded real sample path. Times are non-negative and strictly
/// increasing; values are finite.
struct Path {
    std::vector<double> times;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }

    /// Throws DataError when the invariants do not hold.
    void validate() const;
};

/// Two one-sided halves glued at time 0. `backward` holds the process at
/// negative times, indexed by the absolute value of time, so
/// value(-u) = backward.values at time u.
struct TwoSidedPath {
    Path backward;
    Path forward;

    void validate() const;

    /// Signed grid index: i >= 0 reads forward[i], i < 0 reads backward[-i].
    double value(std::ptrdiff_t i) const;
    double time(std::ptrdiff_t i) const;
    std::ptrdiff_t first_index() const { return -static_cast<std::ptrdiff_t>(backward.size()) + 1; }
    std::ptrdiff_t last_index() const { return static_cast<std::ptrdiff_t>(forward.size()) - 1; }
};

/// Brownian bridge from 0 to 0 on [0, duration], sampled on `grid_points`
/// equally spaced times (grid_points >= 2, endpoints included).
Path sample_brownian_bridge(std::size_t grid_points, double duration, RngSeed seed);

/// Normalized Brownian excursion on [0, 1] with `grid_points` equally spaced
/// samples: Vervaat transform of a bridge with the same seed (cyclic shift at
/// the leftmost argmin). Endpoints are exactly 0, all values >= 0.
Path sample_excursion(std::size_t grid_points, RngSeed seed);

/// Bessel process of dimension 3 started at 0, as the norm of a 3-d
/// Brownian motion, on n_steps equal steps over [0, horizon].
Path sample_bessel3(std::size_t n_steps, double horizon, RngSeed seed);

/// X_t = R_t for t >= 0 and R'_{-t} for t < 0 with R, R' independent
/// Bessel-3 processes drawn from sub-streams 1 and 2 of `seed`.
TwoSidedPath sample_two_sided_X(std::size_t n_steps_per_side, double horizon, RngSeed seed);

/// Euler-Maruyama grid: horizon must be an integer multiple of step.
struct SdeGrid {
    double horizon = 1.0;
    double step = 1e-3;

    std::size_t steps() const;
};

/// Squared Bessel process dZ = 2 sqrt(Z) dB + dim dt, full truncation
/// (state clipped to 0 inside the square root; reported values clipped too).
Path sample_squared_bessel(double dim, double z0, SdeGrid grid, RngSeed seed);

using DriftFunction = std::function<double(double)>;

/// Y_t = Y_0 + 2 int sqrt(Y) dB + t + 2 int g(Y) ds with the same driving
/// noise as sample_squared_bessel for equal seeds. g must be non-negative;
/// a negative evaluation raises InvalidParameter.
Path integrate_sde_Y(const DriftFunction& g, double y0, SdeGrid grid, RngSeed seed);

/// Drift correction for the squared radial part of the infinite loop in H^3
/// (g identically 1, which makes Y a dimension-3 squared Bessel process).
double h3_loop_drift(double y);

/// Y (from integrate_sde_Y) and Z (squared Bessel of dimension `dim`)
/// driven by identical Brownian increments. Requires y0 >= z0.
std::pair<Path, Path> coupled_Y_vs_squared_bessel(const DriftFunction& g, double dim, double y0,
                                                  double z0, SdeGrid grid, RngSeed seed);

}  // namespace crt
