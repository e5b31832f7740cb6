#include "crtlab/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crtlab/error.hpp"

namespace crt {
namespace {

std::vector<double> uniform_times(std::size_t points, double duration) {
    std::vector<double> times(points);
    const double dt = duration / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) times[i] = dt * static_cast<double>(i);
    times.back() = duration;
    return times;
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidParameter(std::string(name) + " must be positive and finite");
}

// Shared Euler-Maruyama loop: dX = 2 sqrt(X+) dB + c(X+) dt. Keeping one
// loop for both the squared Bessel and the Y equation makes equal drift
// coefficients produce bit-identical paths.
template <typename Coefficient>
Path integrate_full_truncation(double x0, SdeGrid grid, RngSeed seed, Coefficient&& coefficient) {
    const std::size_t n = grid.steps();
    Path path;
    path.times.resize(n + 1);
    path.values.resize(n + 1);
    Rng rng(seed);
    const double sqrt_step = std::sqrt(grid.step);
    double state = x0;
    path.times[0] = 0.0;
    path.values[0] = std::max(state, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double clipped = std::max(state, 0.0);
        const double noise = rng.normal() * sqrt_step;
        state = state + 2.0 * std::sqrt(clipped) * noise + coefficient(clipped) * grid.step;
        path.times[i] = grid.step * static_cast<double>(i);
        path.values[i] = std::max(state, 0.0);
    }
    return path;
}

}  // namespace

void Path::validate() const {
    if (times.size() != values.size()) throw DataError("path: times and values differ in length");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(values[i]) || !std::isfinite(times[i]))
            throw DataError("path: non-finite entry at index " + std::to_string(i));
        if (times[i] < 0.0) throw DataError("path: negative time");
        if (i > 0 && !(times[i] > times[i - 1])) throw DataError("path: times not increasing");
    }
}

void TwoSidedPath::validate() const {
    backward.validate();
    forward.validate();
    if (backward.size() == 0 || forward.size() == 0) throw DataError("two-sided path: empty half");
    if (backward.values[0] != 0.0 || forward.values[0] != 0.0 || backward.times[0] != 0.0 ||
        forward.times[0] != 0.0)
        throw DataError("two-sided path: halves must start at value 0, time 0");
}

double TwoSidedPath::value(std::ptrdiff_t i) const {
    return i >= 0 ? forward.values.at(static_cast<std::size_t>(i))
                  : backward.values.at(static_cast<std::size_t>(-i));
}

double TwoSidedPath::time(std::ptrdiff_t i) const {
    return i >= 0 ? forward.times.at(static_cast<std::size_t>(i))
                  : -backward.times.at(static_cast<std::size_t>(-i));
}

Path sample_brownian_bridge(std::size_t grid_points, double duration, RngSeed seed) {
    if (grid_points < 2) throw InvalidParameter("bridge: need at least 2 grid points");
    require_positive(duration, "bridge duration");
    Path path;
    path.times = uniform_times(grid_points, duration);
    path.values.assign(grid_points, 0.0);
    Rng rng(seed);
    const double sd = std::sqrt(duration / static_cast<double>(grid_points - 1));
    for (std::size_t i = 1; i < grid_points; ++i)
        path.values[i] = path.values[i - 1] + sd * rng.normal();
    const double end = path.values.back();
    const double last = static_cast<double>(grid_points - 1);
    for (std::size_t i = 1; i + 1 < grid_points; ++i)
        path.values[i] -= end * (static_cast<double>(i) / last);
    path.values.back() = 0.0;
    return path;
}

Path sample_excursion(std::size_t grid_points, RngSeed seed) {
    if (grid_points < 2) throw InvalidParameter("excursion: need at least 2 grid points");
    const Path bridge = sample_brownian_bridge(grid_points, 1.0, seed);
    const std::size_t period = grid_points - 1;
    // min_element returns the first minimum, which is the tie rule we want.
    const auto first = bridge.values.begin();
    const std::size_t pivot =
        static_cast<std::size_t>(std::min_element(first, first + static_cast<std::ptrdiff_t>(period)) - first);
    const double floor = bridge.values[pivot];
    Path excursion;
    excursion.times = bridge.times;
    excursion.values.resize(grid_points);
    for (std::size_t i = 0; i < period; ++i)
        excursion.values[i] = bridge.values[(pivot + i) % period] - floor;
    excursion.values[0] = 0.0;
    excursion.values[period] = 0.0;
    return excursion;
}

Path sample_bessel3(std::size_t n_steps, double horizon, RngSeed seed) {
    if (n_steps < 1) throw InvalidParameter("bessel3: need at least one step");
    require_positive(horizon, "bessel3 horizon");
    Path path;
    path.times = uniform_times(n_steps + 1, horizon);
    path.values.assign(n_steps + 1, 0.0);
    Rng rng(seed);
    const double sd = std::sqrt(horizon / static_cast<double>(n_steps));
    double x = 0.0, y = 0.0, z = 0.0;
    for (std::size_t i = 1; i <= n_steps; ++i) {
        x += sd * rng.normal();
        y += sd * rng.normal();
        z += sd * rng.normal();
        path.values[i] = std::sqrt(x * x + y * y + z * z);
    }
    return path;
}

TwoSidedPath sample_two_sided_X(std::size_t n_steps_per_side, double horizon, RngSeed seed) {
    TwoSidedPath path;
    path.forward = sample_bessel3(n_steps_per_side, horizon, derive_seed(seed, 1));
    path.backward = sample_bessel3(n_steps_per_side, horizon, derive_seed(seed, 2));
    return path;
}

std::size_t SdeGrid::steps() const {
    require_positive(step, "SDE step");
    require_positive(horizon, "SDE horizon");
    const double ratio = horizon / step;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio))
        throw InvalidParameter("SDE horizon must be a positive integer multiple of the step");
    return static_cast<std::size_t>(rounded);
}

Path sample_squared_bessel(double dim, double z0, SdeGrid grid, RngSeed seed) {
    if (!(dim > 0.0)) throw InvalidParameter("squared Bessel dimension must be positive");
    if (!(z0 >= 0.0)) throw InvalidParameter("squared Bessel start must be non-negative");
    return integrate_full_truncation(z0, grid, seed, [dim](double) { return dim; });
}

Path integrate_sde_Y(const DriftFunction& g, double y0, SdeGrid grid, RngSeed seed) {
    if (!g) throw InvalidParameter("drift function is empty");
    if (!(y0 >= 0.0)) throw InvalidParameter("Y start must be non-negative");
    return integrate_full_truncation(y0, grid, seed, [&g](double y) {
        const double value = g(y);
        if (!(value >= 0.0))
            throw InvalidParameter("drift g returned a negative or NaN value at y=" + std::to_string(y));
        return 1.0 + 2.0 * value;
    });
}

double h3_loop_drift(double) { return 1.0; }

std::pair<Path, Path> coupled_Y_vs_squared_bessel(const DriftFunction& g, double dim, double y0,
                                                  double z0, SdeGrid grid, RngSeed seed) {
    if (y0 < z0) throw InvalidParameter("comparison coupling needs y0 >= z0");
    return {integrate_sde_Y(g, y0, grid, seed), sample_squared_bessel(dim, z0, grid, seed)};
}

}  // namespace crt
