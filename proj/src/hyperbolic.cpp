#include "crtlab/hyperbolic.hpp"

#include <algorithm>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "crtlab/parallel.hpp"
#include "crtlab/stats.hpp"

namespace crt {
namespace {

constexpr double kPi = std::numbers::pi;

double log_sinh(double r) {
    if (r < 1.0) return std::log(std::sinh(r));
    return r + std::log1p(-std::exp(-2.0 * r)) - std::numbers::ln2;
}

// Measure-weighted radial density 4 pi sinh^2(r) p_t(r), in logs.
double log_radial_density(double t, double r) {
    if (r == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(4.0 * kPi) + log_heat_kernel_h3(t, r) + 2.0 * log_sinh(r);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12, &error);
}

// cosh d - 1 for points at radii rho and r whose directions have cosine u.
double cosh_minus_one_polar(double rho, double r, double u) {
    const double s = std::sinh(0.5 * (rho - r));
    return 2.0 * s * s + std::sinh(rho) * std::sinh(r) * (1.0 - u);
}

double arccosh1p(double c) { return std::log1p(c + std::sqrt(c * (c + 2.0))); }

}  // namespace

double log_r_over_sinh(double r) {
    r = std::abs(r);
    if (r < 1e-4) return -r * r / 6.0;
    return std::log(r) - log_sinh(r);
}

double log_heat_kernel_h3(double t, double r) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidParameter("heat kernel time must be positive");
    if (!(r >= 0.0)) throw InvalidParameter("heat kernel distance must be non-negative");
    return -1.5 * std::log(2.0 * kPi * t) - 0.5 * t + log_r_over_sinh(r) - r * r / (2.0 * t);
}

double heat_kernel_h3(double t, double r) { return std::exp(log_heat_kernel_h3(t, r)); }

HeatKernelCheck validate_heat_kernel() {
    HeatKernelCheck check;
    const std::array<double, 3> times{0.1, 1.0, 10.0};
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        const double upper = t + 20.0 * std::sqrt(t) + 10.0;
        const double total = integrate([t](double r) { return std::exp(log_radial_density(t, r)); }, 0.0, upper);
        check.normalization_error[k] = std::abs(total - 1.0);
    }

    const double s = 0.5, t = 0.5;
    const std::array<double, 3> radii{0.5, 1.0, 2.0};
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double r = radii[k];
        const double upper = r + 25.0;
        const double value = integrate(
            [&](double rho) {
                if (rho == 0.0) return 0.0;
                const double weight = 2.0 * kPi * std::exp(2.0 * log_sinh(rho) + log_heat_kernel_h3(s, rho));
                const double inner = integrate(
                    [&](double u) { return heat_kernel_h3(t, arccosh1p(cosh_minus_one_polar(rho, r, u))); }, -1.0,
                    1.0);
                return weight * inner;
            },
            0.0, upper);
        const double target = heat_kernel_h3(s + t, r);
        check.chapman_kolmogorov_error[k] = std::abs(value - target) / target;
    }

    check.passed = true;
    for (double e : check.normalization_error) check.passed = check.passed && e <= 1e-3;
    for (double e : check.chapman_kolmogorov_error) check.passed = check.passed && e <= 1e-3;
    return check;
}

void require_heat_kernel_gate() {
    static std::once_flag once;
    static HeatKernelCheck result;
    std::call_once(once, [] { result = validate_heat_kernel(); });
    if (!result.passed) {
        std::ostringstream msg;
        msg << "heat kernel failed self-validation: normalization errors";
        for (double e : result.normalization_error) msg << ' ' << e;
        msg << "; Chapman-Kolmogorov errors";
        for (double e : result.chapman_kolmogorov_error) msg << ' ' << e;
        throw ValidationGateError(msg.str());
    }
}

std::vector<double> BridgePath::radial_values() const {
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = radial(points[i]);
    return out;
}

void BridgePath::write_csv(std::ostream& out) const {
    out << "time,x0,x1,x2,x3,radial\n" << std::setprecision(17);
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << times[i];
        for (std::size_t j = 0; j < 4; ++j) out << ',' << points[i][j];
        out << ',' << radial(points[i]) << '\n';
    }
    if (!out) throw IoError("failed to write bridge path");
}

namespace {

// Gamma(3/2) = Exp(1) + N^2 / 2.
double gamma_three_halves(Rng& rng) {
    const double n = rng.normal();
    return -std::log1p(-rng.uniform()) + 0.5 * n * n;
}

// s with density proportional to s^2 exp(-s^2 / (2 sigma^2)) on [lower, inf).
// In w = s^2 / (2 sigma^2) this is a Gamma(3/2) tail beyond w0; the tail
// w0 + y is proposed from the mixture bounding sqrt(w0 + y) by
// sqrt(w0) + sqrt(y), which accepts with probability >= 1/sqrt(2).
double chi3_tail(double sigma, double lower, Rng& rng, std::size_t& tries) {
    const double w0 = lower * lower / (2.0 * sigma * sigma);
    if (w0 < 1.0) {
        for (;;) {
            ++tries;
            const double w = gamma_three_halves(rng);
            if (w >= w0) return sigma * std::sqrt(2.0 * w);
        }
    }
    const double weight_exp = std::sqrt(w0);
    const double weight_gamma = std::sqrt(std::numbers::pi) / 2.0;
    for (;;) {
        ++tries;
        const bool from_exp = rng.uniform() * (weight_exp + weight_gamma) < weight_exp;
        const double y = from_exp ? -std::log1p(-rng.uniform()) : gamma_three_halves(rng);
        if (rng.uniform() * (std::sqrt(w0) + std::sqrt(y)) < std::sqrt(w0 + y))
            return sigma * std::sqrt(2.0 * (w0 + y));
    }
}

// Normal(0, sigma^2) conditioned on [-bound, bound].
double truncated_normal(double sigma, double bound, Rng& rng, std::size_t& tries) {
    if (bound > sigma) {
        for (;;) {
            ++tries;
            const double d = sigma * rng.normal();
            if (std::abs(d) <= bound) return d;
        }
    }
    for (;;) {
        ++tries;
        const double d = bound * (2.0 * rng.uniform() - 1.0);
        if (rng.uniform() < std::exp(-d * d / (2.0 * sigma * sigma))) return d;
    }
}

// Completes u to an orthonormal frame (u, v, w).
std::pair<std::array<double, 3>, std::array<double, 3>> orthonormal_complement(const std::array<double, 3>& u) {
    std::array<double, 3> e{0.0, 0.0, 0.0};
    std::size_t smallest = 0;
    for (std::size_t i = 1; i < 3; ++i)
        if (std::abs(u[i]) < std::abs(u[smallest])) smallest = i;
    e[smallest] = 1.0;
    const double along = e[0] * u[0] + e[1] * u[1] + e[2] * u[2];
    std::array<double, 3> v{e[0] - along * u[0], e[1] - along * u[1], e[2] - along * u[2]};
    const double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (double& c : v) c /= nv;
    const std::array<double, 3> w{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    return {v, w};
}

}  // namespace

H3Point sample_bridge_midpoint(const H3Point& x, const H3Point& y, double delta, Rng& rng, std::size_t& tries) {
    if (!(delta > 0.0)) throw InvalidParameter("midpoint half-duration must be positive");
    const double D = hdist(x, y);
    const HIsometry<3> from_x = isometry_from_origin(x);
    if (D < 1e-12) {
        // Coincident endpoints: isotropic around x with radial density
        // proportional to a^2 exp(-a^2 / delta).
        ++tries;
        const double sd = std::sqrt(delta / 2.0);
        return from_x.apply(exp_origin(std::array<double, 3>{sd * rng.normal(), sd * rng.normal(), sd * rng.normal()}));
    }
    // In bipolar coordinates around x, y the volume element is
    // sinh a sinh b / sinh D da db dphi, so (a, b) has density proportional
    // to a b exp(-(a^2 + b^2) / (2 delta)) on the triangle region. With
    // s = a + b and d = a - b that is (s^2 - d^2) exp(-(s^2 + d^2) / (4 delta))
    // on s >= D, |d| <= D.
    const double sigma = std::sqrt(2.0 * delta);
    constexpr std::size_t kMaxLocal = 1'000'000;
    const std::size_t start = tries;
    double a = 0.0, b = 0.0;
    for (;;) {
        if (tries - start > kMaxLocal) {
            std::ostringstream msg;
            msg << "bridge midpoint rejection exceeded " << kMaxLocal << " proposals (delta=" << delta
                << ", endpoint distance=" << D << ")";
            throw EnvelopeFailure(msg.str());
        }
        const double sum = chi3_tail(sigma, D, rng, tries);
        const double diff = truncated_normal(sigma, D, rng, tries);
        if (rng.uniform() * sum * sum < sum * sum - diff * diff) {
            a = 0.5 * (sum + diff);
            b = 0.5 * (sum - diff);
            break;
        }
    }
    // Angle at x between the directions to y and to z, from
    // tan^2(theta/2) = sinh((a+b-D)/2) sinh((b-a+D)/2) / (sinh((a+b+D)/2) sinh((a-b+D)/2)).
    const double log_num = log_sinh(std::max(0.5 * (a + b - D), 1e-300)) + log_sinh(std::max(0.5 * (b - a + D), 1e-300));
    const double log_den = log_sinh(0.5 * (a + b + D)) + log_sinh(std::max(0.5 * (a - b + D), 1e-300));
    const double theta = 2.0 * std::atan(std::exp(0.5 * (log_num - log_den)));
    const double phi = 2.0 * std::numbers::pi * rng.uniform();

    const H3Point y_seen = isometry_to_origin(x).apply(y);
    std::array<double, 3> u = y_seen.spatial();
    const double nu = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    for (double& c : u) c /= nu;
    const auto [v, w] = orthonormal_complement(u);
    const double ct = std::cos(theta), st = std::sin(theta), cp = std::cos(phi), sp = std::sin(phi);
    std::array<double, 3> dir;
    for (std::size_t i = 0; i < 3; ++i) dir[i] = a * (ct * u[i] + st * (cp * v[i] + sp * w[i]));
    return from_x.apply(exp_origin(dir));
}

double bridge_midpoint_radial_density(double delta, double r) {
    if (r == 0.0) return 0.0;
    return std::exp(2.0 * log_heat_kernel_h3(delta, r) - log_heat_kernel_h3(2.0 * delta, 0.0) + std::log(4.0 * kPi) +
                    2.0 * log_sinh(r));
}

BridgePath sample_bridge_h3(double T, std::size_t levels, RngSeed seed) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidParameter("bridge duration must be positive");
    if (levels < 1) throw InvalidParameter("bridge needs at least one level");
    if (levels > 24) throw ResourceGuardError("bridge levels above 24 refused");
    const std::size_t n = std::size_t{1} << levels;
    BridgePath path;
    path.times.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) path.times[i] = T * static_cast<double>(i) / static_cast<double>(n);
    path.times[n] = T;
    path.points.assign(n + 1, H3Point::origin());
    Rng rng(seed);
    std::size_t tries = 0, accepted = 0;
    for (std::size_t level = 0; level < levels; ++level) {
        const std::size_t step = n >> level;
        const std::size_t half = step / 2;
        const double delta = T * static_cast<double>(half) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; i += step) {
            path.points[i + half] = sample_bridge_midpoint(path.points[i], path.points[i + step], delta, rng, tries);
            ++accepted;
            if (tries >= 100'000 && static_cast<double>(accepted) < 1e-4 * static_cast<double>(tries)) {
                std::ostringstream msg;
                msg << "bridge rejection acceptance " << static_cast<double>(accepted) / static_cast<double>(tries)
                    << " below 1e-4 (T=" << T << ", level=" << level + 1 << ")";
                throw EnvelopeFailure(msg.str());
            }
        }
    }
    return path;
}

BridgePath reroot_bridge_at_index(const BridgePath& path, std::size_t index) {
    const std::size_t n = path.size();
    if (n < 2) throw InvalidParameter("reroot_bridge needs at least two points");
    if (index >= n) throw InvalidParameter("reroot index outside the grid");
    const std::size_t period = n - 1;
    const std::size_t root = index % period;
    const HIsometry<3> phi = isometry_to_origin(path.points[root]);
    BridgePath out;
    out.times = path.times;
    out.points.resize(n);
    for (std::size_t s = 1; s < period; ++s) out.points[s] = phi.apply(path.points[(root + s) % period]);
    out.points[0] = out.points[period] = H3Point::origin();
    return out;
}

BridgePath reroot_bridge(const BridgePath& path, double t) {
    const std::size_t n = path.size();
    if (n < 2) throw InvalidParameter("reroot_bridge needs at least two points");
    const double T = path.duration();
    const double dt = T / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(path.times[i] - path.times[i - 1] - dt) > 1e-9 * dt)
            throw InvalidParameter("reroot_bridge needs a uniform grid");
    if (!(t >= 0.0 && t <= T)) throw InvalidParameter("reroot time outside [0, T]");
    const double k = std::round((t - path.times.front()) / dt);
    const auto index = static_cast<std::size_t>(k);
    if (std::abs(path.times[index] - t) > 1e-9 * std::max(1.0, T))
        throw InvalidParameter("reroot time is not on the grid");
    return reroot_bridge_at_index(path, index);
}

double geodesic_avoidance_stat(const BridgePath& path, std::span<const std::pair<std::size_t, std::size_t>> pairs,
                               std::size_t probe_count) {
    double worst = 0.0;
    for (auto [s, t] : pairs) {
        if (s > t) std::swap(s, t);
        if (t >= path.size()) throw InvalidParameter("avoidance pair outside the grid");
        if (s == t) continue;
        for (std::size_t k = 1; k <= probe_count; ++k) {
            const double f = static_cast<double>(k) / static_cast<double>(probe_count + 1);
            const H3Point y = geodesic_point(path.points[s], path.points[t], f);
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t u = s; u <= t; ++u) nearest = std::min(nearest, hdist(y, path.points[u]));
            worst = std::max(worst, nearest);
        }
    }
    return worst;
}

std::size_t LoopPath::storage(std::ptrdiff_t signed_index) const {
    const auto j = signed_index + static_cast<std::ptrdiff_t>(radial.backward.size()) - 1;
    if (j < 0 || j >= static_cast<std::ptrdiff_t>(directions.size()))
        throw std::out_of_range("loop index outside window");
    return static_cast<std::size_t>(j);
}

H3Point LoopPath::point(std::ptrdiff_t signed_index) const {
    const auto& u = directions[storage(signed_index)];
    const double sr = std::sinh(rho(signed_index));
    return H3Point::from_spatial({sr * u[0], sr * u[1], sr * u[2]});
}

double LoopPath::distance(std::ptrdiff_t s, std::ptrdiff_t t) const {
    return polar_distance_h3(rho(s), directions[storage(s)], rho(t), directions[storage(t)]);
}

double polar_distance_h3(double r1, const std::array<double, 3>& u1, double r2, const std::array<double, 3>& u2) {
    // cosh d - 1 = 2 sinh^2((r1 - r2)/2) + sinh r1 sinh r2 (1 - cos angle),
    // with 1 - cos angle = |u1 - u2|^2 / 2; summed in logs for large radii.
    double gap2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) gap2 += (u1[i] - u2[i]) * (u1[i] - u2[i]);
    const double x = std::abs(r1 - r2) / 2.0;
    const double radial_part = x > 0.0 ? std::numbers::ln2 + 2.0 * log_sinh(x) : -std::numeric_limits<double>::infinity();
    const double angular_part = (r1 > 0.0 && r2 > 0.0 && gap2 > 0.0)
                                    ? log_sinh(r1) + log_sinh(r2) + std::log(gap2 / 2.0)
                                    : -std::numeric_limits<double>::infinity();
    const double hi = std::max(radial_part, angular_part);
    if (hi == -std::numeric_limits<double>::infinity()) return 0.0;
    const double log_c = hi + std::log1p(std::exp(std::min(radial_part, angular_part) - hi));
    if (log_c < 30.0) return arccosh1p(std::exp(log_c));
    return log_c + std::numbers::ln2 + std::log1p(std::exp(-log_c));
}

namespace {

std::array<double, 3> uniform_direction(Rng& rng) {
    for (;;) {
        std::array<double, 3> v{rng.normal(), rng.normal(), rng.normal()};
        const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if (n > 1e-12) return {v[0] / n, v[1] / n, v[2] / n};
    }
}

// Spherical Brownian motion (generator half the Laplacian on S^2) run for
// clock c. Past a clock of 20 the direction is mixed and redrawn uniformly.
void spherical_diffuse(std::array<double, 3>& theta, double clock, Rng& rng) {
    constexpr double kMixedClock = 20.0;
    constexpr double kSubstep = 0.01;
    if (!(clock <= kMixedClock)) {
        theta = uniform_direction(rng);
        return;
    }
    const auto substeps = static_cast<std::size_t>(std::ceil(clock / kSubstep));
    if (substeps == 0) return;
    const double sh = std::sqrt(clock / static_cast<double>(substeps));
    for (std::size_t k = 0; k < substeps; ++k) {
        std::array<double, 3> xi{rng.normal(), rng.normal(), rng.normal()};
        const double along = xi[0] * theta[0] + xi[1] * theta[1] + xi[2] * theta[2];
        double norm = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            theta[c] += sh * (xi[c] - along * theta[c]);
            norm += theta[c] * theta[c];
        }
        norm = std::sqrt(norm);
        for (double& c : theta) c /= norm;
    }
}

double step_clock(double a, double b, double dt) {
    const double denom = std::sinh(a) * std::sinh(b);
    return denom > 0.0 ? dt / denom : std::numeric_limits<double>::infinity();
}

// Clock int_H^inf ds / sinh^2(rho_s) of a Bessel-3 process continued from
// rho_H with exact steps until it passes kFar; what it adds afterwards is
// below e^{-2 kFar} per unit time unless it comes back down.
double tail_clock(double rho, Rng& rng) {
    constexpr double kFar = 25.0;
    double clock = 0.0;
    while (rho < kFar) {
        const double dt = 0.02 * (1.0 + rho);
        const double sd = std::sqrt(dt);
        const double x = rho + sd * rng.normal(), y = sd * rng.normal(), z = sd * rng.normal();
        const double next = std::sqrt(x * x + y * y + z * z);
        clock += step_clock(rho, next, dt);
        rho = next;
    }
    return clock;
}

// Directions along one side. The angular part converges as t -> infinity,
// and both sides share the limit `end`: the loop leaves along a single
// geodesic ray. By reversibility of spherical Brownian motion the side is
// built from the far end inwards, diffusing from `end` for the clock
// remaining after each grid time.
std::vector<std::array<double, 3>> angular_side(const Path& radius, const std::array<double, 3>& end, Rng& rng) {
    std::vector<std::array<double, 3>> directions(radius.size());
    std::array<double, 3> theta = end;
    spherical_diffuse(theta, tail_clock(radius.values.back(), rng), rng);
    directions.back() = theta;
    for (std::size_t i = radius.size() - 1; i > 0; --i) {
        spherical_diffuse(theta,
                          step_clock(radius.values[i - 1], radius.values[i], radius.times[i] - radius.times[i - 1]),
                          rng);
        directions[i - 1] = theta;
    }
    return directions;
}

}  // namespace

LoopPath sample_infinite_loop_h3(std::size_t steps_per_side, double horizon, RngSeed seed) {
    LoopPath loop;
    loop.radial = sample_two_sided_X(steps_per_side, horizon, seed);
    Rng end_rng(derive_seed(seed, 5));
    const std::array<double, 3> end = uniform_direction(end_rng);
    Rng forward_rng(derive_seed(seed, 3));
    Rng backward_rng(derive_seed(seed, 4));
    const auto forward = angular_side(loop.radial.forward, end, forward_rng);
    const auto backward = angular_side(loop.radial.backward, end, backward_rng);
    loop.directions.reserve(forward.size() + backward.size() - 1);
    for (std::size_t i = backward.size(); i-- > 1;) loop.directions.push_back(backward[i]);
    loop.directions.insert(loop.directions.end(), forward.begin(), forward.end());
    return loop;
}

LoopCrossCheck cross_check_loop(std::size_t replicas, RngSeed seed, unsigned workers) {
    if (replicas < 10) throw InvalidParameter("loop cross-check needs at least 10 replicas");
    constexpr double kT = 64.0;
    constexpr std::size_t kLevels = 10;
    constexpr std::size_t kLoopSteps = 64;
    // Bridge grid spacing is 1/16: time 1 is index 16, time 0.5 is index 8,
    // time -1 is index 1008 (T - 1).
    std::vector<double> bridge_radial(replicas), bridge_span(replicas), bridge_step(replicas);
    std::vector<double> loop_radial(replicas), loop_span(replicas), loop_step(replicas);
    parallel_for(replicas, workers, [&](std::size_t i) {
        const BridgePath b = sample_bridge_h3(kT, kLevels, derive_seed(seed, 2 * i));
        bridge_radial[i] = radial(b.points[16]);
        bridge_span[i] = hdist(b.points[1008], b.points[16]);
        bridge_step[i] = hdist(b.points[8], b.points[16]);
        const LoopPath l = sample_infinite_loop_h3(kLoopSteps, 1.0, derive_seed(seed, 2 * i + 1));
        loop_radial[i] = l.rho(64);
        loop_span[i] = l.distance(-64, 64);
        loop_step[i] = l.distance(32, 64);
    });
    LoopCrossCheck check;
    check.ks_radial = ks_two_sample(Sample(bridge_radial), Sample(loop_radial));
    check.ks_span = std::max(ks_two_sample(Sample(bridge_span), Sample(loop_span)),
                             ks_two_sample(Sample(bridge_step), Sample(loop_step)));
    check.passed = check.ks_radial <= 0.05 && check.ks_span <= 0.05;
    return check;
}

void require_loop_gate() {
    require_heat_kernel_gate();
    static std::once_flag once;
    static LoopCrossCheck result;
    std::call_once(once, [] { result = cross_check_loop(4000, RngSeed{0x6c6f6f70}); });
    if (!result.passed) {
        std::ostringstream msg;
        msg << "loop model failed the long-bridge cross-check: KS radial " << result.ks_radial << ", KS span "
            << result.ks_span;
        throw ValidationGateError(msg.str());
    }
}

}  // namespace crt
