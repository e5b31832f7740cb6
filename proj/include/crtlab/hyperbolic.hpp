#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "crtlab/error.hpp"
#include "crtlab/paths.hpp"
#include "crtlab/rng.hpp"

namespace crt {

/// Point of the hyperboloid model of H_D in R^{D+1} with the form
/// -x0 y0 + x1 y1 + ... The time coordinate is always recomputed from the
/// spatial ones, so <x,x> = -1 holds to rounding.
template <std::size_t D>
class HPoint {
public:
    using Coords = std::array<double, D + 1>;
    using Spatial = std::array<double, D>;

    HPoint() : c_{} { c_[0] = 1.0; }

    static HPoint origin() { return HPoint(); }

    static HPoint from_spatial(const Spatial& s) {
        HPoint p;
        double q = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            if (!std::isfinite(s[i])) throw DataError("hyperbolic point has a non-finite coordinate");
            p.c_[i + 1] = s[i];
            q += s[i] * s[i];
        }
        p.c_[0] = std::sqrt(1.0 + q);
        return p;
    }

    /// Accepts coordinates on the upper sheet (<x,x> = -1 within 1e-9
    /// relative to x0^2) and renormalizes them.
    static HPoint from_coords(const Coords& c) {
        if (!(c[0] >= 1.0 - 1e-12)) throw DataError("hyperbolic point is not on the upper sheet");
        double q = -c[0] * c[0];
        for (std::size_t i = 1; i <= D; ++i) q += c[i] * c[i];
        if (!(std::abs(q + 1.0) <= 1e-9 * std::max(1.0, c[0] * c[0])))
            throw DataError("hyperbolic point violates <x,x> = -1");
        Spatial s;
        for (std::size_t i = 0; i < D; ++i) s[i] = c[i + 1];
        return from_spatial(s);
    }

    const Coords& coords() const { return c_; }
    double operator[](std::size_t i) const { return c_[i]; }
    Spatial spatial() const {
        Spatial s;
        for (std::size_t i = 0; i < D; ++i) s[i] = c_[i + 1];
        return s;
    }
    double spatial_norm2() const {
        double q = 0.0;
        for (std::size_t i = 1; i <= D; ++i) q += c_[i] * c_[i];
        return q;
    }
    /// x0 - 1 without cancellation.
    double height() const { return spatial_norm2() / (c_[0] + 1.0); }

    /// |<x,x> + 1|.
    double form_error() const {
        double q = -c_[0] * c_[0];
        for (std::size_t i = 1; i <= D; ++i) q += c_[i] * c_[i];
        return std::abs(q + 1.0);
    }

    friend bool operator==(const HPoint&, const HPoint&) = default;

private:
    Coords c_;
};

using H3Point = HPoint<3>;

/// cosh d(x,y) - 1, evaluated without the cancellation of -<x,y> - 1.
template <std::size_t D>
double cosh_distance_minus_one(const HPoint<D>& x, const HPoint<D>& y) {
    double dot = 0.0, diff = 0.0;
    for (std::size_t i = 1; i <= D; ++i) {
        dot += x[i] * y[i];
        const double e = x[i] - y[i];
        diff += e * e;
    }
    if (dot >= 0.0) {
        // -<x,y> - 1 = (|x_s - y_s|^2 + |x_s|^2 |y_s|^2 - dot^2) / (x0 y0 + 1 + dot),
        // with the middle terms summed as squared 2x2 minors (Lagrange).
        double wedge = 0.0;
        for (std::size_t i = 1; i <= D; ++i)
            for (std::size_t j = i + 1; j <= D; ++j) {
                const double m = x[i] * y[j] - x[j] * y[i];
                wedge += m * m;
            }
        return (diff + wedge) / (x[0] * y[0] + 1.0 + dot);
    }
    const double hx = x.height(), hy = y.height();
    return hx * hy + hx + hy - dot;
}

template <std::size_t D>
double hdist(const HPoint<D>& x, const HPoint<D>& y) {
    const double c = std::max(cosh_distance_minus_one(x, y), 0.0);
    return std::log1p(c + std::sqrt(c * (c + 2.0)));
}

template <std::size_t D>
double radial(const HPoint<D>& x) {
    const double h = x.height();
    return std::log1p(h + std::sqrt(h * (h + 2.0)));
}

/// exp_o(v) = (cosh|v|, sinh|v| v/|v|).
template <std::size_t D>
HPoint<D> exp_origin(const std::array<double, D>& v) {
    double n = 0.0;
    for (double a : v) n += a * a;
    n = std::sqrt(n);
    std::array<double, D> s{};
    if (n > 0.0) {
        const double f = std::sinh(n) / n;
        for (std::size_t i = 0; i < D; ++i) s[i] = f * v[i];
    }
    return HPoint<D>::from_spatial(s);
}

/// Point at arclength fraction f of the geodesic from x to y.
template <std::size_t D>
HPoint<D> geodesic_point(const HPoint<D>& x, const HPoint<D>& y, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidParameter("geodesic fraction must lie in [0, 1]");
    if (fraction == 0.0) return x;
    if (fraction == 1.0) return y;
    const double d = hdist(x, y);
    if (d == 0.0) return x;
    const double sd = std::sinh(d);
    const double wx = std::sinh((1.0 - fraction) * d) / sd;
    const double wy = std::sinh(fraction * d) / sd;
    std::array<double, D> s;
    for (std::size_t i = 0; i < D; ++i) s[i] = wx * x[i + 1] + wy * y[i + 1];
    return HPoint<D>::from_spatial(s);
}

template <std::size_t D>
HPoint<D> midpoint(const HPoint<D>& x, const HPoint<D>& y) {
    const double c = std::max(cosh_distance_minus_one(x, y), 0.0);
    const double w = 1.0 / std::sqrt(4.0 + 2.0 * c);
    std::array<double, D> s;
    for (std::size_t i = 0; i < D; ++i) s[i] = w * (x[i + 1] + y[i + 1]);
    return HPoint<D>::from_spatial(s);
}

/// Linear map of R^{D+1} preserving the Minkowski form and the upper sheet.
template <std::size_t D>
class HIsometry {
public:
    using Matrix = std::array<std::array<double, D + 1>, D + 1>;

    HIsometry() : m_{} {
        for (std::size_t i = 0; i <= D; ++i) m_[i][i] = 1.0;
    }
    explicit HIsometry(const Matrix& m) : m_(m) {}

    const Matrix& matrix() const { return m_; }

    /// Image of x, renormalized onto the hyperboloid.
    HPoint<D> apply(const HPoint<D>& x) const {
        std::array<double, D> s{};
        for (std::size_t i = 0; i < D; ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j <= D; ++j) v += m_[i + 1][j] * x[j];
            s[i] = v;
        }
        return HPoint<D>::from_spatial(s);
    }

    HIsometry compose(const HIsometry& inner) const {
        Matrix r{};
        for (std::size_t i = 0; i <= D; ++i)
            for (std::size_t j = 0; j <= D; ++j)
                for (std::size_t k = 0; k <= D; ++k) r[i][j] += m_[i][k] * inner.m_[k][j];
        return HIsometry(r);
    }

    /// Largest entry of |M^T J M - J| with J = diag(-1, 1, ..., 1).
    double form_error() const {
        double worst = 0.0;
        for (std::size_t i = 0; i <= D; ++i)
            for (std::size_t j = 0; j <= D; ++j) {
                double v = -m_[0][i] * m_[0][j];
                for (std::size_t k = 1; k <= D; ++k) v += m_[k][i] * m_[k][j];
                const double target = i != j ? 0.0 : (i == 0 ? -1.0 : 1.0);
                worst = std::max(worst, std::abs(v - target));
            }
        return worst;
    }

private:
    Matrix m_;
};

namespace detail {

template <std::size_t D>
HIsometry<D> boost(const HPoint<D>& x, double sign) {
    typename HIsometry<D>::Matrix m{};
    const double x0 = x[0];
    m[0][0] = x0;
    for (std::size_t i = 1; i <= D; ++i) {
        m[0][i] = sign * x[i];
        m[i][0] = sign * x[i];
        for (std::size_t j = 1; j <= D; ++j) m[i][j] = (i == j ? 1.0 : 0.0) + x[i] * x[j] / (1.0 + x0);
    }
    return HIsometry<D>(m);
}

}  // namespace detail

/// phi_x: the hyperbolic translation along the o-x geodesic sending x to o.
template <std::size_t D>
HIsometry<D> isometry_to_origin(const HPoint<D>& x) {
    return detail::boost(x, -1.0);
}

/// Inverse of isometry_to_origin(x): the translation sending o to x.
template <std::size_t D>
HIsometry<D> isometry_from_origin(const HPoint<D>& x) {
    return detail::boost(x, 1.0);
}

/// Heat kernel of H^3 for the generator half the Laplace-Beltrami operator,
/// as a function of the distance r, with respect to the volume measure:
/// p_t(r) = (2 pi t)^{-3/2} e^{-t/2} (r / sinh r) e^{-r^2 / 2t}.
double heat_kernel_h3(double t, double r);
double log_heat_kernel_h3(double t, double r);

/// log(r / sinh r), accurate at 0 and for large r.
double log_r_over_sinh(double r);

struct HeatKernelCheck {
    /// |integral - 1| for t = 0.1, 1, 10.
    std::array<double, 3> normalization_error{};
    /// Relative Chapman-Kolmogorov error at s = t = 0.5 for r = 0.5, 1, 2.
    std::array<double, 3> chapman_kolmogorov_error{};
    bool passed = false;
};

/// Quadrature checks of heat_kernel_h3 (tolerance 1e-3 for both).
HeatKernelCheck validate_heat_kernel();

/// Runs validate_heat_kernel once per process; throws ValidationGateError
/// if it failed. Every hyperbolic experiment calls this first.
void require_heat_kernel_gate();

/// Grid-sampled path in H^3.
struct BridgePath {
    std::vector<double> times;
    std::vector<H3Point> points;

    std::size_t size() const { return points.size(); }
    double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
    std::vector<double> radial_values() const;
    /// CSV columns time,x0,x1,x2,x3,radial.
    void write_csv(std::ostream& out) const;
};

/// Brownian bridge from o to o of duration T in H^3 on 2^levels + 1 equally
/// spaced times, built by recursive exact midpoint sampling (see
/// sample_bridge_midpoint). Raises EnvelopeFailure when acceptance collapses.
BridgePath sample_bridge_h3(double T, std::size_t levels, RngSeed seed);

/// Samples z with density proportional to p_delta(x, z) p_delta(z, y).
/// The distances a = d(x, z), b = d(z, y) are drawn by rejection in
/// bipolar coordinates, where the law is a product of Rayleigh-type
/// factors restricted to the triangle inequality; the rotation about the
/// x-y geodesic is uniform. `tries` accumulates the number of proposals.
H3Point sample_bridge_midpoint(const H3Point& x, const H3Point& y, double delta, Rng& rng,
                               std::size_t& tries);

/// Radial density of the midpoint of the bridge o -> o with half-duration
/// delta: p_delta(r)^2 / p_{2 delta}(0) * 4 pi sinh^2 r.
double bridge_midpoint_radial_density(double delta, double r);

/// Bridge re-rooted at grid time t: s -> phi_{b(t)}(b(t + s mod T)).
/// Off-grid t raises InvalidParameter.
BridgePath reroot_bridge(const BridgePath& path, double t);
BridgePath reroot_bridge_at_index(const BridgePath& path, std::size_t index);

/// Max over pairs (s, t) and probes y on the geodesic [b(s), b(t)] of the
/// distance from y to the sampled range {b(u) : u between s and t}. Probes
/// sit at fractions k / (probe_count + 1), k = 1..probe_count.
double geodesic_avoidance_stat(const BridgePath& path,
                               std::span<const std::pair<std::size_t, std::size_t>> pairs,
                               std::size_t probe_count);

/// Piece of the infinite Brownian loop in H^3 on [-horizon, horizon]:
/// radial part two independent Bessel-3 processes; along each side the
/// direction is a spherical Brownian motion on the clock int ds / sinh^2(rho),
/// and both sides converge to one shared limit direction.
/// Points are kept in polar form so that distances stay accurate at radii
/// where hyperboloid coordinates lose precision.
struct LoopPath {
    TwoSidedPath radial;
    /// Unit directions; entry j sits at signed index j - (radial.backward.size() - 1).
    std::vector<std::array<double, 3>> directions;

    std::size_t storage(std::ptrdiff_t signed_index) const;
    double rho(std::ptrdiff_t signed_index) const { return radial.value(signed_index); }
    H3Point point(std::ptrdiff_t signed_index) const;
    double distance(std::ptrdiff_t s, std::ptrdiff_t t) const;
};

/// Distance between points at radii r1, r2 whose unit directions are u1, u2.
double polar_distance_h3(double r1, const std::array<double, 3>& u1, double r2, const std::array<double, 3>& u2);

LoopPath sample_infinite_loop_h3(std::size_t steps_per_side, double horizon, RngSeed seed);

struct LoopCrossCheck {
    double ks_radial = 1.0;
    /// Larger of the KS statistics for d(b(-1), b(1)) and d(b(1/2), b(1)).
    double ks_span = 1.0;
    bool passed = false;
};

/// Compares the loop at times -1, 1 with long bridges (T = 64, 10 levels)
/// at times T - 1 and 1: radial law at time 1 and the distances between the
/// points at times -1, 1 and at times 1/2, 1. Passes when both KS statistics are <= 0.05.
LoopCrossCheck cross_check_loop(std::size_t replicas, RngSeed seed, unsigned workers = 0);

/// Runs cross_check_loop once per process (4000 replicas, fixed seed) and
/// throws ValidationGateError on failure.
void require_loop_gate();

}  // namespace crt
