#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "crtlab/error.hpp"
#include "crtlab/hyperbolic.hpp"
#include "crtlab/paths.hpp"
#include "crtlab/rtree.hpp"
#include "crtlab/stats.hpp"

using namespace crt;

namespace {

constexpr double kPi = std::numbers::pi;

// Heat kernel of half the Laplacian on H^3, written out independently.
double kernel(double t, double r) {
    const double shape = r < 1e-8 ? 1.0 : r / std::sinh(r);
    return std::pow(2.0 * kPi * t, -1.5) * std::exp(-t / 2.0 - r * r / (2.0 * t)) * shape;
}

template <typename F>
double simpson(F&& f, double a, double b, std::size_t n) {
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return s * h / 3.0;
}

// CDF on a grid of the radial density f, for use with ks_vs_cdf.
struct TabulatedCdf {
    double top, h;
    std::vector<double> cdf;

    template <typename F>
    TabulatedCdf(F&& density, double upper, std::size_t cells) : top(upper), h(upper / cells), cdf(cells + 1, 0.0) {
        for (std::size_t i = 0; i < cells; ++i) {
            const double a = h * i;
            cdf[i + 1] = cdf[i] + h / 6.0 * (density(a) + 4.0 * density(a + h / 2.0) + density(a + h));
        }
        for (double& c : cdf) c /= cdf.back();
    }
    double operator()(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= top) return 1.0;
        const double u = x / h;
        const auto i = static_cast<std::size_t>(u);
        return cdf[i] + (u - i) * (cdf[i + 1] - cdf[i]);
    }
};

H3Point random_point(Rng& rng, double scale) {
    return exp_origin<3>({scale * rng.normal(), scale * rng.normal(), scale * rng.normal()});
}

}  // namespace

TEST_CASE("distances") {
    const H3Point o = H3Point::origin();
    CHECK(hdist(o, o) == 0.0);
    const H3Point y = H3Point::from_coords({std::cosh(1.0), std::sinh(1.0), 0.0, 0.0});
    CHECK(hdist(o, y) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hdist(o, exp_origin<3>({3.0, 4.0, 0.0})) == doctest::Approx(5.0).epsilon(1e-13));
    CHECK_THROWS_AS(H3Point::from_coords({1.0, 1.0, 0.0, 0.0}), DataError);

    Rng rng(RngSeed{1});
    for (int i = 0; i < 500; ++i) {
        const H3Point a = random_point(rng, 2.0), b = random_point(rng, 2.0), c = random_point(rng, 2.0);
        CHECK(hdist(a, c) <= hdist(a, b) + hdist(b, c) + 1e-9);
        CHECK(hdist(a, b) == doctest::Approx(hdist(b, a)).epsilon(1e-12));
        const auto phi = isometry_to_origin(c);
        CHECK(std::abs(hdist(phi.apply(a), phi.apply(b)) - hdist(a, b)) <= 1e-9 * std::max(1.0, hdist(a, b)));
        CHECK(phi.form_error() <= 1e-9 * std::max(1.0, c[0] * c[0]));
        // Rounding in <x,x> grows with x0^2; the tolerance is relative to it.
        const H3Point image = phi.apply(a);
        CHECK(image.form_error() <= 1e-9 * image[0] * image[0]);
    }
}

TEST_CASE("geodesics") {
    const H3Point o = H3Point::origin();
    const H3Point y = H3Point::from_coords({std::cosh(2.0), std::sinh(2.0), 0.0, 0.0});
    const H3Point mid = geodesic_point(o, y, 0.5);
    CHECK(mid[0] == doctest::Approx(std::cosh(1.0)).epsilon(1e-13));
    CHECK(mid[1] == doctest::Approx(std::sinh(1.0)).epsilon(1e-13));
    CHECK(geodesic_point(o, y, 0.0) == o);
    CHECK(geodesic_point(o, y, 1.0) == y);
    CHECK(geodesic_point(y, y, 0.3) == y);
    CHECK_THROWS_AS(geodesic_point(o, y, 1.5), InvalidParameter);

    Rng rng(RngSeed{2});
    for (int i = 0; i < 200; ++i) {
        const H3Point a = random_point(rng, 1.5), b = random_point(rng, 1.5);
        const double f = rng.uniform();
        const H3Point p = geodesic_point(a, b, f);
        CHECK(hdist(a, p) == doctest::Approx(f * hdist(a, b)).epsilon(1e-9).scale(1.0));
        CHECK(hdist(a, p) + hdist(p, b) == doctest::Approx(hdist(a, b)).epsilon(1e-9).scale(1.0));
        CHECK(p.form_error() <= 1e-9 * p[0] * p[0]);
        CHECK(hdist(midpoint(a, b), geodesic_point(a, b, 0.5)) <= 1e-9);
    }
}

TEST_CASE("isometries to the origin") {
    const H3Point o = H3Point::origin();
    const auto id = isometry_to_origin(o).matrix();
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(id[i][j] == (i == j ? 1.0 : 0.0));
    Rng rng(RngSeed{3});
    for (int i = 0; i < 200; ++i) {
        const H3Point x = random_point(rng, 2.0);
        CHECK(hdist(isometry_to_origin(x).apply(x), o) <= 1e-9);
        const H3Point image = isometry_to_origin(x).apply(o);
        CHECK(hdist(isometry_to_origin(image).apply(o), x) <= 1e-9 * std::max(1.0, radial(x)));
    }
}

TEST_CASE("heat kernel") {
    CHECK_THROWS_AS(heat_kernel_h3(0.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(heat_kernel_h3(-1.0, 1.0), InvalidParameter);
    for (double t : {0.1, 1.0, 10.0})
        for (double r : {0.0, 0.3, 2.0, 7.0}) CHECK(heat_kernel_h3(t, r) == doctest::Approx(kernel(t, r)).epsilon(1e-12));

    for (double t : {0.1, 1.0, 10.0}) {
        const double upper = t + 20.0 * std::sqrt(t) + 10.0;
        const double mass = simpson(
            [&](double r) { return kernel(t, r) * 4.0 * kPi * std::sinh(r) * std::sinh(r); }, 0.0, upper, 20000);
        CHECK(std::abs(mass - 1.0) <= 1e-3);
    }

    // Chapman-Kolmogorov at s = t = 1/2, r = 1: integrate over z in polar
    // coordinates about o, with u the cosine of the angle to y.
    const double r = 1.0;
    const auto inner = [&](double rho) {
        return simpson(
            [&](double u) {
                const double c = std::cosh(rho) * std::cosh(r) - std::sinh(rho) * std::sinh(r) * u;
                return kernel(0.5, std::acosh(std::max(c, 1.0)));
            },
            -1.0, 1.0, 400);
    };
    const double ck = simpson(
        [&](double rho) { return kernel(0.5, rho) * 2.0 * kPi * std::sinh(rho) * std::sinh(rho) * inner(rho); }, 0.0,
        12.0, 1200);
    CHECK(std::abs(ck / kernel(1.0, r) - 1.0) <= 1e-3);

    const HeatKernelCheck check = validate_heat_kernel();
    CHECK(check.passed);
    for (double e : check.normalization_error) CHECK(e <= 1e-3);
    for (double e : check.chapman_kolmogorov_error) CHECK(e <= 1e-3);
    CHECK_NOTHROW(require_heat_kernel_gate());

    // Short times look Euclidean.
    const double t = 1e-3, rr = 0.05;
    const double euclid = std::pow(2.0 * kPi * t, -1.5) * std::exp(-rr * rr / (2.0 * t));
    CHECK(std::abs(heat_kernel_h3(t, rr) / euclid - 1.0) <= 0.02);
}

TEST_CASE("bridge endpoints, grid and CSV") {
    const BridgePath b = sample_bridge_h3(4.0, 3, RngSeed{4});
    CHECK(b.size() == 9);
    CHECK(b.points.front() == H3Point::origin());
    CHECK(b.points.back() == H3Point::origin());
    CHECK(b.times.back() == 4.0);
    for (const auto& p : b.points) CHECK(p.form_error() <= 1e-9 * p[0] * p[0]);
    std::ostringstream out;
    b.write_csv(out);
    CHECK(out.str().rfind("time,x0,x1,x2,x3,radial\n", 0) == 0);
    CHECK_THROWS_AS(sample_bridge_h3(4.0, 0, RngSeed{4}), InvalidParameter);
    CHECK_THROWS_AS(sample_bridge_h3(4.0, 25, RngSeed{4}), ResourceGuardError);
    CHECK(sample_bridge_h3(4.0, 3, RngSeed{4}).points == b.points);
}

TEST_CASE("bridge midpoint radial law") {
    const std::size_t reps = 100000;
    std::vector<double> mid(reps);
    for (std::size_t i = 0; i < reps; ++i) mid[i] = radial(sample_bridge_h3(1.0, 1, derive_seed(RngSeed{5}, i)).points[1]);
    const TabulatedCdf oracle(
        [](double r) { return kernel(0.5, r) * kernel(0.5, r) * std::sinh(r) * std::sinh(r); }, 12.0, 24000);
    CHECK(ks_vs_cdf(Sample(mid), std::cref(oracle)) <= 0.02);

    const TabulatedCdf library([](double r) { return bridge_midpoint_radial_density(0.5, r); }, 12.0, 24000);
    for (double x : {0.2, 0.7, 1.3, 2.5}) CHECK(library(x) == doctest::Approx(oracle(x)).epsilon(1e-9));
}

TEST_CASE("bridge marginal at a deeper level") {
    // Time 1/2 of a duration-2 bridge: density p_{1/2}(r) p_{3/2}(r) sinh^2 r.
    const std::size_t reps = 50000;
    std::vector<double> quarter(reps);
    for (std::size_t i = 0; i < reps; ++i)
        quarter[i] = radial(sample_bridge_h3(2.0, 3, derive_seed(RngSeed{6}, i)).points[2]);
    const TabulatedCdf oracle(
        [](double r) { return kernel(0.5, r) * kernel(1.5, r) * std::sinh(r) * std::sinh(r); }, 14.0, 28000);
    CHECK(ks_vs_cdf(Sample(quarter), std::cref(oracle)) <= 0.02);
}

TEST_CASE("midpoint sampler against an importance-weighted Gaussian proposal") {
    // Proposal: tangent Gaussian of variance delta/2 at the geodesic
    // midpoint, pushed through the exponential map; target density
    // p_delta(x, z) p_delta(z, y). Compare the law of d(x, z).
    const H3Point x = exp_origin<3>({0.3, 0.2, -0.1});
    const H3Point y = exp_origin<3>({2.2, -0.9, 1.0});
    const double delta = 0.5, sigma = std::sqrt(delta / 2.0);
    const H3Point m = midpoint(x, y);
    const auto from_m = isometry_from_origin(m);
    Rng rng(RngSeed{7});
    const std::size_t n = 200000;
    std::vector<std::pair<double, double>> weighted(n);
    double total = 0.0;
    for (auto& [a, w] : weighted) {
        const std::array<double, 3> v{sigma * rng.normal(), sigma * rng.normal(), sigma * rng.normal()};
        const double rho = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        const H3Point z = from_m.apply(exp_origin(v));
        const double jac = rho < 1e-12 ? 1.0 : std::pow(rho / std::sinh(rho), 2.0);
        const double q = std::exp(-rho * rho / (2.0 * sigma * sigma)) * jac;
        a = hdist(x, z);
        w = kernel(delta, a) * kernel(delta, hdist(z, y)) / q;
        total += w;
    }
    std::sort(weighted.begin(), weighted.end());
    std::vector<double> direct(40000);
    std::size_t tries = 0;
    Rng srng(RngSeed{8});
    for (double& a : direct) a = hdist(x, sample_bridge_midpoint(x, y, delta, srng, tries));
    const Sample s(direct);
    double ks = 0.0, cum = 0.0;
    for (const auto& [a, w] : weighted) {
        cum += w / total;
        ks = std::max(ks, std::abs(cum - s.cdf(a)));
    }
    CHECK(ks <= 0.02);
}

TEST_CASE("long bridges have excursion-like radial marginals") {
    const std::size_t reps = 10000;
    std::vector<double> bridge(reps), exc(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        bridge[i] = radial(sample_bridge_h3(64.0, 4, derive_seed(RngSeed{9}, i)).points[8]) / 8.0;
        exc[i] = sample_excursion(1025, derive_seed(RngSeed{10}, i)).values[512];
    }
    CHECK(ks_two_sample(Sample(bridge), Sample(exc)) <= 0.05);
}

TEST_CASE("re-rooting bridges") {
    const BridgePath b = sample_bridge_h3(8.0, 4, RngSeed{11});
    const BridgePath same = reroot_bridge(b, 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(hdist(same.points[i], b.points[i]) <= 1e-12);
    const BridgePath r = reroot_bridge(b, 3.0);
    CHECK(r.points.front() == H3Point::origin());
    CHECK(r.points.back() == H3Point::origin());
    CHECK(radial(r.points[0]) == 0.0);
    // Distances between re-rooted points are the shifted distances.
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
        for (std::size_t j = 0; j + 1 < b.size(); ++j)
            CHECK(std::abs(hdist(r.points[i], r.points[j]) - hdist(b.points[(i + 6) % 16], b.points[(j + 6) % 16])) <=
                  1e-9);
    CHECK_THROWS_AS(reroot_bridge(b, 0.3), InvalidParameter);

    std::vector<double> original(2000), rerooted(2000);
    for (std::size_t i = 0; i < original.size(); ++i) {
        const auto a = sample_bridge_h3(16.0, 6, derive_seed(RngSeed{12}, i)).radial_values();
        original[i] = *std::max_element(a.begin(), a.end());
        const BridgePath other = sample_bridge_h3(16.0, 6, derive_seed(RngSeed{13}, i));
        const auto c = reroot_bridge_at_index(other, i % 64).radial_values();
        rerooted[i] = *std::max_element(c.begin(), c.end());
    }
    CHECK(ks_two_sample(Sample(original), Sample(rerooted)) <= 0.05);
}

TEST_CASE("geodesic avoidance") {
    BridgePath line;
    for (int i = 0; i <= 100; ++i) {
        line.times.push_back(i);
        line.points.push_back(exp_origin<3>({0.1 * i, 0.0, 0.0}));
    }
    const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 100}, {10, 57}, {3, 4}};
    CHECK(geodesic_avoidance_stat(line, pairs, 16) <= 0.1 + 1e-9);
    const std::vector<std::pair<std::size_t, std::size_t>> degenerate{{5, 5}};
    const BridgePath b = sample_bridge_h3(16.0, 6, RngSeed{14});
    CHECK(geodesic_avoidance_stat(b, degenerate, 8) == 0.0);

    // Normalized statistic shrinks as T grows.
    std::vector<double> medians;
    for (double T : {16.0, 64.0, 256.0}) {
        std::vector<double> stat(100);
        for (std::size_t i = 0; i < stat.size(); ++i) {
            const BridgePath p = sample_bridge_h3(T, 8, derive_seed(RngSeed{15}, i));
            Rng rng(derive_seed(RngSeed{16}, i));
            std::vector<std::pair<std::size_t, std::size_t>> pr(16);
            for (auto& q : pr) {
                const std::size_t s = rng.below(p.size()), t = rng.below(p.size());
                q = {std::min(s, t), std::max(s, t)};
            }
            stat[i] = geodesic_avoidance_stat(p, pr, 8) / std::sqrt(T);
        }
        medians.push_back(median(Sample(stat)));
    }
    CHECK(medians[1] < medians[0]);
    CHECK(medians[2] < medians[1]);
}

TEST_CASE("thin triangles with the empirical four-point constant") {
    Rng rng(RngSeed{17});
    std::vector<H3Point> cloud(60);
    for (auto& p : cloud) p = random_point(rng, 4.0);
    std::vector<std::size_t> idx(cloud.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const auto m = distance_matrix(idx, 0, [&](std::size_t a, std::size_t b) { return hdist(cloud[a], cloud[b]); });
    const double delta = four_point_delta(m);
    CHECK(delta > 0.0);
    CHECK(delta <= std::log(2.0) + 1e-9);
    for (int rep = 0; rep < 300; ++rep) {
        const H3Point a = random_point(rng, 4.0), b = random_point(rng, 4.0), c = random_point(rng, 4.0);
        double to_segment = hdist(a, b);
        const double spacing = hdist(b, c) / 400.0;
        for (int k = 0; k <= 400; ++k) to_segment = std::min(to_segment, hdist(a, geodesic_point(b, c, k / 400.0)));
        CHECK(2.0 * (to_segment - spacing) + hdist(b, c) <= hdist(a, b) + hdist(a, c) + 4.0 * delta);
    }
}

TEST_CASE("infinite loop") {
    CHECK_NOTHROW(require_loop_gate());
    const LoopPath loop = sample_infinite_loop_h3(256, 4.0, RngSeed{18});
    CHECK(loop.rho(0) == 0.0);
    CHECK(loop.point(0) == H3Point::origin());
    for (std::ptrdiff_t s = -256; s <= 256; s += 37)
        for (std::ptrdiff_t t = -256; t <= 256; t += 41) {
            CHECK(loop.distance(s, t) == doctest::Approx(loop.distance(t, s)).epsilon(1e-12));
            CHECK(loop.distance(s, t) == doctest::Approx(hdist(loop.point(s), loop.point(t))).epsilon(1e-8).scale(1.0));
        }
    CHECK(loop.distance(0, 100) == doctest::Approx(loop.rho(100)).epsilon(1e-12));

    // Both halves leave along a common direction. A side whose radial part
    // comes back near 0 after the horizon still re-mixes, so only most
    // loops are aligned; independent halves would give about 1 in 200.
    std::size_t aligned = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const LoopPath far = sample_infinite_loop_h3(400, 100.0, RngSeed{1000 + s});
        const auto& u = far.directions.front();
        const auto& v = far.directions.back();
        const double cosine = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        if (cosine > 0.99) ++aligned;
    }
    CHECK(aligned >= 120);

    // Rescaled radial marginals are Maxwell.
    const auto maxwell = [](double x) {
        if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
        return x <= 0.0 ? 0.0 : std::erf(x / std::sqrt(2.0)) - std::sqrt(2.0 / kPi) * x * std::exp(-x * x / 2.0);
    };
    std::vector<double> plus(5000);
    for (std::size_t i = 0; i < plus.size(); ++i)
        plus[i] = 0.5 * sample_infinite_loop_h3(16, 4.0, derive_seed(RngSeed{19}, i)).rho(16);
    CHECK(ks_vs_cdf(Sample(plus), maxwell) <= 0.03);
}
