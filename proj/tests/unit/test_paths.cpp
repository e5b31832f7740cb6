#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crtlab/error.hpp"
#include "crtlab/paths.hpp"
#include "crtlab/stats.hpp"

using namespace crt;

namespace {

struct Moments {
    double mean = 0.0, var = 0.0, se = 0.0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(xs.size() - 1);
    m.se = std::sqrt(m.var / static_cast<double>(xs.size()));
    return m;
}

// Uniform Dyck path of length 2n by the cycle lemma: a uniform arrangement
// of n up-steps and n + 1 down-steps has exactly one rotation whose partial
// sums stay >= 0 until the final step; dropping that step leaves a Dyck path.
double uniform_dyck_max(std::size_t n, Rng& rng) {
    std::vector<int> steps(2 * n + 1, -1);
    std::fill(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(n), 1);
    for (std::size_t i = steps.size() - 1; i > 0; --i) std::swap(steps[i], steps[rng.below(i + 1)]);
    int h = 0, low = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        h += steps[i];
        if (h < low) {
            low = h;
            start = i + 1;
        }
    }
    int height = 0, best = 0;
    for (std::size_t j = 0; j + 1 < steps.size(); ++j) {
        height += steps[(start + j) % steps.size()];
        best = std::max(best, height);
    }
    return best;
}

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("Brownian bridge") {
    const Path two = sample_brownian_bridge(2, 1.0, RngSeed{1});
    CHECK(two.values == std::vector<double>{0.0, 0.0});
    CHECK(two.times == std::vector<double>{0.0, 1.0});
    CHECK_THROWS_AS(sample_brownian_bridge(1, 1.0, RngSeed{1}), InvalidParameter);

    const double T = 2.0;
    std::vector<double> mid(100000), quarter(100000);
    for (std::size_t i = 0; i < mid.size(); ++i) {
        const Path p = sample_brownian_bridge(17, T, derive_seed(RngSeed{2}, i));
        CHECK(p.values.front() == 0.0);
        CHECK(p.values.back() == 0.0);
        mid[i] = p.values[8];
        quarter[i] = p.values[4];
    }
    const Moments m = moments(mid);
    // Var at time t is t (T - t) / T.
    CHECK(std::abs(m.var - T / 4.0) < 3.0 * (T / 4.0) * std::sqrt(2.0 / 1e5));
    CHECK(std::abs(m.mean) < 3.0 * m.se);
    const Moments q = moments(quarter);
    CHECK(std::abs(q.var - 0.5 * 1.5 / T) < 3.0 * (0.375) * std::sqrt(2.0 / 1e5));
    CHECK(std::abs(q.mean) < 3.0 * q.se);
}

TEST_CASE("excursion shape") {
    for (std::uint64_t s = 0; s < 200; ++s) {
        const Path e = sample_excursion(257, RngSeed{s});
        CHECK(e.values.front() == 0.0);
        CHECK(e.values.back() == 0.0);
        CHECK(*std::min_element(e.values.begin(), e.values.end()) == 0.0);
        CHECK(e.times.back() == 1.0);
    }
    CHECK_THROWS_AS(sample_excursion(1, RngSeed{0}), InvalidParameter);
}

TEST_CASE("excursion maximum matches rescaled uniform Dyck paths") {
    const std::size_t reps = 30000, dyck_n = 10000;
    std::vector<double> exc(reps), dyck(reps);
    Rng rng(RngSeed{31});
    for (std::size_t i = 0; i < reps; ++i) {
        const Path e = sample_excursion(4097, derive_seed(RngSeed{30}, i));
        exc[i] = *std::max_element(e.values.begin(), e.values.end());
        dyck[i] = uniform_dyck_max(dyck_n, rng) / std::sqrt(2.0 * dyck_n);
    }
    // 3e4 per side instead of 1e5 keeps the test quick; 0.03 sits above
    // the 0.999 two-sample quantile at this size.
    CHECK(ks_two_sample(Sample(exc), Sample(dyck)) <= 0.03);
}

TEST_CASE("Bessel-3 moments and sup bound") {
    std::vector<double> sq(100000);
    std::size_t above = 0;
    for (std::size_t i = 0; i < sq.size(); ++i) {
        const Path b = sample_bessel3(64, 1.0, derive_seed(RngSeed{4}, i));
        CHECK(b.values.front() == 0.0);
        sq[i] = b.values.back() * b.values.back();
        if (*std::max_element(b.values.begin(), b.values.end()) > 3.0) ++above;
    }
    const Moments m = moments(sq);
    CHECK(std::abs(m.mean - 3.0) < 3.0 * m.se);
    // Reflection-principle chain of bounds ends at 6 P(|N| > 1).
    CHECK(static_cast<double>(above) / sq.size() <= 6.0 * 2.0 * normal_sf(1.0));
}

TEST_CASE("two-sided X") {
    std::vector<double> plus(20000), minus(20000);
    for (std::size_t i = 0; i < plus.size(); ++i) {
        const TwoSidedPath x = sample_two_sided_X(8, 1.0, derive_seed(RngSeed{6}, i));
        CHECK(x.value(0) == 0.0);
        CHECK(x.time(x.first_index()) == -1.0);
        plus[i] = x.value(x.last_index());
        minus[i] = x.value(x.first_index());
    }
    const Moments a = moments(plus), b = moments(minus);
    double cov = 0.0;
    for (std::size_t i = 0; i < plus.size(); ++i) cov += (plus[i] - a.mean) * (minus[i] - b.mean);
    const double corr = cov / static_cast<double>(plus.size() - 1) / std::sqrt(a.var * b.var);
    CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(plus.size())));
    const Moments sa = moments([&] {
        std::vector<double> s(plus);
        for (double& v : s) v *= v;
        return s;
    }());
    CHECK(std::abs(sa.mean - 3.0) < 3.0 * sa.se);
}

TEST_CASE("squared Bessel") {
    CHECK_THROWS_AS(sample_squared_bessel(0.0, 0.0, {1.0, 0.01}, RngSeed{1}), InvalidParameter);
    const std::size_t reps = 100000;
    std::vector<double> z1(reps), z3(reps), b3(reps), shifted(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        // Full truncation at 0 has an O(sqrt(step)) bias in dimension 1.
        z1[i] = sample_squared_bessel(1.0, 0.0, {1.0, 5e-4}, derive_seed(RngSeed{7}, i)).values.back();
        z3[i] = std::sqrt(sample_squared_bessel(3.0, 0.0, {1.0, 0.002}, derive_seed(RngSeed{8}, i)).values.back());
        b3[i] = sample_bessel3(1, 1.0, derive_seed(RngSeed{9}, i)).values.back();
        shifted[i] = sample_squared_bessel(2.5, 1.5, {2.0, 0.01}, derive_seed(RngSeed{10}, i)).values.back();
        CHECK(z1[i] >= 0.0);
    }
    const Moments m = moments(shifted);
    CHECK(std::abs(m.mean - (1.5 + 2.5 * 2.0)) < 3.0 * m.se);
    // Z^(1)_1 is a squared standard normal.
    const auto chi2_1 = [](double x) { return x <= 0.0 ? 0.0 : std::erf(std::sqrt(x / 2.0)); };
    CHECK(ks_vs_cdf(Sample(z1), chi2_1) <= 0.02);
    CHECK(ks_two_sample(Sample(z3), Sample(b3)) <= 0.02);
}

TEST_CASE("integrate_sde_Y special cases") {
    const SdeGrid grid{1.0, 0.01};
    const DriftFunction zero = [](double) { return 0.0; };
    const DriftFunction one = [](double) { return 1.0; };
    for (std::uint64_t s = 0; s < 20; ++s) {
        CHECK(integrate_sde_Y(zero, 0.0, grid, RngSeed{s}).values ==
              sample_squared_bessel(1.0, 0.0, grid, RngSeed{s}).values);
        CHECK(integrate_sde_Y(one, 0.3, grid, RngSeed{s}).values ==
              sample_squared_bessel(3.0, 0.3, grid, RngSeed{s}).values);
    }
    const DriftFunction negative = [](double y) { return y > 0.5 ? -1.0 : 1.0; };
    CHECK_THROWS_AS(integrate_sde_Y(negative, 1.0, grid, RngSeed{1}), InvalidParameter);

    std::vector<double> y(100000), b(100000);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = std::sqrt(integrate_sde_Y(h3_loop_drift, 0.0, {1.0, 0.002}, derive_seed(RngSeed{11}, i)).values.back());
        b[i] = sample_bessel3(1, 1.0, derive_seed(RngSeed{12}, i)).values.back();
    }
    CHECK(ks_two_sample(Sample(y), Sample(b)) <= 0.02);
}

TEST_CASE("coupling of Y and squared Bessel") {
    const DriftFunction one = [](double) { return 1.0; };
    CHECK_THROWS_AS(coupled_Y_vs_squared_bessel(one, 1.0, 0.0, 0.5, {1.0, 0.01}, RngSeed{1}), InvalidParameter);

    const auto same = coupled_Y_vs_squared_bessel(one, 3.0, 0.0, 0.0, {1.0, 0.01}, RngSeed{2});
    CHECK(same.first.values == same.second.values);

    std::vector<double> diff(20000);
    for (std::size_t i = 0; i < diff.size(); ++i) {
        const auto [yy, zz] = coupled_Y_vs_squared_bessel(one, 1.0, 0.0, 0.0, {0.5, 0.01}, derive_seed(RngSeed{3}, i));
        diff[i] = yy.values.back() - zz.values.back();
    }
    const Moments m = moments(diff);
    CHECK(std::abs(m.mean - 1.0) < 3.0 * m.se);

    // Worst dip of Y below Z over 200 paths shrinks with the step.
    std::vector<double> worst;
    for (double step : {1e-2, 1e-3, 1e-4}) {
        double low = 0.0;
        for (std::uint64_t s = 0; s < 200; ++s) {
            const auto [yy, zz] = coupled_Y_vs_squared_bessel(h3_loop_drift, 1.0, 0.0, 0.0, {1.0, step}, RngSeed{s});
            for (std::size_t j = 0; j < yy.size(); ++j) low = std::min(low, yy.values[j] - zz.values[j]);
        }
        worst.push_back(-low);
    }
    CHECK(worst[2] < worst[0]);
    CHECK(worst[2] < 10.0 * std::sqrt(1e-4));
}

TEST_CASE("determinism") {
    CHECK(sample_excursion(1000, RngSeed{42}).values == sample_excursion(1000, RngSeed{42}).values);
    CHECK(sample_excursion(1000, RngSeed{42}).values != sample_excursion(1000, RngSeed{43}).values);
    CHECK(sample_two_sided_X(100, 2.0, RngSeed{5}).backward.values ==
          sample_two_sided_X(100, 2.0, RngSeed{5}).backward.values);
    CHECK(derive_seed(RngSeed{1}, 2) == derive_seed(RngSeed{1}, 2));
    CHECK(!(derive_seed(RngSeed{1}, 2) == derive_seed(RngSeed{2}, 1)));
}

TEST_CASE("grid refinement of the SDE terminal law") {
    // KS distance to a fine-grid reference shrinks as the step is refined.
    const std::size_t reps = 20000;
    const auto terminal = [&](double step, std::uint64_t stream) {
        std::vector<double> v(reps);
        for (std::size_t i = 0; i < reps; ++i)
            v[i] = sample_squared_bessel(1.0, 0.0, {1.0, step}, derive_seed(RngSeed{stream}, i)).values.back();
        return Sample(v);
    };
    const Sample reference = terminal(1e-3, 1);
    const double coarse = ks_two_sample(terminal(0.25, 2), reference);
    const double fine = ks_two_sample(terminal(1.0 / 64, 3), reference);
    CHECK(fine < coarse);
}
