#include "crtlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crtlab/error.hpp"

namespace crt {

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_)
        if (!std::isfinite(v)) throw InvalidParameter("sample contains a non-finite value");
    std::sort(values_.begin(), values_.end());
}

double Sample::cdf(double x) const {
    if (values_.empty()) throw InvalidParameter("empty sample");
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double ks_two_sample(const Sample& a, const Sample& b) {
    if (a.empty() || b.empty()) throw InvalidParameter("ks_two_sample: empty sample");
    const auto& x = a.values();
    const auto& y = b.values();
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double sup = 0.0;
    // Walk the merged grid; after consuming every copy of the current value
    // both ECDFs are evaluated right-continuously.
    while (i < x.size() || j < y.size()) {
        double v;
        if (j == y.size() || (i < x.size() && x[i] <= y[j]))
            v = x[i];
        else
            v = y[j];
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return sup;
}

double ks_vs_cdf(const Sample& a, const std::function<double(double)>& cdf) {
    if (a.empty()) throw InvalidParameter("ks_vs_cdf: empty sample");
    const double inf = std::numeric_limits<double>::infinity();
    const double lo = cdf(-inf), hi = cdf(inf);
    if (!(std::abs(lo) <= 1e-9) || !(std::abs(hi - 1.0) <= 1e-9))
        throw InvalidParameter("ks_vs_cdf: cdf must tend to 0 and 1");
    const auto& x = a.values();
    const double n = static_cast<double>(x.size());
    double sup = 0.0;
    double previous = lo;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        if (!(f >= previous - 1e-12) || f > 1.0 + 1e-12)
            throw InvalidParameter("ks_vs_cdf: cdf is not monotone on the sample");
        previous = f;
        sup = std::max({sup, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return sup;
}

double ks_vs_pmf(const Sample& a, std::span<const double> support, std::span<const double> mass) {
    if (a.empty()) throw InvalidParameter("ks_vs_pmf: empty sample");
    if (support.size() != mass.size() || support.empty())
        throw InvalidParameter("ks_vs_pmf: support and mass must be non-empty and equal length");
    double total = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] < 0.0) throw InvalidParameter("ks_vs_pmf: negative mass");
        if (i > 0 && !(support[i] > support[i - 1])) throw InvalidParameter("ks_vs_pmf: unsorted support");
        total += mass[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidParameter("ks_vs_pmf: masses do not sum to 1");

    // Both CDFs are step functions that only jump on the merged grid.
    const auto& x = a.values();
    const double n = static_cast<double>(x.size());
    std::size_t i = 0, j = 0;
    double model = 0.0, sup = 0.0;
    while (i < x.size() || j < support.size()) {
        double v;
        if (j == support.size() || (i < x.size() && x[i] <= support[j]))
            v = x[i];
        else
            v = support[j];
        while (i < x.size() && x[i] == v) ++i;
        while (j < support.size() && support[j] == v) model += mass[j++];
        sup = std::max(sup, std::abs(static_cast<double>(i) / n - model));
    }
    return sup;
}

double quantile(const Sample& a, double q) {
    if (a.empty()) throw InvalidParameter("quantile of empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("quantile level outside [0,1]");
    const double h = q * static_cast<double>(a.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, a.size() - 1);
    return a[lo] + (h - static_cast<double>(lo)) * (a[hi] - a[lo]);
}

double median(const Sample& a) { return quantile(a, 0.5); }

double mean(std::span<const double> values) {
    if (values.empty()) throw InvalidParameter("mean of empty range");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

std::pair<double, double> bootstrap_ci(const Sample& a, const Statistic& statistic,
                                       std::size_t replicas, double level, RngSeed seed) {
    if (a.empty()) throw InvalidParameter("bootstrap of empty sample");
    if (replicas < 100) throw InvalidParameter("bootstrap needs at least 100 replicas");
    if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("bootstrap level outside (0,1)");
    std::vector<double> stats(replicas);
    std::vector<double> resample(a.size());
    for (std::size_t r = 0; r < replicas; ++r) {
        Rng rng(derive_seed(seed, r));
        for (auto& v : resample) v = a[rng.below(a.size())];
        stats[r] = statistic(Sample(resample));
    }
    const Sample distribution(std::move(stats));
    const double tail = (1.0 - level) / 2.0;
    return {quantile(distribution, tail), quantile(distribution, 1.0 - tail)};
}

bool nonincreasing_up_to(std::span<const double> sequence, std::size_t allowed) {
    std::size_t inversions = 0;
    for (std::size_t i = 1; i < sequence.size(); ++i)
        if (sequence[i] > sequence[i - 1]) ++inversions;
    return inversions <= allowed;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw InvalidParameter("total_variation: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

}  // namespace crt
