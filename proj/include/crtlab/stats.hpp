#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "crtlab/rng.hpp"

namespace crt {

/// Sorted sample of finite reals.
class Sample {
public:
    Sample() = default;
    /// Sorts the input; throws InvalidParameter on NaN or infinite entries.
    explicit Sample(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Right-continuous empirical CDF.
    double cdf(double x) const;

private:
    std::vector<double> values_;
};

double ks_two_sample(const Sample& a, const Sample& b);

/// One-sample KS statistic against a continuous CDF. The CDF is checked for
/// monotonicity on the sample points and for limits 0 and 1.
double ks_vs_cdf(const Sample& a, const std::function<double(double)>& cdf);

/// KS statistic against a discrete law given as sorted support points and
/// their masses (masses must sum to 1 within 1e-9).
double ks_vs_pmf(const Sample& a, std::span<const double> support, std::span<const double> mass);

/// Linear-interpolation quantile (type 7), q in [0, 1].
double quantile(const Sample& a, double q);
double median(const Sample& a);
double mean(std::span<const double> values);

using Statistic = std::function<double(const Sample&)>;

/// Percentile bootstrap interval at confidence `level` (e.g. 0.95).
std::pair<double, double> bootstrap_ci(const Sample& a, const Statistic& statistic,
                                       std::size_t replicas, double level, RngSeed seed);

/// True when the sequence has at most `allowed` strict increases between
/// consecutive entries.
bool nonincreasing_up_to(std::span<const double> sequence, std::size_t allowed);

/// Total-variation distance between two probability vectors of equal length.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace crt
