#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crtlab/error.hpp"
#include "crtlab/paths.hpp"
#include "crtlab/rng.hpp"
#include "crtlab/sparse_table.hpp"

namespace crt {

/// Pointed finite metric space stored as a dense symmetric matrix.
class FiniteMetricSpace {
public:
    /// Validates exact symmetry, zero diagonal and finite non-negative entries.
    FiniteMetricSpace(std::size_t n, std::vector<double> matrix, std::size_t basepoint);

    std::size_t size() const { return n_; }
    std::size_t basepoint() const { return basepoint_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    const double* row(std::size_t i) const { return d_.data() + i * n_; }

    double diameter() const;
    /// Largest distance from the basepoint.
    double radius() const;
    /// Largest amount by which d(i,k) exceeds d(i,j) + d(j,k). O(n^3).
    double max_triangle_violation() const;

    /// CSV: first line "n,basepoint", then row i (i >= 1) of the strict lower
    /// triangle per line, entries printed with 17 significant digits.
    void write_csv(std::ostream& out) const;
    static FiniteMetricSpace read_csv(std::istream& in);

private:
    std::size_t n_;
    std::vector<double> d_;
    std::size_t basepoint_;
};

/// Builds the matrix of `metric(subsample[a], subsample[b])`. The basepoint
/// is the position of `basepoint_time` inside the subsample. Negative or NaN
/// distances raise DataError.
template <typename Metric>
FiniteMetricSpace distance_matrix(std::span<const std::size_t> subsample, std::size_t basepoint_time,
                                  Metric&& metric) {
    if (subsample.empty()) throw InvalidParameter("distance_matrix: empty subsample");
    std::optional<std::size_t> base;
    for (std::size_t a = 0; a < subsample.size(); ++a)
        if (subsample[a] == basepoint_time && !base) base = a;
    if (!base) throw InvalidParameter("distance_matrix: subsample does not contain the basepoint");
    const std::size_t m = subsample.size();
    std::vector<double> d(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const double v = metric(subsample[a], subsample[b]);
            if (!(v >= 0.0) || !std::isfinite(v))
                throw DataError("distance_matrix: metric returned " + std::to_string(v));
            d[a * m + b] = v;
            d[b * m + a] = v;
        }
    }
    return FiniteMetricSpace(m, std::move(d), *base);
}

/// Real tree coded by a non-negative grid function. Besides the grid values
/// the tree keeps, for every interval between consecutive grid points, the
/// infimum of the coding function over that interval. For grids built from
/// sampled paths (linear interpolation) this is the smaller endpoint; for
/// re-rooted trees the coding function dips between grid points and the
/// stored floor records the dip, which keeps the coded metric exact.
class CodedTree {
public:
    enum class Kind { excursion, two_sided };

    /// Values >= 0 with both endpoints exactly 0.
    static CodedTree from_excursion(const Path& grid);
    /// Non-negative two-sided path with value 0 at time 0.
    static CodedTree from_two_sided(const TwoSidedPath& path);

    Kind kind() const { return kind_; }
    std::size_t size() const { return values_.size(); }
    /// Storage index of time 0 (0 for excursion trees).
    std::size_t origin_index() const { return origin_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    double value(std::size_t i) const { return values_.at(i); }
    /// Infimum of the coding function between consecutive grid points.
    const std::vector<double>& interval_floors() const { return floors_.values(); }

    /// Infimum of the coding function over [lo, hi] (storage indices).
    double floor_between(std::size_t lo, std::size_t hi) const;
    /// Storage index for a signed index relative to the origin.
    std::size_t storage_index(std::ptrdiff_t signed_index) const;

private:
    CodedTree(Kind kind, std::vector<double> times, std::vector<double> values,
              std::vector<double> floors, std::size_t origin);

    friend CodedTree reroot_excursion(const CodedTree& tree, std::size_t t);

    Kind kind_;
    std::vector<double> times_;
    std::vector<double> values_;
    SparseTable<double> floors_;
    std::size_t origin_;
};

/// d(s,t) = v_s + v_t - 2 inf_{[s,t]} v over storage indices.
double tree_distance(const CodedTree& tree, std::size_t s, std::size_t t);

struct TwoSidedDistance {
    double value = 0.0;
    /// Set when s and t straddle 0 and the infimum outside [s,t] sits on a
    /// simulated window edge; over an unbounded horizon the infimum could be
    /// lower, so `value` may understate the distance.
    bool truncated = false;
};

/// Self-similar tree distance on a two-sided coded tree, indices signed
/// relative to time 0. Inside infimum when s t >= 0, outside infimum
/// (over the simulated window) otherwise; both with the factor 2.
TwoSidedDistance two_sided_distance(const CodedTree& tree, std::ptrdiff_t s, std::ptrdiff_t t);

/// Last non-negative grid index with value <= r (the ray point Gamma_+(r)),
/// or nothing when the forward window edge itself is <= r.
std::optional<std::ptrdiff_t> gamma_plus(const CodedTree& tree, double r);
/// First non-positive grid index with value <= r (Gamma_-(r)).
std::optional<std::ptrdiff_t> gamma_minus(const CodedTree& tree, double r);

/// Tree re-rooted at grid index t on a uniform grid: the output is coded by
/// s -> d(t, t (+) s) with (+) the cyclic shift on the period size()-1.
CodedTree reroot_excursion(const CodedTree& tree, std::size_t t);

/// Pairwise tree_distance over the subsample; the basepoint is the origin.
FiniteMetricSpace distance_matrix(const CodedTree& tree, std::span<const std::size_t> subsample);

/// Four-point hyperbolicity constant: max over quadruples of half the gap
/// between the two largest of the three pair sums. Exhaustive up to
/// kExactFourPointLimit points, otherwise a lower estimate from sampled
/// quadruples. Returns 0 for fewer than 4 points.
inline constexpr std::size_t kExactFourPointLimit = 256;
double four_point_delta(const FiniteMetricSpace& space, RngSeed seed = RngSeed{0x4d595df4d0f33173ULL});
double four_point_delta_sampled(const FiniteMetricSpace& space, std::size_t quadruples, RngSeed seed);

/// Greedy farthest-point cover counts at radius eta and eta/2. The first is
/// a valid cover (>= the optimum at eta) and is at most the optimum at eta/2.
struct CoverCount {
    std::size_t at_eta = 0;
    std::size_t at_half_eta = 0;
};

/// Farthest-point traversal from `start` over n points, stopping once the
/// covering radius is <= stop_radius. Returns the covering radius after each
/// added center (non-increasing).
template <typename Metric>
std::vector<double> farthest_point_radii(std::size_t n, std::size_t start, double stop_radius,
                                         Metric&& metric) {
    std::vector<double> radii;
    if (n == 0) return radii;
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = metric(start, i);
    nearest[start] = 0.0;
    for (;;) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (nearest[i] > nearest[far]) far = i;
        radii.push_back(nearest[far]);
        if (nearest[far] <= stop_radius) break;
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], metric(far, i));
        nearest[far] = 0.0;
    }
    return radii;
}

/// Number of centers needed for covering radius <= eta given the radii
/// sequence of a farthest-point traversal.
std::size_t centers_for_radius(std::span<const double> radii, double eta);

template <typename Metric>
CoverCount greedy_cover(std::size_t n, std::size_t start, double eta, Metric&& metric) {
    if (!(eta > 0.0)) throw InvalidParameter("covering radius must be positive");
    if (n == 0) return {};
    const auto radii = farthest_point_radii(n, start, eta / 2.0, metric);
    return {centers_for_radius(radii, eta), centers_for_radius(radii, eta / 2.0)};
}

CoverCount covering_number(const FiniteMetricSpace& space, double eta);

/// Minimal number of closed eta-balls centered at points of the space,
/// by exhaustive branch and bound. Refuses spaces above `max_points`.
std::size_t exact_covering_number(const FiniteMetricSpace& space, double eta, std::size_t max_points = 40);

/// Sup over index pairs of |a_ij - b_ij| for spaces matched by index.
double correspondence_distortion(const FiniteMetricSpace& a, const FiniteMetricSpace& b);

/// max(|diam a - diam b|, |radius a - radius b|) / 2, a lower bound on the
/// pointed Gromov-Hausdorff distance.
double gh_lower_bound(const FiniteMetricSpace& a, const FiniteMetricSpace& b);

/// `count` indices evenly spaced over [0, points - 1], first and last
/// included (all indices when points <= count).
std::vector<std::size_t> even_subsample(std::size_t points, std::size_t count);

}  // namespace crt
