#include "crtlab/rtree.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace crt {

FiniteMetricSpace::FiniteMetricSpace(std::size_t n, std::vector<double> matrix, std::size_t basepoint)
    : n_(n), d_(std::move(matrix)), basepoint_(basepoint) {
    if (n_ == 0) throw InvalidParameter("metric space must have at least one point");
    if (d_.size() != n_ * n_) throw InvalidParameter("metric matrix has the wrong size");
    if (basepoint_ >= n_) throw InvalidParameter("basepoint out of range");
    for (std::size_t i = 0; i < n_; ++i) {
        if (d_[i * n_ + i] != 0.0) throw DataError("metric matrix has a nonzero diagonal entry");
        for (std::size_t j = 0; j < i; ++j) {
            const double v = d_[i * n_ + j];
            if (!std::isfinite(v) || v < 0.0) throw DataError("metric entry negative or not finite");
            if (v != d_[j * n_ + i]) throw DataError("metric matrix is not symmetric");
        }
    }
}

double FiniteMetricSpace::diameter() const { return *std::max_element(d_.begin(), d_.end()); }

double FiniteMetricSpace::radius() const {
    const double* r = row(basepoint_);
    return *std::max_element(r, r + n_);
}

double FiniteMetricSpace::max_triangle_violation() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const double* ri = row(i);
        for (std::size_t j = 0; j < n_; ++j) {
            const double* rj = row(j);
            for (std::size_t k = 0; k < n_; ++k) worst = std::max(worst, ri[k] - ri[j] - rj[k]);
        }
    }
    return worst;
}

void FiniteMetricSpace::write_csv(std::ostream& out) const {
    out << n_ << ',' << basepoint_ << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 1; i < n_; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (j) out << ',';
            out << (*this)(i, j);
        }
        out << '\n';
    }
    if (!out) throw IoError("failed to write metric space");
}

FiniteMetricSpace FiniteMetricSpace::read_csv(std::istream& in) {
    std::string line;
    auto fields = [](const std::string& text) {
        std::vector<std::string> out;
        std::stringstream ss(text);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    auto number = [](const std::string& cell) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            throw DataError("metric csv: bad number '" + cell + "'");
        }
        if (used != cell.size()) throw DataError("metric csv: bad number '" + cell + "'");
        return v;
    };
    if (!std::getline(in, line)) throw DataError("metric csv: missing header");
    const auto head = fields(line);
    if (head.size() != 2) throw DataError("metric csv: header must be 'n,basepoint'");
    const double nd = number(head[0]), bd = number(head[1]);
    if (nd < 1 || nd != std::floor(nd) || bd < 0 || bd != std::floor(bd))
        throw DataError("metric csv: bad header values");
    const auto n = static_cast<std::size_t>(nd);
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        if (!std::getline(in, line)) throw DataError("metric csv: truncated matrix");
        const auto cells = fields(line);
        if (cells.size() != i) throw DataError("metric csv: row " + std::to_string(i) + " has wrong length");
        for (std::size_t j = 0; j < i; ++j) d[i * n + j] = d[j * n + i] = number(cells[j]);
    }
    return FiniteMetricSpace(n, std::move(d), static_cast<std::size_t>(bd));
}

namespace {

std::vector<double> linear_floors(const std::vector<double>& v) {
    std::vector<double> floors(v.size() > 0 ? v.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) floors[i] = std::min(v[i], v[i + 1]);
    return floors;
}

}  // namespace

CodedTree::CodedTree(Kind kind, std::vector<double> times, std::vector<double> values,
                     std::vector<double> floors, std::size_t origin)
    : kind_(kind), times_(std::move(times)), values_(std::move(values)),
      floors_(std::span<const double>(floors)), origin_(origin) {}

CodedTree CodedTree::from_excursion(const Path& grid) {
    grid.validate();
    if (grid.size() < 2) throw InvalidParameter("coded tree needs at least 2 grid points");
    if (grid.values.front() != 0.0 || grid.values.back() != 0.0)
        throw DataError("excursion grid must start and end at 0");
    for (double v : grid.values)
        if (v < 0.0) throw DataError("excursion grid has a negative value");
    return CodedTree(Kind::excursion, grid.times, grid.values, linear_floors(grid.values), 0);
}

CodedTree CodedTree::from_two_sided(const TwoSidedPath& path) {
    path.validate();
    const std::size_t back = path.backward.size();
    const std::size_t n = back + path.forward.size() - 1;
    std::vector<double> times(n), values(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto i = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(back - 1);
        times[j] = path.time(i);
        values[j] = path.value(i);
        if (values[j] < 0.0) throw DataError("two-sided coding path has a negative value");
    }
    auto floors = linear_floors(values);
    return CodedTree(Kind::two_sided, std::move(times), std::move(values), std::move(floors), back - 1);
}

double CodedTree::floor_between(std::size_t lo, std::size_t hi) const {
    if (lo > hi) std::swap(lo, hi);
    if (hi >= values_.size()) throw std::out_of_range("coded tree index out of range");
    if (lo == hi) return values_[lo];
    return floors_.min(lo, hi - 1);
}

std::size_t CodedTree::storage_index(std::ptrdiff_t signed_index) const {
    const auto j = static_cast<std::ptrdiff_t>(origin_) + signed_index;
    if (j < 0 || j >= static_cast<std::ptrdiff_t>(values_.size()))
        throw std::out_of_range("coded tree index outside the simulated window");
    return static_cast<std::size_t>(j);
}

double tree_distance(const CodedTree& tree, std::size_t s, std::size_t t) {
    if (s == t) {
        if (s >= tree.size()) throw std::out_of_range("coded tree index out of range");
        return 0.0;
    }
    const double d = tree.value(s) + tree.value(t) - 2.0 * tree.floor_between(s, t);
    return std::max(d, 0.0);
}

TwoSidedDistance two_sided_distance(const CodedTree& tree, std::ptrdiff_t s, std::ptrdiff_t t) {
    const std::size_t a = tree.storage_index(s);
    const std::size_t b = tree.storage_index(t);
    if (s == t) return {};
    if ((s >= 0 && t >= 0) || (s <= 0 && t <= 0)) return {tree_distance(tree, a, b), false};
    const std::size_t lo = std::min(a, b), hi = std::max(a, b);
    const std::size_t last = tree.size() - 1;
    const double outside = std::min(tree.floor_between(0, lo), tree.floor_between(hi, last));
    const double edge = std::min(tree.value(0), tree.value(last));
    const double d = tree.value(a) + tree.value(b) - 2.0 * outside;
    return {std::max(d, 0.0), outside >= edge};
}

std::optional<std::ptrdiff_t> gamma_plus(const CodedTree& tree, double r) {
    const std::size_t last = tree.size() - 1;
    if (tree.value(last) <= r) return std::nullopt;
    for (std::size_t j = last; j-- > tree.origin_index();)
        if (tree.value(j) <= r) return static_cast<std::ptrdiff_t>(j - tree.origin_index());
    return std::nullopt;
}

std::optional<std::ptrdiff_t> gamma_minus(const CodedTree& tree, double r) {
    if (tree.value(0) <= r) return std::nullopt;
    for (std::size_t j = 1; j <= tree.origin_index(); ++j)
        if (tree.value(j) <= r)
            return static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(tree.origin_index());
    return std::nullopt;
}

CodedTree reroot_excursion(const CodedTree& tree, std::size_t t) {
    if (tree.kind() != CodedTree::Kind::excursion) throw InvalidParameter("reroot_excursion needs an excursion tree");
    const std::size_t n = tree.size();
    if (t >= n) throw std::out_of_range("reroot index out of range");
    const auto& times = tree.times();
    const double dt = (times.back() - times.front()) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * dt)
            throw InvalidParameter("reroot_excursion needs a uniform grid");

    const std::size_t period = n - 1;
    const std::size_t root = t % period;
    const auto& floors = tree.interval_floors();
    std::vector<double> values(n);
    for (std::size_t s = 0; s < n; ++s) values[s] = tree_distance(tree, root, (root + s) % period);
    values[0] = values[period] = 0.0;
    std::vector<double> new_floors(period);
    for (std::size_t s = 0; s < period; ++s) {
        const std::size_t a = (root + s) % period;
        const double step = tree.value(a) + tree.value(a + 1) - 2.0 * floors[a];
        const double low = 0.5 * (values[s] + values[s + 1] - step);
        new_floors[s] = std::clamp(low, 0.0, std::min(values[s], values[s + 1]));
    }
    return CodedTree(CodedTree::Kind::excursion, times, std::move(values), std::move(new_floors), 0);
}

FiniteMetricSpace distance_matrix(const CodedTree& tree, std::span<const std::size_t> subsample) {
    return distance_matrix(subsample, tree.origin_index(),
                           [&tree](std::size_t s, std::size_t t) { return tree_distance(tree, s, t); });
}

namespace {

double quadruple_gap(double s1, double s2, double s3) {
    if (s1 < s2) std::swap(s1, s2);
    if (s2 < s3) std::swap(s2, s3);
    if (s1 < s2) std::swap(s1, s2);
    return s1 - s2;
}

}  // namespace

double four_point_delta(const FiniteMetricSpace& space, RngSeed seed) {
    const std::size_t n = space.size();
    if (n < 4) return 0.0;
    if (n > kExactFourPointLimit) return four_point_delta_sampled(space, 1'000'000, seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* ri = space.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* rj = space.row(j);
            const double dij = ri[j];
            for (std::size_t k = j + 1; k < n; ++k) {
                const double* rk = space.row(k);
                const double dik = ri[k], djk = rj[k];
                for (std::size_t l = k + 1; l < n; ++l)
                    worst = std::max(worst, quadruple_gap(dij + rk[l], dik + rj[l], ri[l] + djk));
            }
        }
    }
    return worst / 2.0;
}

double four_point_delta_sampled(const FiniteMetricSpace& space, std::size_t quadruples, RngSeed seed) {
    const std::size_t n = space.size();
    if (n < 4) return 0.0;
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t q = 0; q < quadruples; ++q) {
        std::array<std::size_t, 4> p{};
        for (std::size_t a = 0; a < 4; ++a) {
            bool fresh;
            do {
                p[a] = rng.below(n);
                fresh = std::find(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(a), p[a]) ==
                        p.begin() + static_cast<std::ptrdiff_t>(a);
            } while (!fresh);
        }
        const auto d = [&](std::size_t x, std::size_t y) { return space(p[x], p[y]); };
        worst = std::max(worst, quadruple_gap(d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)));
    }
    return worst / 2.0;
}

std::size_t centers_for_radius(std::span<const double> radii, double eta) {
    for (std::size_t k = 0; k < radii.size(); ++k)
        if (radii[k] <= eta) return k + 1;
    throw InvalidParameter("farthest-point traversal stopped before reaching the requested radius");
}

CoverCount covering_number(const FiniteMetricSpace& space, double eta) {
    return greedy_cover(space.size(), space.basepoint(), eta,
                        [&space](std::size_t i, std::size_t j) { return space(i, j); });
}

namespace {

struct CoverSearch {
    std::vector<std::uint64_t> balls;
    std::uint64_t all = 0;

    bool feasible(std::uint64_t covered, std::size_t budget) const {
        if (covered == all) return true;
        if (budget == 0) return false;
        const int target = std::countr_zero(~covered & all);
        for (std::size_t c = 0; c < balls.size(); ++c) {
            if (!((balls[c] >> target) & 1u)) continue;
            if (feasible(covered | balls[c], budget - 1)) return true;
        }
        return false;
    }
};

}  // namespace

std::size_t exact_covering_number(const FiniteMetricSpace& space, double eta, std::size_t max_points) {
    if (!(eta > 0.0)) throw InvalidParameter("covering radius must be positive");
    const std::size_t n = space.size();
    if (n > std::min<std::size_t>(max_points, 64))
        throw ResourceGuardError("exact covering refused above " + std::to_string(std::min<std::size_t>(max_points, 64)) +
                                 " points");
    CoverSearch search;
    search.all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    search.balls.resize(n);
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t i = 0; i < n; ++i)
            if (space(c, i) <= eta) search.balls[c] |= std::uint64_t{1} << i;
    for (std::size_t k = 1;; ++k)
        if (search.feasible(0, k)) return k;
}

double correspondence_distortion(const FiniteMetricSpace& a, const FiniteMetricSpace& b) {
    if (a.size() != b.size()) throw InvalidParameter("correspondence_distortion: size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    return worst;
}

double gh_lower_bound(const FiniteMetricSpace& a, const FiniteMetricSpace& b) {
    return 0.5 * std::max(std::abs(a.diameter() - b.diameter()), std::abs(a.radius() - b.radius()));
}

std::vector<std::size_t> even_subsample(std::size_t points, std::size_t count) {
    if (points == 0 || count == 0) throw InvalidParameter("even_subsample needs positive sizes");
    std::vector<std::size_t> out;
    if (points <= count) {
        out.resize(points);
        for (std::size_t i = 0; i < points; ++i) out[i] = i;
        return out;
    }
    if (count == 1) return {0};
    out.resize(count);
    const double step = static_cast<double>(points - 1) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<std::size_t>(std::llround(step * static_cast<double>(i)));
    return out;
}

}  // namespace crt
