#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "crtlab/rng.hpp"
#include "crtlab/rtree.hpp"
#include "crtlab/sparse_table.hpp"

namespace crt {

/// Vertex of the k-regular tree: child indices read from the root. The
/// first index ranges over [0, k), later ones over [0, k - 1).
using TreeWord = std::vector<std::uint32_t>;

bool valid_word(const TreeWord& word, unsigned k);
std::size_t tree_dist(const TreeWord& u, const TreeWord& v);

/// Log-probabilities h[m][r] that the radial chain of the walk on the
/// k-regular tree (0 -> 1 surely, r -> r+1 w.p. (k-1)/k, r -> r-1 w.p. 1/k)
/// started at r sits at 0 after m steps. Only entries a 2n-step bridge can
/// query are stored: r <= min(m, 2n - m) with r = m mod 2.
class RadialDP {
public:
    /// Default ceiling on the table size in bytes.
    static constexpr std::size_t kDefaultMemoryCeiling = std::size_t{2} << 30;

    RadialDP(unsigned k, std::size_t n, std::size_t memory_ceiling = kDefaultMemoryCeiling);

    unsigned k() const { return k_; }
    std::size_t n() const { return n_; }
    std::size_t horizon() const { return 2 * n_; }
    std::size_t table_bytes() const { return table_.size() * sizeof(double); }

    /// -infinity when r > m or r and m differ in parity. Entries with
    /// r > 2n - m are not stored and raise std::out_of_range.
    double log_h(std::size_t m, std::size_t r) const;

    static std::size_t bytes_needed(std::size_t n);

private:
    std::size_t offset(std::size_t m) const { return offsets_[m]; }
    std::size_t limit(std::size_t m) const { return std::min(m, 2 * n_ - m); }

    unsigned k_;
    std::size_t n_;
    std::vector<std::size_t> offsets_;
    std::vector<double> table_;
};

RadialDP build_radial_dp(unsigned k, std::size_t n, std::size_t memory_ceiling = RadialDP::kDefaultMemoryCeiling);

/// Subtree of the k-regular tree spanned by a walk. Node 0 is the root.
class RangeTree {
public:
    explicit RangeTree(unsigned k);

    unsigned k() const { return k_; }
    std::size_t size() const { return parent_.size(); }
    std::uint32_t parent(std::uint32_t v) const { return parent_[v]; }
    std::uint32_t depth(std::uint32_t v) const { return depth_[v]; }
    std::uint32_t child_index(std::uint32_t v) const { return child_index_[v]; }
    /// Child of v with index c, created on first use.
    std::uint32_t child(std::uint32_t v, std::uint32_t c);
    TreeWord word(std::uint32_t v) const;

    /// Prepares constant-time distance queries; call after the last child().
    void finalize();
    std::uint32_t distance(std::uint32_t u, std::uint32_t v) const;

private:
    unsigned k_;
    std::vector<std::uint32_t> parent_, depth_, child_index_;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> children_;
    std::vector<std::uint32_t> euler_, first_;
    SparseTable<std::uint32_t> euler_depth_;
};

/// Closed walk of length 2n from the root of the k-regular tree.
struct WalkBridge {
    std::shared_ptr<const RangeTree> tree;
    std::vector<std::uint32_t> nodes;
    std::vector<std::uint32_t> radial;

    std::size_t steps() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    TreeWord vertex(std::size_t i) const { return tree->word(nodes.at(i)); }
    std::uint32_t distance(std::size_t i, std::size_t j) const { return tree->distance(nodes.at(i), nodes.at(j)); }
    /// Throws DataError unless the walk is closed, adjacent step to step and
    /// radial matches the depths.
    void validate() const;
    /// CSV columns step,depth,vertex (child indices joined by '-').
    void write_csv(std::ostream& out) const;
};

/// Exact sample of the walk conditioned on S_{2n} = o via the h-transform
/// of the radial chain; up-steps pick a child uniformly.
WalkBridge sample_conditioned_walk(const RadialDP& dp, RngSeed seed);
WalkBridge sample_conditioned_walk(unsigned k, std::size_t n, RngSeed seed);

/// Every radial (Dyck) path of length 2n with its number of closed walks:
/// k per up-step from 0, k - 1 per up-step from r > 0. Paths are keyed by
/// the bit mask of up-steps (bit i set when step i goes up).
struct BridgeEnumeration {
    using Integer = boost::multiprecision::cpp_int;
    using Rational = boost::multiprecision::cpp_rational;

    unsigned k = 0;
    std::size_t n = 0;
    std::vector<std::uint32_t> keys;
    std::vector<Integer> weights;
    Integer total;

    Rational probability(std::size_t i) const { return Rational(weights[i], total); }
    double probability_double(std::size_t i) const;
    /// Position of a key in `keys`, or keys.size() if absent.
    std::size_t find(std::uint32_t key) const;
};

inline constexpr std::size_t kMaxEnumerationN = 8;

/// Refuses n > kMaxEnumerationN with ResourceGuardError.
BridgeEnumeration enumerate_bridges(unsigned k, std::size_t n);

/// Up-step bit mask of a radial path of length <= 32.
std::uint32_t radial_key(std::span<const std::uint32_t> radial);

/// Radial path of the walk seen from S_t after a cyclic shift by t:
/// i -> d(S_t, S_{t + i mod 2n}).
std::vector<std::uint32_t> reroot_radial(const WalkBridge& walk, std::size_t t);

/// Max over subsample pairs of (rho_i + rho_j - 2 min_{[i,j]} rho - d(S_i, S_j)) / sqrt(2n).
double gap_statistic(const WalkBridge& walk, std::span<const std::size_t> subsample);

/// Range distances d(S_i, S_j) / scale on the subsample; basepoint index 0.
FiniteMetricSpace range_matrix(const WalkBridge& walk, std::span<const std::size_t> subsample, double scale);

/// Tree coded by radial / scale on times i / 2n.
CodedTree radial_coded_tree(const WalkBridge& walk, double scale);

/// Largest four-point gap (largest minus second largest pair sum) of the
/// range distances on the subsample, in integer arithmetic.
std::uint64_t range_four_point_gap(const WalkBridge& walk, std::span<const std::size_t> subsample);

}  // namespace crt
