#include "crtlab/treewalk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "crtlab/error.hpp"

namespace crt {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void require_k(unsigned k) {
    if (k < 3) throw InvalidParameter("tree degree k must be at least 3");
}

}  // namespace

bool valid_word(const TreeWord& word, unsigned k) {
    for (std::size_t i = 0; i < word.size(); ++i)
        if (word[i] >= (i == 0 ? k : k - 1)) return false;
    return true;
}

std::size_t tree_dist(const TreeWord& u, const TreeWord& v) {
    const auto mismatch = std::mismatch(u.begin(), u.end(), v.begin(), v.end());
    const auto common = static_cast<std::size_t>(mismatch.first - u.begin());
    return u.size() + v.size() - 2 * common;
}

std::size_t RadialDP::bytes_needed(std::size_t n) {
    std::size_t entries = 0;
    for (std::size_t m = 0; m <= 2 * n; ++m) entries += std::min(m, 2 * n - m) / 2 + 1;
    return entries * sizeof(double);
}

RadialDP::RadialDP(unsigned k, std::size_t n, std::size_t memory_ceiling) : k_(k), n_(n) {
    require_k(k);
    if (n < 1) throw InvalidParameter("walk half-length n must be at least 1");
    const std::size_t bytes = bytes_needed(n);
    if (bytes > memory_ceiling)
        throw ResourceGuardError("radial table needs " + std::to_string(bytes) + " bytes, ceiling is " +
                                 std::to_string(memory_ceiling));
    offsets_.resize(2 * n + 2);
    offsets_[0] = 0;
    for (std::size_t m = 0; m <= 2 * n; ++m) offsets_[m + 1] = offsets_[m] + limit(m) / 2 + 1;
    table_.assign(offsets_.back(), kNegInf);

    const double log_up = std::log(static_cast<double>(k - 1) / static_cast<double>(k));
    const double log_down = -std::log(static_cast<double>(k));
    table_[0] = 0.0;
    for (std::size_t m = 1; m <= 2 * n; ++m) {
        // Stored radii at m share the parity of m: r = m % 2 + 2 j.
        for (std::size_t r = m % 2; r <= limit(m); r += 2) {
            double value;
            if (r == 0) {
                value = log_h(m - 1, 1);
            } else {
                const double up = r + 1 <= m - 1 ? log_up + log_h(m - 1, r + 1) : kNegInf;
                value = log_add_exp(up, log_down + log_h(m - 1, r - 1));
            }
            table_[offset(m) + r / 2] = value;
        }
    }
}

double RadialDP::log_h(std::size_t m, std::size_t r) const {
    if (m > 2 * n_) throw std::out_of_range("radial table: step count beyond the horizon");
    if (r > m || (r % 2) != (m % 2)) return kNegInf;
    if (r > limit(m)) throw std::out_of_range("radial table: entry not stored");
    return table_[offset(m) + r / 2];
}

RadialDP build_radial_dp(unsigned k, std::size_t n, std::size_t memory_ceiling) {
    return RadialDP(k, n, memory_ceiling);
}

RangeTree::RangeTree(unsigned k) : k_(k) {
    require_k(k);
    parent_.push_back(0);
    depth_.push_back(0);
    child_index_.push_back(0);
    children_.emplace_back();
}

std::uint32_t RangeTree::child(std::uint32_t v, std::uint32_t c) {
    for (const auto& [index, node] : children_[v])
        if (index == c) return node;
    const auto node = static_cast<std::uint32_t>(parent_.size());
    parent_.push_back(v);
    depth_.push_back(depth_[v] + 1);
    child_index_.push_back(c);
    children_[v].emplace_back(c, node);
    children_.emplace_back();
    return node;
}

TreeWord RangeTree::word(std::uint32_t v) const {
    TreeWord w(depth_.at(v));
    for (std::size_t i = w.size(); i-- > 0;) {
        w[i] = child_index_[v];
        v = parent_[v];
    }
    return w;
}

void RangeTree::finalize() {
    const std::size_t n = size();
    euler_.clear();
    euler_.reserve(2 * n);
    first_.assign(n, 0);
    std::vector<std::uint32_t> tour_depth;
    tour_depth.reserve(2 * n);
    // Iterative DFS: (node, next child position).
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
    first_[0] = 0;
    euler_.push_back(0);
    tour_depth.push_back(0);
    while (!stack.empty()) {
        auto& [v, pos] = stack.back();
        if (pos < children_[v].size()) {
            const std::uint32_t c = children_[v][pos++].second;
            first_[c] = static_cast<std::uint32_t>(euler_.size());
            euler_.push_back(c);
            tour_depth.push_back(depth_[c]);
            stack.emplace_back(c, 0);
        } else {
            stack.pop_back();
            if (!stack.empty()) {
                euler_.push_back(stack.back().first);
                tour_depth.push_back(depth_[stack.back().first]);
            }
        }
    }
    euler_depth_ = SparseTable<std::uint32_t>(std::span<const std::uint32_t>(tour_depth));
}

std::uint32_t RangeTree::distance(std::uint32_t u, std::uint32_t v) const {
    if (euler_depth_.size() == 0) throw std::logic_error("RangeTree::distance before finalize");
    std::uint32_t a = first_.at(u), b = first_.at(v);
    if (a > b) std::swap(a, b);
    return depth_[u] + depth_[v] - 2 * euler_depth_.min(a, b);
}

void WalkBridge::validate() const {
    if (!tree || nodes.empty() || nodes.size() != radial.size()) throw DataError("walk: inconsistent storage");
    if (nodes.front() != 0 || nodes.back() != 0) throw DataError("walk does not start and end at the origin");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] >= tree->size()) throw DataError("walk: node id out of range");
        if (radial[i] != tree->depth(nodes[i])) throw DataError("walk: radial value differs from depth");
        if (i > 0) {
            const auto a = nodes[i - 1], b = nodes[i];
            const bool adjacent = (b != 0 && tree->parent(b) == a) || (a != 0 && tree->parent(a) == b);
            if (!adjacent) throw DataError("walk: consecutive vertices are not adjacent");
        }
    }
}

void WalkBridge::write_csv(std::ostream& out) const {
    out << "step,depth,vertex\n";
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out << i << ',' << radial[i] << ',';
        const TreeWord w = vertex(i);
        for (std::size_t j = 0; j < w.size(); ++j) out << (j ? "-" : "") << w[j];
        out << '\n';
    }
    if (!out) throw IoError("failed to write walk");
}

WalkBridge sample_conditioned_walk(const RadialDP& dp, RngSeed seed) {
    const unsigned k = dp.k();
    const std::size_t steps = dp.horizon();
    const double p_up = static_cast<double>(k - 1) / static_cast<double>(k);
    auto tree = std::make_shared<RangeTree>(k);
    WalkBridge walk;
    walk.nodes.resize(steps + 1);
    walk.radial.resize(steps + 1);
    Rng rng(seed);
    std::uint32_t node = 0, r = 0;
    for (std::size_t i = 0; i < steps; ++i) {
        const std::size_t remaining = steps - i;
        bool up;
        if (r == 0) {
            up = true;
        } else {
            const double log_next = dp.log_h(remaining - 1, r + 1);
            const double prob = log_next == kNegInf ? 0.0 : p_up * std::exp(log_next - dp.log_h(remaining, r));
            up = rng.uniform() < prob;
        }
        if (up) {
            const auto branches = static_cast<std::uint32_t>(r == 0 ? k : k - 1);
            node = tree->child(node, static_cast<std::uint32_t>(rng.below(branches)));
            ++r;
        } else {
            node = tree->parent(node);
            --r;
        }
        walk.nodes[i + 1] = node;
        walk.radial[i + 1] = r;
    }
    tree->finalize();
    walk.tree = std::move(tree);
    return walk;
}

WalkBridge sample_conditioned_walk(unsigned k, std::size_t n, RngSeed seed) {
    return sample_conditioned_walk(RadialDP(k, n), seed);
}

double BridgeEnumeration::probability_double(std::size_t i) const {
    return static_cast<double>(probability(i));
}

std::size_t BridgeEnumeration::find(std::uint32_t key) const {
    const auto it = std::lower_bound(keys.begin(), keys.end(), key);
    return it != keys.end() && *it == key ? static_cast<std::size_t>(it - keys.begin()) : keys.size();
}

BridgeEnumeration enumerate_bridges(unsigned k, std::size_t n) {
    require_k(k);
    if (n < 1) throw InvalidParameter("walk half-length n must be at least 1");
    if (n > kMaxEnumerationN)
        throw ResourceGuardError("bridge enumeration refused above n = " + std::to_string(kMaxEnumerationN));
    BridgeEnumeration out;
    out.k = k;
    out.n = n;
    const std::size_t steps = 2 * n;
    // Masks with n up-steps whose prefix heights stay non-negative, in
    // increasing mask order.
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << steps); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != n) continue;
        int height = 0;
        std::size_t from_root = 0;
        bool ok = true;
        for (std::size_t i = 0; i < steps && ok; ++i) {
            if ((mask >> i) & 1u) {
                if (height == 0) ++from_root;
                ++height;
            } else {
                ok = --height >= 0;
            }
        }
        if (!ok) continue;
        BridgeEnumeration::Integer w = boost::multiprecision::pow(BridgeEnumeration::Integer(k), static_cast<unsigned>(from_root));
        w *= boost::multiprecision::pow(BridgeEnumeration::Integer(k - 1), static_cast<unsigned>(n - from_root));
        out.keys.push_back(mask);
        out.weights.push_back(w);
        out.total += w;
    }
    return out;
}

std::uint32_t radial_key(std::span<const std::uint32_t> radial) {
    if (radial.size() > 33) throw InvalidParameter("radial_key: path longer than 32 steps");
    std::uint32_t key = 0;
    for (std::size_t i = 1; i < radial.size(); ++i)
        if (radial[i] > radial[i - 1]) key |= std::uint32_t{1} << (i - 1);
    return key;
}

std::vector<std::uint32_t> reroot_radial(const WalkBridge& walk, std::size_t t) {
    const std::size_t period = walk.steps();
    if (period == 0) throw InvalidParameter("reroot_radial: empty walk");
    t %= period;
    std::vector<std::uint32_t> out(period + 1);
    for (std::size_t i = 0; i <= period; ++i) out[i] = walk.distance(t, (t + i) % period);
    return out;
}

double gap_statistic(const WalkBridge& walk, std::span<const std::size_t> subsample) {
    const std::size_t steps = walk.steps();
    if (steps == 0) throw InvalidParameter("gap_statistic: empty walk");
    for (std::size_t i : subsample)
        if (i > steps) throw InvalidParameter("gap_statistic: subsample index out of range");
    const SparseTable<std::uint32_t> rmq{std::span<const std::uint32_t>(walk.radial)};
    std::int64_t worst = 0;
    for (std::size_t a = 0; a < subsample.size(); ++a) {
        for (std::size_t b = a + 1; b < subsample.size(); ++b) {
            const std::size_t i = std::min(subsample[a], subsample[b]);
            const std::size_t j = std::max(subsample[a], subsample[b]);
            const std::int64_t coded = std::int64_t{walk.radial[i]} + walk.radial[j] - 2 * std::int64_t{rmq.min(i, j)};
            const std::int64_t slack = coded - walk.distance(i, j);
            if (slack < 0) throw DataError("gap_statistic: negative tree slack");
            worst = std::max(worst, slack);
        }
    }
    return static_cast<double>(worst) / std::sqrt(static_cast<double>(steps));
}

FiniteMetricSpace range_matrix(const WalkBridge& walk, std::span<const std::size_t> subsample, double scale) {
    if (!(scale > 0.0)) throw InvalidParameter("range_matrix: scale must be positive");
    return distance_matrix(subsample, 0, [&](std::size_t i, std::size_t j) {
        return static_cast<double>(walk.distance(i, j)) / scale;
    });
}

CodedTree radial_coded_tree(const WalkBridge& walk, double scale) {
    if (!(scale > 0.0)) throw InvalidParameter("radial_coded_tree: scale must be positive");
    Path grid;
    const std::size_t steps = walk.steps();
    grid.times.resize(steps + 1);
    grid.values.resize(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        grid.times[i] = static_cast<double>(i) / static_cast<double>(steps);
        grid.values[i] = static_cast<double>(walk.radial[i]) / scale;
    }
    return CodedTree::from_excursion(grid);
}

std::uint64_t range_four_point_gap(const WalkBridge& walk, std::span<const std::size_t> subsample) {
    const std::size_t m = subsample.size();
    std::vector<std::uint64_t> d(m * m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) d[a * m + b] = walk.distance(subsample[a], subsample[b]);
    std::uint64_t worst = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t k = j + 1; k < m; ++k)
                for (std::size_t l = k + 1; l < m; ++l) {
                    std::uint64_t s[3] = {d[i * m + j] + d[k * m + l], d[i * m + k] + d[j * m + l],
                                          d[i * m + l] + d[j * m + k]};
                    std::sort(s, s + 3);
                    worst = std::max(worst, s[2] - s[1]);
                }
    return worst;
}

}  // namespace crt
