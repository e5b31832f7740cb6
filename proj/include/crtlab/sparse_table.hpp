#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace crt {

/// Range-minimum index over a fixed array: O(n log n) build, O(1) query.
/// Queries return the leftmost position of the minimum on a closed interval.
template <typename T>
class SparseTable {
public:
    SparseTable() = default;

    explicit SparseTable(std::span<const T> values)
        : values_(values.begin(), values.end()) {
        const std::size_t n = values_.size();
        if (n == 0) return;
        const std::size_t levels = std::bit_width(n);
        table_.resize(levels);
        table_[0].resize(n);
        for (std::size_t i = 0; i < n; ++i) table_[0][i] = static_cast<std::uint32_t>(i);
        for (std::size_t j = 1; j < levels; ++j) {
            const std::size_t half = std::size_t{1} << (j - 1);
            const std::size_t len = n - (std::size_t{1} << j) + 1;
            table_[j].resize(len);
            for (std::size_t i = 0; i < len; ++i)
                table_[j][i] = better(table_[j - 1][i], table_[j - 1][i + half]);
        }
    }

    std::size_t size() const { return values_.size(); }
    const std::vector<T>& values() const { return values_; }

    /// Leftmost argmin over [lo, hi].
    std::size_t argmin(std::size_t lo, std::size_t hi) const {
        if (lo > hi || hi >= values_.size()) throw std::out_of_range("SparseTable: bad interval");
        const std::size_t j = std::bit_width(hi - lo + 1) - 1;
        return better(table_[j][lo], table_[j][hi + 1 - (std::size_t{1} << j)]);
    }

    T min(std::size_t lo, std::size_t hi) const { return values_[argmin(lo, hi)]; }

private:
    std::uint32_t better(std::uint32_t a, std::uint32_t b) const {
        if (values_[b] < values_[a]) return b;
        if (values_[a] < values_[b]) return a;
        return a < b ? a : b;
    }

    std::vector<T> values_;
    std::vector<std::vector<std::uint32_t>> table_;
};

}  // namespace crt
