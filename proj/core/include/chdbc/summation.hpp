#pragma once

#include <cstddef>

namespace chdbc {

namespace detail {
inline constexpr std::size_t kPairwiseLeaf = 16;
}

/// Pairwise (tree) summation of term(k) for k in [begin, end).
///
/// The split points depend only on the range, so the rounding pattern is
/// fixed for a given length. Error growth is O(log n) instead of O(n).
template <class Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
    const std::size_t n = end - begin;
    if (n <= detail::kPairwiseLeaf) {
        double s = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            s += term(k);
        }
        return s;
    }
    const std::size_t mid = begin + n / 2;
    return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

template <class Term>
double pairwise_sum(std::size_t n, const Term& term) {
    return pairwise_sum(std::size_t{0}, n, term);
}

} // namespace chdbc
