#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tdc/rng.hpp"

namespace tdc {

// A permutation is stored as an ordering: perm[k] is the (0-based) element
// occupying temporal rank k. Text I/O renders elements 1-based.
using Permutation = std::vector<int>;

inline Permutation identity_permutation(int n) {
    Permutation p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    return p;
}

inline bool is_permutation_of_n(const Permutation& p) {
    std::vector<bool> seen(p.size(), false);
    for (int v : p) {
        if (v < 0 || static_cast<std::size_t>(v) >= p.size() || seen[static_cast<std::size_t>(v)])
            return false;
        seen[static_cast<std::size_t>(v)] = true;
    }
    return true;
}

// inverse(p)[element] = rank of element in p.
inline Permutation inverse(const Permutation& p) {
    Permutation inv(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) inv[static_cast<std::size_t>(p[k])] = static_cast<int>(k);
    return inv;
}

// compose(a, b)[k] = a[b[k]].
inline Permutation compose(const Permutation& a, const Permutation& b) {
    if (a.size() != b.size()) throw std::invalid_argument("compose: size mismatch");
    Permutation c(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) c[k] = a[static_cast<std::size_t>(b[k])];
    return c;
}

// Number of element pairs ordered differently by the two sequences.
inline int kendall_tau_distance(const Permutation& a, const Permutation& b) {
    if (a.size() != b.size()) throw std::invalid_argument("kendall_tau_distance: size mismatch");
    const Permutation rb = inverse(b);
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (rb[static_cast<std::size_t>(a[i])] > rb[static_cast<std::size_t>(a[j])]) ++d;
    return d;
}

// Deterministic Fisher-Yates shuffle driven by a counter RNG.
inline Permutation random_permutation(int n, const CounterRng& rng, std::uint64_t counter_base) {
    Permutation p = identity_permutation(n);
    for (int i = n - 1; i > 0; --i) {
        std::uint64_t r = rng.bits(counter_base + static_cast<std::uint64_t>(i));
        int j = static_cast<int>(r % static_cast<std::uint64_t>(i + 1));
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
}

}  // namespace tdc
