// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "specdec/common.hpp"

namespace specdec {

// log(sum_i exp(v[i])) computed with max-subtraction. -inf entries carry no
// probability mass and are skipped; an all -inf input yields -inf.
inline double log_sum_exp(std::span<const double> values) {
    if (values.empty()) {
        throw input_error("log_sum_exp: empty input");
    }
    double max_v = -std::numeric_limits<double>::infinity();
    for (double v : values) {
        max_v = std::max(max_v, v);
    }
    if (std::isinf(max_v) && max_v < 0.0) {
        return max_v;
    }
    double sum = 0.0;
    for (double v : values) {
        if (std::isinf(v) && v < 0.0) {
            continue;
        }
        sum += std::exp(v - max_v);
    }
    return max_v + std::log(sum);
}

// Shifts logits in place so that log_sum_exp(logits) == 0.
inline void log_softmax_inplace(std::span<double> logits) {
    const double lse = log_sum_exp(logits);
    for (double& v : logits) {
        v -= lse;
    }
}

// Index of the largest entry; ties resolve to the lowest index.
inline std::size_t argmax(std::span<const double> values) {
    if (values.empty()) {
        throw input_error("argmax: empty input");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

namespace detail {

// splitmix64 finalizer; the whole toy-model family keys off this.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Map a 64-bit hash to a double in [0, 1).
inline double to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Uniform double in [0, 1) drawn from any 64-bit generator, avoiding the
// implementation-defined std::uniform_real_distribution.
template <typename Rng>
double next_unit(Rng& rng) {
    return to_unit(static_cast<std::uint64_t>(rng()));
}

} // namespace detail

} // namespace specdec
