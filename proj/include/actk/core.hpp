#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace actk {

using elem_t = std::uint32_t;
using count_t = std::int64_t;
using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::uint64_t kDefaultMaxOrder = std::uint64_t{1} << 24;

// absolute slack used for threshold comparisons on unit-circle distances
inline constexpr double kCircleTol = 1e-12;

/// Relative slack for Fourier-side thresholds (spectrum membership).
inline constexpr double kSpectrumTol = 1e-12;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** @brief malformed input: bad JSON, bad factors, mismatched groups */
struct SchemaError : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

/// A lemma hypothesis evaluated to false on the supplied instance.
struct HypothesisError : Error {
    using Error::Error;
};

struct CapError : Error {
    using Error::Error;
};

struct OverflowError : Error {
    using Error::Error;
};

inline count_t checked_add(count_t a, count_t b) {
    count_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("count overflow in addition");
    return r;
}

inline count_t checked_mul(count_t a, count_t b) {
    count_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("count overflow in multiplication");
    return r;
}

inline BigInt big_pow(const BigInt& base, unsigned e) {
    BigInt r = 1;
    for (unsigned i = 0; i < e; ++i) r *= base;
    return r;
}

template <class Int>
std::string to_decimal(const Int& v) {
    if constexpr (std::is_same_v<Int, BigInt>) {
        return v.str();
    } else {
        return std::to_string(v);
    }
}

/**
 * @brief seeded generator; every random choice in the toolkit goes through one of these
 *
 * Draws avoid std::uniform_*_distribution so streams are identical across standard libraries.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw PreconditionError("Rng::below(0)");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 eng_;
};

inline std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
    while (b != 0) {
        const std::uint64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline std::uint64_t lcm_u64(std::uint64_t a, std::uint64_t b) { return a / gcd_u64(a, b) * b; }

inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

inline unsigned ceil_log2(double x) {
    unsigned k = 0;
    double v = 1.0;
    while (v < x) {
        v *= 2.0;
        ++k;
    }
    return k;
}

}  // namespace actk
