#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "actk/core.hpp"

namespace actk {

/**
 * @brief finite abelian group Z/n_1 x ... x Z/n_r
 *
 * Elements and characters share the same mixed-radix index space (row-major, last factor
 * varies fastest). The pairing is gamma(x) = exp(2 pi i sum_j gamma_j x_j / n_j).
 */
class Group {
public:
    Group() : order_(1), exponent_(1) {}

    static Group build(std::vector<std::uint32_t> factors, std::uint64_t max_order = kDefaultMaxOrder) {
        Group g;
        std::uint64_t n = 1;
        for (auto f : factors) {
            if (f < 2) throw SchemaError("group factor must be >= 2, got " + std::to_string(f));
            if (n > max_order / f) throw SchemaError("group order exceeds configured maximum");
            n *= f;
        }
        g.factors_ = std::move(factors);
        g.order_ = n;
        g.strides_.assign(g.factors_.size(), 1);
        for (std::size_t j = g.factors_.size(); j-- > 1;) g.strides_[j - 1] = g.strides_[j] * g.factors_[j];
        g.exponent_ = 1;
        g.odd_ = true;
        g.binary_ = !g.factors_.empty();
        for (auto f : g.factors_) {
            g.exponent_ = lcm_u64(g.exponent_, f);
            if (f % 2 == 0) g.odd_ = false;
            if (f != 2) g.binary_ = false;
        }
        return g;
    }

    static Group cyclic(std::uint32_t n) { return build({n}); }

    static Group elementary(std::uint32_t p, unsigned n) { return build(std::vector<std::uint32_t>(n, p)); }

    const std::vector<std::uint32_t>& factors() const { return factors_; }
    const std::vector<std::uint64_t>& strides() const { return strides_; }
    std::uint64_t order() const { return order_; }
    std::size_t size() const { return static_cast<std::size_t>(order_); }
    bool odd_order() const { return odd_; }
    bool binary() const { return binary_; }
    std::uint64_t exponent() const { return exponent_; }
    std::size_t rank() const { return factors_.size(); }
    bool cyclic_group() const { return factors_.size() == 1; }

    bool operator==(const Group& o) const { return factors_ == o.factors_; }
    bool operator!=(const Group& o) const { return !(*this == o); }

    std::string describe() const {
        if (factors_.empty()) return "trivial";
        if (factors_.size() == 1) return "Z/" + std::to_string(factors_[0]);
        if (std::all_of(factors_.begin(), factors_.end(), [&](auto f) { return f == factors_[0]; }))
            return "F_" + std::to_string(factors_[0]) + "^" + std::to_string(factors_.size());
        std::ostringstream os;
        for (std::size_t j = 0; j < factors_.size(); ++j) os << (j ? " x " : "") << "Z/" << factors_[j];
        return os.str();
    }

    std::vector<std::uint32_t> coords(elem_t a) const {
        std::vector<std::uint32_t> c(factors_.size());
        for (std::size_t j = factors_.size(); j-- > 0;) {
            c[j] = a % factors_[j];
            a /= factors_[j];
        }
        return c;
    }

    elem_t from_coords(const std::vector<std::int64_t>& c) const {
        if (c.size() != factors_.size()) throw SchemaError("coordinate vector has wrong length");
        std::uint64_t idx = 0;
        for (std::size_t j = 0; j < factors_.size(); ++j) {
            const std::int64_t n = factors_[j];
            idx += static_cast<std::uint64_t>(((c[j] % n) + n) % n) * strides_[j];
        }
        return static_cast<elem_t>(idx);
    }

    elem_t add(elem_t a, elem_t b) const {
        if (binary_) return a ^ b;
        if (factors_.size() == 1) {
            const std::uint64_t s = std::uint64_t{a} + b;
            return static_cast<elem_t>(s >= order_ ? s - order_ : s);
        }
        std::uint64_t out = 0, mult = 1;
        for (std::size_t j = factors_.size(); j-- > 0;) {
            const std::uint32_t n = factors_[j];
            std::uint32_t s = a % n + b % n;
            if (s >= n) s -= n;
            out += s * mult;
            mult *= n;
            a /= n;
            b /= n;
        }
        return static_cast<elem_t>(out);
    }

    elem_t neg(elem_t a) const {
        if (binary_) return a;
        if (factors_.size() == 1) return a == 0 ? 0 : static_cast<elem_t>(order_ - a);
        std::uint64_t out = 0, mult = 1;
        for (std::size_t j = factors_.size(); j-- > 0;) {
            const std::uint32_t n = factors_[j];
            const std::uint32_t d = a % n;
            out += (d == 0 ? 0 : n - d) * mult;
            mult *= n;
            a /= n;
        }
        return static_cast<elem_t>(out);
    }

    elem_t sub(elem_t a, elem_t b) const { return add(a, neg(b)); }

    elem_t mul(std::int64_t k, elem_t a) const {
        std::uint64_t out = 0, mult = 1;
        for (std::size_t j = factors_.size(); j-- > 0;) {
            const std::int64_t n = factors_[j];
            const std::int64_t kk = ((k % n) + n) % n;
            out += static_cast<std::uint64_t>((kk * (a % n)) % n) * mult;
            mult *= static_cast<std::uint64_t>(n);
            a /= static_cast<elem_t>(n);
        }
        return static_cast<elem_t>(out);
    }

    /// numerator k of the phase k/exponent() of gamma(x)
    std::uint64_t phase(elem_t gamma, elem_t x) const {
        std::uint64_t acc = 0;
        for (std::size_t j = factors_.size(); j-- > 0;) {
            const std::uint64_t n = factors_[j];
            acc += ((gamma % n) * (x % n) % n) * (exponent_ / n);
            gamma /= static_cast<elem_t>(n);
            x /= static_cast<elem_t>(n);
        }
        return acc % exponent_;
    }

    std::complex<double> character(elem_t gamma, elem_t x) const {
        return unit_root(phase(gamma, x), exponent_);
    }

    /// |1 - gamma(x)| = 2|sin(pi theta)|
    double circle_distance(elem_t gamma, elem_t x) const { return chord(phase(gamma, x), exponent_); }

    /// gamma' with 2 gamma' = gamma; needs odd order
    elem_t half(elem_t gamma) const {
        if (!odd_) throw PreconditionError("half_character needs a group of odd order");
        std::uint64_t out = 0, mult = 1;
        for (std::size_t j = factors_.size(); j-- > 0;) {
            const std::uint64_t n = factors_[j];
            out += ((gamma % n) * ((n + 1) / 2) % n) * mult;
            mult *= n;
            gamma /= static_cast<elem_t>(n);
        }
        return static_cast<elem_t>(out);
    }

    static std::complex<double> unit_root(std::uint64_t k, std::uint64_t n) {
        if (k == 0) return {1.0, 0.0};
        const long double t = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k) /
                              static_cast<long double>(n);
        return {static_cast<double>(std::cos(t)), static_cast<double>(std::sin(t))};
    }

    static double chord(std::uint64_t k, std::uint64_t n) {
        if (k == 0) return 0.0;
        const std::uint64_t m = std::min(k, n - k);
        if (2 * m == n) return 2.0;
        const long double t = std::numbers::pi_v<long double> * static_cast<long double>(m) /
                              static_cast<long double>(n);
        return static_cast<double>(2.0L * std::sin(t));
    }

private:
    std::vector<std::uint32_t> factors_;
    std::vector<std::uint64_t> strides_;
    std::uint64_t order_;
    std::uint64_t exponent_;
    bool odd_ = true;
    bool binary_ = false;
};

inline elem_t half_character(const Group& g, elem_t gamma) { return g.half(gamma); }

inline std::complex<double> char_eval(const Group& g, elem_t gamma, elem_t x) { return g.character(gamma, x); }

/** @brief subset of a group stored as a bitmap */
class GSet {
public:
    GSet() = default;
    explicit GSet(Group g) : g_(std::move(g)), bits_((g_.size() + 63) / 64, 0) {}

    static GSet from_elements(const Group& g, const std::vector<elem_t>& xs) {
        GSet s(g);
        for (auto x : xs) {
            if (x >= g.order()) throw SchemaError("element index out of range");
            s.insert(x);
        }
        return s;
    }

    static GSet full(const Group& g) {
        GSet s(g);
        for (elem_t x = 0; x < g.order(); ++x) s.insert(x);
        return s;
    }

    const Group& group() const { return g_; }
    bool contains(elem_t x) const { return (bits_[x >> 6] >> (x & 63)) & 1u; }
    void insert(elem_t x) { bits_[x >> 6] |= std::uint64_t{1} << (x & 63); }
    void erase(elem_t x) { bits_[x >> 6] &= ~(std::uint64_t{1} << (x & 63)); }

    std::size_t size() const {
        std::size_t c = 0;
        for (auto w : bits_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    bool empty() const { return size() == 0; }
    double density() const { return static_cast<double>(size()) / static_cast<double>(g_.order()); }

    std::vector<elem_t> elements() const {
        std::vector<elem_t> out;
        for (std::size_t w = 0; w < bits_.size(); ++w) {
            std::uint64_t word = bits_[w];
            while (word) {
                const int b = std::countr_zero(word);
                out.push_back(static_cast<elem_t>(w * 64 + static_cast<std::size_t>(b)));
                word &= word - 1;
            }
        }
        return out;
    }

    const std::vector<std::uint64_t>& words() const { return bits_; }

    bool subset_of(const GSet& o) const {
        for (std::size_t w = 0; w < bits_.size(); ++w)
            if (bits_[w] & ~o.bits_[w]) return false;
        return true;
    }

    bool operator==(const GSet& o) const { return g_ == o.g_ && bits_ == o.bits_; }
    bool operator!=(const GSet& o) const { return !(*this == o); }

    GSet& operator|=(const GSet& o) {
        for (std::size_t w = 0; w < bits_.size(); ++w) bits_[w] |= o.bits_[w];
        return *this;
    }
    GSet& operator&=(const GSet& o) {
        for (std::size_t w = 0; w < bits_.size(); ++w) bits_[w] &= o.bits_[w];
        return *this;
    }
    GSet& operator-=(const GSet& o) {
        for (std::size_t w = 0; w < bits_.size(); ++w) bits_[w] &= ~o.bits_[w];
        return *this;
    }

private:
    Group g_;
    std::vector<std::uint64_t> bits_;
};

inline GSet operator|(GSet a, const GSet& b) { return a |= b; }
inline GSet operator&(GSet a, const GSet& b) { return a &= b; }
inline GSet operator-(GSet a, const GSet& b) { return a -= b; }

inline void require_same_group(const Group& a, const Group& b) {
    if (a != b) throw SchemaError("operands live on different groups");
}

inline GSet negate(const GSet& a) {
    GSet out(a.group());
    for (auto x : a.elements()) out.insert(a.group().neg(x));
    return out;
}

inline GSet translate(const GSet& a, elem_t t) {
    GSet out(a.group());
    for (auto x : a.elements()) out.insert(a.group().add(x, t));
    return out;
}

/// {k x : x in A}; with strict set, k must be invertible modulo every factor
inline GSet dilate_set(const GSet& a, std::int64_t k, bool strict = false) {
    const Group& g = a.group();
    if (strict) {
        for (auto f : g.factors())
            if (gcd_u64(static_cast<std::uint64_t>(((k % f) + f) % f), f) != 1)
                throw PreconditionError("dilation factor is not invertible in " + g.describe());
    }
    GSet out(g);
    for (auto x : a.elements()) out.insert(g.mul(k, x));
    return out;
}

inline GSet sumset(const GSet& a, const GSet& b) {
    require_same_group(a.group(), b.group());
    const Group& g = a.group();
    GSet out(g);
    const auto ea = a.elements();
    const auto eb = b.elements();
    for (auto x : ea)
        for (auto y : eb) out.insert(g.add(x, y));
    return out;
}

inline GSet diffset(const GSet& a, const GSet& b) { return sumset(a, negate(b)); }

/// t-fold sumset A + ... + A (t >= 1); t = 0 gives {0}
inline GSet iterated_sumset(const GSet& a, unsigned t) {
    GSet out(a.group());
    out.insert(0);
    for (unsigned i = 0; i < t; ++i) out = sumset(out, a);
    return out;
}

inline bool is_symmetric(const GSet& a) { return negate(a) == a; }

/// {lo, ..., hi} reduced modulo N in a cyclic group
inline GSet interval(const Group& g, std::int64_t lo, std::int64_t hi) {
    if (!g.cyclic_group()) throw PreconditionError("interval needs a cyclic group");
    GSet out(g);
    const std::int64_t n = static_cast<std::int64_t>(g.order());
    for (std::int64_t v = lo; v <= hi; ++v) out.insert(static_cast<elem_t>(((v % n) + n) % n));
    return out;
}

/// subgroup generated by the given elements
inline GSet generated_subgroup(const Group& g, const std::vector<elem_t>& gens) {
    GSet out(g);
    out.insert(0);
    std::vector<elem_t> frontier{0};
    while (!frontier.empty()) {
        std::vector<elem_t> next;
        for (auto x : frontier)
            for (auto s : gens) {
                const elem_t y = g.add(x, s);
                if (!out.contains(y)) {
                    out.insert(y);
                    next.push_back(y);
                }
            }
        frontier.swap(next);
    }
    return out;
}

/// {x : gamma(x) = 1 for every gamma in H}
inline GSet annihilator(const GSet& h) {
    const Group& g = h.group();
    const auto hs = h.elements();
    GSet out(g);
    for (elem_t x = 0; x < g.order(); ++x) {
        bool ok = true;
        for (auto gam : hs)
            if (g.phase(gam, x) != 0) {
                ok = false;
                break;
            }
        if (ok) out.insert(x);
    }
    return out;
}

}  // namespace actk
