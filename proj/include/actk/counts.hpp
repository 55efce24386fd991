#pragma once

#include <vector>

#include "actk/group.hpp"

namespace actk {

/** @brief exact integer-valued function on the dual group (counting normalization) */
template <class Int = count_t>
struct CountFunction {
    Group group;
    std::vector<Int> values;

    CountFunction() = default;
    explicit CountFunction(Group g) : group(std::move(g)), values(group.size(), Int(0)) {}

    static CountFunction indicator(const GSet& s) {
        CountFunction f(s.group());
        for (auto x : s.elements()) f.values[x] = Int(1);
        return f;
    }

    std::vector<elem_t> support() const {
        std::vector<elem_t> out;
        for (elem_t x = 0; x < values.size(); ++x)
            if (values[x] != 0) out.push_back(x);
        return out;
    }

    Int max_value() const {
        Int m = values.empty() ? Int(0) : values[0];
        for (const auto& v : values)
            if (v > m) m = v;
        return m;
    }

    Int total() const {
        Int s = 0;
        for (const auto& v : values) s = add(s, v);
        return s;
    }

    static Int add(const Int& a, const Int& b) {
        if constexpr (std::is_same_v<Int, count_t>) return checked_add(a, b);
        else return a + b;
    }
    static Int mul(const Int& a, const Int& b) {
        if constexpr (std::is_same_v<Int, count_t>) return checked_mul(a, b);
        else return a * b;
    }
};

template <class Int>
CountFunction<Int> convolve_counts(const CountFunction<Int>& f, const CountFunction<Int>& g) {
    require_same_group(f.group, g.group);
    const Group& G = f.group;
    CountFunction<Int> out(G);
    const auto sf = f.support();
    const auto sg = g.support();
    for (auto a : sf)
        for (auto b : sg) {
            auto& slot = out.values[G.add(a, b)];
            slot = CountFunction<Int>::add(slot, CountFunction<Int>::mul(f.values[a], g.values[b]));
        }
    return out;
}

/// (f o g)(x) = sum_l f(l) g(l - x), real-valued inputs
template <class Int>
CountFunction<Int> correlate_counts(const CountFunction<Int>& f, const CountFunction<Int>& g) {
    require_same_group(f.group, g.group);
    const Group& G = f.group;
    CountFunction<Int> out(G);
    const auto sf = f.support();
    const auto sg = g.support();
    for (auto a : sf)
        for (auto b : sg) {
            auto& slot = out.values[G.sub(a, b)];
            slot = CountFunction<Int>::add(slot, CountFunction<Int>::mul(f.values[a], g.values[b]));
        }
    return out;
}

template <class Int>
CountFunction<Int> iterated_convolution_counts(const CountFunction<Int>& f, unsigned n) {
    if (n == 0) throw PreconditionError("iterated_convolution needs n >= 1");
    CountFunction<Int> acc = f;
    for (unsigned i = 1; i < n; ++i) acc = convolve_counts(acc, f);
    return acc;
}

template <class Int>
Int inner_counts(const CountFunction<Int>& f, const CountFunction<Int>& g) {
    require_same_group(f.group, g.group);
    Int s = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (f.values[i] != 0 && g.values[i] != 0)
            s = CountFunction<Int>::add(s, CountFunction<Int>::mul(f.values[i], g.values[i]));
    return s;
}

/// (f o 1_S)(x) = sum_{s in S} f(x + s) for symmetric-or-not S: sum_l f(l) 1_S(l - x)
template <class Int>
CountFunction<Int> correlate_with_set(const CountFunction<Int>& f, const GSet& s) {
    return correlate_counts(f, CountFunction<Int>::indicator(s));
}

template <class Int>
CountFunction<Int> convert_counts(const CountFunction<count_t>& f) {
    CountFunction<Int> out(f.group);
    for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = Int(f.values[i]);
    return out;
}

}  // namespace actk
