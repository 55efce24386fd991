#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "actk/fft.hpp"
#include "actk/group.hpp"

namespace actk {

enum class Side { physical, dual };

inline const char* side_name(Side s) { return s == Side::physical ? "physical" : "dual"; }

/**
 * @brief dense complex function on a group
 *
 * Physical-side functions are integrated against the uniform probability measure,
 * dual-side functions against counting measure.
 */
struct GFunction {
    Group group;
    Side side = Side::physical;
    std::vector<cplx> values;

    GFunction() = default;
    GFunction(Group g, Side s) : group(std::move(g)), side(s), values(group.size(), cplx{}) {}
    GFunction(Group g, Side s, std::vector<cplx> v) : group(std::move(g)), side(s), values(std::move(v)) {
        if (values.size() != group.size()) throw SchemaError("function length does not match group order");
    }

    static GFunction indicator(const GSet& a, Side s) {
        GFunction f(a.group(), s);
        for (auto x : a.elements()) f.values[x] = 1.0;
        return f;
    }

    static GFunction constant(const Group& g, Side s, cplx c) {
        GFunction f(g, s);
        std::fill(f.values.begin(), f.values.end(), c);
        return f;
    }

    std::size_t size() const { return values.size(); }
    cplx& operator[](elem_t x) { return values[x]; }
    const cplx& operator[](elem_t x) const { return values[x]; }

    GFunction& operator+=(const GFunction& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
        return *this;
    }
    GFunction& operator-=(const GFunction& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
        return *this;
    }
    GFunction& operator*=(cplx c) {
        for (auto& v : values) v *= c;
        return *this;
    }

    void check_compatible(const GFunction& o) const {
        require_same_group(group, o.group);
        if (side != o.side) throw SchemaError("functions live on different sides");
    }
};

inline GFunction operator+(GFunction a, const GFunction& b) { return a += b; }
inline GFunction operator-(GFunction a, const GFunction& b) { return a -= b; }
inline GFunction operator*(GFunction a, cplx c) { return a *= c; }

/// pointwise product
inline GFunction pointwise(const GFunction& a, const GFunction& b) {
    a.check_compatible(b);
    GFunction out(a.group, a.side);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] * b.values[i];
    return out;
}

inline GFunction conj(const GFunction& a) {
    GFunction out = a;
    for (auto& v : out.values) v = std::conj(v);
    return out;
}

/// f_-(x) = f(-x)
inline GFunction reflect(const GFunction& a) {
    GFunction out(a.group, a.side);
    for (elem_t x = 0; x < a.size(); ++x) out.values[a.group.neg(x)] = a.values[x];
    return out;
}

/// f-hat(gamma) = E_x f(x) conj(gamma(x))
inline GFunction dft(const GFunction& f) {
    if (f.side != Side::physical) throw SchemaError("dft expects a physical-side function");
    GFunction out(f.group, Side::dual, f.values);
    fft_nd(out.group, out.values, -1);
    const double inv = 1.0 / static_cast<double>(f.group.order());
    for (auto& v : out.values) v *= inv;
    return out;
}

/// omega-check(x) = sum_gamma omega(gamma) gamma(x)
inline GFunction inverse_dft(const GFunction& w) {
    if (w.side != Side::dual) throw SchemaError("inverse_dft expects a dual-side function");
    GFunction out(w.group, Side::physical, w.values);
    fft_nd(out.group, out.values, +1);
    return out;
}

/// physical: E_y f(y) g(x-y); dual: sum_l f(l) g(x-l)
inline GFunction convolve(const GFunction& f, const GFunction& g) {
    f.check_compatible(g);
    if (f.side == Side::physical) return inverse_dft(pointwise(dft(f), dft(g)));
    auto out = dft(pointwise(inverse_dft(f), inverse_dft(g)));
    return out;
}

/// physical: E_y f(y) conj(g(y-x)); dual: sum_l f(l) conj(g(l-x))
inline GFunction cross_correlate(const GFunction& f, const GFunction& g) {
    f.check_compatible(g);
    if (f.side == Side::physical) return inverse_dft(pointwise(dft(f), conj(dft(g))));
    return dft(pointwise(inverse_dft(f), conj(inverse_dft(g))));
}

inline GFunction iterated_convolution(const GFunction& f, unsigned n) {
    if (n == 0) throw PreconditionError("iterated_convolution needs n >= 1");
    if (n == 1) return f;
    if (f.side == Side::physical) {
        auto fh = dft(f);
        auto acc = fh;
        for (unsigned i = 1; i < n; ++i) acc = pointwise(acc, fh);
        return inverse_dft(acc);
    }
    auto fc = inverse_dft(f);
    auto acc = fc;
    for (unsigned i = 1; i < n; ++i) acc = pointwise(acc, fc);
    return dft(acc);
}

inline double side_weight(const GFunction& f) {
    return f.side == Side::physical ? 1.0 / static_cast<double>(f.group.order()) : 1.0;
}

inline cplx inner(const GFunction& f, const GFunction& g) {
    f.check_compatible(g);
    cplx acc{};
    for (std::size_t i = 0; i < f.size(); ++i) acc += f.values[i] * std::conj(g.values[i]);
    return acc * side_weight(f);
}

inline double lp_norm(const GFunction& f, double p) {
    double acc = 0;
    for (auto v : f.values) acc += std::pow(std::abs(v), p);
    return std::pow(acc * side_weight(f), 1.0 / p);
}

inline double l1_norm(const GFunction& f) {
    double acc = 0;
    for (auto v : f.values) acc += std::abs(v);
    return acc * side_weight(f);
}

inline double l2_norm_sq(const GFunction& f) {
    double acc = 0;
    for (auto v : f.values) acc += std::norm(v);
    return acc * side_weight(f);
}

inline double sup_norm(const GFunction& f) {
    double m = 0;
    for (auto v : f.values) m = std::max(m, std::abs(v));
    return m;
}

/// ||f||_{p(w)} = (E_x |f(x)|^p w(x))^{1/p} for a physical weight w
inline double weighted_lp_norm(const GFunction& f, const GFunction& w, double p) {
    f.check_compatible(w);
    double acc = 0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += std::pow(std::abs(f.values[i]), p) * w.values[i].real();
    return std::pow(std::max(0.0, acc * side_weight(f)), 1.0 / p);
}

inline cplx expectation(const GFunction& f) {
    cplx acc{};
    for (auto v : f.values) acc += v;
    return acc * side_weight(f);
}

/// mu_B = (N/|B|) 1_B on the physical side
inline GFunction uniform_measure(const GSet& b) {
    if (b.empty()) throw PreconditionError("uniform measure of an empty set");
    GFunction f(b.group(), Side::physical);
    const double w = static_cast<double>(b.group().order()) / static_cast<double>(b.size());
    for (auto x : b.elements()) f.values[x] = w;
    return f;
}

/// Delta(A;B) = mu_A - mu_B
inline GFunction balanced_function(const GSet& a, const GSet& b) {
    require_same_group(a.group(), b.group());
    if (a.empty()) throw PreconditionError("balanced_function needs a nonempty A");
    if (!a.subset_of(b)) throw PreconditionError("balanced_function needs A inside B");
    return uniform_measure(a) - uniform_measure(b);
}

struct PigeonholeBand {
    double eta = 0;
    int index = 0;
    double lower = 0;  // eta M
    double upper = 0;  // 2 eta M
    std::vector<std::size_t> members;  // positions into the input vector
    double mass = 0;
    double guaranteed = 0;
    bool stated_bound_holds = true;
};

namespace detail {

inline int dyadic_class_count(double delta) {
    // indices i = 0..floor(log2(2/delta)) inclusive
    return static_cast<int>(std::floor(std::log2(2.0 / delta) + 1e-12)) + 1;
}

inline int dyadic_index(double v, double delta, double m, int top) {
    // largest i with 2^{i-1} delta M <= v
    int i = top;
    while (i > 0 && std::ldexp(delta * m, i - 1) > v) --i;
    return i;
}

}  // namespace detail

/**
 * Dyadic pigeonhole, L1 form. Input values f(x) in [0,M] with sum >= delta M |X|.
 * Returns the band [eta M, 2 eta M) carrying the most mass; ties go to the larger index.
 */
inline PigeonholeBand dyadic_pigeonhole_l1(const std::vector<double>& f, double delta, double m) {
    if (!(delta > 0 && delta <= 1)) throw PreconditionError("pigeonhole needs delta in (0,1]");
    double total = 0;
    for (double v : f) {
        if (v < 0 || v > m * (1 + 1e-12)) throw PreconditionError("pigeonhole values must lie in [0,M]");
        total += v;
    }
    const double need = delta * m * static_cast<double>(f.size());
    if (total < need * (1 - 1e-12)) throw HypothesisError("pigeonhole L1 hypothesis sum f >= delta M |X| fails");
    const int classes = detail::dyadic_class_count(delta);
    std::vector<double> mass(static_cast<std::size_t>(classes), 0.0);
    for (double v : f) {
        if (v < delta * m / 2) continue;
        mass[static_cast<std::size_t>(detail::dyadic_index(v, delta, m, classes - 1))] += v;
    }
    int best = classes - 1;
    for (int i = classes - 1; i >= 0; --i)
        if (mass[static_cast<std::size_t>(i)] > mass[static_cast<std::size_t>(best)]) best = i;
    PigeonholeBand band;
    band.index = best;
    band.eta = std::ldexp(delta, best - 1);
    band.lower = band.eta * m;
    band.upper = 2 * band.eta * m;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] >= delta * m / 2 && detail::dyadic_index(f[i], delta, m, classes - 1) == best) band.members.push_back(i);
    band.mass = mass[static_cast<std::size_t>(best)];
    const double ceil_classes = std::ceil(std::log2(2.0 / delta) + 1.0 - 1e-12);
    band.guaranteed = need / (2.0 * ceil_classes);
    band.stated_bound_holds = band.mass >= band.guaranteed * (1 - 1e-12);
    return band;
}

/**
 * Dyadic pigeonhole, L2 form. Input sum f^2 >= delta M sum f. The band maximizes |X_i| eta_i^2;
 * `guaranteed` is the provable |X'| lower bound delta sum f / (8 eta^2 M classes), and
 * stated_bound_holds records whether the sharper 1/(2 classes) constant also held.
 */
inline PigeonholeBand dyadic_pigeonhole_l2(const std::vector<double>& f, double delta, double m) {
    if (!(delta > 0 && delta <= 1)) throw PreconditionError("pigeonhole needs delta in (0,1]");
    double s1 = 0, s2 = 0;
    for (double v : f) {
        if (v < 0 || v > m * (1 + 1e-12)) throw PreconditionError("pigeonhole values must lie in [0,M]");
        s1 += v;
        s2 += v * v;
    }
    if (s2 < delta * m * s1 * (1 - 1e-12)) throw HypothesisError("pigeonhole L2 hypothesis sum f^2 >= delta M sum f fails");
    const int classes = detail::dyadic_class_count(delta);
    std::vector<std::size_t> count(static_cast<std::size_t>(classes), 0);
    for (double v : f)
        if (v >= delta * m / 2) ++count[static_cast<std::size_t>(detail::dyadic_index(v, delta, m, classes - 1))];
    auto score = [&](int i) { return static_cast<double>(count[static_cast<std::size_t>(i)]) * std::ldexp(delta, i - 1) * std::ldexp(delta, i - 1); };
    int best = classes - 1;
    for (int i = classes - 1; i >= 0; --i)
        if (score(i) > score(best)) best = i;
    PigeonholeBand band;
    band.index = best;
    band.eta = std::ldexp(delta, best - 1);
    band.lower = band.eta * m;
    band.upper = 2 * band.eta * m;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] >= delta * m / 2 && detail::dyadic_index(f[i], delta, m, classes - 1) == best) {
            band.members.push_back(i);
            band.mass += f[i];
        }
    const double ceil_classes = std::ceil(std::log2(2.0 / delta) + 1.0 - 1e-12);
    const double size = static_cast<double>(band.members.size());
    band.guaranteed = delta * s1 / (8.0 * band.eta * band.eta * m * static_cast<double>(classes));
    band.stated_bound_holds = size >= delta * s1 / (band.eta * band.eta * m * 2.0 * ceil_classes) * (1 - 1e-12);
    return band;
}

}  // namespace actk
