#pragma once

// Brute-force reference computations. These deliberately avoid the library's fast paths:
// characters are evaluated from coordinates with std::exp, convolutions are double loops,
// counts are tuple enumerations.

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <set>
#include <vector>

#include "actk/group.hpp"

namespace oracle {

using actk::elem_t;
using actk::Group;
using actk::GSet;
using cplx = std::complex<double>;

inline std::vector<long> coords(const Group& g, elem_t a) {
    std::vector<long> c(g.rank());
    for (std::size_t j = g.rank(); j-- > 0;) {
        c[j] = static_cast<long>(a % g.factors()[j]);
        a /= g.factors()[j];
    }
    return c;
}

inline elem_t index(const Group& g, const std::vector<long>& c) {
    long idx = 0;
    for (std::size_t j = 0; j < g.rank(); ++j) {
        const long n = g.factors()[j];
        idx = idx * n + ((c[j] % n) + n) % n;
    }
    return static_cast<elem_t>(idx);
}

inline elem_t add(const Group& g, elem_t a, elem_t b) {
    auto x = coords(g, a), y = coords(g, b);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += y[j];
    return index(g, x);
}

inline elem_t sub(const Group& g, elem_t a, elem_t b) {
    auto x = coords(g, a), y = coords(g, b);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] -= y[j];
    return index(g, x);
}

inline elem_t scale(const Group& g, long k, elem_t a) {
    auto x = coords(g, a);
    for (auto& v : x) v *= k;
    return index(g, x);
}

inline cplx chi(const Group& g, elem_t gamma, elem_t x) {
    auto a = coords(g, gamma), b = coords(g, x);
    long double t = 0;
    for (std::size_t j = 0; j < a.size(); ++j)
        t += static_cast<long double>(a[j] * b[j] % static_cast<long>(g.factors()[j])) / g.factors()[j];
    const long double ang = 2 * std::numbers::pi_v<long double> * t;
    return {static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang))};
}

inline std::vector<cplx> dft(const Group& g, const std::vector<cplx>& f) {
    const std::size_t n = g.size();
    std::vector<cplx> out(n);
    for (elem_t gam = 0; gam < n; ++gam) {
        cplx acc{};
        for (elem_t x = 0; x < n; ++x) acc += f[x] * std::conj(chi(g, gam, x));
        out[gam] = acc / static_cast<double>(n);
    }
    return out;
}

inline std::vector<cplx> inverse_dft(const Group& g, const std::vector<cplx>& w) {
    const std::size_t n = g.size();
    std::vector<cplx> out(n);
    for (elem_t x = 0; x < n; ++x) {
        cplx acc{};
        for (elem_t gam = 0; gam < n; ++gam) acc += w[gam] * chi(g, gam, x);
        out[x] = acc;
    }
    return out;
}

/// physical-side convolution E_y f(y) g(x-y)
inline std::vector<cplx> convolve_phys(const Group& g, const std::vector<cplx>& f, const std::vector<cplx>& h) {
    const std::size_t n = g.size();
    std::vector<cplx> out(n);
    for (elem_t x = 0; x < n; ++x)
        for (elem_t y = 0; y < n; ++y) out[x] += f[y] * h[sub(g, x, y)];
    for (auto& v : out) v /= static_cast<double>(n);
    return out;
}

/// physical-side correlation E_y f(y) conj(g(y-x))
inline std::vector<cplx> correlate_phys(const Group& g, const std::vector<cplx>& f, const std::vector<cplx>& h) {
    const std::size_t n = g.size();
    std::vector<cplx> out(n);
    for (elem_t x = 0; x < n; ++x)
        for (elem_t y = 0; y < n; ++y) out[x] += f[y] * std::conj(h[sub(g, y, x)]);
    for (auto& v : out) v /= static_cast<double>(n);
    return out;
}

/// #{(x,y,z) in A^3 : x + y = 2z}
inline long count_3ap_triples(const GSet& a) {
    const Group& g = a.group();
    const auto el = a.elements();
    long c = 0;
    for (auto x : el)
        for (auto y : el)
            for (auto z : el)
                if (add(g, x, y) == scale(g, 2, z)) ++c;
    return c;
}

/// #{(a_1..a_m, b_1..b_m) in D^{2m} : sum a - sum b in Gamma}
inline long energy_bruteforce(const GSet& d, const GSet& gamma, int m) {
    const Group& g = d.group();
    const auto el = d.elements();
    const std::size_t k = el.size();
    std::vector<std::size_t> idx(static_cast<std::size_t>(2 * m), 0);
    long count = 0;
    if (k == 0) return 0;
    while (true) {
        std::vector<long> s(g.rank(), 0);
        for (int i = 0; i < 2 * m; ++i) {
            auto c = coords(g, el[idx[static_cast<std::size_t>(i)]]);
            for (std::size_t j = 0; j < c.size(); ++j) s[j] += (i < m ? c[j] : -c[j]);
        }
        if (gamma.contains(index(g, s))) ++count;
        std::size_t p = 0;
        while (p < idx.size() && ++idx[p] == k) idx[p++] = 0;
        if (p == idx.size()) break;
    }
    return count;
}

/// max over gamma and k of #{(L1, L2) disjoint : |L1 u L2| = k, sum L1 - sum L2 in Gamma + gamma} vs 2^k;
/// returns the worst excess (count - 2^k) and fills the witness
struct DissocOracle {
    bool dissociated = true;
    int k = 0;
    elem_t gamma = 0;
    long count = 0;
};

inline DissocOracle dissociated_bruteforce(const std::vector<elem_t>& lam, const GSet& gam_set) {
    const Group& g = gam_set.group();
    const std::size_t n = lam.size();
    // enumerate pairs of disjoint subsets by masks
    std::map<std::pair<int, elem_t>, long> hits;  // (k, signed sum) -> count
    const std::size_t total = static_cast<std::size_t>(1) << n;
    for (std::size_t m1 = 0; m1 < total; ++m1)
        for (std::size_t m2 = 0; m2 < total; ++m2) {
            if (m1 & m2) continue;
            const int k = __builtin_popcountll(m1 | m2);
            if (k == 0) continue;
            std::vector<long> s(g.rank(), 0);
            for (std::size_t i = 0; i < n; ++i) {
                const int sign = (m1 >> i & 1) ? 1 : ((m2 >> i & 1) ? -1 : 0);
                if (!sign) continue;
                auto c = coords(g, lam[i]);
                for (std::size_t j = 0; j < c.size(); ++j) s[j] += sign * c[j];
            }
            hits[{k, index(g, s)}]++;
        }
    DissocOracle best;
    const auto gel = gam_set.elements();
    for (elem_t shift = 0; shift < g.size(); ++shift) {
        std::map<int, long> per_k;
        for (auto gg : gel) {
            const elem_t target = add(g, gg, shift);
            for (int k = 1; k <= static_cast<int>(n); ++k) {
                auto it = hits.find({k, target});
                if (it != hits.end()) per_k[k] += it->second;
            }
        }
        for (auto [k, c] : per_k)
            if (c > (1L << k) && (best.dissociated || c - (1L << k) > best.count - (1L << best.k))) {
                best.dissociated = false;
                best.k = k;
                best.gamma = shift;
                best.count = c;
            }
    }
    return best;
}

inline bool ap_free_scan(const std::vector<long>& a) {
    std::set<long> s(a.begin(), a.end());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const long lo = std::min(a[i], a[j]), hi = std::max(a[i], a[j]);
            if ((lo + hi) % 2 == 0 && s.count((lo + hi) / 2)) return false;
        }
    return true;
}

}  // namespace oracle
