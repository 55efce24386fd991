#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "actk/io.hpp"
#include "actk/spectral.hpp"

namespace actk {

using IntSet = std::vector<std::int64_t>;

/// O(|A|^2) scan for a non-trivial x + z = 2y inside a set of integers
inline std::optional<std::array<std::int64_t, 3>> find_3ap(const IntSet& a) {
    if (a.empty()) return std::nullopt;
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    std::vector<char> in(static_cast<std::size_t>(*hi - *lo + 1), 0);
    for (auto x : a) in[static_cast<std::size_t>(x - *lo)] = 1;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) {
            const auto x = a[i], z = a[j];
            if (x >= z || (x + z) % 2 != 0) continue;
            const auto y = (x + z) / 2;
            if (in[static_cast<std::size_t>(y - *lo)]) return std::array<std::int64_t, 3>{x, y, z};
        }
    return std::nullopt;
}

inline bool is_3ap_free(const IntSet& a) { return !find_3ap(a).has_value(); }

/// group version: x + z = 2y with x != z (odd order, so y is determined)
inline std::optional<std::array<elem_t, 3>> find_3ap(const GSet& a) {
    const Group& g = a.group();
    if (!g.odd_order()) throw PreconditionError("3-AP scans need a group of odd order");
    const auto el = a.elements();
    for (std::size_t i = 0; i < el.size(); ++i)
        for (std::size_t j = i + 1; j < el.size(); ++j) {
            const elem_t y = g.mul(static_cast<std::int64_t>((g.exponent() + 1) / 2), g.add(el[i], el[j]));
            if (a.contains(y)) return std::array<elem_t, 3>{el[i], y, el[j]};
        }
    return std::nullopt;
}

inline bool is_3ap_free(const GSet& a) { return !find_3ap(a).has_value(); }

/** @brief a 3-AP-free subset of {1..N} with its provenance */
struct ExtremalRecord {
    std::int64_t n = 0;
    std::size_t size = 0;
    IntSet witness;
    std::string method;  // exact | greedy | behrend
    json params = json::object();
    bool verified = false;
};

inline json extremal_to_json(const ExtremalRecord& r) {
    return json{{"N", r.n}, {"size", r.size}, {"witness", r.witness}, {"method", r.method}, {"params", r.params}, {"verified", r.verified}};
}

/**
 * @brief sphere construction: integers whose base-(2d-1) digits are all below d and whose digit
 * vectors share the most popular squared norm
 *
 * Digits below d never carry when two such integers are added, so x + z = 2y forces the digit
 * vectors to satisfy the same relation, impossible on a sphere. The digit bound d is chosen to
 * maximize the output size.
 */
inline ExtremalRecord behrend_construct(std::int64_t n) {
    if (n < 10) throw PreconditionError("behrend_construct needs N >= 10");
    ExtremalRecord best;
    best.n = n;
    best.method = "behrend";
    for (std::int64_t d = 2; 2 * d - 1 <= n; ++d) {
        const std::int64_t base = 2 * d - 1;
        // on a sphere the lowest digit is fixed by the others, so ceil(N / base) bounds every later d
        if ((n + base - 1) / base <= static_cast<std::int64_t>(best.size)) break;
        std::map<std::int64_t, IntSet> spheres;
        // digits are assigned from the lowest place upward
        std::function<void(std::int64_t, std::int64_t, std::int64_t)> walk = [&](std::int64_t value, std::int64_t place, std::int64_t norm) {
            if (place > n - 1) {
                spheres[norm].push_back(value);
                return;
            }
            for (std::int64_t a = 0; a < d; ++a) {
                const std::int64_t v = value + a * place;
                if (v > n - 1) break;
                walk(v, place * base, norm + a * a);
            }
        };
        walk(0, 1, 0);
        std::int64_t radius = -1;
        std::size_t count = 0;
        for (const auto& [r, vals] : spheres)
            if (vals.size() > count) {
                count = vals.size();
                radius = r;
            }
        if (count > best.size) {
            best.size = count;
            best.witness.clear();
            for (auto v : spheres[radius]) best.witness.push_back(v + 1);
            std::sort(best.witness.begin(), best.witness.end());
            best.params = json{{"base", base}, {"digit_bound", d}, {"radius_sq", radius}};
        }
    }
    best.verified = is_3ap_free(best.witness);
    const double ln = std::log(static_cast<double>(n));
    best.params["reference_size"] = static_cast<double>(n) * std::exp(-2.0 * std::sqrt(2.0 * std::log(2.0) * ln));
    return best;
}

inline ExtremalRecord greedy_ap_free(std::int64_t n) {
    if (n < 1) throw PreconditionError("greedy_ap_free needs N >= 1");
    ExtremalRecord r;
    r.n = n;
    r.method = "greedy";
    std::vector<char> forbidden(static_cast<std::size_t>(2 * n + 2), 0);
    for (std::int64_t x = 1; x <= n; ++x) {
        if (forbidden[static_cast<std::size_t>(x)]) continue;
        for (auto y : r.witness) {
            const std::int64_t z = 2 * x - y;
            if (z <= n) forbidden[static_cast<std::size_t>(z)] = 1;
        }
        r.witness.push_back(x);
    }
    r.size = r.witness.size();
    r.verified = is_3ap_free(r.witness);
    return r;
}

inline constexpr std::int64_t kExactApFreeCap = 40;

namespace detail {

struct ApFreeSearch {
    int n = 0;
    std::vector<int> r;  // r[k] = max size in {1..k}, for the suffix bound
    std::uint64_t best_mask = 0;
    int best = -1;
    int target = -1;  // when set, stop at the first set of this size
    bool found = false;

    // elements are bit i-1 for integer i; every chosen element is below x
    void run(int x, std::uint64_t chosen, std::uint64_t forbid, int count) {
        if (found) return;
        if (x > n) {
            if (target >= 0) {
                if (count == target) {
                    best_mask = chosen;
                    best = count;
                    found = true;
                }
            } else if (count > best) {
                best = count;
                best_mask = chosen;
            }
            return;
        }
        const auto len = static_cast<std::size_t>(n - x + 1);
        // r(L) <= r(L-1) + 1 covers the suffix whose value is still being computed
        const int bound = count + (len < r.size() && (len < static_cast<std::size_t>(n) || r[len] > 0) ? r[len] : r[len - 1] + 1);
        if (target >= 0 ? bound < target : bound <= best) return;
        const std::uint64_t bit = std::uint64_t{1} << (x - 1);
        if (!(forbid & bit)) {
            std::uint64_t f = forbid;
            for (int y = 1; y < x; ++y)
                if (chosen & (std::uint64_t{1} << (y - 1))) {
                    const int z = 2 * x - y;
                    if (z <= n) f |= std::uint64_t{1} << (z - 1);
                }
            run(x + 1, chosen | bit, f, count + 1);
        }
        run(x + 1, chosen, forbid, count);
    }
};

}  // namespace detail

/// optimum by branch and bound; the witness is the lexicographically least optimal set
inline ExtremalRecord exact_max_ap_free(std::int64_t n) {
    if (n < 1) throw PreconditionError("exact_max_ap_free needs N >= 1");
    if (n > kExactApFreeCap) throw CapError("exact_max_ap_free is capped at N = 40");
    detail::ApFreeSearch s;
    s.r.assign(static_cast<std::size_t>(n + 1), 0);
    for (int k = 1; k <= n; ++k) {
        s.n = k;
        s.best = s.r[static_cast<std::size_t>(k - 1)];  // r(k) >= r(k-1); look for strictly better
        s.best_mask = 0;
        s.target = -1;
        s.run(1, 0, 0, 0);
        s.r[static_cast<std::size_t>(k)] = s.best;
    }
    s.n = static_cast<int>(n);
    s.target = s.r[static_cast<std::size_t>(n)];
    s.found = false;
    s.run(1, 0, 0, 0);
    ExtremalRecord rec;
    rec.n = n;
    rec.method = "exact";
    for (int i = 1; i <= n; ++i)
        if (s.best_mask & (std::uint64_t{1} << (i - 1))) rec.witness.push_back(i);
    rec.size = rec.witness.size();
    rec.verified = is_3ap_free(rec.witness) && static_cast<int>(rec.size) == s.target;
    std::vector<int> table(s.r.begin() + 1, s.r.end());
    rec.params = json{{"r_table", table}};
    return rec;
}

/**
 * @brief depth-first search for a 3-AP-free subset of an odd-order group of a target size
 *
 * Elements are tried in index order after the seed; a conflict bitmap holds the third terms
 * excluded so far. The first set reaching the target is returned.
 */
inline std::optional<GSet> find_ap_free_set(const Group& g, std::size_t target, const std::vector<elem_t>& seed = {},
                                            std::uint64_t node_budget = 50'000'000) {
    if (!g.odd_order()) throw PreconditionError("3-AP-free search needs a group of odd order");
    const std::int64_t half = static_cast<std::int64_t>((g.exponent() + 1) / 2);
    GSet chosen(g), forbid(g);
    std::vector<elem_t> stack;
    auto add = [&](elem_t x, std::vector<elem_t>& newly) {
        for (auto y : stack) {
            for (elem_t z : {g.sub(g.mul(2, x), y), g.sub(g.mul(2, y), x), g.mul(half, g.add(x, y))})
                if (!forbid.contains(z) && !chosen.contains(z)) {
                    forbid.insert(z);
                    newly.push_back(z);
                }
        }
        chosen.insert(x);
        stack.push_back(x);
    };
    for (auto x : seed) {
        if (forbid.contains(x) || chosen.contains(x)) throw PreconditionError("seed contains a 3-AP");
        std::vector<elem_t> tmp;
        add(x, tmp);
    }
    std::uint64_t nodes = 0;
    const elem_t n = static_cast<elem_t>(g.order());
    std::function<bool(elem_t)> dfs = [&](elem_t from) -> bool {
        if (stack.size() >= target) return true;
        if (++nodes > node_budget) throw CapError("3-AP-free search exceeded its node budget");
        std::size_t avail = 0;
        for (elem_t x = from; x < n; ++x) avail += !forbid.contains(x) && !chosen.contains(x);
        if (stack.size() + avail < target) return false;
        for (elem_t x = from; x < n; ++x) {
            if (forbid.contains(x) || chosen.contains(x)) continue;
            std::vector<elem_t> newly;
            add(x, newly);
            if (dfs(x + 1)) return true;
            stack.pop_back();
            chosen.erase(x);
            for (auto z : newly) forbid.erase(z);
            // remaining candidates must still be able to reach the target
            std::size_t rest = 0;
            for (elem_t y = x + 1; y < n; ++y) rest += !forbid.contains(y) && !chosen.contains(y);
            if (stack.size() + rest < target) return false;
        }
        return false;
    };
    if (!dfs(0)) return std::nullopt;
    return chosen;
}

inline double log_power_bound(std::int64_t n, double c) {
    const double ln = std::log(static_cast<double>(n));
    return static_cast<double>(n) / std::pow(ln, 1.0 + c);
}

/// CSV rows: N, exact, greedy, behrend, N / (log N)^{1+c}
inline std::string extremal_csv(const std::vector<std::int64_t>& ns, double c) {
    std::string out = "N,exact,greedy,behrend,log_bound\n";
    for (auto n : ns) {
        out += std::to_string(n) + ",";
        if (n <= kExactApFreeCap) out += std::to_string(exact_max_ap_free(n).size);
        out += "," + std::to_string(greedy_ap_free(n).size) + ",";
        if (n >= 10) out += std::to_string(behrend_construct(n).size);
        char buf[64];
        std::snprintf(buf, sizeof buf, ",%.6g\n", log_power_bound(n, c));
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// low-dimensional pieces of large spectra in F_2^n

struct FrontPoint {
    std::size_t dim = 0;
    std::size_t size = 0;
    std::vector<elem_t> basis;
};

struct Conjecture2Report {
    double eta = 0;
    double epsilon = 0;
    std::size_t spectrum_size = 0;
    std::vector<FrontPoint> front;  // best size found at each dimension
    std::optional<std::size_t> min_dim;  // least dimension with size >= epsilon |spectrum|
};

/// greedy growth of a basis maximizing |spectrum ∩ span|, then one-swap local search per dimension
inline Conjecture2Report conjecture2_experiment(const GSet& a, double eta, double epsilon) {
    const Group& g = a.group();
    if (!g.binary()) throw PreconditionError("conjecture2_experiment works in F_2^n");
    if (g.rank() > 14) throw CapError("conjecture2_experiment is capped at n = 14");
    if (a.empty()) throw PreconditionError("A must be nonempty");
    Conjecture2Report rep;
    rep.eta = eta;
    rep.epsilon = epsilon;
    const GSet spec = set_spectrum(a, eta).members;
    rep.spectrum_size = spec.size();
    const auto cand = spec.elements();
    auto span_of = [&](const std::vector<elem_t>& basis) { return generated_subgroup(g, basis); };
    auto score = [&](const std::vector<elem_t>& basis) { return (spec & span_of(basis)).size(); };

    std::vector<elem_t> basis;
    GSet span = GSet::from_elements(g, {0});
    rep.front.push_back({0, (spec & span).size(), {}});
    while ((spec & span).size() < spec.size()) {
        elem_t pick = 0;
        std::size_t best = 0;
        for (auto v : cand) {
            if (span.contains(v)) continue;
            const std::size_t s = (spec & (span | translate(span, v))).size();
            if (s > best) {
                best = s;
                pick = v;
            }
        }
        basis.push_back(pick);
        span = span | translate(span, pick);
        // one-swap local search at this dimension
        std::size_t cur = best;
        for (bool improved = true; improved;) {
            improved = false;
            for (std::size_t i = 0; i < basis.size() && !improved; ++i)
                for (auto v : cand) {
                    auto trial = basis;
                    trial[i] = v;
                    if (generated_subgroup(g, trial).size() != (std::size_t{1} << trial.size())) continue;
                    const std::size_t s = score(trial);
                    if (s > cur) {
                        basis = trial;
                        cur = s;
                        improved = true;
                        break;
                    }
                }
        }
        span = span_of(basis);
        rep.front.push_back({basis.size(), cur, basis});
    }
    for (const auto& p : rep.front)
        if (static_cast<double>(p.size) >= epsilon * static_cast<double>(spec.size()) - 1e-9) {
            rep.min_dim = p.dim;
            break;
        }
    return rep;
}

}  // namespace actk
