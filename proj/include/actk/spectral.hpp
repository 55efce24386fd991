#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "actk/counts.hpp"
#include "actk/harmonics.hpp"

namespace actk {

// ---------------------------------------------------------------------------------------------
// spectra

/** @brief the eta-large spectrum {gamma : |f^(gamma)| >= eta ||f||_1} */
struct Spectrum {
    double eta = 1.0;
    double l1 = 0.0;
    GSet members;
    std::vector<double> magnitudes;  // |f^(gamma)| for every gamma
};

inline Spectrum spectrum(const GFunction& f, double eta) {
    if (f.side != Side::physical) throw PreconditionError("spectrum expects a physical-side function");
    if (!(eta > 0 && eta <= 1)) throw PreconditionError("spectrum level must lie in (0,1]");
    Spectrum s;
    s.eta = eta;
    s.l1 = l1_norm(f);
    if (s.l1 == 0) throw PreconditionError("spectrum of the zero function");
    const auto fh = dft(f);
    s.members = GSet(f.group);
    s.magnitudes.resize(f.size());
    const double thr = eta * s.l1;
    for (elem_t g = 0; g < f.size(); ++g) {
        s.magnitudes[g] = std::abs(fh[g]);
        // ties count as members; the guard absorbs FFT round-off
        if (s.magnitudes[g] >= thr - kSpectrumTol * s.l1) s.members.insert(g);
    }
    return s;
}

inline Spectrum set_spectrum(const GSet& a, double eta) { return spectrum(GFunction::indicator(a, Side::physical), eta); }

// ---------------------------------------------------------------------------------------------
// energies

struct EnergyReport {
    unsigned m = 1;
    BigInt exact = 0;        // integer value when the inputs are indicators or counts
    double value = 0.0;      // floating value (equal to exact when that is set)
    double normalized = 0.0; // E / |Delta|^{2m-1}
    bool is_exact = false;
};

namespace detail {

template <class Int>
Int energy_counts(const GSet& delta, const CountFunction<count_t>& nu, unsigned m) {
    auto one = convert_counts<Int>(CountFunction<count_t>::indicator(delta));
    auto cm = iterated_convolution_counts(one, m);
    auto r = correlate_counts(cm, cm);
    return inner_counts(r, convert_counts<Int>(nu));
}

}  // namespace detail

/// E_{2m}(Delta; nu) = <1^{(m)} o 1^{(m)}, nu> on the dual group, exactly
inline EnergyReport energy(const GSet& delta, const CountFunction<count_t>& nu, unsigned m) {
    if (m == 0) throw PreconditionError("energy needs m >= 1");
    require_same_group(delta.group(), nu.group);
    EnergyReport rep;
    rep.m = m;
    rep.is_exact = true;
    try {
        rep.exact = BigInt(detail::energy_counts<count_t>(delta, nu, m));
    } catch (const OverflowError&) {
        rep.exact = detail::energy_counts<BigInt>(delta, nu, m);
    }
    rep.value = rep.exact.convert_to<double>();
    const double sz = static_cast<double>(delta.size());
    rep.normalized = sz > 0 ? rep.value / std::pow(sz, 2.0 * m - 1) : 0.0;
    return rep;
}

/// E_{2m}(Delta; Gamma) with nu = 1_Gamma
inline EnergyReport energy(const GSet& delta, const GSet& gamma, unsigned m) {
    return energy(delta, CountFunction<count_t>::indicator(gamma), m);
}

/// floating path E_x conj(nu^v(x)) |omega^v(x)|^{2m} for dual-side omega and nu
inline double energy_float(const GFunction& omega, const GFunction& nu, unsigned m) {
    if (m == 0) throw PreconditionError("energy needs m >= 1");
    if (omega.side != Side::dual || nu.side != Side::dual) throw PreconditionError("energy expects dual-side functions");
    omega.check_compatible(nu);
    const auto wv = inverse_dft(omega);
    const auto nv = inverse_dft(nu);
    cplx acc{};
    for (std::size_t x = 0; x < wv.size(); ++x) acc += std::conj(nv.values[x]) * std::pow(std::norm(wv.values[x]), static_cast<double>(m));
    return acc.real() / static_cast<double>(wv.size());
}

/// <1_X o 1_X, 1_H o 1_H o 1_Gamma>
inline BigInt cross_energy(const GSet& x, const GSet& h, const GSet& gamma_top) {
    require_same_group(x.group(), h.group());
    require_same_group(x.group(), gamma_top.group());
    using CF = CountFunction<count_t>;
    auto xx = correlate_counts(CF::indicator(x), CF::indicator(x));
    auto hh = correlate_with_set(correlate_counts(CF::indicator(h), CF::indicator(h)), gamma_top);
    try {
        return BigInt(inner_counts(xx, hh));
    } catch (const OverflowError&) {
        return inner_counts(convert_counts<BigInt>(xx), convert_counts<BigInt>(hh));
    }
}

// ---------------------------------------------------------------------------------------------
// orthogonality

struct OrthogonalityReport {
    bool orthogonal = true;
    elem_t first = 0, second = 0;  // colliding members of Delta
    elem_t common = 0;             // element of (first + Gamma) and (second + Gamma)
};

/// are the translates (gamma + Gamma) for gamma in Delta pairwise disjoint
inline OrthogonalityReport is_orthogonal(const GSet& delta, const GSet& gamma) {
    require_same_group(delta.group(), gamma.group());
    const Group& g = delta.group();
    OrthogonalityReport rep;
    std::vector<std::int64_t> owner(g.size(), -1);
    const auto gel = gamma.elements();
    for (auto d : delta.elements())
        for (auto s : gel) {
            const elem_t y = g.add(d, s);
            if (owner[y] >= 0 && static_cast<elem_t>(owner[y]) != d) {
                rep.orthogonal = false;
                rep.first = static_cast<elem_t>(owner[y]);
                rep.second = d;
                rep.common = y;
                return rep;
            }
            owner[y] = d;
        }
    return rep;
}

/// greedy in index order; the result is Gamma-orthogonal and Delta lies in result + Gamma - Gamma
inline GSet maximal_orthogonal_subset(const GSet& delta, const GSet& gamma) {
    require_same_group(delta.group(), gamma.group());
    const Group& g = delta.group();
    GSet used(g), out(g);
    const auto gel = gamma.elements();
    for (auto d : delta.elements()) {
        bool free = true;
        for (auto s : gel)
            if (used.contains(g.add(d, s))) {
                free = false;
                break;
            }
        if (!free) continue;
        out.insert(d);
        for (auto s : gel) used.insert(g.add(d, s));
    }
    if (!delta.subset_of(sumset(out, diffset(gamma, gamma))))
        throw Error("maximal_orthogonal_subset: covering check failed");
    return out;
}

// ---------------------------------------------------------------------------------------------
// dissociativity

/** @brief verdict of the 2^k-pair test, with a recheckable witness on failure */
struct DissociationCertificate {
    std::vector<elem_t> lambda;
    bool dissociated = true;
    bool certified = true;  // false when only levels k <= kHeuristicLevels were examined
    unsigned k = 0;
    elem_t gamma = 0;
    count_t count = 0;
};

inline constexpr std::size_t kDissociationExactCap = 20;
inline constexpr unsigned kHeuristicLevels = 4;

namespace detail {

/// cnt[k][s] = number of sign vectors on Lambda with support size k and signed sum s
class SignedSumTable {
public:
    SignedSumTable(const Group& g, unsigned max_k) : g_(g), max_k_(max_k), cnt_(max_k + 1, std::vector<count_t>(g.size(), 0)) {
        cnt_[0][0] = 1;
    }

    void add(elem_t lam) {
        ++n_;
        const unsigned top = std::min<unsigned>(n_, max_k_);
        for (unsigned k = top; k >= 1; --k) {
            const auto& prev = cnt_[k - 1];
            auto& cur = cnt_[k];
            for (elem_t s = 0; s < g_.size(); ++s) {
                const count_t c = prev[s];
                if (c == 0) continue;
                const elem_t p = g_.add(s, lam), q = g_.sub(s, lam);
                cur[p] = checked_add(cur[p], c);
                cur[q] = checked_add(cur[q], c);
            }
        }
    }

    unsigned levels() const { return std::min<unsigned>(n_, max_k_); }
    const std::vector<count_t>& level(unsigned k) const { return cnt_[k]; }

private:
    Group g_;
    unsigned max_k_;
    unsigned n_ = 0;
    std::vector<std::vector<count_t>> cnt_;
};

/// the (k, gamma) with the largest excess count - 2^k, ties to the smaller k then the smaller gamma;
/// with stop_early the first violating level is reported instead (enough for pruning)
inline std::optional<DissociationCertificate> first_violation(const SignedSumTable& t, const GSet& gamma, bool stop_early = true) {
    const Group& g = gamma.group();
    const auto gel = gamma.elements();
    std::vector<count_t> per(g.size());
    std::optional<DissociationCertificate> best;
    for (unsigned k = 1; k <= t.levels(); ++k) {
        const auto& lv = t.level(k);
        std::fill(per.begin(), per.end(), 0);
        // per[x] = sum_{s in Gamma} lv[x + s]
        for (elem_t y = 0; y < g.size(); ++y) {
            if (lv[y] == 0) continue;
            for (auto s : gel) {
                auto& slot = per[g.sub(y, s)];
                slot = checked_add(slot, lv[y]);
            }
        }
        const count_t cap = count_t{1} << k;
        for (elem_t x = 0; x < g.size(); ++x) {
            if (per[x] <= cap) continue;
            if (!best || per[x] - cap > best->count - (count_t{1} << best->k)) {
                best = DissociationCertificate{};
                best->dissociated = false;
                best->k = k;
                best->gamma = x;
                best->count = per[x];
            }
        }
        if (best && stop_early) return best;
    }
    return best;
}

inline unsigned dissociation_levels(std::size_t n) {
    return n <= kDissociationExactCap ? static_cast<unsigned>(n) : kHeuristicLevels;
}

}  // namespace detail

/// Lambda is Gamma-dissociated when for every k and gamma at most 2^k disjoint pairs (L1, L2)
/// with |L1 u L2| = k have sum(L1) - sum(L2) in Gamma + gamma
inline DissociationCertificate is_dissociated(const std::vector<elem_t>& lambda, const GSet& gamma) {
    const Group& g = gamma.group();
    std::vector<elem_t> lam = lambda;
    std::sort(lam.begin(), lam.end());
    if (std::adjacent_find(lam.begin(), lam.end()) != lam.end()) throw PreconditionError("Lambda must not repeat elements");
    for (auto x : lam)
        if (x >= g.order()) throw SchemaError("element index out of range");
    if (lam.size() > 62) throw CapError("dissociativity test supports at most 62 elements");
    const unsigned levels = detail::dissociation_levels(lam.size());
    detail::SignedSumTable t(g, levels);
    for (auto x : lam) t.add(x);
    DissociationCertificate rep;
    if (auto v = detail::first_violation(t, gamma, false)) rep = *v;
    rep.lambda = lam;
    rep.certified = levels == lam.size() || !rep.dissociated;
    return rep;
}

/// classical variant: no nonzero sign vector in {-1,0,1}^Lambda has its signed sum in Gamma - Gamma
inline bool is_dissociated_classical(const std::vector<elem_t>& lambda, const GSet& gamma) {
    const Group& g = gamma.group();
    if (lambda.size() > 40) throw CapError("classical dissociativity test supports at most 40 elements");
    detail::SignedSumTable t(g, static_cast<unsigned>(lambda.size()));
    for (auto x : lambda) t.add(x);
    const auto dd = diffset(gamma, gamma).elements();
    for (unsigned k = 1; k <= t.levels(); ++k)
        for (auto y : dd)
            if (t.level(k)[y] != 0) return false;
    return true;
}

/// recount of a failure witness by explicit enumeration of sign vectors
inline count_t recount_witness(const DissociationCertificate& c, const GSet& gamma) {
    const Group& g = gamma.group();
    const std::size_t n = c.lambda.size();
    if (n > 20) throw CapError("witness recount supports at most 20 elements");
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    count_t hits = 0;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t r = code;
        unsigned k = 0;
        elem_t s = 0;
        for (std::size_t i = 0; i < n; ++i, r /= 3) {
            const auto digit = r % 3;
            if (digit == 1) s = g.add(s, c.lambda[i]);
            if (digit == 2) s = g.sub(s, c.lambda[i]);
            k += digit != 0;
        }
        if (k == c.k && gamma.contains(g.sub(s, c.gamma))) ++hits;
    }
    return hits;
}

// ---------------------------------------------------------------------------------------------
// dimension and covering

struct DimensionReport {
    std::size_t lower = 0;
    std::size_t upper = 0;
    bool exact = false;
    std::vector<elem_t> witness;  // a dissociated subset of size lower
};

inline constexpr std::size_t kDimensionExactCap = 16;

namespace detail {

/// greedy maximal dissociated subset, scanning Delta in index order
inline std::vector<elem_t> greedy_dissociated(const GSet& delta, const GSet& gamma) {
    const Group& g = delta.group();
    const auto el = delta.elements();
    // levels beyond the exact cap are not examined; dimension reports stay exact only below it
    const unsigned levels = static_cast<unsigned>(std::min(el.size(), kDissociationExactCap));
    std::vector<elem_t> out;
    SignedSumTable t(g, levels);
    for (auto x : el) {
        SignedSumTable trial = t;
        trial.add(x);
        if (!first_violation(trial, gamma)) {
            t = std::move(trial);
            out.push_back(x);
        }
    }
    return out;
}

/// max s with C(s,k)|Gamma| <= |k(Delta u -Delta) - Gamma| for every k <= s
inline std::size_t counting_upper_bound(const GSet& delta, const GSet& gamma) {
    const Group& g = delta.group();
    const std::size_t n = delta.size();
    const double gs = static_cast<double>(gamma.size());
    const GSet sym = delta | negate(delta);
    std::vector<double> room;  // room[k-1] = |W_k - Gamma|
    GSet w(g);
    w.insert(0);
    const std::size_t kmax = std::min<std::size_t>(n, 64);
    for (std::size_t k = 1; k <= kmax; ++k) {
        if (!room.empty() && room.back() >= static_cast<double>(g.order())) {
            room.push_back(room.back());
            continue;
        }
        w = sumset(w, sym);
        room.push_back(static_cast<double>(diffset(w, gamma).size()));
    }
    std::size_t best = 0;
    for (std::size_t s = 1; s <= n; ++s) {
        bool ok = true;
        double binom = 1;
        for (std::size_t k = 1; k <= s && ok; ++k) {
            binom = binom * static_cast<double>(s - k + 1) / static_cast<double>(k);
            const double r = k <= room.size() ? room[k - 1] : static_cast<double>(g.order());
            if (binom * gs > r * (1 + 1e-12)) ok = false;
        }
        if (!ok) break;
        best = s;
    }
    return best;
}

struct DimSearch {
    const Group& g;
    const GSet& gamma;
    std::vector<elem_t> el;
    std::vector<elem_t> cur, best;

    void run(std::size_t i, const SignedSumTable& t) {
        if (cur.size() > best.size()) best = cur;
        if (cur.size() + (el.size() - i) <= best.size()) return;
        for (std::size_t j = i; j < el.size(); ++j) {
            if (cur.size() + (el.size() - j) <= best.size()) return;
            SignedSumTable next = t;
            next.add(el[j]);
            if (first_violation(next, gamma)) continue;
            cur.push_back(el[j]);
            run(j + 1, next);
            cur.pop_back();
        }
    }
};

}  // namespace detail

/// size of the largest Gamma-dissociated subset of Delta (exact for |Delta| <= 16, else bounds)
inline DimensionReport dimension(const GSet& delta, const GSet& gamma) {
    require_same_group(delta.group(), gamma.group());
    DimensionReport rep;
    if (delta.empty()) {
        rep.exact = true;
        return rep;
    }
    const Group& g = delta.group();
    if (delta.size() <= kDimensionExactCap) {
        detail::DimSearch s{g, gamma, delta.elements(), {}, {}};
        s.best = detail::greedy_dissociated(delta, gamma);
        s.run(0, detail::SignedSumTable(g, static_cast<unsigned>(delta.size())));
        rep.witness = s.best;
        rep.lower = rep.upper = s.best.size();
        rep.exact = true;
        return rep;
    }
    rep.witness = detail::greedy_dissociated(delta, gamma);
    rep.lower = rep.witness.size();
    rep.upper = std::max(rep.lower, detail::counting_upper_bound(delta, gamma));
    return rep;
}

/// <Lambda> = {sum c_l l : c in {-1,0,1}^Lambda}
inline GSet signed_span(const Group& g, const std::vector<elem_t>& lambda) {
    GSet s(g);
    s.insert(0);
    for (auto l : lambda) {
        GSet next = s;
        for (auto x : s.elements()) {
            next.insert(g.add(x, l));
            next.insert(g.sub(x, l));
        }
        s = std::move(next);
    }
    return s;
}

struct CoveringReport {
    std::vector<elem_t> lambda;
    std::vector<elem_t> dissociated;  // the maximal dissociated subset it was built from
    bool verified = false;
};

inline constexpr std::size_t kCoveringCap = 40;

/// Lambda' = Lambda u 2 Lambda from a maximal dissociated Lambda, so Delta lies in <Lambda'> + Gamma - Gamma;
/// a translate Delta + shift is covered by adding the shift
inline CoveringReport covering_from_dimension(const GSet& delta, const GSet& gamma, std::optional<elem_t> shift = std::nullopt) {
    require_same_group(delta.group(), gamma.group());
    const Group& g = delta.group();
    CoveringReport rep;
    GSet base = delta;
    if (shift) base = translate(delta, g.neg(*shift));
    rep.dissociated = detail::greedy_dissociated(base, gamma);
    GSet lam(g);
    for (auto x : rep.dissociated) {
        lam.insert(x);
        lam.insert(g.mul(2, x));
    }
    if (shift) lam.insert(*shift);
    lam.erase(0);
    rep.lambda = lam.elements();
    if (rep.lambda.size() > kCoveringCap) throw CapError("covering set exceeds the enumeration cap");
    const GSet cover = sumset(signed_span(g, rep.lambda), diffset(gamma, gamma));
    rep.verified = delta.subset_of(cover);
    if (!rep.verified) throw Error("covering_from_dimension: containment check failed");
    return rep;
}

// ---------------------------------------------------------------------------------------------
// low-dimensional heavy pieces

struct MassDimReport {
    GSet set;
    double mass = 0;         // omega(set)
    double total = 0;        // omega(support)
    DimensionReport dim;     // certified bounds for set
    std::vector<elem_t> cover;
};

/// heavy-first greedy: grow a dissociated core, absorb everything its covering reaches, stop at the target mass
inline MassDimReport low_dim_mass_subset(const GFunction& omega, double target, const GSet& gamma) {
    if (omega.side != Side::dual) throw PreconditionError("low_dim_mass_subset expects a dual-side weight");
    require_same_group(omega.group, gamma.group());
    if (!(target >= 0 && target <= 1)) throw PreconditionError("target mass must lie in [0,1]");
    const Group& g = omega.group;
    std::vector<elem_t> supp;
    double total = 0;
    for (elem_t x = 0; x < g.size(); ++x) {
        const double w = omega[x].real();
        if (w < 0 || std::abs(omega[x].imag()) > 1e-12) throw PreconditionError("omega must be non-negative");
        if (w > 0) {
            supp.push_back(x);
            total += w;
        }
    }
    std::stable_sort(supp.begin(), supp.end(), [&](elem_t a, elem_t b) { return omega[a].real() > omega[b].real(); });
    MassDimReport rep;
    rep.total = total;
    rep.set = GSet(g);
    const GSet gg = diffset(gamma, gamma);
    GSet support(g);
    for (auto x : supp) support.insert(x);
    std::vector<elem_t> core;
    GSet reach(g);
    for (auto x : supp) {
        if (rep.mass >= target * total * (1 - 1e-12) && !rep.set.empty()) break;
        if (rep.set.contains(x)) continue;
        core.push_back(x);
        std::vector<elem_t> lam;
        for (auto c : core) {
            lam.push_back(c);
            lam.push_back(g.mul(2, c));
        }
        reach = sumset(signed_span(g, lam), gg) & support;
        rep.set = reach;
        rep.mass = 0;
        for (auto y : rep.set.elements()) rep.mass += omega[y].real();
    }
    rep.cover = core;
    rep.dim = dimension(rep.set, gamma);
    return rep;
}

// ---------------------------------------------------------------------------------------------
// symmetry sets

/// {gamma : (1_X o 1_X o 1_Gamma)(gamma) >= delta |X|}
inline GSet symmetry_set(const GSet& x, double delta, const GSet& gamma) {
    require_same_group(x.group(), gamma.group());
    if (!(delta > 0 && delta <= 1)) throw PreconditionError("symmetry_set needs delta in (0,1]");
    using CF = CountFunction<count_t>;
    auto r = correlate_with_set(correlate_counts(CF::indicator(x), CF::indicator(x)), gamma);
    const double thr = delta * static_cast<double>(x.size());
    GSet out(x.group());
    for (elem_t y = 0; y < r.values.size(); ++y)
        if (static_cast<double>(r.values[y]) >= thr - 1e-9) out.insert(y);
    return out;
}

}  // namespace actk
