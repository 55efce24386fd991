#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "actk/harmonics.hpp"

namespace actk {

namespace detail {

/**
 * Smallest total dilation rho with x in Bohr_{rho nu}(Gamma), for every x.
 * Membership of x in B_rho is decided everywhere by req[x] <= rho, which keeps
 * realized sets, dilates and regularity counts mutually consistent.
 */
struct DilationProfile {
    std::vector<double> req;
    std::vector<double> sorted;

    std::size_t count_le(double rho) const {
        return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), rho) - sorted.begin());
    }
    std::size_t count_lt(double rho) const {
        return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), rho) - sorted.begin());
    }
};

inline std::shared_ptr<const DilationProfile> build_profile(const Group& g, const std::vector<elem_t>& freqs,
                                                           const std::vector<double>& widths) {
    auto p = std::make_shared<DilationProfile>();
    p->req.assign(g.size(), 0.0);
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const elem_t gam = freqs[i];
        const double nu = widths[i];
        for (elem_t x = 0; x < g.order(); ++x) {
            const double v = g.circle_distance(gam, x);
            double need;
            if (v <= kCircleTol) need = 0.0;
            else if (nu <= 0.0) need = inf;
            else need = (v - kCircleTol) / nu;
            if (need > p->req[x]) p->req[x] = need;
        }
    }
    p->sorted = p->req;
    std::sort(p->sorted.begin(), p->sorted.end());
    return p;
}

}  // namespace detail

/** @brief Bohr set Bohr_{rho nu}(Gamma) with its realized element set */
struct BohrSet {
    Group group;
    std::vector<elem_t> frequencies;
    std::vector<double> widths;  // undilated
    double rho = 1.0;
    GSet realized;
    std::shared_ptr<const detail::DilationProfile> profile;

    std::size_t rank() const { return frequencies.size(); }
    std::size_t size() const { return realized.size(); }
    double density() const { return realized.density(); }
    double effective_width(std::size_t i) const { return std::min(2.0, rho * widths[i]); }
    bool contains(elem_t x) const { return realized.contains(x); }

    /// |B_{rho'}| for the dilate by rho' relative to this set
    std::size_t dilate_size(double rel) const { return profile->count_le(rho * rel); }
};

inline BohrSet bohr_build(const Group& g, std::vector<elem_t> freqs, std::vector<double> widths, double rho = 1.0) {
    if (freqs.empty()) throw PreconditionError("Bohr set needs at least one frequency");
    if (freqs.size() != widths.size()) throw SchemaError("frequencies and widths differ in length");
    if (!(rho > 0)) throw PreconditionError("dilation factor must be positive");
    for (auto f : freqs)
        if (f >= g.order()) throw SchemaError("frequency index out of range");
    for (double w : widths)
        if (!(w >= 0.0 && w <= 2.0)) throw PreconditionError("Bohr widths must lie in [0,2]");
    BohrSet b;
    b.group = g;
    b.frequencies = std::move(freqs);
    b.widths = std::move(widths);
    b.rho = rho;
    b.profile = detail::build_profile(g, b.frequencies, b.widths);
    b.realized = GSet(g);
    for (elem_t x = 0; x < g.order(); ++x)
        if (b.profile->req[x] <= rho) b.realized.insert(x);
    return b;
}

/// whole group as a rank-one Bohr set (trivial character, width 2)
inline BohrSet whole_group_bohr(const Group& g) { return bohr_build(g, {0}, {2.0}); }

inline BohrSet dilate(const BohrSet& b, double rel) {
    if (!(rel > 0)) throw PreconditionError("dilation factor must be positive");
    BohrSet out = b;
    out.rho = b.rho * rel;
    out.realized = GSet(b.group);
    for (elem_t x = 0; x < b.group.order(); ++x)
        if (b.profile->req[x] <= out.rho) out.realized.insert(x);
    return out;
}

/// combine two Bohr sets' frequency lists; realized set is the intersection
inline BohrSet bohr_intersection(const BohrSet& a, const BohrSet& b) {
    require_same_group(a.group, b.group);
    std::vector<elem_t> f;
    std::vector<double> w;
    for (std::size_t i = 0; i < a.rank(); ++i) {
        f.push_back(a.frequencies[i]);
        w.push_back(a.effective_width(i));
    }
    for (std::size_t i = 0; i < b.rank(); ++i) {
        f.push_back(b.frequencies[i]);
        w.push_back(b.effective_width(i));
    }
    return bohr_build(a.group, f, w);
}

struct RegularityReport {
    double rho = 1.0;
    std::size_t d = 0;
    std::size_t size = 0;
    double worst_ratio = 0;  // max |(|B_{1+k}|/|B|) - 1| / (100 d |k|)
    double worst_kappa = 0;
    std::size_t checked = 0;
    bool pass = true;
};

/**
 * Two-sided regularity check: evaluates the bound at every kappa in [-1/100d, 1/100d] where
 * the realized set changes, plus 64 evenly spaced kappa values.
 */
inline RegularityReport is_regular(const BohrSet& b) {
    RegularityReport rep;
    rep.rho = b.rho;
    rep.d = b.rank();
    const double d = static_cast<double>(b.rank());
    const double w = 1.0 / (100.0 * d);
    const auto& prof = *b.profile;
    const double base = b.rho;
    const double size0 = static_cast<double>(prof.count_le(base));
    rep.size = static_cast<std::size_t>(size0);
    auto note = [&](double kappa, double cnt, bool ok) {
        ++rep.checked;
        if (kappa != 0.0) {
            const double ratio = std::abs(cnt / size0 - 1.0) / (100.0 * d * std::abs(kappa));
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_kappa = kappa;
            }
        }
        if (!ok) rep.pass = false;
    };
    const double lo = base * (1.0 - w), hi = base * (1.0 + w);
    auto it = std::lower_bound(prof.sorted.begin(), prof.sorted.end(), lo);
    double last = -1.0;
    for (; it != prof.sorted.end() && *it <= hi; ++it) {
        const double r = *it;
        if (r == last) continue;
        last = r;
        const double kappa = r / base - 1.0;
        if (r > base) {
            const double cnt = static_cast<double>(prof.count_le(r));
            note(kappa, cnt, cnt <= (1.0 + 100.0 * d * kappa) * size0 * (1 + 1e-12));
        } else {
            // just below the breakpoint the element at r has left the set
            const double cnt = static_cast<double>(prof.count_lt(r));
            note(kappa, cnt, cnt >= (1.0 + 100.0 * d * kappa) * size0 * (1 - 1e-12) - 1e-9);
        }
    }
    for (int j = 0; j < 64; ++j) {
        const double kappa = -w + 2.0 * w * j / 63.0;
        const double cnt = static_cast<double>(prof.count_le(base * (1.0 + kappa)));
        const bool ok = cnt <= (1.0 + 100.0 * d * std::abs(kappa)) * size0 * (1 + 1e-12) &&
                        cnt >= (1.0 - 100.0 * d * std::abs(kappa)) * size0 * (1 - 1e-12) - 1e-9;
        note(kappa, cnt, ok);
    }
    return rep;
}

/// smallest rho in [1/2, 1] on a breakpoint-refined grid with B_rho regular
inline double find_regular_dilate(const BohrSet& b) {
    const auto& prof = *b.profile;
    const double base = b.rho;
    std::vector<double> bps;
    {
        auto it = std::lower_bound(prof.sorted.begin(), prof.sorted.end(), base * 0.5);
        for (; it != prof.sorted.end() && *it <= base; ++it)
            if (bps.empty() || *it != bps.back()) bps.push_back(*it / base);
    }
    for (int grid : {256, 1024, 4096}) {
        std::vector<double> cand;
        for (int j = 0; j <= grid; ++j) cand.push_back(0.5 + 0.5 * j / grid);
        std::vector<double> pts{0.5};
        pts.insert(pts.end(), bps.begin(), bps.end());
        pts.push_back(1.0);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double a = std::max(pts[i], 0.5), c = std::min(pts[i + 1], 1.0);
            if (c > a) {
                cand.push_back(std::sqrt(a * c));
                cand.push_back(a + (c - a) * 0.25);
                cand.push_back(a + (c - a) * 0.75);
            }
        }
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        for (double rel : cand) {
            if (rel < 0.5 || rel > 1.0) continue;
            BohrSet probe = b;
            probe.rho = base * rel;
            if (is_regular(probe).pass) return rel;
        }
    }
    throw CapError("no regular dilate found on the refined search grid");
}

/// B_rel with the returned dilate regular
inline BohrSet regularize(const BohrSet& b) { return dilate(b, find_regular_dilate(b)); }

struct RegConvReport {
    double defect = 0;
    double bound = 0;  // 200 rho d
    bool rho_condition = true;  // rho <= 1/(100 d)
    bool regular = true;
    bool holds = true;
};

/// ||mu_B * mu - mu_B||_1 for a probability measure mu supported on B_rho
inline RegConvReport reg_conv_defect(const BohrSet& b, const GFunction& mu, double rel_rho) {
    if (mu.side != Side::physical) throw SchemaError("measure must be physical-side");
    require_same_group(b.group, mu.group);
    const auto brho = dilate(b, rel_rho);
    for (elem_t x = 0; x < mu.size(); ++x)
        if (std::abs(mu[x]) > 1e-15 && !brho.contains(x)) throw PreconditionError("measure is not supported on B_rho");
    RegConvReport rep;
    const double d = static_cast<double>(b.rank());
    rep.rho_condition = rel_rho <= 1.0 / (100.0 * d) * (1 + 1e-12);
    rep.regular = is_regular(b).pass;
    const auto mb = uniform_measure(b.realized);
    rep.defect = l1_norm(convolve(mb, mu) - mb);
    rep.bound = 200.0 * rel_rho * d;
    rep.holds = rep.defect <= rep.bound + 1e-9;
    return rep;
}

struct EnvelopeReport {
    bool holds = true;
    bool precondition = true;
    bool contained = true;  // B' inside B_rho
    std::optional<elem_t> witness;
    double min_ratio = std::numeric_limits<double>::infinity();  // min over B of 2 g / mu_B
};

/// pointwise check of mu_B <= 2 mu_{B_{1+L rho}} * mu_{B'}^{(L)}
inline EnvelopeReport envelope_check(const BohrSet& b, const GSet& bprime, double rel_rho, unsigned L, double c = 1.0 / 200.0) {
    if (L == 0) throw PreconditionError("envelope_check needs L >= 1");
    require_same_group(b.group, bprime.group());
    EnvelopeReport rep;
    const double d = static_cast<double>(b.rank());
    rep.precondition = rel_rho <= c / (static_cast<double>(L) * d) * (1 + 1e-12);
    rep.contained = bprime.subset_of(dilate(b, rel_rho).realized);
    const auto mb = uniform_measure(b.realized);
    const auto wide = uniform_measure(dilate(b, 1.0 + L * rel_rho).realized);
    const auto g = convolve(wide, iterated_convolution(uniform_measure(bprime), L));
    // FFT round-off leaves tiny negative values off the support; compare with an absolute guard
    const double guard = 1e-9 * static_cast<double>(b.group.order()) / static_cast<double>(b.size());
    for (elem_t x = 0; x < mb.size(); ++x) {
        const double lhs = mb[x].real();
        const double rhs = 2.0 * g[x].real();
        if (lhs > 0) rep.min_ratio = std::min(rep.min_ratio, rhs / lhs);
        if (lhs > rhs + guard && rep.holds) {
            rep.holds = false;
            rep.witness = x;
        }
    }
    return rep;
}

/// product over frequencies of nu'/(4 nu) for Bohr sets on a common frequency list
inline double bohr_size_factor(const BohrSet& big, const BohrSet& small) {
    if (big.frequencies != small.frequencies) throw PreconditionError("Bohr sets must share frequencies");
    double f = 1.0;
    for (std::size_t i = 0; i < big.rank(); ++i) {
        const double nb = big.effective_width(i), ns = small.effective_width(i);
        if (nb > 0) f *= std::min(1.0, ns / (4.0 * nb));
    }
    return f;
}

}  // namespace actk
