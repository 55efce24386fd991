#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "actk/bohr.hpp"
#include "actk/io.hpp"
#include "actk/spectral.hpp"

namespace actk {

// ---------------------------------------------------------------------------------------------
// additive frameworks

/**
 * @brief chain top ⊇ Γ^(1) ⊇ ... ⊇ Γ^(h+1) = bottom of symmetric sets containing 0
 *
 * levels[i-1] holds Γ^(i) for 1 <= i <= h+1.
 */
struct AdditiveFramework {
    unsigned h = 1;
    unsigned t = 1;
    GSet top;
    std::vector<GSet> levels;

    const GSet& level(unsigned i) const { return i == 0 ? top : levels.at(i - 1); }
    const GSet& bottom() const { return levels.back(); }
    const Group& group() const { return top.group(); }
};

struct FrameworkCondition {
    std::string name;
    unsigned level = 0;
    bool pass = true;
    std::string detail;
};

struct FrameworkReport {
    bool valid = true;
    std::vector<FrameworkCondition> conditions;
    std::optional<FrameworkCondition> first_failure;

    void add(FrameworkCondition c) {
        if (!c.pass && valid) {
            valid = false;
            first_failure = c;
        }
        conditions.push_back(std::move(c));
    }
};

namespace detail {

/// min over x in D of #{l in C : l - x in C}, compared against |C|/2
inline bool correlation_condition(const GSet& c, const GSet& d, std::string* detail = nullptr) {
    const Group& g = c.group();
    const auto cel = c.elements();
    for (auto x : d.elements()) {
        std::size_t hits = 0;
        for (auto l : cel) hits += c.contains(g.sub(l, x));
        if (2 * hits < cel.size()) {
            if (detail) *detail = "x=" + std::to_string(x) + " correlation " + std::to_string(hits) + " < |G|/2=" + std::to_string(cel.size()) + "/2";
            return false;
        }
    }
    return true;
}

}  // namespace detail

inline FrameworkReport validate_framework(const AdditiveFramework& f) {
    FrameworkReport rep;
    if (f.levels.empty()) throw PreconditionError("framework chain is empty");
    rep.add({"shape", 0, f.levels.size() == f.h + 1,
             "expected " + std::to_string(f.h + 1) + " levels below the top, got " + std::to_string(f.levels.size())});
    if (!rep.valid) return rep;
    for (unsigned i = 0; i <= f.h + 1; ++i) require_same_group(f.top.group(), f.level(i).group());
    for (unsigned i = 0; i <= f.h + 1; ++i) {
        rep.add({"contains_zero", i, f.level(i).contains(0), ""});
        rep.add({"symmetric", i, is_symmetric(f.level(i)), ""});
    }
    for (unsigned i = 0; i <= f.h; ++i) rep.add({"nested", i, f.level(i + 1).subset_of(f.level(i)), "level i+1 inside level i"});
    const GSet two = sumset(f.level(1), f.level(1));
    rep.add({"top_contains_2G1_minus_2G1", 1, diffset(two, two).subset_of(f.top), ""});
    for (unsigned i = 1; i < f.h; ++i) {
        const GSet tn = iterated_sumset(f.level(i + 1), f.t);
        rep.add({"tolerance_containment", i, tn.subset_of(f.level(i)), "t * level(i+1) inside level(i)"});
        const std::size_t s = sumset(f.level(i), tn).size();
        rep.add({"doubling", i, s <= 2 * f.level(i).size(),
                 "|level(i) + t level(i+1)| = " + std::to_string(s) + " vs 2|level(i)| = " + std::to_string(2 * f.level(i).size())});
    }
    for (unsigned i = 1; i <= f.h; ++i) {
        std::string why;
        const bool ok = detail::correlation_condition(f.level(i), diffset(f.level(i + 1), f.level(i + 1)), &why);
        rep.add({"correlation", i, ok, why});
    }
    return rep;
}

/// subgroup chain: every level equal to the given dual subgroup
inline AdditiveFramework subgroup_framework(const GSet& h_group, unsigned h, unsigned t) {
    AdditiveFramework f;
    f.h = h;
    f.t = t;
    f.top = h_group;
    f.levels.assign(h + 1, h_group);
    return f;
}

/// centred progressions level(i) = [-(2t)^{h+1-i} L, (2t)^{h+1-i} L] in a cyclic group
inline AdditiveFramework progression_framework(const Group& g, unsigned h, unsigned t, std::int64_t L) {
    if (!g.cyclic_group()) throw PreconditionError("progression frameworks live in a cyclic group");
    AdditiveFramework f;
    f.h = h;
    f.t = t;
    auto radius = [&](unsigned i) {
        std::int64_t r = L;
        for (unsigned j = i; j < h + 1; ++j) r = checked_mul(r, 2 * static_cast<std::int64_t>(t));
        return r;
    };
    if (2 * radius(0) + 1 > static_cast<std::int64_t>(g.order())) throw PreconditionError("progressions wrap around the group");
    f.top = interval(g, -radius(0), radius(0));
    for (unsigned i = 1; i <= h + 1; ++i) f.levels.push_back(interval(g, -radius(i), radius(i)));
    return f;
}

struct BohrFramework {
    AdditiveFramework framework;
    std::vector<double> rho;  // relative dilation per level, index 0 = top
    std::vector<double> eta;  // spectrum level per level, index 0 = top
    FrameworkReport report;
};

struct BohrFrameworkOptions {
    int rho_steps = 40;                                                  // rho_j = 2^{-j/2}
    std::vector<double> etas{0.5, 0.75, 0.875, 0.9375, 0.96875};         // 1 - eps candidates
};

/**
 * @brief adaptive search for a framework of spectra Δ_η(B_ρ) between Δ_{1/2}(B_ρtop) and Δ_{1/2}(B)
 *
 * Each level takes the smallest candidate spectrum that passes the conditions linking it to the
 * level below; the result is validated before it is returned.
 */
inline BohrFramework build_bohr_framework(const BohrSet& b, unsigned h, unsigned t, const BohrFrameworkOptions& opt = {}) {
    if (h < 1 || h > 3) throw PreconditionError("build_bohr_framework supports 1 <= h <= 3");
    if (t < 1 || t > 8) throw PreconditionError("build_bohr_framework supports 1 <= t <= 8");
    const Group& g = b.group;
    struct Cand {
        double rho, eta;
        GSet set;
    };
    std::vector<Cand> cands;
    std::vector<std::pair<double, std::vector<double>>> mags;
    for (int j = 0; j <= opt.rho_steps; ++j) {
        const double rho = std::pow(2.0, -0.5 * j);
        const auto bs = dilate(b, rho);
        const auto sp = spectrum(uniform_measure(bs.realized), 1.0);
        mags.emplace_back(rho, sp.magnitudes);
        for (double eta : opt.etas) {
            GSet s(g);
            for (elem_t x = 0; x < g.size(); ++x)
                if (sp.magnitudes[x] >= eta - kSpectrumTol) s.insert(x);
            cands.push_back({rho, eta, std::move(s)});
        }
        if (bs.size() == 1) break;  // B_rho = {0}: every later spectrum is the whole group
    }
    std::vector<std::size_t> order(cands.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return cands[a].set.size() < cands[c].set.size(); });

    BohrFramework out;
    auto& f = out.framework;
    f.h = h;
    f.t = t;
    f.levels.assign(h + 1, GSet(g));
    out.rho.assign(h + 2, 1.0);
    out.eta.assign(h + 2, 0.5);
    f.levels[h] = cands[0].set;  // rho = 1, eta = 1/2
    for (unsigned i = h; i >= 1; --i) {
        const GSet& below = f.levels[i];
        const GSet diff = diffset(below, below);
        const GSet tn = i < h ? iterated_sumset(below, t) : GSet(g);
        bool found = false;
        for (auto idx : order) {
            const auto& c = cands[idx];
            if (!below.subset_of(c.set)) continue;
            if (i < h) {
                if (!tn.subset_of(c.set)) continue;
                if (sumset(c.set, tn).size() > 2 * c.set.size()) continue;
            }
            if (!detail::correlation_condition(c.set, diff)) continue;
            f.levels[i - 1] = c.set;
            out.rho[i] = c.rho;
            out.eta[i] = c.eta;
            found = true;
            break;
        }
        if (!found) throw CapError("framework search failed: no spectrum satisfies the conditions for level " + std::to_string(i));
    }
    const GSet two = sumset(f.levels[0], f.levels[0]);
    const GSet need = diffset(two, two);
    bool top_found = false;
    for (const auto& [rho, m] : mags) {
        GSet s(g);
        for (elem_t x = 0; x < g.size(); ++x)
            if (m[x] >= 0.5 - kSpectrumTol) s.insert(x);
        if (need.subset_of(s)) {
            f.top = std::move(s);
            out.rho[0] = rho;
            top_found = true;
            break;
        }
    }
    if (!top_found) {
        f.top = GSet::full(g);
        out.rho[0] = 0.0;
    }
    out.report = validate_framework(f);
    if (!out.report.valid) throw CapError("framework search produced an invalid chain: " + out.report.first_failure->name);
    return out;
}

inline json framework_to_json(const AdditiveFramework& f) {
    json lv = json::array();
    for (const auto& s : f.levels) lv.push_back(s.elements());
    return json{{"factors", f.group().factors()}, {"h", f.h}, {"t", f.t}, {"top", f.top.elements()}, {"levels", lv}};
}

inline AdditiveFramework framework_from_json(const json& j) {
    const Group g = group_from_json(j);
    for (const char* key : {"h", "t", "top", "levels"})
        if (!j.contains(key)) throw SchemaError(std::string("framework JSON needs '") + key + "'");
    if (!j["h"].is_number_unsigned() || !j["t"].is_number_unsigned()) throw SchemaError("h and t must be non-negative integers");
    if (!j["levels"].is_array()) throw SchemaError("'levels' must be an array");
    AdditiveFramework f;
    f.h = j["h"].get<unsigned>();
    f.t = j["t"].get<unsigned>();
    f.top = set_from_json_in(g, j["top"]);
    for (const auto& l : j["levels"]) f.levels.push_back(set_from_json_in(g, l));
    if (f.levels.empty()) throw SchemaError("framework needs at least one level");
    return f;
}

// ---------------------------------------------------------------------------------------------
// additive non-smoothing

struct NormCheck {
    unsigned n = 0;
    double value = 0;  // ||1^{(n)} o 1^{(n)} o 1_top||_inf
    double bound = 0;  // tau^{n-1-1/k} |Delta|^{2n-1}
    bool pass = true;
};

struct NonSmoothingCertificate {
    double tau = 0;
    unsigned k = 1;
    std::size_t size = 0;
    bool orthogonal = true;
    std::optional<std::pair<elem_t, elem_t>> collision;
    bool energy_pass = true;  // condition (2)
    bool energy_sampled = false;
    std::size_t energy_checked = 0;
    double energy_worst_ratio = 0;  // min over checked subsets of E4(Δ') / (τ|Δ'|^4/|Δ|)
    std::vector<elem_t> energy_failing_subset;
    std::vector<NormCheck> norms;
    bool side_condition = true;  // log(1/τ) <= τ^{-1/k}
    bool robust_checked = false;
    double kappa = 0;
    std::size_t robust_samples = 0;
    std::size_t robust_failures = 0;
    std::vector<elem_t> robust_failing_subset;

    bool passes() const {
        bool ok = orthogonal && energy_pass && side_condition && (!robust_checked || robust_failures == 0);
        for (const auto& n : norms) ok = ok && n.pass;
        return ok;
    }
};

struct NonSmoothingOptions {
    std::size_t exhaustive_cap = 14;
    std::size_t samples = 256;
    std::uint64_t seed = 1;
};

namespace detail {

/// max over x of sum_{s in S} r(x + s) where r = 1^{(n)} o 1^{(n)}
inline double convolution_sup(const GSet& delta, unsigned n, const GSet& s) {
    using CF = CountFunction<count_t>;
    auto c = iterated_convolution_counts(CF::indicator(delta), n);
    auto r = correlate_with_set(correlate_counts(c, c), s);
    return static_cast<double>(r.max_value());
}

inline double e4_ratio(const GSet& sub, const GSet& bottom, double tau, double n) {
    const double m = static_cast<double>(sub.size());
    const double need = tau / n * m * m * m * m;
    return energy(sub, bottom, 2).value / need;
}

}  // namespace detail

inline NonSmoothingCertificate check_non_smoothing(const GSet& delta, const AdditiveFramework& f, double tau, unsigned k,
                                                   const NonSmoothingOptions& opt = {}) {
    if (!(tau > 0 && tau <= 1)) throw PreconditionError("tau must lie in (0,1]");
    if (k == 0) throw PreconditionError("k must be positive");
    if (delta.empty()) throw PreconditionError("Delta must be nonempty");
    require_same_group(delta.group(), f.group());
    NonSmoothingCertificate c;
    c.tau = tau;
    c.k = k;
    c.size = delta.size();
    const double n = static_cast<double>(delta.size());
    auto orth = is_orthogonal(delta, f.top);
    c.orthogonal = orth.orthogonal;
    if (!orth.orthogonal) c.collision = std::make_pair(orth.first, orth.second);

    const auto el = delta.elements();
    c.energy_worst_ratio = std::numeric_limits<double>::infinity();
    auto check_subset = [&](const GSet& sub) {
        ++c.energy_checked;
        const double r = detail::e4_ratio(sub, f.bottom(), tau, n);
        if (r < c.energy_worst_ratio) c.energy_worst_ratio = r;
        if (r < 1 - 1e-12 && c.energy_pass) {
            c.energy_pass = false;
            c.energy_failing_subset = sub.elements();
        }
    };
    if (el.size() <= opt.exhaustive_cap) {
        for (std::size_t mask = 1; mask < (std::size_t{1} << el.size()); ++mask) {
            GSet sub(delta.group());
            for (std::size_t i = 0; i < el.size(); ++i)
                if (mask >> i & 1) sub.insert(el[i]);
            check_subset(sub);
        }
    } else {
        c.energy_sampled = true;
        check_subset(delta);
        Rng rng(opt.seed);
        for (std::size_t s = 0; s < opt.samples; ++s) {
            const std::size_t m = 1 + rng.below(el.size());
            auto pick = el;
            rng.shuffle(pick);
            pick.resize(m);
            check_subset(GSet::from_elements(delta.group(), pick));
        }
    }
    for (unsigned m = 2; m <= 4; ++m) {
        NormCheck nc;
        nc.n = m;
        nc.value = detail::convolution_sup(delta, m, f.top);
        nc.bound = std::pow(tau, m - 1.0 - 1.0 / k) * std::pow(n, 2.0 * m - 1);
        nc.pass = nc.value <= nc.bound * (1 + 1e-12);
        c.norms.push_back(nc);
    }
    c.side_condition = std::log(1 / tau) <= std::pow(tau, -1.0 / k) * (1 + 1e-12);
    return c;
}

/// sampled kappa-robust form: random subsets of size >= kappa |Delta| are each checked
inline NonSmoothingCertificate check_robust_non_smoothing(const GSet& delta, const AdditiveFramework& f, double tau, unsigned k,
                                                          double kappa, const NonSmoothingOptions& opt = {}) {
    auto c = check_non_smoothing(delta, f, tau, k, opt);
    c.robust_checked = true;
    c.kappa = kappa;
    const auto el = delta.elements();
    const std::size_t lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(kappa * static_cast<double>(el.size()) - 1e-9)));
    Rng rng(opt.seed + 7);
    NonSmoothingOptions inner = opt;
    inner.samples = std::max<std::size_t>(8, opt.samples / 16);
    inner.exhaustive_cap = std::min<std::size_t>(opt.exhaustive_cap, 10);
    for (std::size_t s = 0; s < opt.samples; ++s) {
        const std::size_t m = lo + rng.below(el.size() - lo + 1);
        auto pick = el;
        rng.shuffle(pick);
        pick.resize(m);
        const auto sub = GSet::from_elements(delta.group(), pick);
        ++c.robust_samples;
        if (!check_non_smoothing(sub, f, tau, k, inner).passes()) {
            if (c.robust_failures == 0) c.robust_failing_subset = sub.elements();
            ++c.robust_failures;
        }
    }
    return c;
}

inline json non_smoothing_to_json(const NonSmoothingCertificate& c) {
    json norms = json::array();
    for (const auto& n : c.norms) norms.push_back({{"n", n.n}, {"value", n.value}, {"bound", n.bound}, {"pass", n.pass}});
    json j{{"tau", c.tau},
           {"k", c.k},
           {"size", c.size},
           {"orthogonal", c.orthogonal},
           {"energy_pass", c.energy_pass},
           {"energy_sampled", c.energy_sampled},
           {"energy_checked", c.energy_checked},
           {"energy_worst_ratio", c.energy_worst_ratio},
           {"energy_failing_subset", c.energy_failing_subset},
           {"norms", norms},
           {"side_condition", c.side_condition},
           {"passes", c.passes()}};
    if (c.collision) j["collision"] = {c.collision->first, c.collision->second};
    if (c.robust_checked)
        j["robust"] = {{"kappa", c.kappa}, {"samples", c.robust_samples}, {"failures", c.robust_failures}, {"failing_subset", c.robust_failing_subset}};
    return j;
}

// ---------------------------------------------------------------------------------------------
// collapser inequality

struct CollapserReport {
    count_t lhs = 0;
    count_t rhs = 0;
    bool holds = true;
};

/// sum_{x in A} (f o 1_Γ)(a+x) (g o 1_Γ')(b+x) <= ((f o g) o 1_{Γ-Γ'})(a-b) for Γ'-orthogonal A
inline CollapserReport collapser_check(const GSet& a_set, const GSet& gamma, const GSet& gamma_p, const CountFunction<count_t>& f,
                                       const CountFunction<count_t>& g, elem_t a, elem_t b) {
    require_same_group(a_set.group(), gamma.group());
    require_same_group(a_set.group(), gamma_p.group());
    for (auto v : f.values)
        if (v < 0) throw PreconditionError("f must be non-negative");
    for (auto v : g.values)
        if (v < 0) throw PreconditionError("g must be non-negative");
    if (!is_orthogonal(a_set, gamma_p).orthogonal) throw PreconditionError("A must be Gamma'-orthogonal");
    const Group& G = a_set.group();
    auto fg1 = correlate_with_set(f, gamma);
    auto gg1 = correlate_with_set(g, gamma_p);
    CollapserReport rep;
    for (auto x : a_set.elements()) rep.lhs = checked_add(rep.lhs, checked_mul(fg1.values[G.add(a, x)], gg1.values[G.add(b, x)]));
    auto fg = correlate_counts(f, g);
    rep.rhs = correlate_with_set(fg, diffset(gamma, gamma_p)).values[G.sub(a, b)];
    rep.holds = rep.lhs <= rep.rhs;
    return rep;
}

// ---------------------------------------------------------------------------------------------
// structure search

struct StructureWitness {
    GSet x, h;
    double delta = 0;  // |H| / |Δ|
    BigInt energy = 0; // <1_X o 1_X, 1_H o 1_H o 1_top>
    double r1 = 0;     // energy / (|X||H|^2)
    double r2 = 0;     // |X||H| / (τ|Δ|^2)
    double theta = 0;  // H + z inside {x : 1_X o 1_X o 1_top(x) >= θ|X|}
    elem_t z = 0;
    std::size_t candidates = 0;
    bool verified = false;
};

struct StructureOptions {
    std::size_t budget = 10000;
    unsigned chain_depth = 8;
};

namespace detail {

inline BigInt energy_with(const CountFunction<count_t>& xx, const GSet& h, const GSet& top) {
    using CF = CountFunction<count_t>;
    auto hh = correlate_with_set(correlate_counts(CF::indicator(h), CF::indicator(h)), top);
    try {
        return BigInt(inner_counts(xx, hh));
    } catch (const OverflowError&) {
        return inner_counts(convert_counts<BigInt>(xx), convert_counts<BigInt>(hh));
    }
}

/// largest θ with H + z inside {F >= θ|X|}, scanning every z (ties to the smallest z)
inline std::pair<double, elem_t> best_translate(const GSet& x, const GSet& h, const GSet& top) {
    using CF = CountFunction<count_t>;
    const Group& g = x.group();
    auto F = correlate_with_set(correlate_counts(CF::indicator(x), CF::indicator(x)), top);
    const auto hel = h.elements();
    double best = -1;
    elem_t bz = 0;
    for (elem_t z = 0; z < g.size(); ++z) {
        count_t m = std::numeric_limits<count_t>::max();
        for (auto y : hel) {
            m = std::min(m, F.values[g.add(y, z)]);
            if (static_cast<double>(m) <= best * static_cast<double>(x.size())) break;
        }
        const double th = static_cast<double>(m) / static_cast<double>(x.size());
        if (th > best) {
            best = th;
            bz = z;
        }
    }
    return {best, bz};
}

}  // namespace detail

/// exact ratios for a given (X, H)
inline StructureWitness evaluate_structure(const GSet& delta, const GSet& x, const GSet& h, const GSet& top, double tau) {
    using CF = CountFunction<count_t>;
    StructureWitness w;
    w.x = x;
    w.h = h;
    const double nd = static_cast<double>(delta.size()), nx = static_cast<double>(x.size()), nh = static_cast<double>(h.size());
    w.delta = nh / nd;
    w.energy = detail::energy_with(correlate_counts(CF::indicator(x), CF::indicator(x)), h, top);
    w.r1 = w.energy.convert_to<double>() / (nx * nh * nh);
    w.r2 = nx * nh / (tau * nd * nd);
    auto [theta, z] = detail::best_translate(x, h, top);
    w.theta = theta;
    w.z = z;
    // containment recheck, pointwise
    auto F = correlate_with_set(correlate_counts(CF::indicator(x), CF::indicator(x)), top);
    w.verified = x.subset_of(delta) && h.subset_of(delta);
    for (auto y : h.elements())
        w.verified = w.verified && static_cast<double>(F.values[x.group().add(y, z)]) >= theta * nx - 1e-9;
    return w;
}

/**
 * @brief heuristic search for X, H inside Δ with large E(X, H) relative to |X||H|^2
 *
 * Candidates for H are slices Δ ∩ (Δ + Γ^(1) + a) over popular differences a, and greedy
 * intersection chains of such slices; X ranges over {Δ, H}. The pick maximizes r1 among pairs
 * with |X||H| >= τ^2 |Δ|^2 and breaks ties toward the size scale τ|Δ|^2.
 */
inline StructureWitness structure_search(const GSet& delta, const AdditiveFramework& f, double tau, const StructureOptions& opt = {}) {
    using CF = CountFunction<count_t>;
    if (delta.empty()) throw PreconditionError("Delta must be nonempty");
    if (!(tau > 0 && tau <= 1)) throw PreconditionError("tau must lie in (0,1]");
    require_same_group(delta.group(), f.group());
    const GSet& g1 = f.level(1);
    const GSet dg = sumset(delta, g1);
    auto pop = correlate_counts(CF::indicator(delta), CF::indicator(dg));
    std::vector<elem_t> diffs = pop.support();
    std::stable_sort(diffs.begin(), diffs.end(), [&](elem_t a, elem_t b) { return pop.values[a] > pop.values[b]; });
    if (diffs.size() > opt.budget) diffs.resize(opt.budget);

    std::vector<GSet> cands;
    std::set<std::vector<std::uint64_t>> seen;
    auto push = [&](const GSet& s) {
        if (s.empty() || cands.size() >= opt.budget) return;
        if (seen.insert(s.words()).second) cands.push_back(s);
    };
    push(delta);
    std::vector<GSet> slices;
    for (auto a : diffs) {
        GSet s = delta & translate(dg, a);
        if (seen.count(s.words())) continue;
        push(s);
        slices.push_back(s);
    }
    for (const auto& s0 : slices) {
        GSet s = s0;
        for (unsigned d = 0; d < opt.chain_depth; ++d) {
            bool stepped = false;
            for (auto a : diffs) {
                GSet nxt = s & translate(dg, a);
                if (nxt.empty() || nxt.size() == s.size()) continue;
                s = nxt;
                push(s);
                stepped = true;
                break;
            }
            if (!stepped) break;
        }
        if (cands.size() >= opt.budget) break;
    }

    const auto xx_delta = correlate_counts(CF::indicator(delta), CF::indicator(delta));
    const double nd = static_cast<double>(delta.size());
    // maximize r1 over candidates with |X||H| >= τ^2 |Δ|^2, ties broken by r2 closest to 1
    double best_r1 = -1, best_fit = -1;
    std::pair<std::size_t, bool> best{0, true};  // candidate index, X = Δ
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto& h = cands[i];
        const double nh = static_cast<double>(h.size());
        for (bool x_is_delta : {true, false}) {
            const GSet& x = x_is_delta ? delta : h;
            const double nx = static_cast<double>(x.size());
            const auto e = x_is_delta ? detail::energy_with(xx_delta, h, f.top)
                                      : detail::energy_with(correlate_counts(CF::indicator(h), CF::indicator(h)), h, f.top);
            const double r1 = e.convert_to<double>() / (nx * nh * nh);
            const double r2 = nx * nh / (tau * nd * nd);
            if (r2 < tau && !(i == 0 && x_is_delta)) continue;
            const double fit = std::min(r2, 1 / r2);
            if (r1 > best_r1 + 1e-12 || (r1 > best_r1 - 1e-12 && fit > best_fit + 1e-12)) {
                best_r1 = r1;
                best_fit = fit;
                best = {i, x_is_delta};
            }
        }
    }
    const GSet& h = cands[best.first];
    auto w = evaluate_structure(delta, best.second ? delta : h, h, f.top, tau);
    w.candidates = cands.size();
    return w;
}

inline json structure_to_json(const StructureWitness& w) {
    return json{{"X", w.x.elements()}, {"H", w.h.elements()}, {"delta", w.delta}, {"energy", to_decimal(w.energy)}, {"r1", w.r1},
                {"r2", w.r2},         {"theta", w.theta},     {"z", w.z},         {"candidates", w.candidates}, {"verified", w.verified}};
}

// ---------------------------------------------------------------------------------------------
// multiscale viscosity

/** @brief depth data (δ_i, Γ_i) with the chain Δ ⊇ Δ_1 ⊇ ... ⊇ Δ_n; S_i are derived */
struct ViscosityCertificate {
    double epsilon = 0;
    std::vector<double> deltas;
    std::vector<GSet> gammas;
    std::vector<GSet> chain;
    std::vector<GSet> bands;  // optional; when present must equal the derived S_i
};

struct ViscosityReport {
    bool valid = true;
    std::string failing_condition;
    std::size_t failing_index = 0;  // 1-based
    std::vector<GSet> bands;
    std::vector<double> band_ratio;  // |S_i| / (ε τ δ_i^{-2} |Δ| |Γ_i|)
};

/// S = {x : 2δ|Δ| > (1_{Δ'} o 1_{Δ'+Γ})(x) >= δ|Δ|}
inline GSet viscosity_band(const GSet& delta, const GSet& sub, const GSet& gamma, double dlt) {
    using CF = CountFunction<count_t>;
    auto r = correlate_counts(CF::indicator(sub), CF::indicator(sumset(sub, gamma)));
    const double nd = static_cast<double>(delta.size());
    GSet s(delta.group());
    for (elem_t x = 0; x < r.values.size(); ++x) {
        const double v = static_cast<double>(r.values[x]);
        if (v >= dlt * nd - 1e-9 && v < 2 * dlt * nd - 1e-9) s.insert(x);
    }
    return s;
}

inline ViscosityReport validate_viscosity(const ViscosityCertificate& c, const GSet& delta, double tau) {
    using CF = CountFunction<count_t>;
    ViscosityReport rep;
    const std::size_t n = c.deltas.size();
    auto fail = [&](const std::string& what, std::size_t i) {
        if (rep.valid) {
            rep.valid = false;
            rep.failing_condition = what;
            rep.failing_index = i;
        }
    };
    if (n == 0 || c.gammas.size() != n || c.chain.size() != n || (!c.bands.empty() && c.bands.size() != n)) {
        fail("shape", 0);
        return rep;
    }
    const double nd = static_cast<double>(delta.size());
    for (std::size_t i = 1; i <= n; ++i) {
        const double di = c.deltas[i - 1];
        if (!(di >= 0 && di <= 1)) fail("depth_range", i);
        if (di < c.epsilon * tau * (1 - 1e-12)) fail("derived_bound", i);
        const GSet& gi = c.gammas[i - 1];
        if (!gi.contains(0) || !is_symmetric(gi)) fail("gamma_symmetric", i);
        const GSet& parent = i == 1 ? delta : c.chain[i - 2];
        if (!c.chain[i - 1].subset_of(parent)) fail("chain", i);
        if (static_cast<double>(c.chain[i - 1].size()) < c.epsilon * nd * (1 - 1e-12)) fail("chain_size", i);
    }
    if (!rep.valid) return rep;
    for (std::size_t i = 1; i <= n; ++i) {
        const double di = c.deltas[i - 1];
        const GSet& gi = c.gammas[i - 1];
        GSet band = viscosity_band(delta, c.chain[i - 1], gi, di);
        if (!c.bands.empty() && c.bands[i - 1] != band) fail("band_membership", i);
        const double need = c.epsilon * tau / (di * di) * nd * static_cast<double>(gi.size());
        rep.band_ratio.push_back(need > 0 ? static_cast<double>(band.size()) / need : INFINITY);
        if (static_cast<double>(band.size()) < need * (1 - 1e-12)) fail("band_size", i);
        rep.bands.push_back(std::move(band));
    }
    for (std::size_t i = 2; i <= n; ++i) {
        const GSet& s = rep.bands[i - 2];
        const GSet tgt = sumset(c.chain[i - 2], c.gammas[i - 2]);
        auto conv = convolve_counts(CF::indicator(s), CF::indicator(tgt));
        const double need = 0.5 * c.deltas[i - 2] * static_cast<double>(s.size());
        for (auto x : c.chain[i - 1].elements())
            if (static_cast<double>(conv.values[x]) < need - 1e-9) {
                fail("popularity", i);
                break;
            }
    }
    return rep;
}

/// depth-one certificate: the dyadic band η in [τ/4, 1] of 1_Δ o 1_{Δ+Γ} with the largest |S|η²
inline ViscosityCertificate visc1_certificate(const GSet& delta, const GSet& gamma1, double tau) {
    if (!(tau > 0 && tau < 1)) throw PreconditionError("tau must lie in (0,1)");
    const double nd = static_cast<double>(delta.size());
    const double ng = static_cast<double>(gamma1.size());
    double best = -1, best_eta = 1;
    for (double eta = 1; eta >= tau / 4 * (1 - 1e-12); eta /= 2) {
        const double s = static_cast<double>(viscosity_band(delta, delta, gamma1, eta).size());
        const double score = s * eta * eta;
        if (score > best) {
            best = score;
            best_eta = eta;
        }
    }
    ViscosityCertificate c;
    c.deltas = {best_eta};
    c.gammas = {gamma1};
    c.chain = {delta};
    c.epsilon = std::min(1.0, best / (tau * nd * ng));
    // keep ε >= the derived requirement δ >= ετ
    c.epsilon = std::min(c.epsilon, best_eta / tau);
    return c;
}

inline json viscosity_to_json(const ViscosityCertificate& c) {
    json gam = json::array(), ch = json::array();
    for (const auto& s : c.gammas) gam.push_back(s.elements());
    for (const auto& s : c.chain) ch.push_back(s.elements());
    const Group& g = c.chain.empty() ? c.gammas.at(0).group() : c.chain[0].group();
    return json{{"factors", g.factors()}, {"epsilon", c.epsilon}, {"deltas", c.deltas}, {"gammas", gam}, {"chain", ch}};
}

inline ViscosityCertificate viscosity_from_json(const json& j) {
    const Group g = group_from_json(j);
    for (const char* key : {"epsilon", "deltas", "gammas", "chain"})
        if (!j.contains(key)) throw SchemaError(std::string("viscosity JSON needs '") + key + "'");
    ViscosityCertificate c;
    c.epsilon = j["epsilon"].get<double>();
    c.deltas = j["deltas"].get<std::vector<double>>();
    for (const auto& s : j["gammas"]) c.gammas.push_back(set_from_json_in(g, s));
    for (const auto& s : j["chain"]) c.chain.push_back(set_from_json_in(g, s));
    return c;
}

// ---------------------------------------------------------------------------------------------
// colouring lemma

struct ColourInterval {
    std::size_t lo = 0, hi = 0;  // 1-based inclusive
    int colour = 0;
};

/// an interval holding >= N integers of some colour i and none of colour < i, given n >= N^r
inline ColourInterval monochromatic_interval(const std::vector<int>& colours, std::size_t N, int r = 0) {
    if (N == 0) throw PreconditionError("N must be positive");
    for (int c : colours)
        if (c < 1) throw PreconditionError("colours are positive integers");
    if (r == 0)
        for (int c : colours) r = std::max(r, c);
    for (int c : colours)
        if (c > r) throw PreconditionError("colour exceeds r");
    double need = 1;
    for (int i = 0; i < r; ++i) need *= static_cast<double>(N);
    if (static_cast<double>(colours.size()) < need) throw PreconditionError("need n >= N^r");
    std::size_t lo = 0, hi = colours.size();  // half-open, 0-based
    for (int c = 1; c <= r; ++c) {
        std::size_t cnt = 0;
        for (std::size_t i = lo; i < hi; ++i) cnt += colours[i] == c;
        if (cnt >= N) return {lo + 1, hi, c};
        // longest c-free run, which has no colour below c either
        std::size_t best_lo = lo, best_len = 0, run = lo;
        for (std::size_t i = lo; i <= hi; ++i) {
            if (i == hi || colours[i] == c) {
                if (i - run > best_len) {
                    best_len = i - run;
                    best_lo = run;
                }
                run = i + 1;
            }
        }
        lo = best_lo;
        hi = best_lo + best_len;
    }
    throw Error("monochromatic_interval: recursion exhausted the colours");
}

}  // namespace actk
