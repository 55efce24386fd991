#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "actk/bohr.hpp"
#include "actk/io.hpp"
#include "actk/spectral.hpp"

namespace actk {

// ---------------------------------------------------------------------------------------------
// three-term progressions

/** @brief T(A) = #{(x, y, z) in A^3 : x + y = 2z} / N^2 */
struct APCount {
    std::uint64_t n = 0;
    count_t count = 0;
    std::string rational;
    double t = 0;
    double fourier = 0;  // sum_gamma 1_A^(gamma)^2 conj(1_{2.A}^(gamma))
    bool agree = false;
    bool trivial_only = false;  // count == |A|
};

namespace detail {

inline void require_odd(const Group& g) {
    if (!g.odd_order()) throw PreconditionError("3-AP counts need a group of odd order");
}

inline std::string reduced_fraction(count_t num, std::uint64_t den) {
    const auto g = gcd_u64(static_cast<std::uint64_t>(num < 0 ? -num : num), den);
    return std::to_string(num / static_cast<count_t>(g)) + "/" + std::to_string(den / g);
}

/// #{(x, y, z) : x, y in A, z in Z, x + y = 2z}
inline count_t progression_triples(const GSet& a, const GSet& z) {
    using CF = CountFunction<count_t>;
    const Group& g = a.group();
    const auto r = convolve_counts(CF::indicator(a), CF::indicator(a));
    count_t c = 0;
    for (auto v : z.elements()) c = checked_add(c, r.values[g.mul(2, v)]);
    return c;
}

inline double fourier_progressions(const GSet& a, const GSet& z) {
    const auto fa = dft(GFunction::indicator(a, Side::physical));
    const auto fz = dft(GFunction::indicator(dilate_set(z, 2), Side::physical));
    cplx s{};
    for (std::size_t i = 0; i < fa.size(); ++i) s += fa[i] * fa[i] * std::conj(fz[i]);
    return s.real();
}

}  // namespace detail

inline APCount count_3aps(const GSet& a) {
    const Group& g = a.group();
    detail::require_odd(g);
    APCount c;
    c.n = g.order();
    const std::uint64_t den = c.n * c.n;
    c.count = detail::progression_triples(a, a);
    c.rational = detail::reduced_fraction(c.count, den);
    c.t = static_cast<double>(c.count) / static_cast<double>(den);
    c.fourier = detail::fourier_progressions(a, a);
    c.agree = std::abs(c.fourier - c.t) <= 1e-10 &&
              (c.n > 501 || std::llround(c.fourier * static_cast<double>(den)) == c.count);
    c.trivial_only = c.count == static_cast<count_t>(a.size());
    return c;
}

/// T(A, A', A) = E_{x,y} 1_A(x) 1_A(y) 1_{2.A'}(x + y)
inline APCount count_3aps_asym(const GSet& a, const GSet& a2) {
    require_same_group(a.group(), a2.group());
    const Group& g = a.group();
    detail::require_odd(g);
    APCount c;
    c.n = g.order();
    const std::uint64_t den = c.n * c.n;
    c.count = detail::progression_triples(a, a2);
    c.rational = detail::reduced_fraction(c.count, den);
    c.t = static_cast<double>(c.count) / static_cast<double>(den);
    c.fourier = detail::fourier_progressions(a, a2);
    c.agree = std::abs(c.fourier - c.t) <= 1e-10;
    c.trivial_only = c.count == static_cast<count_t>((a & a2).size());
    return c;
}

inline json ap_count_to_json(const APCount& c) {
    return json{{"N", c.n}, {"count", c.count}, {"T", c.rational}, {"T_float", c.t}, {"fourier", c.fourier}, {"agree", c.agree},
                {"trivial_only", c.trivial_only}};
}

// ---------------------------------------------------------------------------------------------
// a single large Fourier coefficient

struct MeshulamResult {
    double alpha = 0;
    double t = 0;
    double threshold = 0;  // c alpha^3
    bool many_aps = false;
    std::optional<elem_t> gamma;
    double coefficient = 0;  // |1_A^(gamma)|
    double bound = 0;        // (1 - c) alpha^2
    bool verified = false;
    bool cube_identity = false;  // exponent-3 groups, where T(A) = sum |1_A^|^2 1_A^
};

/**
 * If T(A) <= c alpha^3, returns the nonzero gamma maximizing |1_A^(gamma)|. In any odd-order group
 * |T(A) - alpha^3| <= max_{gamma != 0} |1_A^(gamma)| * alpha by Cauchy-Schwarz and Parseval, so the
 * maximum is at least (1 - c) alpha^2.
 */
inline MeshulamResult meshulam_step(const GSet& a, double c = 0.5) {
    const Group& g = a.group();
    detail::require_odd(g);
    if (a.empty()) throw PreconditionError("meshulam_step needs a nonempty set");
    if (!(c > 0 && c < 1)) throw PreconditionError("guard c must lie in (0,1)");
    MeshulamResult r;
    r.alpha = a.density();
    r.t = count_3aps(a).t;
    r.threshold = c * r.alpha * r.alpha * r.alpha;
    r.bound = (1 - c) * r.alpha * r.alpha;
    r.cube_identity = g.exponent() == 3;
    if (r.t > r.threshold) {
        r.many_aps = true;
        r.verified = true;
        return r;
    }
    const auto fa = dft(GFunction::indicator(a, Side::physical));
    for (elem_t gam = 1; gam < g.order(); ++gam) {
        const double m = std::abs(fa[gam]);
        if (m > r.coefficient + 1e-15) {
            r.coefficient = m;
            r.gamma = gam;
        }
    }
    r.verified = r.gamma.has_value() && r.coefficient >= r.bound - 1e-12;
    return r;
}

inline json meshulam_to_json(const MeshulamResult& r) {
    json j{{"alpha", r.alpha}, {"T", r.t}, {"threshold", r.threshold}, {"many_aps", r.many_aps}, {"bound", r.bound},
           {"verified", r.verified}, {"cube_identity", r.cube_identity}};
    if (r.gamma) {
        j["gamma"] = *r.gamma;
        j["coefficient"] = r.coefficient;
    }
    return j;
}

// ---------------------------------------------------------------------------------------------
// density increments

/** @brief an increment of strength [delta, d'; C] relative to B', every flag recomputed */
struct IncrementCertificate {
    double delta = 0;
    double dprime = 0;
    double C = 8;
    std::size_t d = 0;  // rk(B')
    std::size_t bprime_size = 0;
    BohrSet b2;         // B''
    elem_t x = 0;       // translate: |A ∩ (x + B'')| is maximal
    count_t hits = 0;   // |A ∩ (x + B'')|
    double alpha = 0;
    double alpha_new = 0;
    double log_size_margin = 0;  // log|B''| - log of the size requirement
    bool rank_ok = false;
    bool size_ok = false;
    bool density_ok = false;
    bool regular = false;
    bool inside = false;  // B'' ⊆ B'

    bool valid() const { return rank_ok && size_ok && density_ok && regular && inside; }
};

namespace detail {

/// |A ∩ (x + S)| for every x, exact integers from a rounded FFT convolution
inline std::vector<count_t> translate_counts(const GSet& a, const GSet& s) {
    const auto conv = convolve(GFunction::indicator(a, Side::physical), GFunction::indicator(negate(s), Side::physical));
    const double n = static_cast<double>(a.group().order());
    std::vector<count_t> out(conv.size());
    for (std::size_t i = 0; i < conv.size(); ++i) out[i] = std::llround(conv[i].real() * n);
    return out;
}

inline count_t direct_hits(const GSet& a, const GSet& s, elem_t x) {
    const Group& g = a.group();
    count_t c = 0;
    for (auto v : a.elements())
        if (s.contains(g.sub(v, x))) ++c;
    return c;
}

}  // namespace detail

/// best translate of A on B'' and the definition's three conditions, relative to B'
inline IncrementCertificate assess_increment(const GSet& a, double alpha, const BohrSet& bprime, const BohrSet& b2, double delta,
                                             double dprime, double C) {
    IncrementCertificate c;
    c.delta = delta;
    c.dprime = dprime;
    c.C = C;
    c.d = bprime.rank();
    c.bprime_size = bprime.size();
    c.b2 = b2;
    c.alpha = alpha;
    if (b2.size() == 0) return c;
    const auto counts = detail::translate_counts(a, b2.realized);
    c.x = 0;
    for (elem_t x = 1; x < counts.size(); ++x)
        if (counts[x] > counts[c.x]) c.x = x;
    c.hits = detail::direct_hits(a, b2.realized, c.x);
    c.alpha_new = static_cast<double>(c.hits) / static_cast<double>(b2.size());
    const double d = static_cast<double>(c.d);
    c.rank_ok = static_cast<double>(b2.rank()) <= d + C * dprime + 1e-12;
    const double need_log = std::log(static_cast<double>(bprime.size())) - C * (d + dprime) * std::log(2 * d * (dprime + 1));
    c.log_size_margin = std::log(static_cast<double>(b2.size())) - need_log;
    c.size_ok = c.log_size_margin >= -1e-12;
    c.density_ok = c.alpha_new >= (1 + delta / C) * alpha * (1 - 1e-12);
    c.regular = is_regular(b2).pass;
    c.inside = b2.realized.subset_of(bprime.realized);
    return c;
}

/// recomputes every flag from scratch with a direct recount at the stored translate
inline IncrementCertificate verify_increment(const IncrementCertificate& cert, const GSet& a, const GSet& b, const BohrSet& bprime) {
    if (!a.subset_of(b)) throw PreconditionError("A must lie inside B");
    const BohrSet rebuilt = bohr_build(cert.b2.group, cert.b2.frequencies, cert.b2.widths, cert.b2.rho);
    IncrementCertificate c = cert;
    c.b2 = rebuilt;
    c.alpha = static_cast<double>(a.size()) / static_cast<double>(b.size());
    c.hits = detail::direct_hits(a, rebuilt.realized, cert.x);
    c.alpha_new = rebuilt.size() ? static_cast<double>(c.hits) / static_cast<double>(rebuilt.size()) : 0.0;
    c.d = bprime.rank();
    c.bprime_size = bprime.size();
    const double d = static_cast<double>(c.d);
    c.rank_ok = static_cast<double>(rebuilt.rank()) <= d + c.C * c.dprime + 1e-12;
    const double need_log = std::log(static_cast<double>(bprime.size())) - c.C * (d + c.dprime) * std::log(2 * d * (c.dprime + 1));
    c.log_size_margin = rebuilt.size() ? std::log(static_cast<double>(rebuilt.size())) - need_log : -INFINITY;
    c.size_ok = c.log_size_margin >= -1e-12;
    c.density_ok = c.alpha_new >= (1 + c.delta / c.C) * c.alpha * (1 - 1e-12);
    c.regular = rebuilt.size() > 0 && is_regular(rebuilt).pass;
    c.inside = rebuilt.realized.subset_of(bprime.realized);
    return c;
}

inline json bohr_to_json(const BohrSet& b) {
    return json{{"factors", b.group.factors()}, {"frequencies", b.frequencies}, {"widths", b.widths}, {"rho", b.rho}, {"size", b.size()}};
}

inline BohrSet bohr_from_json(const json& j) {
    const Group g = group_from_json(j);
    for (const char* key : {"frequencies", "widths", "rho"})
        if (!j.contains(key)) throw SchemaError(std::string("Bohr JSON needs '") + key + "'");
    return bohr_build(g, j["frequencies"].get<std::vector<elem_t>>(), j["widths"].get<std::vector<double>>(), j["rho"].get<double>());
}

inline json increment_to_json(const IncrementCertificate& c) {
    return json{{"delta", c.delta},       {"dprime", c.dprime},       {"C", c.C},
                {"d", c.d},               {"bprime_size", c.bprime_size}, {"B2", bohr_to_json(c.b2)},
                {"x", c.x},               {"hits", c.hits},           {"alpha", c.alpha},
                {"alpha_new", c.alpha_new}, {"log_size_margin", c.log_size_margin},
                {"rank_ok", c.rank_ok},   {"size_ok", c.size_ok},     {"density_ok", c.density_ok},
                {"regular", c.regular},   {"inside", c.inside},       {"valid", c.valid()}};
}

/// smallest rho with B' ⊆ B_rho, relative to B's own dilation
inline double containing_dilate(const BohrSet& b, const GSet& bprime) {
    double r = 0;
    for (auto x : bprime.elements()) r = std::max(r, b.profile->req[x] / b.rho);
    return r;
}

// ---------------------------------------------------------------------------------------------
// L2 increment from Fourier mass on a covered set

struct L2IncrementOptions {
    std::vector<double> kappas{0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
};

struct L2IncrementResult {
    IncrementCertificate cert;
    double mass = 0;         // sum_{gamma in Delta} |Delta(A;B)^(gamma)|^2
    double mass_needed = 0;  // delta / mu(B)
    std::vector<elem_t> lambda;
    std::size_t D = 0;
    double rho_needed = 0;   // B' ⊆ B_rho
    double rho_ratio = 0;    // rho d / (delta alpha), the lemma wants this below a small constant
    double kappa = 0;
    bool b_regular = false;
    bool found = false;
    double best_density = 0;
};

inline constexpr double kL2IncrementC = 8;

/**
 * @brief B'' = Bohr(Γ ∪ Λ) with widths κν' on Γ and κ/D on Λ, where Λ covers Δ by Δ_{1/2}(B')
 *
 * κ runs over a decreasing grid and each candidate is regularized; the first B'' on which some
 * translate of A reaches density (1 + δ/8)α is certified. Otherwise the best attempt is returned
 * with found = false.
 */
inline L2IncrementResult l2_increment(const GSet& a, const BohrSet& b, const GSet& delta, const BohrSet& bprime, double dlt,
                                      const L2IncrementOptions& opt = {}) {
    const Group& g = b.group;
    require_same_group(g, a.group());
    require_same_group(g, delta.group());
    if (!a.subset_of(b.realized)) throw PreconditionError("A must lie inside B");
    if (a.empty()) throw PreconditionError("A must be nonempty");
    if (!(dlt > 0)) throw PreconditionError("delta must be positive");
    L2IncrementResult r;
    const double n = static_cast<double>(g.order());
    const double alpha = static_cast<double>(a.size()) / static_cast<double>(b.size());
    const auto bal = dft(balanced_function(a, b.realized));
    for (auto gam : delta.elements()) r.mass += std::norm(bal[gam]);
    r.mass_needed = dlt * n / static_cast<double>(b.size());
    if (r.mass < r.mass_needed * (1 - 1e-12))
        throw HypothesisError("Fourier mass on Delta is below delta/mu(B): " + std::to_string(r.mass) + " < " + std::to_string(r.mass_needed));
    r.b_regular = is_regular(b).pass;
    r.rho_needed = containing_dilate(b, bprime.realized);
    r.rho_ratio = r.rho_needed * static_cast<double>(b.rank()) / (dlt * alpha);

    const GSet half_spec = spectrum(uniform_measure(bprime.realized), 0.5).members;
    const auto cover = covering_from_dimension(delta, half_spec);
    r.lambda = cover.lambda;
    r.D = r.lambda.size();
    const double D = static_cast<double>(std::max<std::size_t>(r.D, 1));

    bool have = false;
    for (double kappa : opt.kappas) {
        std::vector<elem_t> freqs;
        std::vector<double> widths;
        for (std::size_t i = 0; i < bprime.rank(); ++i) {
            freqs.push_back(bprime.frequencies[i]);
            widths.push_back(std::min(2.0, kappa * bprime.effective_width(i)));
        }
        for (auto lam : r.lambda) {
            auto it = std::find(freqs.begin(), freqs.end(), lam);
            if (it != freqs.end()) {
                auto& w = widths[static_cast<std::size_t>(it - freqs.begin())];
                w = std::min(w, kappa / D);
            } else {
                freqs.push_back(lam);
                widths.push_back(kappa / D);
            }
        }
        BohrSet b2;
        double rel = 1;
        try {
            const BohrSet raw = bohr_build(g, freqs, widths);
            rel = find_regular_dilate(raw);
            b2 = dilate(raw, rel);
        } catch (const CapError&) {
            continue;
        }
        if (b2.size() == 0) continue;
        auto cert = assess_increment(a, alpha, bprime, b2, dlt, static_cast<double>(r.D), kL2IncrementC);
        if (!have || cert.alpha_new > r.best_density) {
            r.best_density = cert.alpha_new;
            if (!r.found) {
                r.cert = cert;
                r.kappa = kappa * rel;
            }
            have = true;
        }
        if (cert.valid()) {
            r.cert = cert;
            r.kappa = kappa * rel;
            r.found = true;
            break;
        }
    }
    if (!have) throw CapError("no regular B'' on the kappa grid");
    return r;
}

// ---------------------------------------------------------------------------------------------
// physical L^{2m} routing quantity

struct L2mReport {
    unsigned m = 1;
    double value = 0;  // ||Delta(A;B) o Delta(A;B)||_{2m(mu_B' o mu_B')} * mu(B)
    double K = 10;
    bool crosses = false;
};

inline L2mReport l2m_hypothesis(const GSet& a, const GSet& b, const GSet& bprime, unsigned m, double K = 10) {
    if (m < 1) throw PreconditionError("m must be at least 1");
    L2mReport r;
    r.m = m;
    r.K = K;
    const auto bal = balanced_function(a, b);
    const auto f = cross_correlate(bal, bal);
    const auto mu = uniform_measure(bprime);
    const auto w = cross_correlate(mu, mu);
    r.value = weighted_lp_norm(f, w, 2.0 * m) * b.density();
    if (a == b) r.value = 0;
    r.crosses = r.value >= K;
    return r;
}

// ---------------------------------------------------------------------------------------------
// two scales

struct TwoScaleResult {
    bool split = false;
    elem_t x = 0;
    double d1 = 0, d2 = 0;  // 1_A * mu_B'(x), 1_A * mu_B''(x)
    std::optional<IncrementCertificate> cert;
    std::string which;       // "B'" or "B''" for the increment branch
    double rho_needed = 0;
    double rho_ratio = 0;    // rho d / (alpha epsilon)
    double best1 = 0, best2 = 0;
};

inline constexpr double kTwoScaleC = 2;

/**
 * Either some x in B has 1_A * mu_B'(x) and 1_A * mu_B''(x) both at least (1 - ε)α (the smallest such
 * x is returned) or a translate of A has density (1 + ε/2)α on B' or on B''.
 */
inline TwoScaleResult two_scale_split(const GSet& a, const BohrSet& b, const BohrSet& b1, const BohrSet& b2, double eps) {
    if (!a.subset_of(b.realized)) throw PreconditionError("A must lie inside B");
    if (a.empty()) throw PreconditionError("A must be nonempty");
    if (!(eps > 0 && eps < 1)) throw PreconditionError("epsilon must lie in (0,1)");
    TwoScaleResult r;
    const double alpha = static_cast<double>(a.size()) / static_cast<double>(b.size());
    r.rho_needed = std::max(containing_dilate(b, b1.realized), containing_dilate(b, b2.realized));
    r.rho_ratio = r.rho_needed * static_cast<double>(b.rank()) / (alpha * eps);
    const auto c1 = detail::translate_counts(a, b1.realized);
    const auto c2 = detail::translate_counts(a, b2.realized);
    const double s1 = static_cast<double>(b1.size()), s2 = static_cast<double>(b2.size());
    for (elem_t x = 0; x < c1.size(); ++x) {
        r.best1 = std::max(r.best1, static_cast<double>(c1[x]) / s1);
        r.best2 = std::max(r.best2, static_cast<double>(c2[x]) / s2);
    }
    for (auto x : b.realized.elements()) {
        const double v1 = static_cast<double>(c1[x]) / s1, v2 = static_cast<double>(c2[x]) / s2;
        if (v1 >= (1 - eps) * alpha * (1 - 1e-12) && v2 >= (1 - eps) * alpha * (1 - 1e-12)) {
            r.split = true;
            r.x = x;
            r.d1 = v1;
            r.d2 = v2;
            return r;
        }
    }
    for (int which = 0; which < 2; ++which) {
        const BohrSet& target = which == 0 ? b1 : b2;
        auto cert = assess_increment(a, alpha, target, target, eps, 0, kTwoScaleC);
        if (cert.density_ok) {
            r.cert = cert;
            r.which = which == 0 ? "B'" : "B''";
            return r;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------------------------
// iteration driver

struct DriverConfig {
    double C = 8;               // each accepted step has alpha_{i+1} >= (1 + 1/C) alpha_i
    double many_aps = 0.5;      // stop when the non-trivial 3-AP count reaches many_aps * alpha^3 |B|^2
    std::vector<double> rhos{0.25, 0.0625, 0.015625};
    std::size_t top_k = 4;      // Delta ranges over the k largest coefficients, k = 1..top_k
    std::size_t min_bohr = 9;
    std::uint64_t max_order = 10000;
};

struct DriverStep {
    std::string route;  // "l2" or "two_scale"
    IncrementCertificate cert;
    GSet a;             // A_{i+1} = (A_i - x) ∩ B''
    double alpha = 0;
};

struct DriverTrace {
    GSet a0;
    double alpha0 = 0;
    double C = 8;
    std::vector<DriverStep> steps;
    std::string stop_reason;
    count_t terminal_count = 0;  // 3-AP triples in the final set
    count_t initial_count = 0;
    std::size_t length_bound = 0;
    bool valid = true;
    std::string diagnostic;
};

namespace detail {

inline std::size_t chain_length_bound(double alpha, double C) {
    return static_cast<std::size_t>(std::ceil(std::log(1 / alpha) / std::log(1 + 1 / C) - 1e-12));
}

inline std::optional<DriverStep> driver_attempt(const GSet& a, const BohrSet& b, const DriverConfig& cfg) {
    const double alpha = static_cast<double>(a.size()) / static_cast<double>(b.size());
    const double n = static_cast<double>(b.group.order());
    const auto bal = dft(balanced_function(a, b.realized));
    std::vector<elem_t> order(bal.size());
    for (elem_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](elem_t x, elem_t y) { return std::norm(bal[x]) > std::norm(bal[y]); });
    for (double rho : cfg.rhos) {
        BohrSet bprime;
        try {
            bprime = regularize(dilate(b, rho));
        } catch (const CapError&) {
            continue;
        }
        if (bprime.size() < cfg.min_bohr) continue;
        for (std::size_t k = 1; k <= cfg.top_k && k <= order.size(); ++k) {
            GSet delta(b.group);
            double mass = 0;
            for (std::size_t i = 0; i < k; ++i) {
                delta.insert(order[i]);
                mass += std::norm(bal[order[i]]);
            }
            if (mass <= 0) break;
            const double dlt = mass * static_cast<double>(b.size()) / n * (1 - 1e-9);
            try {
                auto res = l2_increment(a, b, delta, bprime, dlt);
                auto cert = assess_increment(a, alpha, bprime, res.cert.b2, 1.0, static_cast<double>(res.D), cfg.C);
                if (cert.valid() && cert.b2.size() >= cfg.min_bohr) {
                    DriverStep s;
                    s.route = "l2";
                    s.cert = cert;
                    return s;
                }
            } catch (const Error&) {
            }
        }
        // two nested dilates of B'
        try {
            BohrSet b2 = regularize(dilate(bprime, 0.5));
            auto ts = two_scale_split(a, b, bprime, b2, 0.5);
            if (ts.cert) {
                const BohrSet& target = ts.which == "B'" ? bprime : b2;
                auto cert = assess_increment(a, alpha, target, target, 1.0, 0, cfg.C);
                if (cert.valid() && cert.b2.size() >= cfg.min_bohr) {
                    DriverStep s;
                    s.route = "two_scale";
                    s.cert = cert;
                    return s;
                }
            }
        } catch (const CapError&) {
        }
    }
    return std::nullopt;
}

}  // namespace detail

/**
 * @brief density increment iteration from B_0 = G
 *
 * Each step either stops (many 3-APs relative to B_i, or no increment found) or certifies a
 * regular B'' and a translate x with |(A_i - x) ∩ B''| >= (1 + 1/C) alpha_i |B''|, and continues
 * with A_{i+1} = (A_i - x) ∩ B''. Since A_{i+1} + x ⊆ A_i, T(A) >= T(A_l) as triple counts.
 */
inline DriverTrace increment_driver(const GSet& a, const DriverConfig& cfg = {}) {
    const Group& g = a.group();
    detail::require_odd(g);
    if (g.order() > cfg.max_order) throw CapError("increment_driver is capped at group order " + std::to_string(cfg.max_order));
    if (a.empty()) throw PreconditionError("A must be nonempty");
    DriverTrace tr;
    tr.a0 = a;
    tr.C = cfg.C;
    tr.alpha0 = a.density();
    tr.length_bound = detail::chain_length_bound(tr.alpha0, cfg.C);
    tr.initial_count = detail::progression_triples(a, a);
    BohrSet b = whole_group_bohr(g);
    GSet cur = a;
    while (true) {
        const double alpha = static_cast<double>(cur.size()) / static_cast<double>(b.size());
        const count_t c3 = detail::progression_triples(cur, cur);
        const double bs = static_cast<double>(b.size());
        // trivial triples x = y = z are excluded: at low density they alone exceed the threshold
        if (static_cast<double>(c3 - static_cast<count_t>(cur.size())) >= cfg.many_aps * alpha * alpha * alpha * bs * bs) {
            tr.stop_reason = "many APs";
            break;
        }
        if (tr.steps.size() >= tr.length_bound) {
            tr.stop_reason = "length bound reached";
            break;
        }
        auto step = detail::driver_attempt(cur, b, cfg);
        if (!step) {
            tr.stop_reason = "no verified increment";
            break;
        }
        GSet next(g);
        for (auto v : cur.elements()) {
            const elem_t y = g.sub(v, step->cert.x);
            if (step->cert.b2.contains(y)) next.insert(y);
        }
        step->a = next;
        step->alpha = step->cert.alpha_new;
        b = step->cert.b2;
        cur = next;
        tr.steps.push_back(std::move(*step));
    }
    tr.terminal_count = detail::progression_triples(cur, cur);
    return tr;
}

/// replays a trace from A alone: rebuilds every B'', recounts every translate and checks nesting
inline bool verify_trace(DriverTrace& tr, std::string* why = nullptr) {
    auto fail = [&](const std::string& w) {
        tr.valid = false;
        tr.diagnostic = w;
        if (why) *why = w;
        return false;
    };
    const Group& g = tr.a0.group();
    BohrSet b = whole_group_bohr(g);
    GSet cur = tr.a0;
    if (tr.steps.size() > detail::chain_length_bound(cur.density(), tr.C)) return fail("chain longer than the length bound");
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        const auto& s = tr.steps[i];
        const std::string at = "step " + std::to_string(i) + ": ";
        const BohrSet b2 = bohr_build(g, s.cert.b2.frequencies, s.cert.b2.widths, s.cert.b2.rho);
        if (!b2.realized.subset_of(b.realized)) return fail(at + "B'' is not inside the current Bohr set");
        if (!is_regular(b2).pass) return fail(at + "B'' is not regular");
        const double alpha = static_cast<double>(cur.size()) / static_cast<double>(b.size());
        GSet next(g);
        for (auto v : cur.elements()) {
            const elem_t y = g.sub(v, s.cert.x);
            if (b2.contains(y)) next.insert(y);
        }
        if (next != s.a) return fail(at + "stored set differs from (A_i - x) ∩ B''");
        const double alpha_new = static_cast<double>(next.size()) / static_cast<double>(b2.size());
        if (alpha_new < (1 + 1 / tr.C) * alpha * (1 - 1e-12)) return fail(at + "density did not grow by the factor 1 + 1/C");
        b = b2;
        cur = next;
    }
    if (detail::progression_triples(cur, cur) != tr.terminal_count) return fail("terminal count mismatch");
    if (detail::progression_triples(tr.a0, tr.a0) < tr.terminal_count) return fail("T(A) < T(A_l)");
    tr.valid = true;
    tr.diagnostic.clear();
    return true;
}

inline json trace_to_json(const DriverTrace& tr) {
    json steps = json::array();
    for (const auto& s : tr.steps)
        steps.push_back(json{{"route", s.route}, {"certificate", increment_to_json(s.cert)}, {"A", s.a.elements()}, {"alpha", s.alpha}});
    return json{{"factors", tr.a0.group().factors()},
                {"A", tr.a0.elements()},
                {"alpha0", tr.alpha0},
                {"C", tr.C},
                {"steps", steps},
                {"stop_reason", tr.stop_reason},
                {"initial_count", tr.initial_count},
                {"terminal_count", tr.terminal_count},
                {"length_bound", tr.length_bound},
                {"valid", tr.valid}};
}

inline DriverTrace trace_from_json(const json& j) {
    const Group g = group_from_json(j);
    for (const char* key : {"A", "C", "steps", "terminal_count"})
        if (!j.contains(key)) throw SchemaError(std::string("trace JSON needs '") + key + "'");
    DriverTrace tr;
    tr.a0 = set_from_json_in(g, j["A"]);
    tr.alpha0 = tr.a0.density();
    tr.C = j["C"].get<double>();
    tr.stop_reason = j.value("stop_reason", "");
    tr.terminal_count = j["terminal_count"].get<count_t>();
    tr.initial_count = j.value("initial_count", count_t{0});
    tr.length_bound = detail::chain_length_bound(tr.alpha0, tr.C);
    for (const auto& s : j["steps"]) {
        DriverStep st;
        st.route = s.value("route", "");
        const auto& c = s.at("certificate");
        st.cert.b2 = bohr_from_json(c.at("B2"));
        st.cert.x = c.at("x").get<elem_t>();
        st.cert.delta = c.value("delta", 1.0);
        st.cert.dprime = c.value("dprime", 0.0);
        st.cert.C = c.value("C", tr.C);
        st.a = set_from_json_in(g, s.at("A"));
        st.alpha = s.value("alpha", 0.0);
        tr.steps.push_back(std::move(st));
    }
    return tr;
}

// ---------------------------------------------------------------------------------------------
// spectral boosting in F_p^n

namespace detail {

inline void require_model_group(const Group& g) {
    const auto& f = g.factors();
    if (f.empty() || (f[0] != 2 && f[0] != 3) || std::any_of(f.begin(), f.end(), [&](auto p) { return p != f[0]; }))
        throw PreconditionError("model boosting works in F_2^n or F_3^n");
    if (g.rank() > 12) throw CapError("model boosting is capped at n = 12");
}

/// mu_A o mu_A(x) = N r(x) / |A|^2 with r(x) = #{(a, a') : a - a' = x}
inline std::vector<double> self_correlation_measure(const GSet& a) {
    using CF = CountFunction<count_t>;
    const auto r = correlate_counts(CF::indicator(a), CF::indicator(a));
    const double n = static_cast<double>(a.group().order()), sz = static_cast<double>(a.size());
    std::vector<double> out(r.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = n * static_cast<double>(r.values[i]) / (sz * sz);
    return out;
}

/// |check 1_H|^2 with check 1_H(x) = sum_{gamma in H} gamma(x)
inline std::vector<double> dual_kernel(const GSet& h) {
    const auto w = inverse_dft(GFunction::indicator(h, Side::dual));
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(w[i]);
    return out;
}

inline std::vector<elem_t> linear_basis(const Group& g, const std::vector<elem_t>& els, std::vector<elem_t> start = {}) {
    GSet span = generated_subgroup(g, start);
    for (auto x : els)
        if (!span.contains(x)) {
            start.push_back(x);
            span = generated_subgroup(g, start);
        }
    return start;
}

/// max over cosets y + W of |A ∩ (y + W)|, where W is cut out by the characters in perp
inline std::size_t best_coset_hits(const GSet& a, const std::vector<elem_t>& perp, std::size_t* label_out = nullptr,
                                   std::uint64_t* best_label = nullptr) {
    const Group& g = a.group();
    std::unordered_map<std::uint64_t, std::size_t> buckets;
    const std::uint64_t L = g.exponent();
    std::size_t best = 0;
    std::uint64_t arg = 0;
    for (auto x : a.elements()) {
        std::uint64_t label = 0;
        for (auto chi : perp) label = label * L + g.phase(chi, x);
        const std::size_t c = ++buckets[label];
        if (c > best || (c == best && label < arg)) {
            best = c;
            arg = label;
        }
    }
    if (label_out) *label_out = buckets.size();
    if (best_label) *best_label = arg;
    return best;
}

}  // namespace detail

struct BoostDiscrepancyReport {
    double lhs = 0;          // <|mu_A o mu_A - 1|, |check 1_H|^2>
    double rhs = 0;          // (K^-1 kappa^-1 eta^2 alpha^{1/2})^{1/(m-1)} K^-1 kappa^-1 eta^2 |H|^2
    double limit = 0;        // the m -> infinity value K^-1 kappa^-1 eta^2 |H|^2
    double ratio = 0;        // lhs / rhs
    bool holds = false;
    BigInt energy;           // E_{2m}(X)
    double energy_cap = 0;   // (kappa |X|)^{2m}
    count_t overlap = 0;     // <1_X o 1_X, 1_H o 1_H>
};

inline double boost_rhs(double alpha, double eta, double kappa, double K, unsigned m, double h) {
    const double base = eta * eta / (K * kappa);
    return std::pow(base * std::sqrt(alpha), 1.0 / (m - 1.0)) * base * h * h;
}

inline BoostDiscrepancyReport model_boost_discrepancy(const GSet& a, const GSet& x, const GSet& h, double eta, double kappa, double K,
                                                      unsigned m) {
    using CF = CountFunction<count_t>;
    const Group& g = a.group();
    detail::require_model_group(g);
    require_same_group(g, x.group());
    require_same_group(g, h.group());
    if (m < 2 || K < 2 || !(kappa > 0 && kappa <= 1) || !(eta > 0 && eta <= 1)) throw PreconditionError("needs m, K >= 2 and kappa, eta in (0,1]");
    if (a.empty() || x.empty() || h.empty()) throw PreconditionError("A, X and H must be nonempty");
    const double alpha = a.density();
    const GSet spec = set_spectrum(a, eta).members;
    if (x.contains(0) || !x.subset_of(spec)) throw HypothesisError("X must lie in the eta-spectrum of A minus {0}");
    BoostDiscrepancyReport r;
    r.energy = energy(x, GSet::from_elements(g, {0}), m).exact;
    const double xs = static_cast<double>(x.size());
    r.energy_cap = std::pow(kappa * xs, 2.0 * m);
    if (r.energy.convert_to<double>() > r.energy_cap * (1 + 1e-12)) throw HypothesisError("E_2m(X) exceeds (kappa |X|)^{2m}");
    r.overlap = inner_counts(correlate_counts(CF::indicator(x), CF::indicator(x)), correlate_counts(CF::indicator(h), CF::indicator(h)));
    const double hs = static_cast<double>(h.size());
    if (static_cast<double>(r.overlap) < xs * hs * hs / K * (1 - 1e-12)) throw HypothesisError("<1_X o 1_X, 1_H o 1_H> is below |X||H|^2 / K");
    const auto f = detail::self_correlation_measure(a);
    const auto ker = detail::dual_kernel(h);
    for (std::size_t i = 0; i < f.size(); ++i) r.lhs += std::abs(f[i] - 1) * ker[i];
    r.lhs /= static_cast<double>(g.order());
    r.rhs = boost_rhs(alpha, eta, kappa, K, m, hs);
    r.limit = eta * eta / (K * kappa) * hs * hs;
    r.ratio = r.lhs / r.rhs;
    r.holds = r.lhs >= r.rhs * (1 - 1e-12);
    return r;
}

struct BoostCheck {
    std::string name;
    double lhs = 0;
    double rhs = 0;
    bool pass = false;
};

struct BoostIncrementReport {
    std::vector<BoostCheck> checks;
    std::optional<std::string> first_failure;
    GSet v;                          // annihilator of H
    std::optional<GSet> w;
    std::size_t codim_in_v = 0;
    double density = 0;              // max_x 1_A * mu_W(x)
    double threshold = 0;            // (1 + 2^-6 delta) alpha
    std::size_t subspaces_checked = 0;
    bool found = false;
};

struct BoostIncrementOptions {
    std::size_t max_codim = 3;
    std::size_t budget = 20000;
};

/**
 * @brief the model boosting pipeline with every displayed inequality evaluated
 *
 * Hypotheses: <|f|, |check 1_H|^2> >= delta |H| and ||mu_A o mu_A||_{2m} <= K with f = mu_A o mu_A - 1.
 * Then T = {f >= delta/4}, V = H^perp, the densest V-coset of T, the coset selection Y, and finally
 * a search over W <= V of codimension at most 3 for ||1_A * mu_W||_inf >= (1 + 2^-6 delta) alpha.
 */
inline BoostIncrementReport model_boost_increment(const GSet& a, const GSet& h, double dlt, double K, unsigned m,
                                                  const BoostIncrementOptions& opt = {}) {
    const Group& g = a.group();
    detail::require_model_group(g);
    require_same_group(g, h.group());
    if (!(dlt > 0 && dlt < 1) || !(K >= 1) || m < 1) throw PreconditionError("needs delta in (0,1), K >= 1, m >= 1");
    if (a.empty()) throw PreconditionError("A must be nonempty");
    const double n = static_cast<double>(g.order());
    const double alpha = a.density();
    const double hs = static_cast<double>(h.size());
    BoostIncrementReport r;
    auto check = [&](const std::string& name, double lhs, double rhs) {
        const bool pass = lhs >= rhs * (1 - 1e-12) - 1e-15;
        r.checks.push_back({name, lhs, rhs, pass});
        if (!pass && !r.first_failure) r.first_failure = name;
        return pass;
    };

    const auto mm = detail::self_correlation_measure(a);
    const auto ker = detail::dual_kernel(h);
    double disc = 0, pos = 0, mom = 0;
    for (std::size_t i = 0; i < mm.size(); ++i) {
        const double f = mm[i] - 1;
        disc += std::abs(f) * ker[i];
        pos += std::max(f, 0.0) * ker[i];
        mom += std::pow(mm[i], 2.0 * m);
    }
    disc /= n;
    pos /= n;
    const double norm2m = std::pow(mom / n, 1.0 / (2.0 * m));
    if (disc < dlt * hs * (1 - 1e-12)) throw HypothesisError("<|mu_A o mu_A - 1|, |check 1_H|^2> is below delta |H|");
    if (norm2m > K * (1 + 1e-12)) throw HypothesisError("||mu_A o mu_A||_2m exceeds K");
    r.checks.push_back({"m_condition", static_cast<double>(m), std::log(4 * hs / (alpha * dlt)), m >= std::log(4 * hs / (alpha * dlt))});

    bool ok = check("positive_part", pos, dlt * hs / 2);
    GSet t(g);
    for (elem_t x = 0; x < mm.size(); ++x)
        if (mm[x] - 1 >= dlt / 4) t.insert(x);
    double on_t = 0, mass_t = 0;
    for (auto x : t.elements()) {
        on_t += (mm[x] - 1) * ker[x];
        mass_t += ker[x];
    }
    ok = check("large_values", on_t / n, dlt * hs / 4) && ok;
    ok = check("mass_on_T", mass_t / n, dlt * hs / (16 * K)) && ok;

    r.v = annihilator(h);
    const auto hbasis = detail::linear_basis(g, h.elements());
    const double vs = static_cast<double>(r.v.size());
    // densest V-coset of T
    std::uint64_t label = 0;
    const std::size_t t_hits = detail::best_coset_hits(t, hbasis, nullptr, &label);
    elem_t x0 = 0;
    for (auto x : t.elements()) {
        std::uint64_t l = 0;
        for (auto chi : hbasis) l = l * g.exponent() + g.phase(chi, x);
        if (l == label) {
            x0 = x;
            break;
        }
    }
    ok = check("coset_density", static_cast<double>(t_hits) / vs, dlt / (16 * K)) && ok;
    GSet tp(g);  // T' = (T - x0) ∩ V
    for (auto v : r.v.elements())
        if (t.contains(g.add(v, x0))) tp.insert(v);
    const GSet ap = translate(a, x0);  // A' = A + x0
    // <1_T' * 1_A', 1_{A_c}> as a count of (u, y) with u in T', y - u in A', y in A_c
    auto corr = [&](const GSet& target) {
        count_t c = 0;
        for (auto y : target.elements())
            for (auto u : tp.elements())
                if (ap.contains(g.sub(y, u))) ++c;
        return static_cast<double>(c);
    };
    const double mu_tp = static_cast<double>(tp.size()) / n;
    ok = check("translate_correlation", corr(a) / (n * n), (1 + dlt / 4) * alpha * alpha * mu_tp) && ok;

    // cosets of V meeting A in at least 2^-6 delta alpha^2 |V| points
    std::unordered_map<std::uint64_t, GSet> cosets;
    for (auto x : a.elements()) {
        std::uint64_t l = 0;
        for (auto chi : hbasis) l = l * g.exponent() + g.phase(chi, x);
        auto it = cosets.find(l);
        if (it == cosets.end()) it = cosets.emplace(l, GSet(g)).first;
        it->second.insert(x);
    }
    std::vector<std::uint64_t> labels;
    for (const auto& [l, s] : cosets) labels.push_back(l);
    std::sort(labels.begin(), labels.end());
    double sel = 0;
    double best_ratio = -1;
    std::uint64_t pick = 0;
    std::size_t ysize = 0;
    for (auto l : labels) {
        const GSet& part = cosets.at(l);
        if (static_cast<double>(part.size()) < std::ldexp(dlt, -6) * alpha * alpha * vs) continue;
        ++ysize;
        const double c = corr(part) / (n * n);
        sel += c;
        const double ratio = c / (static_cast<double>(part.size()) / n);
        if (ratio > best_ratio) {
            best_ratio = ratio;
            pick = l;
        }
    }
    ok = check("coset_selection", sel, (1 + std::ldexp(dlt, -4)) * alpha * alpha * mu_tp) && ok;
    if (ysize > 0) {
        const GSet& part = cosets.at(pick);
        // A''' = A' ∩ (V + y)
        std::size_t a3 = 0;
        const elem_t y0 = part.elements().front();
        for (auto v : r.v.elements())
            if (ap.contains(g.add(y0, v))) ++a3;
        ok = check("coset_pick", best_ratio, (1 + std::ldexp(dlt, -5)) * alpha * mu_tp) && ok;
        ok = check("dense_translate", static_cast<double>(a3), (1 + std::ldexp(dlt, -5)) * alpha * static_cast<double>(tp.size())) && ok;
    } else {
        ok = check("coset_pick", 0, 1) && ok;
    }
    r.threshold = (1 + std::ldexp(dlt, -6)) * alpha;
    if (!ok) return r;

    // bounded replacement for the almost-periodicity step: W <= V of codimension <= max_codim
    std::vector<elem_t> reps;  // characters giving distinct hyperplanes of V
    {
        std::set<std::vector<std::uint64_t>> seen;
        for (elem_t chi = 1; chi < g.order(); ++chi) {
            auto b = hbasis;
            b.push_back(chi);
            const GSet span = generated_subgroup(g, b);
            if (span.size() == generated_subgroup(g, hbasis).size()) continue;
            if (seen.insert(span.words()).second) reps.push_back(chi);
        }
    }
    std::set<std::vector<std::uint64_t>> tried;
    std::function<bool(std::size_t, std::vector<elem_t>&, std::size_t)> search = [&](std::size_t from, std::vector<elem_t>& extra,
                                                                                     std::size_t codim) -> bool {
        if (extra.size() == codim) {
            auto perp = hbasis;
            perp.insert(perp.end(), extra.begin(), extra.end());
            const GSet span = generated_subgroup(g, perp);
            if (detail::linear_basis(g, perp).size() != perp.size()) return false;
            if (!tried.insert(span.words()).second) return false;
            if (++r.subspaces_checked > opt.budget) throw CapError("subspace search exceeded its budget");
            const double ws = n / static_cast<double>(span.size());
            const double dens = static_cast<double>(detail::best_coset_hits(a, perp)) / ws;
            if (dens >= r.threshold * (1 - 1e-12)) {
                r.w = annihilator(span);
                r.codim_in_v = codim;
                r.density = dens;
                return true;
            }
            r.density = std::max(r.density, dens);
            return false;
        }
        for (std::size_t i = from; i < reps.size(); ++i) {
            extra.push_back(reps[i]);
            if (search(i + 1, extra, codim)) return true;
            extra.pop_back();
        }
        return false;
    };
    for (std::size_t c = 0; c <= opt.max_codim; ++c) {
        std::vector<elem_t> extra;
        if (search(0, extra, c)) {
            r.found = true;
            break;
        }
    }
    if (!r.found && !r.first_failure) r.first_failure = "subspace_search";
    return r;
}

}  // namespace actk
