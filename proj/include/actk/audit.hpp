#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <mutex>
#include <thread>

#include "actk/bohr.hpp"
#include "actk/extremal.hpp"
#include "actk/framework.hpp"
#include "actk/increment.hpp"
#include "actk/io.hpp"
#include "actk/spectral.hpp"

namespace actk {

// Registry of measured inequalities. Certified entries carry an explicit constant and must hold
// whenever their hypotheses do; ratio-only entries report LHS/RHS with the unpinned constant set to 1.

struct AuditCheck {
    std::string name;
    bool exact = true;  // decided by exact arithmetic or enumeration rather than a float comparison
    bool pass = true;
    double value = 0;
    double bound = 0;
};

struct AuditEntry {
    std::string lemma;
    bool certified = false;
    std::vector<AuditCheck> hypotheses;
    double lhs = 0;
    std::optional<double> rhs;  // empty means ratio-only
    std::string relation;       // "<=" or ">=" read as lhs REL rhs
    double constant = 1;        // the instantiated constant inside rhs
    double ratio = 0;           // lhs / rhs, or the measured constant for ratio-only entries
    std::string verdict;        // holds | fails | holds-with-ratio | hypothesis-unmet
    json detail = json::object();
};

inline json audit_to_json(const AuditEntry& e) {
    json hyps = json::array();
    for (const auto& h : e.hypotheses)
        hyps.push_back({{"name", h.name}, {"exact", h.exact}, {"pass", h.pass}, {"value", h.value}, {"bound", h.bound}});
    json j{{"lemma", e.lemma},       {"tier", e.certified ? "certified" : "ratio-only"},
           {"hypotheses", hyps},     {"lhs", e.lhs},
           {"relation", e.relation}, {"constant", e.constant},
           {"ratio", e.ratio},       {"verdict", e.verdict},
           {"detail", e.detail}};
    j["rhs"] = e.rhs ? json(*e.rhs) : json("ratio-only");
    return j;
}

namespace detail {

inline constexpr double kAuditTol = 1e-12;

/// an instance: {"factors": [...], ...}; sets are index lists or base64 bitmaps
struct Instance {
    const json& j;
    Group g;

    explicit Instance(const json& in) : j(in), g(group_from_json(in)) {}

    const json& at(const char* key) const {
        if (!j.contains(key)) throw SchemaError(std::string("instance needs '") + key + "'");
        return j.at(key);
    }
    bool has(const char* key) const { return j.contains(key); }
    GSet set(const char* key) const { return set_from_json_in(g, at(key)); }
    double num(const char* key) const {
        const auto& v = at(key);
        if (!v.is_number()) throw SchemaError(std::string("'") + key + "' must be a number");
        return v.get<double>();
    }
    unsigned uint(const char* key) const {
        const auto& v = at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw SchemaError(std::string("'") + key + "' must be a non-negative integer");
        return v.get<unsigned>();
    }
    BohrSet bohr(const char* key) const {
        json b = at(key);
        if (!b.is_object()) throw SchemaError(std::string("'") + key + "' must be a Bohr set object");
        b["factors"] = g.factors();
        if (!b.contains("rho")) b["rho"] = 1.0;
        return bohr_from_json(b);
    }
    CountFunction<count_t> counts(const char* key) const {
        CountFunction<count_t> f(g);
        for (const auto& p : at(key)) {
            if (!p.is_array() || p.size() != 2) throw SchemaError(std::string("'") + key + "' must hold [index, value] pairs");
            const auto x = p[0].get<std::int64_t>();
            const auto v = p[1].get<std::int64_t>();
            if (x < 0 || static_cast<std::uint64_t>(x) >= g.order()) throw SchemaError("count index out of range");
            if (v < 0) throw SchemaError("counts must be non-negative");
            f.values[static_cast<elem_t>(x)] = v;
        }
        return f;
    }
};

inline json bohr_spec(const BohrSet& b) { return json{{"frequencies", b.frequencies}, {"widths", b.widths}, {"rho", b.rho}}; }

inline json counts_spec(const CountFunction<count_t>& f) {
    json out = json::array();
    for (auto x : f.support()) out.push_back({x, f.values[x]});
    return out;
}

inline GFunction bohr_transform(const BohrSet& b) { return dft(uniform_measure(b.realized)); }

/// Delta_{1/2}(B) = {gamma : |mu_B^(gamma)| >= 1/2}
inline GSet half_spectrum(const BohrSet& b) { return spectrum(uniform_measure(b.realized), 0.5).members; }

inline void finish_bound(AuditEntry& e, double lhs, double rhs, const std::string& rel) {
    e.lhs = lhs;
    e.rhs = rhs;
    e.relation = rel;
    e.ratio = rhs != 0 ? lhs / rhs : std::numeric_limits<double>::infinity();
}

inline void finish_ratio(AuditEntry& e, double lhs, double rhs, const std::string& rel) {
    e.lhs = lhs;
    e.relation = rel;
    e.detail["reference"] = rhs;
    e.ratio = rhs != 0 ? lhs / rhs : std::numeric_limits<double>::infinity();
}

inline void settle(AuditEntry& e) {
    for (const auto& h : e.hypotheses)
        if (!h.pass) {
            e.verdict = "hypothesis-unmet";
            return;
        }
    if (!e.certified || !e.rhs) {
        e.verdict = "holds-with-ratio";
        return;
    }
    const double l = e.lhs, r = *e.rhs;
    const bool ok = e.relation == "<=" ? l <= r * (1 + kAuditTol) + kAuditTol : l >= r * (1 - kAuditTol) - kAuditTol;
    e.verdict = ok ? "holds" : "fails";
}

inline AuditCheck subset_check(const std::string& name, const GSet& a, const GSet& b) {
    return {name, true, a.subset_of(b), static_cast<double>(a.size()), static_cast<double>(b.size())};
}

inline double normalized_energy(const GSet& d, const CountFunction<count_t>& nu, unsigned m) {
    return energy(d, nu, m).normalized;
}

inline GSet random_set(const Group& g, double p, Rng& rng) {
    GSet a(g);
    for (elem_t x = 0; x < g.order(); ++x)
        if (rng.bernoulli(p)) a.insert(x);
    return a;
}

inline GSet random_subset(const GSet& s, std::size_t k, Rng& rng) {
    auto el = s.elements();
    rng.shuffle(el);
    el.resize(std::min(k, el.size()));
    return GSet::from_elements(s.group(), el);
}

inline GSet nonempty_random_set(const Group& g, double p, Rng& rng) {
    auto a = random_set(g, p, rng);
    if (a.empty()) a.insert(static_cast<elem_t>(rng.below(g.order())));
    return a;
}

inline BohrSet random_bohr(const Group& g, std::size_t d, Rng& rng, double lo = 0.3, double hi = 1.5) {
    std::vector<elem_t> f;
    std::vector<double> w;
    for (std::size_t i = 0; i < d; ++i) {
        f.push_back(static_cast<elem_t>(1 + rng.below(g.order() - 1)));
        w.push_back(lo + (hi - lo) * rng.uniform());
    }
    return bohr_build(g, f, w);
}

inline json base(const Group& g) { return group_to_json(g); }

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// entries

namespace audit_entries {

using detail::Instance;

/// E_{2m}(Delta) >= alpha eta^{2m} |Delta|^{2m} for Delta inside the eta-spectrum of A
inline AuditEntry shenergy(const json& j) {
    Instance in(j);
    const GSet a = in.set("A"), d = in.set("Delta");
    const double eta = in.num("eta");
    const unsigned m = in.uint("m");
    if (a.empty() || m == 0) throw SchemaError("shenergy needs nonempty A and m >= 1");
    AuditEntry e;
    e.lemma = "shenergy";
    e.certified = true;
    e.hypotheses.push_back(detail::subset_check("Delta inside the spectrum", d, set_spectrum(a, eta).members));
    e.hypotheses.push_back({"Delta nonempty", true, !d.empty(), static_cast<double>(d.size()), 1});
    const double lhs = energy(d, GSet::from_elements(in.g, {0}), m).value;
    const double n = static_cast<double>(d.size());
    detail::finish_bound(e, lhs, a.density() * std::pow(eta, 2.0 * m) * std::pow(n, 2.0 * m), ">=");
    detail::settle(e);
    return e;
}

/// e_{2n}^{m-1} <= e_2^{m-n} e_{2m}^{n-1} with nu = 1_Gamma o 1_Gamma (Gamma = {0} when absent)
inline AuditEntry energy_chain(const json& j) {
    Instance in(j);
    const GSet d = in.set("Delta");
    const GSet gam = in.has("Gamma") ? in.set("Gamma") : GSet::from_elements(in.g, {0});
    const unsigned n = in.uint("n"), m = in.uint("m");
    if (n < 1 || n > m) throw SchemaError("energy_chain needs 1 <= n <= m");
    using CF = CountFunction<count_t>;
    const auto nu = correlate_counts(CF::indicator(gam), CF::indicator(gam));
    AuditEntry e;
    e.lemma = "energy_chain";
    e.certified = true;
    e.hypotheses.push_back({"Delta nonempty", true, !d.empty(), static_cast<double>(d.size()), 1});
    e.hypotheses.push_back({"Gamma nonempty", true, !gam.empty(), static_cast<double>(gam.size()), 1});
    if (!d.empty() && !gam.empty()) {
        const double e2 = detail::normalized_energy(d, nu, 1), en = detail::normalized_energy(d, nu, n),
                     em = detail::normalized_energy(d, nu, m);
        detail::finish_bound(e, std::pow(en, m - 1.0), std::pow(e2, double(m - n)) * std::pow(em, n - 1.0), "<=");
        e.detail = {{"e2", e2}, {"e2n", en}, {"e2m", em}};
    }
    detail::settle(e);
    return e;
}

/// e_8 >= e_4^3 for the unweighted energy
inline AuditEntry e8_ge_e4cubed(const json& j) {
    Instance in(j);
    const GSet d = in.set("Delta");
    AuditEntry e;
    e.lemma = "e8_ge_e4cubed";
    e.certified = true;
    e.hypotheses.push_back({"Delta nonempty", true, !d.empty(), static_cast<double>(d.size()), 1});
    if (!d.empty()) {
        const auto zero = CountFunction<count_t>::indicator(GSet::from_elements(in.g, {0}));
        const double e4 = detail::normalized_energy(d, zero, 2), e8 = detail::normalized_energy(d, zero, 4);
        detail::finish_bound(e, e8, e4 * e4 * e4, ">=");
        e.detail = {{"e4", e4}, {"e8", e8}};
    }
    detail::settle(e);
    return e;
}

/// E_{2m}(Lambda; Gamma) <= 2^{7m} (m+1)! |Lambda|^m for Gamma-dissociated Lambda
inline AuditEntry dimenergy(const json& j) {
    Instance in(j);
    const GSet lam = in.set("Lambda"), gam = in.set("Gamma");
    const unsigned m = in.uint("m");
    if (m == 0) throw SchemaError("dimenergy needs m >= 1");
    AuditEntry e;
    e.lemma = "dimenergy";
    e.certified = true;
    const auto cert = is_dissociated(lam.elements(), gam);
    e.hypotheses.push_back({"Lambda Gamma-dissociated", cert.certified, cert.dissociated, static_cast<double>(lam.size()), 0});
    double fact = 1;
    for (unsigned i = 2; i <= m + 1; ++i) fact *= i;
    e.constant = std::pow(2.0, 7.0 * m) * fact;
    detail::finish_bound(e, energy(lam, gam, m).value, e.constant * std::pow(static_cast<double>(lam.size()), m), "<=");
    detail::settle(e);
    return e;
}

/// sum_{x in A} (f o 1_Γ)(a+x)(g o 1_Γ')(b+x) <= ((f o g) o 1_{Γ-Γ'})(a-b), exact
inline AuditEntry collapser(const json& j) {
    Instance in(j);
    const GSet a = in.set("A"), gam = in.set("Gamma"), gp = in.set("GammaP");
    const auto f = in.counts("f"), g = in.counts("g");
    const elem_t sa = in.uint("a") % in.g.order(), sb = in.uint("b") % in.g.order();
    AuditEntry e;
    e.lemma = "collapser";
    e.certified = true;
    const bool orth = is_orthogonal(a, gp).orthogonal;
    e.hypotheses.push_back({"A Gamma'-orthogonal", true, orth, static_cast<double>(a.size()), 0});
    if (orth) {
        const auto r = collapser_check(a, gam, gp, f, g, sa, sb);
        detail::finish_bound(e, static_cast<double>(r.lhs), static_cast<double>(r.rhs), "<=");
        e.detail = {{"lhs_exact", std::to_string(r.lhs)}, {"rhs_exact", std::to_string(r.rhs)}};
        e.verdict = r.holds ? "holds" : "fails";
    } else {
        detail::settle(e);
    }
    return e;
}

/// |B_rel| >= prod min(1, nu'/4nu) |B|, which contains |B_rho| >= (rho/4)^d |B|
inline AuditEntry bohrsiz(const json& j) {
    Instance in(j);
    const BohrSet b = in.bohr("B");
    const double rel = in.num("rel");
    if (!(rel > 0 && rel <= 1)) throw SchemaError("bohrsiz needs rel in (0,1]");
    AuditEntry e;
    e.lemma = "bohrsiz";
    e.certified = true;
    const BohrSet s = dilate(b, rel);
    const double factor = bohr_size_factor(b, s);
    detail::finish_bound(e, static_cast<double>(s.size()), factor * static_cast<double>(b.size()), ">=");
    e.detail = {{"size_B", b.size()}, {"size_dilate", s.size()}, {"factor", factor},
                {"power_form", std::pow(rel / 4, static_cast<double>(b.rank())) * static_cast<double>(b.size())}};
    detail::settle(e);
    return e;
}

/// ||mu_B * mu_{B_rho} - mu_B||_1 <= 200 rho d for regular B and rho <= 1/(100 d)
inline AuditEntry regconv(const json& j) {
    Instance in(j);
    const BohrSet b = in.bohr("B");
    const double rel = in.num("rel");
    if (!(rel > 0 && rel <= 1)) throw SchemaError("regconv needs rel in (0,1]");
    AuditEntry e;
    e.lemma = "regconv";
    e.certified = true;
    const double d = static_cast<double>(b.rank());
    e.hypotheses.push_back({"B regular", true, is_regular(b).pass, b.rho, 0});
    e.hypotheses.push_back({"rho <= 1/(100 d)", true, rel <= 1 / (100 * d) * (1 + 1e-12), rel, 1 / (100 * d)});
    const auto rep = reg_conv_defect(b, uniform_measure(dilate(b, rel).realized), rel);
    e.constant = 200;
    detail::finish_bound(e, rep.defect, rep.bound, "<=");
    detail::settle(e);
    return e;
}

/// |Delta_eta(A)| <= eta^-2 alpha^-1
inline AuditEntry parseval_spectrum(const json& j) {
    Instance in(j);
    const GSet a = in.set("A");
    const double eta = in.num("eta");
    if (a.empty() || !(eta > 0 && eta <= 1)) throw SchemaError("parseval_spectrum needs nonempty A and eta in (0,1]");
    AuditEntry e;
    e.lemma = "parseval_spectrum";
    e.certified = true;
    detail::finish_bound(e, static_cast<double>(set_spectrum(a, eta).members.size()), 1 / (eta * eta * a.density()), "<=");
    detail::settle(e);
    return e;
}

/// T(A) <= c alpha^3 forces a nonzero coefficient of size (1 - c) alpha^2
inline AuditEntry meshulam(const json& j) {
    Instance in(j);
    const GSet a = in.set("A");
    const double c = in.has("c") ? in.num("c") : 0.5;
    if (!in.g.odd_order()) throw SchemaError("meshulam needs a group of odd order");
    if (a.empty() || !(c > 0 && c < 1)) throw SchemaError("meshulam needs nonempty A and c in (0,1)");
    AuditEntry e;
    e.lemma = "meshulam";
    e.certified = true;
    const auto r = meshulam_step(a, c);
    e.hypotheses.push_back({"T(A) <= c alpha^3", true, !r.many_aps, r.t, r.threshold});
    e.constant = 1 - c;
    double best = 0;
    const auto s = set_spectrum(a, 1.0);
    for (elem_t gam = 1; gam < in.g.order(); ++gam) best = std::max(best, s.magnitudes[gam]);
    detail::finish_bound(e, best, (1 - c) * r.alpha * r.alpha, ">=");
    detail::settle(e);
    return e;
}

/**
 * |Delta| <= eta^-2 alpha^-1 for orthogonal Delta inside the eta-spectrum. Without B' this is the
 * Parseval case with constant 1; with B' the orthogonality is relative to Delta_{1/2}(B') and the
 * ratio is reported.
 */
inline AuditEntry orthbessel(const json& j) {
    Instance in(j);
    const GSet a = in.set("A"), d = in.set("Delta");
    const double eta = in.num("eta");
    if (a.empty()) throw SchemaError("orthbessel needs nonempty A");
    AuditEntry e;
    e.lemma = "orthbessel";
    e.hypotheses.push_back(detail::subset_check("Delta inside the spectrum", d, set_spectrum(a, eta).members));
    double alpha = a.density();
    if (in.has("Bprime")) {
        const BohrSet bp = in.bohr("Bprime");
        if (in.has("B")) {
            const BohrSet b = in.bohr("B");
            e.hypotheses.push_back(detail::subset_check("A inside B", a, b.realized));
            alpha = static_cast<double>(a.size()) / static_cast<double>(b.size());
        }
        const auto o = is_orthogonal(d, detail::half_spectrum(bp));
        e.hypotheses.push_back({"Delta_{1/2}(B')-orthogonal", true, o.orthogonal, static_cast<double>(d.size()), 0});
        detail::finish_ratio(e, static_cast<double>(d.size()), 1 / (eta * eta * alpha), "<=");
    } else {
        e.certified = true;
        detail::finish_bound(e, static_cast<double>(d.size()), 1 / (eta * eta * alpha), "<=");
    }
    detail::settle(e);
    return e;
}

/// E_{2m}(Delta; Delta_{1/2}(B')) against eta^{2m} alpha |Delta|^{2m}
inline AuditEntry energylower(const json& j) {
    Instance in(j);
    const GSet a = in.set("A"), d = in.set("Delta");
    const BohrSet bp = in.bohr("Bprime");
    const double eta = in.num("eta");
    const unsigned m = in.uint("m");
    if (a.empty() || m == 0) throw SchemaError("energylower needs nonempty A and m >= 1");
    AuditEntry e;
    e.lemma = "energylower";
    double alpha = a.density();
    if (in.has("B")) {
        const BohrSet b = in.bohr("B");
        e.hypotheses.push_back(detail::subset_check("A inside B", a, b.realized));
        alpha = static_cast<double>(a.size()) / static_cast<double>(b.size());
    }
    e.hypotheses.push_back(detail::subset_check("Delta inside the spectrum", d, set_spectrum(a, eta).members));
    const double lhs = energy(d, detail::half_spectrum(bp), m).value;
    detail::finish_ratio(e, lhs, std::pow(eta, 2.0 * m) * alpha * std::pow(static_cast<double>(d.size()), 2.0 * m), ">=");
    detail::settle(e);
    return e;
}

/// Delta_{1/2}(B')-dimension of the symmetry set S against delta^-2 log(2|X|)
inline AuditEntry dimsymmetry(const json& j) {
    Instance in(j);
    const GSet x = in.set("X");
    const BohrSet b = in.bohr("B"), bp = in.bohr("Bprime");
    const double dlt = in.num("delta");
    if (x.empty() || !(dlt > 0 && dlt <= 1)) throw SchemaError("dimsymmetry needs nonempty X and delta in (0,1]");
    AuditEntry e;
    e.lemma = "dimsymmetry";
    const auto mh = detail::bohr_transform(bp);
    double sup = 0;
    for (elem_t gam = 0; gam < in.g.order(); ++gam) {
        double s = 0;
        for (auto v : x.elements()) s += std::norm(mh[in.g.add(v, gam)]);
        sup = std::max(sup, s);
    }
    e.hypotheses.push_back({"||1_X o |mu_B'^|^2||_inf <= 2", false, sup <= 2 * (1 + 1e-12), sup, 2});
    const GSet s = symmetry_set(x, dlt, detail::half_spectrum(b));
    const auto dim = dimension(s, detail::half_spectrum(bp));
    // log(2|X|) keeps the reference positive at |X| = 1
    detail::finish_ratio(e, static_cast<double>(dim.upper), std::log(2.0 * static_cast<double>(x.size())) / (dlt * dlt), "<=");
    e.detail["S_size"] = s.size();
    e.detail["dim_lower"] = dim.lower;
    e.detail["dim_exact"] = dim.exact;
    detail::settle(e);
    return e;
}

/// either a low-dimensional heavy piece exists or E_{2m}(omega; Gamma) <= (C m / l)^{2m} ||omega||_1^{2m}
inline AuditEntry energytodimension(const json& j) {
    Instance in(j);
    const GSet om = in.set("omega");
    GSet gam = in.set("Gamma");
    gam |= negate(gam);
    const unsigned m = in.uint("m"), ell = in.uint("ell");
    if (m < 2 || ell < 4 * m) throw SchemaError("energytodimension needs m >= 2 and l >= 4m");
    if (om.empty()) throw SchemaError("energytodimension needs a nonempty weight");
    AuditEntry e;
    e.lemma = "energytodimension";
    const double w1 = static_cast<double>(om.size());
    const double lm = static_cast<double>(ell), mm = static_cast<double>(m);
    // heavy piece from the proof: every gamma with omega(gamma) > m/(2 l^2) ||omega||_1, capped at l of them
    const double cut = mm / (2 * lm * lm) * w1;
    std::vector<elem_t> heavy;
    if (1.0 > cut)
        for (auto v : om.elements())
            if (heavy.size() < ell) heavy.push_back(v);
    const double mass = static_cast<double>(heavy.size());
    const double target = std::min(1.0, w1 / lm) * mm / (2 * lm) * w1;
    const bool case1 = !heavy.empty() && mass >= target * (1 - 1e-12);
    const double en = energy(om, gam, m).value;
    // measured constant C with E = (C m / l)^{2m} ||omega||_1^{2m}
    const double c_meas = std::pow(en, 1.0 / (2 * mm)) * lm / (mm * w1);
    e.lhs = c_meas;
    e.relation = "<=";
    e.ratio = c_meas;
    e.detail = {{"case1", case1}, {"piece_size", heavy.size()}, {"piece_mass", mass}, {"piece_target", target}, {"energy", en}};
    detail::settle(e);
    return e;
}

/// property (2): Delta_delta(B) inside Delta_{1 - eps}(B_rho); eps against rho d / delta
inline AuditEntry bohrspectra2(const json& j) {
    Instance in(j);
    const BohrSet b = in.bohr("B");
    const double rel = in.num("rel"), dlt = in.num("delta");
    if (!(rel > 0 && rel < 1) || !(dlt > 0 && dlt < 1)) throw SchemaError("bohrspectra2 needs rel, delta in (0,1)");
    AuditEntry e;
    e.lemma = "bohrspectra2";
    e.hypotheses.push_back({"B regular", true, is_regular(b).pass, b.rho, 0});
    const auto mb = detail::bohr_transform(b), mp = detail::bohr_transform(dilate(b, rel));
    double eps = 0;
    std::size_t members = 0;
    for (elem_t gam = 0; gam < in.g.order(); ++gam)
        if (std::abs(mb[gam]) >= dlt) {
            ++members;
            eps = std::max(eps, 1 - std::abs(mp[gam]));
        }
    detail::finish_ratio(e, eps, rel * static_cast<double>(b.rank()) / dlt, "<=");
    e.detail["spectrum_size"] = members;
    detail::settle(e);
    return e;
}

/// property (4): shifting by Delta_{1/2}(B) moves mu_{B_rho}^ by O(rho d); the largest move is reported
inline AuditEntry bohrspectra4(const json& j) {
    Instance in(j);
    const BohrSet b = in.bohr("B");
    const double rel = in.num("rel"), eps = in.num("eps");
    if (!(rel > 0 && rel < 1) || !(eps > 0 && eps < 0.5)) throw SchemaError("bohrspectra4 needs rel in (0,1), eps in (0,1/2)");
    AuditEntry e;
    e.lemma = "bohrspectra4";
    e.hypotheses.push_back({"B regular", true, is_regular(b).pass, b.rho, 0});
    const auto mp = detail::bohr_transform(dilate(b, rel));
    const GSet half = detail::half_spectrum(b);
    std::vector<elem_t> lam;
    for (elem_t v = 0; v < in.g.order(); ++v)
        if (std::abs(mp[v]) >= 1 - eps) lam.push_back(v);
    double move = 0, loss = 0;
    for (auto gam : half.elements())
        for (auto l : lam) {
            const double after = std::abs(mp[in.g.add(gam, l)]);
            move = std::max(move, std::abs(mp[l] - mp[in.g.add(gam, l)]));
            loss = std::max(loss, (1 - eps) - after);
        }
    detail::finish_ratio(e, move, rel * static_cast<double>(b.rank()), "<=");
    e.detail = {{"half_size", half.size()}, {"lambda_size", lam.size()}, {"reference", rel * static_cast<double>(b.rank())},
                {"containment_loss", loss}};
    detail::settle(e);
    return e;
}

/// ||1_Delta * |mu_B'^|^2||_inf against 2
inline AuditEntry lowdiminc(const json& j) {
    Instance in(j);
    const GSet d = in.set("Delta");
    const BohrSet bp = in.bohr("Bprime");
    AuditEntry e;
    e.lemma = "lowdiminc";
    const auto mh = detail::bohr_transform(bp);
    double sup = 0;
    for (elem_t gam = 0; gam < in.g.order(); ++gam) {
        double s = 0;
        for (auto v : d.elements()) s += std::norm(mh[in.g.sub(gam, v)]);
        sup = std::max(sup, s);
    }
    detail::finish_ratio(e, sup, 2, "<=");
    detail::settle(e);
    return e;
}

/// kappa realised by E_{2m}(X; |mu_B''^|^2) = (kappa |X|)^{2m}
inline AuditEntry specboost1(const json& j) {
    Instance in(j);
    const GSet x = in.set("X");
    const BohrSet b2 = in.bohr("B2");
    const unsigned m = in.uint("m");
    if (x.empty() || m < 2) throw SchemaError("specboost1 needs nonempty X and m >= 2");
    AuditEntry e;
    e.lemma = "specboost1";
    const auto mh = detail::bohr_transform(b2);
    GFunction nu(in.g, Side::dual);
    for (elem_t v = 0; v < in.g.order(); ++v) nu[v] = std::norm(mh[v]);
    const double en = energy_float(GFunction::indicator(x, Side::dual), nu, m);
    const double kappa = std::pow(en, 1.0 / (2.0 * m)) / static_cast<double>(x.size());
    const double ref = in.has("kappa") ? in.num("kappa") : 1.0;
    detail::finish_ratio(e, kappa, ref, "<=");
    e.detail["energy"] = en;
    detail::settle(e);
    return e;
}

/// <1_Delta', 1_S * 1_{Delta + Gamma}> against tau |Delta|^2 |Gamma|
inline AuditEntry structpiece(const json& j) {
    Instance in(j);
    const GSet d = in.set("Delta"), dp = in.set("DeltaP"), s = in.set("S"), gam = in.set("Gamma");
    const double tau = in.num("tau"), dlt = in.num("delta");
    if (d.empty() || gam.empty() || !(tau > 0)) throw SchemaError("structpiece needs nonempty Delta, Gamma and tau > 0");
    AuditEntry e;
    e.lemma = "structpiece";
    const GSet dg = sumset(d, gam);
    // 1_Delta o 1_{Delta+Gamma}(x) = #{y in Delta : y + x in Delta + Gamma}
    std::size_t worst = d.size();
    for (auto x : s.elements()) {
        std::size_t c = 0;
        for (auto y : d.elements()) c += dg.contains(in.g.add(y, x));
        worst = std::min(worst, c);
    }
    const double need = dlt * static_cast<double>(d.size());
    e.hypotheses.push_back({"S inside the delta-popular set", true, static_cast<double>(worst) >= need * (1 - 1e-12),
                            static_cast<double>(worst), need});
    e.hypotheses.push_back(detail::subset_check("Delta' inside Delta", dp, d));
    count_t lhs = 0;
    for (auto x : dp.elements())
        for (auto v : s.elements()) lhs += dg.contains(in.g.sub(x, v));
    const double n = static_cast<double>(d.size());
    detail::finish_ratio(e, static_cast<double>(lhs), tau * n * n * static_cast<double>(gam.size()), ">=");
    e.detail["S_size"] = s.size();
    detail::settle(e);
    return e;
}

namespace detail_disimp {

/// least C making (rank, size, density) an increment of strength [delta, d'; C] relative to ref
inline double needed_c(const BohrSet& ref, const BohrSet& b2, double alpha, double alpha_new, double dlt, double dprime) {
    const double d = static_cast<double>(ref.rank());
    double c = 0;
    if (b2.rank() > ref.rank()) c = std::max(c, (static_cast<double>(b2.rank()) - d) / dprime);
    const double shrink = std::log(static_cast<double>(ref.size()) / static_cast<double>(b2.size()));
    if (shrink > 0) c = std::max(c, shrink / ((d + dprime) * std::log(2 * d * (dprime + 1))));
    c = std::max(c, dlt / (alpha_new / alpha - 1));
    return c;
}

}  // namespace detail_disimp

/// the constant an increment relative to B'_{rho/d} needs when restated relative to B', as a ratio
inline AuditEntry disimp(const json& j) {
    Instance in(j);
    const GSet a = in.set("A");
    const BohrSet b = in.bohr("B"), bp = in.bohr("Bprime"), b2 = in.bohr("B2");
    const double rho = in.num("rho"), dlt = in.num("delta"), dprime = in.num("dprime");
    if (a.empty() || !(rho > 0 && rho <= 1) || !(dprime > 0)) throw SchemaError("disimp needs nonempty A, rho in (0,1], d' > 0");
    AuditEntry e;
    e.lemma = "disimp";
    const BohrSet small = dilate(bp, rho / static_cast<double>(bp.rank()));
    e.hypotheses.push_back(detail::subset_check("A inside B", a, b.realized));
    e.hypotheses.push_back(detail::subset_check("B'' inside B'_{rho/d}", b2.realized, small.realized));
    const double alpha = static_cast<double>(a.size()) / static_cast<double>(b.size());
    const auto hits = detail::translate_counts(a, b2.realized);
    count_t best = 0;
    for (auto h : hits) best = std::max(best, h);
    const double alpha_new = static_cast<double>(best) / static_cast<double>(b2.size());
    e.hypotheses.push_back({"some translate is denser", true, alpha_new > alpha, alpha_new, alpha});
    if (alpha_new > alpha) {
        const double c_small = detail_disimp::needed_c(small, b2, alpha, alpha_new, dlt, dprime);
        const double c_big = detail_disimp::needed_c(bp, b2, alpha, alpha_new, dlt, dprime);
        detail::finish_ratio(e, c_big, c_small, "<=");
        e.detail = {{"C_small", c_small}, {"C_big", c_big}, {"alpha", alpha}, {"alpha_new", alpha_new}};
    }
    detail::settle(e);
    return e;
}

}  // namespace audit_entries

// ---------------------------------------------------------------------------------------------
// registry

struct LemmaSpec {
    std::string id;
    std::string tier;  // certified | ratio-only | mixed
    std::string summary;
    std::function<AuditEntry(const json&)> evaluate;
    std::function<std::vector<json>(Rng&, std::uint64_t)> generate;
};

namespace detail {

inline Group suite_group(std::uint64_t size) { return Group::cyclic(static_cast<std::uint32_t>(size | 1u)); }

inline std::vector<LemmaSpec> build_registry() {
    namespace ae = audit_entries;
    std::vector<LemmaSpec> r;
    auto zero_set = [](const Group& g) { return GSet::from_elements(g, {0}); };

    r.push_back({"shenergy", "certified", "E_2m(Delta) >= alpha eta^2m |Delta|^2m on the eta-spectrum", ae::shenergy,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const GSet a = nonempty_random_set(g, 0.05 + 0.4 * rng.uniform(), rng);
                     const double eta = 0.05 + 0.25 * rng.uniform();
                     const GSet spec = set_spectrum(a, eta).members;
                     const GSet d = random_subset(spec, 1 + rng.below(std::min<std::size_t>(spec.size(), 40)), rng);
                     json j = base(g);
                     j["A"] = a.elements();
                     j["eta"] = eta;
                     j["Delta"] = d.elements();
                     j["m"] = 1 + rng.below(3);
                     return std::vector<json>{j};
                 }});
    r.push_back({"energy_chain", "certified", "e_2n^(m-1) <= e_2^(m-n) e_2m^(n-1)", ae::energy_chain,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     json j = base(g);
                     j["Delta"] = nonempty_random_set(g, 0.05 + 0.2 * rng.uniform(), rng).elements();
                     j["Gamma"] = random_subset(GSet::full(g), 1 + rng.below(4), rng).elements();
                     // 1 < n < m; the end points are identities
                     const unsigned m = 3 + static_cast<unsigned>(rng.below(2));
                     j["m"] = m;
                     j["n"] = 2 + rng.below(m - 2);
                     return std::vector<json>{j};
                 }});
    r.push_back({"e8_ge_e4cubed", "certified", "e_8 >= e_4^3", ae::e8_ge_e4cubed, [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     json j = base(g);
                     j["Delta"] = nonempty_random_set(g, 0.05 + 0.3 * rng.uniform(), rng).elements();
                     return std::vector<json>{j};
                 }});
    r.push_back({"dimenergy", "certified", "E_2m(Lambda;Gamma) <= 2^7m (m+1)! |Lambda|^m for dissociated Lambda", ae::dimenergy,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const GSet gam = random_subset(GSet::full(g), 1 + rng.below(3), rng);
                     const GSet pool = random_subset(GSet::full(g), 12, rng);
                     json j = base(g);
                     j["Gamma"] = gam.elements();
                     j["Lambda"] = greedy_dissociated(pool, gam);
                     j["m"] = 2 + rng.below(2);
                     return std::vector<json>{j};
                 }});
    r.push_back({"collapser", "certified", "collapser inequality for Gamma'-orthogonal A", ae::collapser,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const GSet gam = random_subset(GSet::full(g), 1 + rng.below(4), rng);
                     GSet gp = random_subset(GSet::full(g), 1 + rng.below(3), rng);
                     gp.insert(0);
                     const GSet a = maximal_orthogonal_subset(nonempty_random_set(g, 0.2, rng), gp);
                     CountFunction<count_t> f(g), h(g);
                     for (std::uint64_t i = 0; i < g.order() / 4; ++i) {
                         f.values[rng.below(g.order())] += 1 + static_cast<count_t>(rng.below(3));
                         h.values[rng.below(g.order())] += 1 + static_cast<count_t>(rng.below(3));
                     }
                     // plant one contributing term so the left side is never empty
                     const elem_t sa = static_cast<elem_t>(rng.below(g.order())), sb = static_cast<elem_t>(rng.below(g.order()));
                     const auto ael = a.elements(), gel = gam.elements();
                     const elem_t x = ael[rng.below(ael.size())];
                     f.values[g.add(g.add(sa, x), gel[rng.below(gel.size())])] += 1;
                     h.values[g.add(sb, x)] += 1;
                     json j = base(g);
                     j["A"] = ael;
                     j["Gamma"] = gel;
                     j["GammaP"] = gp.elements();
                     j["f"] = counts_spec(f);
                     j["g"] = counts_spec(h);
                     j["a"] = sa;
                     j["b"] = sb;
                     return std::vector<json>{j};
                 }});
    r.push_back({"bohrsiz", "certified", "|B_rel| >= prod(nu'/4nu) |B|", ae::bohrsiz, [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     json j = base(g);
                     j["B"] = bohr_spec(random_bohr(g, 1 + rng.below(3), rng, 0.2, 2.0));
                     j["rel"] = std::pow(2.0, -static_cast<double>(rng.below(6))) * (0.5 + 0.5 * rng.uniform());
                     return std::vector<json>{j};
                 }});
    r.push_back({"regconv", "certified", "||mu_B * mu - mu_B||_1 <= 200 rho d", ae::regconv, [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const BohrSet b = regularize(random_bohr(g, 1 + rng.below(2), rng, 0.5, 1.8));
                     json j = base(g);
                     j["B"] = bohr_spec(b);
                     j["rel"] = 1.0 / (100.0 * static_cast<double>(b.rank())) / static_cast<double>(1u << rng.below(3));
                     return std::vector<json>{j};
                 }});
    r.push_back({"parseval_spectrum", "certified", "|Delta_eta(A)| <= eta^-2 alpha^-1", ae::parseval_spectrum,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     json j = base(g);
                     j["A"] = nonempty_random_set(g, 0.02 + 0.5 * rng.uniform(), rng).elements();
                     j["eta"] = 0.02 + 0.5 * rng.uniform();
                     return std::vector<json>{j};
                 }});
    r.push_back({"meshulam", "certified", "T(A) <= alpha^3/2 gives a coefficient >= alpha^2/2", ae::meshulam,
                 [](Rng& rng, std::uint64_t size) {
                     // sparse random sets fail T(A) <= alpha^3/2 through their trivial triples alone,
                     // so the instances are dense 3-AP-free sets
                     const Group g = suite_group(size);
                     const auto wit = exact_max_ap_free(std::min<std::int64_t>(40, static_cast<std::int64_t>(g.order() - 1) / 2)).witness;
                     std::int64_t unit;
                     do unit = 1 + static_cast<std::int64_t>(rng.below(g.order() - 1));
                     while (std::gcd(unit, static_cast<std::int64_t>(g.order())) != 1);
                     const auto shift = static_cast<std::int64_t>(rng.below(g.order()));
                     GSet a(g);
                     for (auto v : wit) a.insert(static_cast<elem_t>((v * unit + shift) % static_cast<std::int64_t>(g.order())));
                     json cyc = base(g);
                     cyc["A"] = a.elements();
                     cyc["c"] = 0.5;
                     const Group f = Group::elementary(3, 4);
                     std::vector<elem_t> start{static_cast<elem_t>(rng.below(81))};
                     const auto cap = find_ap_free_set(f, 16, start);
                     json fin = base(f);
                     fin["A"] = cap ? cap->elements() : start;
                     fin["c"] = 0.5;
                     return std::vector<json>{cyc, fin};
                 }});
    r.push_back({"orthbessel", "mixed", "|Delta| <= eta^-2 alpha^-1 for orthogonal Delta in the spectrum", ae::orthbessel,
                 [zero_set](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const GSet a = nonempty_random_set(g, 0.05 + 0.3 * rng.uniform(), rng);
                     const double eta = 0.05 + 0.25 * rng.uniform();
                     const GSet spec = set_spectrum(a, eta).members;
                     json plain = base(g);
                     plain["A"] = a.elements();
                     plain["eta"] = eta;
                     plain["Delta"] = maximal_orthogonal_subset(spec, zero_set(g)).elements();
                     const BohrSet bp = random_bohr(g, 1 + rng.below(2), rng, 0.3, 1.5);
                     json rel = plain;
                     rel["Bprime"] = bohr_spec(bp);
                     rel["Delta"] = maximal_orthogonal_subset(spec, half_spectrum(bp)).elements();
                     return std::vector<json>{plain, rel};
                 }});
    r.push_back({"energylower", "ratio-only", "E_2m(Delta; Delta_1/2(B')) vs eta^2m alpha |Delta|^2m", ae::energylower,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const GSet a = nonempty_random_set(g, 0.05 + 0.3 * rng.uniform(), rng);
                     const double eta = 0.1 + 0.2 * rng.uniform();
                     const GSet spec = set_spectrum(a, eta).members;
                     json j = base(g);
                     j["A"] = a.elements();
                     j["eta"] = eta;
                     j["Delta"] = random_subset(spec, 1 + rng.below(std::min<std::size_t>(spec.size(), 20)), rng).elements();
                     j["Bprime"] = bohr_spec(random_bohr(g, 1 + rng.below(2), rng, 0.3, 1.5));
                     j["m"] = 1 + rng.below(2);
                     return std::vector<json>{j};
                 }});
    r.push_back({"dimsymmetry", "ratio-only", "dim(S; Delta_1/2(B')) vs delta^-2 log 2|X|", ae::dimsymmetry,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const BohrSet b = random_bohr(g, 1 + rng.below(2), rng, 0.3, 1.0);
                     const BohrSet bp = dilate(b, 0.5);
                     const auto mh = bohr_transform(bp);
                     // grow X while ||1_X o |mu_B'^|^2||_inf stays at most 2
                     std::vector<double> load(g.order(), 0.0);
                     std::vector<elem_t> x;
                     const std::size_t want = 2 + rng.below(6);
                     for (int tries = 0; tries < 200 && x.size() < want; ++tries) {
                         const auto v = static_cast<elem_t>(rng.below(g.order()));
                         bool ok = true;
                         for (elem_t gam = 0; gam < g.order() && ok; ++gam) ok = load[gam] + std::norm(mh[g.add(v, gam)]) <= 2;
                         if (!ok || std::find(x.begin(), x.end(), v) != x.end()) continue;
                         for (elem_t gam = 0; gam < g.order(); ++gam) load[gam] += std::norm(mh[g.add(v, gam)]);
                         x.push_back(v);
                     }
                     json j = base(g);
                     j["X"] = x;
                     j["B"] = bohr_spec(b);
                     j["Bprime"] = bohr_spec(bp);
                     j["delta"] = 0.25 + 0.75 * rng.uniform();
                     return std::vector<json>{j};
                 }});
    r.push_back({"energytodimension", "ratio-only", "measured C in E_2m(omega;Gamma) = (C m/l)^2m ||omega||_1^2m",
                 ae::energytodimension, [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     GSet gam = random_subset(GSet::full(g), 1 + rng.below(3), rng);
                     gam.insert(0);
                     json j = base(g);
                     j["omega"] = random_subset(GSet::full(g), 5 + rng.below(30), rng).elements();
                     j["Gamma"] = gam.elements();
                     j["m"] = 2;
                     j["ell"] = 8 + rng.below(9);
                     return std::vector<json>{j};
                 }});
    r.push_back({"bohrspectra2", "ratio-only", "Delta_delta(B) inside Delta_(1-eps)(B_rho), eps vs rho d/delta", ae::bohrspectra2,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const BohrSet b = regularize(random_bohr(g, 1 + rng.below(2), rng, 0.3, 1.5));
                     json j = base(g);
                     j["B"] = bohr_spec(b);
                     // the statement allows any rho in (0,1); small rho leaves B_rho = {0} at these sizes
                     j["rel"] = 0.05 + 0.25 * rng.uniform();
                     j["delta"] = 0.1 + 0.4 * rng.uniform();
                     return std::vector<json>{j};
                 }});
    r.push_back({"bohrspectra4", "ratio-only", "Delta_1/2(B) shifts move mu_B_rho^ by O(rho d)", ae::bohrspectra4,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const BohrSet b = regularize(random_bohr(g, 1 + rng.below(2), rng, 0.3, 1.5));
                     json j = base(g);
                     j["B"] = bohr_spec(b);
                     // the statement allows any rho in (0,1); small rho leaves B_rho = {0} at these sizes
                     j["rel"] = 0.05 + 0.25 * rng.uniform();
                     j["eps"] = 0.05 + 0.4 * rng.uniform();
                     return std::vector<json>{j};
                 }});
    r.push_back({"lowdiminc", "ratio-only", "||1_Delta * |mu_B'^|^2||_inf vs 2", ae::lowdiminc, [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const BohrSet bp = random_bohr(g, 1 + rng.below(2), rng, 0.05, 0.5);
                     json j = base(g);
                     j["Bprime"] = bohr_spec(bp);
                     j["Delta"] = maximal_orthogonal_subset(random_set(g, 0.1, rng), half_spectrum(bp)).elements();
                     return std::vector<json>{j};
                 }});
    r.push_back({"specboost1", "ratio-only", "kappa with E_2m(X; |mu_B''^|^2) = (kappa |X|)^2m", ae::specboost1,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     json j = base(g);
                     j["X"] = random_subset(GSet::full(g), 3 + rng.below(6), rng).elements();
                     j["B2"] = bohr_spec(random_bohr(g, 1 + rng.below(2), rng, 0.05, 0.5));
                     j["m"] = 2 + rng.below(2);
                     return std::vector<json>{j};
                 }});
    r.push_back({"structpiece", "ratio-only", "<1_Delta', 1_S * 1_(Delta+Gamma)> vs tau |Delta|^2 |Gamma|", ae::structpiece,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const std::int64_t len = 4 + static_cast<std::int64_t>(rng.below(5));
                     GSet d(g), first(g);
                     for (int k = 0; k < 3; ++k) {
                         const auto start = static_cast<std::int64_t>(rng.below(g.order()));
                         const GSet piece = interval(g, start, start + len - 1);
                         d |= piece;
                         if (k == 0) first = piece;
                     }
                     const GSet gam = interval(g, -1, 1);
                     const double dlt = 0.25;
                     const GSet dg = sumset(d, gam);
                     GSet s(g);
                     for (elem_t x = 0; x < g.order(); ++x) {
                         std::size_t c = 0;
                         for (auto y : d.elements()) c += dg.contains(g.add(y, x));
                         if (static_cast<double>(c) >= dlt * static_cast<double>(d.size())) s.insert(x);
                     }
                     json j = base(g);
                     j["Delta"] = d.elements();
                     j["DeltaP"] = first.elements();
                     j["S"] = s.elements();
                     j["Gamma"] = gam.elements();
                     j["delta"] = dlt;
                     j["tau"] = static_cast<double>(first.size()) / static_cast<double>(d.size());
                     return std::vector<json>{j};
                 }});
    r.push_back({"disimp", "ratio-only", "constant inflation moving an increment from B'_(rho/d) to B'", ae::disimp,
                 [](Rng& rng, std::uint64_t size) {
                     const Group g = suite_group(size);
                     const BohrSet bp = random_bohr(g, 1 + rng.below(2), rng, 0.8, 1.8);
                     const double rho = 0.5 + 0.5 * rng.uniform();
                     const BohrSet small = dilate(bp, rho / static_cast<double>(bp.rank()));
                     const BohrSet b2 = dilate(small, 0.5);
                     GSet a = random_set(g, 0.1 + 0.2 * rng.uniform(), rng);
                     const elem_t x0 = static_cast<elem_t>(rng.below(g.order()));
                     a |= translate(b2.realized, x0);
                     json j = base(g);
                     j["A"] = a.elements();
                     j["B"] = bohr_spec(whole_group_bohr(g));
                     j["Bprime"] = bohr_spec(bp);
                     j["B2"] = bohr_spec(b2);
                     j["rho"] = rho;
                     j["delta"] = 1.0;
                     j["dprime"] = 1.0;
                     return std::vector<json>{j};
                 }});
    return r;
}

}  // namespace detail

inline const std::vector<LemmaSpec>& audit_registry() {
    static const std::vector<LemmaSpec> r = detail::build_registry();
    return r;
}

inline const LemmaSpec& audit_lemma(const std::string& id) {
    for (const auto& s : audit_registry())
        if (s.id == id) return s;
    throw SchemaError("unknown lemma id '" + id + "'");
}

/// evaluate one registry entry on a serialized instance
inline AuditEntry audit(const std::string& lemma_id, const json& instance) {
    const auto& spec = audit_lemma(lemma_id);
    if (!instance.is_object()) throw SchemaError("instance must be a JSON object");
    try {
        return spec.evaluate(instance);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("instance does not match the '") + lemma_id + "' schema: " + e.what());
    }
}

// ---------------------------------------------------------------------------------------------
// suite

struct AuditRow {
    std::string lemma;
    std::uint64_t size = 0;
    std::size_t variant = 0;
    json instance;
    AuditEntry entry;
};

struct AuditBundle {
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> sizes;
    std::vector<AuditRow> rows;
    std::size_t certified_failures = 0;
    std::size_t nonpositive_ratios = 0;  // ratio-only rows whose ratio is not finite and positive
};

/// every registry entry on generated instances; one seeded generator per (entry, size) pair
inline AuditBundle audit_suite(std::uint64_t seed, const std::vector<std::uint64_t>& sizes, unsigned threads = 0) {
    AuditBundle bundle;
    bundle.seed = seed;
    bundle.sizes = sizes;
    const auto& reg = audit_registry();
    struct Job {
        std::size_t lemma;
        std::uint64_t size;
        std::vector<AuditRow> out;
    };
    std::vector<Job> jobs;
    for (auto s : sizes)
        for (std::size_t i = 0; i < reg.size(); ++i) jobs.push_back({i, s, {}});
    auto run = [&](Job& job) {
        const auto& spec = reg[job.lemma];
        Rng rng(seed * 0x9E3779B97F4A7C15ull ^ (job.size * 1000003ull + job.lemma));
        const auto instances = spec.generate(rng, job.size);
        for (std::size_t v = 0; v < instances.size(); ++v) job.out.push_back({spec.id, job.size, v, instances[v], audit(spec.id, instances[v])});
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, jobs.size()); ++t)
        pool.emplace_back([&] {
            for (std::size_t k; (k = next++) < jobs.size();) {
                try {
                    run(jobs[k]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    for (auto& job : jobs)
        for (auto& row : job.out) {
            if (row.entry.certified && row.entry.verdict == "fails") ++bundle.certified_failures;
            if (!row.entry.certified && row.entry.verdict == "holds-with-ratio" && !(std::isfinite(row.entry.ratio) && row.entry.ratio > 0))
                ++bundle.nonpositive_ratios;
            bundle.rows.push_back(std::move(row));
        }
    return bundle;
}

inline std::string audit_csv(const AuditBundle& b) {
    std::ostringstream out;
    out << "lemma,size,variant,tier,verdict,lhs,rhs,ratio\n";
    out.precision(12);
    for (const auto& r : b.rows) {
        out << r.lemma << ',' << r.size << ',' << r.variant << ',' << (r.entry.certified ? "certified" : "ratio-only") << ','
            << r.entry.verdict << ',' << r.entry.lhs << ',';
        if (r.entry.rhs) out << *r.entry.rhs;
        out << ',' << r.entry.ratio << '\n';
    }
    return out.str();
}

inline json audit_bundle_to_json(const AuditBundle& b) {
    json rows = json::array();
    for (const auto& r : b.rows)
        rows.push_back({{"lemma", r.lemma}, {"size", r.size}, {"variant", r.variant}, {"instance", r.instance}, {"result", audit_to_json(r.entry)}});
    return json{{"seed", b.seed},
                {"sizes", b.sizes},
                {"certified_failures", b.certified_failures},
                {"nonpositive_ratios", b.nonpositive_ratios},
                {"rows", rows}};
}

struct BaselineFlag {
    std::string key;  // lemma/size/variant
    double baseline = 0;
    double current = 0;
};

/// ratio-only rows whose ratio moved by more than a factor `factor` against a stored CSV baseline
inline std::vector<BaselineFlag> compare_baseline(const std::string& baseline_csv, const AuditBundle& b, double factor = 2.0) {
    std::map<std::string, double> old;
    std::istringstream in(baseline_csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
        if (f.size() < 8 || f[3] != "ratio-only") continue;
        old[f[0] + "/" + f[1] + "/" + f[2]] = std::stod(f[7]);
    }
    std::vector<BaselineFlag> flags;
    for (const auto& r : b.rows) {
        if (r.entry.certified) continue;
        const std::string key = r.lemma + "/" + std::to_string(r.size) + "/" + std::to_string(r.variant);
        auto it = old.find(key);
        if (it == old.end()) continue;
        const double a = it->second, c = r.entry.ratio;
        if (a > 0 && c > 0 && (c > factor * a || a > factor * c)) flags.push_back({key, a, c});
    }
    return flags;
}

}  // namespace actk
