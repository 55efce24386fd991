#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "actk/audit.hpp"

using namespace actk;

namespace {

// exit statuses
constexpr int kOk = 0;
constexpr int kCertifiedFailure = 1;
constexpr int kSchema = 2;

constexpr const char* kEnvPrefix = "ACTK";

/// defaults for every documented config key; the config file, then ACTK_* variables, then flags override them
Config default_config() {
    return Config::parse(R"(group = ""
seed = 7
threads = 0
max_order = 1048576

[increment]
C = 8
many_aps = 0.5
max_order = 10000

[extremal]
c = 0.1
ns = "10,20,40,100,1000,10000,100000"

[audit]
sizes = "101,401,2003"
baseline_factor = 2

[structure]
budget = 10000
chain_depth = 8
)");
}

struct Globals {
    std::string config_path;
    std::string out;
    std::string group;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
};

Config effective_config(const Globals& gl) {
    Config c = default_config();
    if (!gl.config_path.empty()) {
        const Config file = Config::load(gl.config_path);
        for (const auto& [k, v] : file.entries()) c.set(k, v);
    }
    c.apply_env(kEnvPrefix);
    if (!gl.group.empty()) c.set("group", gl.group);
    if (gl.seed_set) c.set("seed", std::to_string(gl.seed));
    if (gl.threads >= 0) c.set("threads", std::to_string(gl.threads));
    return c;
}

template <class T>
std::vector<T> parse_list(const std::string& s, const char* what) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::istringstream one(tok);
        T v{};
        if (!(one >> v) || !one.eof()) throw SchemaError(std::string("bad entry '") + tok + "' in " + what);
        out.push_back(v);
    }
    return out;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") std::cout << text;
    else write_text_file(out, text);
}

void emit_json(const json& j, const std::string& out) { emit(j.dump(2) + "\n", out); }

std::uint64_t max_order(const Config& c) { return static_cast<std::uint64_t>(c.get_int("max_order", 1 << 20)); }

/// group from --group/config, falling back to a "factors" field inside the input file
Group resolve_group(const Config& c, const json* file) {
    if (!c.get_string("group", "").empty()) return parse_group_spec(c.get_string("group", ""), max_order(c));
    if (file && file->is_object() && file->contains("factors")) return group_from_json(*file, max_order(c));
    throw SchemaError("no group given: pass --group or put 'factors' in the input file");
}

/// a set file is an index array, a base64 bitmap string, or an object with a "set" (or "A") field
GSet load_set(const Config& c, const std::string& path) {
    const json j = read_json_file(path);
    const Group g = resolve_group(c, &j);
    if (j.is_object()) {
        for (const char* key : {"set", "A"})
            if (j.contains(key)) return set_from_json_in(g, j[key]);
        throw SchemaError(path + ": set object needs a 'set' field");
    }
    return set_from_json_in(g, j);
}

Group group_only(const Config& c) { return resolve_group(c, nullptr); }

BohrSet make_bohr(const Group& g, const std::string& freqs, const std::string& widths, double rho) {
    auto fr = parse_list<elem_t>(freqs, "--freqs");
    auto wd = parse_list<double>(widths, "--widths");
    if (fr.empty() || fr.size() != wd.size()) throw SchemaError("--freqs and --widths need the same nonzero length");
    return bohr_build(g, fr, wd, rho);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"actk: finite abelian group additive combinatorics toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the verb
    Globals gl;
    app.add_option("--config", gl.config_path, "key = value config file");
    app.add_option("--out", gl.out, "output path (default stdout)");
    app.add_option("--group", gl.group, "group spec: zn:N, f3:n, fp:p:n, factors:a,b,...");
    app.add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) {
        gl.seed = s;
        gl.seed_set = true;
    }, "random seed");
    app.add_option("--threads", gl.threads, "worker threads (0 = logical cores)");

    std::function<int()> action;

    // config
    auto* cfg_cmd = app.add_subcommand("config", "print the effective configuration");
    cfg_cmd->callback([&] { action = [&] { emit(effective_config(gl).dump(), gl.out); return kOk; }; });

    // fourier
    std::string set_path, fn_path;
    bool inverse = false;
    auto* fourier = app.add_subcommand("fourier", "Fourier transform of a set indicator or a function");
    fourier->add_option("--set", set_path, "set file");
    fourier->add_option("--function", fn_path, "function JSON file");
    fourier->add_flag("--inverse", inverse, "apply the inverse transform to a dual-side function");
    fourier->callback([&] {
        action = [&] {
            const Config c = effective_config(gl);
            if (set_path.empty() == fn_path.empty()) throw SchemaError("fourier needs exactly one of --set and --function");
            const GFunction f = set_path.empty() ? function_from_json(read_json_file(fn_path))
                                                 : GFunction::indicator(load_set(c, set_path), Side::physical);
            const GFunction out = inverse ? inverse_dft(f) : dft(f);
            emit_json(function_to_json(out), gl.out);
            return kOk;
        };
    });

    // bohr
    std::string freqs, widths;
    double rho = 1.0;
    bool regular = false;
    auto* bohr = app.add_subcommand("bohr", "build a Bohr set and test regularity");
    bohr->add_option("--freqs", freqs, "comma separated frequencies")->required();
    bohr->add_option("--widths", widths, "comma separated widths")->required();
    bohr->add_option("--rho", rho, "dilation");
    bohr->add_flag("--regularize", regular, "move to a regular dilate in [rho/2, rho]");
    bohr->callback([&] {
        action = [&] {
            const Config c = effective_config(gl);
            BohrSet b = make_bohr(group_only(c), freqs, widths, rho);
            if (regular) b = regularize(b);
            const auto r = is_regular(b);
            json j = bohr_to_json(b);
            j["size"] = b.size();
            j["rank"] = b.rank();
            j["regular"] = {{"pass", r.pass}, {"worst_ratio", r.worst_ratio}, {"checked", r.checked}};
            j["elements"] = b.realized.elements();
            emit_json(j, gl.out);
            return kOk;
        };
    });

    // spectrum
    double eta = 0.5;
    auto* spec = app.add_subcommand("spectrum", "large spectrum of a set");
    spec->add_option("--set", set_path, "set file")->required();
    spec->add_option("--eta", eta, "threshold");
    spec->callback([&] {
        action = [&] {
            const Config c = effective_config(gl);
            const GSet a = load_set(c, set_path);
            if (a.empty()) throw SchemaError("set must be nonempty");
            const auto s = set_spectrum(a, eta);
            const double alpha = a.density();
            emit_json(json{{"eta", eta}, {"alpha", alpha}, {"members", s.members.elements()}, {"size", s.members.size()},
                           {"parseval_bound", 1 / (eta * eta * alpha)}},
                      gl.out);
            return kOk;
        };
    });

    // energy
    std::string delta_path, gamma_path;
    unsigned m = 2;
    auto* energy_cmd = app.add_subcommand("energy", "relative additive energy E_2m(Delta; 1_Gamma)");
    energy_cmd->add_option("--delta", delta_path, "Delta set file")->required();
    energy_cmd->add_option("--gamma", gamma_path, "Gamma set file (default {0})");
    energy_cmd->add_option("--m", m, "order")->check(CLI::Range(1, 8));
    energy_cmd->callback([&] {
        action = [&] {
            const Config c = effective_config(gl);
            const GSet d = load_set(c, delta_path);
            const GSet gam = gamma_path.empty() ? GSet::from_elements(d.group(), {0}) : load_set(c, gamma_path);
            const auto e = energy(d, gam, m);
            emit_json(json{{"m", m}, {"exact", to_decimal(e.exact)}, {"normalized", e.normalized}}, gl.out);
            return kOk;
        };
    });

    // dissociate
    std::string lambda;
    auto* dis = app.add_subcommand("dissociate", "dissociativity of Lambda relative to Gamma, or dimension of a set");
    dis->add_option("--lambda", lambda, "comma separated elements");
    dis->add_option("--delta", delta_path, "set file for a dimension report");
    dis->add_option("--gamma", gamma_path, "Gamma set file (default {0})");
    dis->callback([&] {
        action = [&] {
            const Config c = effective_config(gl);
            json out;
            if (!delta_path.empty()) {
                const GSet d = load_set(c, delta_path);
                const GSet gam = gamma_path.empty() ? GSet::from_elements(d.group(), {0}) : load_set(c, gamma_path);
                const auto r = dimension(d, gam);
                out["dimension"] = {{"lower", r.lower}, {"upper", r.upper}, {"exact", r.exact}, {"witness", r.witness}};
            }
            if (!lambda.empty()) {
                const Group g = group_only(c);
                const GSet gam = gamma_path.empty() ? GSet::from_elements(g, {0}) : load_set(c, gamma_path);
                const auto cert = is_dissociated(parse_list<elem_t>(lambda, "--lambda"), gam);
                out["dissociated"] = cert.dissociated;
                out["certified"] = cert.certified;
                if (!cert.dissociated)
                    out["witness"] = {{"k", cert.k}, {"gamma", cert.gamma}, {"count", cert.count}, {"limit", count_t{1} << cert.k}};
            }
            if (out.is_null()) throw SchemaError("dissociate needs --lambda or --delta");
            emit_json(out, gl.out);
            return kOk;
        };
    });

    // framework
    std::string framework_path;
    unsigned fh = 1, ft = 2;
    auto* fw = app.add_subcommand("framework", "build a Bohr framework or validate a framework file");
    fw->add_option("--file", framework_path, "framework JSON to validate");
    fw->add_option("--freqs", freqs, "Bohr frequencies");
    fw->add_option("--widths", widths, "Bohr widths");
    fw->add_option("--depth", fh, "framework depth h");
    fw->add_option("--step", ft, "framework step t");
    fw->callback([&] {
        action = [&] {
            const Config c = effective_config(gl);
            auto report_json = [](const FrameworkReport& r) {
                json j{{"valid", r.valid}};
                if (r.first_failure) j["first_failure"] = {{"name", r.first_failure->name}, {"level", r.first_failure->level},
                                                           {"detail", r.first_failure->detail}};
                return j;
            };
            if (!framework_path.empty()) {
                const auto f = framework_from_json(read_json_file(framework_path));
                emit_json(json{{"report", report_json(validate_framework(f))}}, gl.out);
                return kOk;
            }
            const auto bf = build_bohr_framework(make_bohr(group_only(c), freqs, widths, 1.0), fh, ft);
            emit_json(json{{"framework", framework_to_json(bf.framework)}, {"rho", bf.rho}, {"eta", bf.eta},
                           {"report", report_json(bf.report)}},
                      gl.out);
            return kOk;
        };
    });

    // structure
    double tau = 0.25;
    auto* st = app.add_subcommand("structure", "search for structured pieces X, H inside Delta");
    st->add_option("--delta", delta_path, "Delta set file")->required();
    st->add_option("--file", framework_path, "framework JSON (default: the trivial framework {0})");
    st->add_option("--tau", tau, "scale");
    st->callback([&] {
        action = [&] {
            const Config c = effective_config(gl);
            const GSet d = load_set(c, delta_path);
            const auto f = framework_path.empty() ? subgroup_framework(GSet::from_elements(d.group(), {0}), 1, 2)
                                                  : framework_from_json(read_json_file(framework_path));
            StructureOptions opt;
            opt.budget = static_cast<std::size_t>(c.get_int("structure.budget", 10000));
            opt.chain_depth = static_cast<unsigned>(c.get_int("structure.chain_depth", 8));
            emit_json(structure_to_json(structure_search(d, f, tau, opt)), gl.out);
            return kOk;
        };
    });

    // increment
    auto* inc = app.add_subcommand("increment", "density increment driver");
    inc->require_subcommand(1);
    auto* inc_run = inc->add_subcommand("run", "run the driver and write a trace");
    inc_run->add_option("--set", set_path, "set file")->required();
    auto* inc_verify = inc->add_subcommand("verify", "re-validate a trace from scratch");
    std::string trace_path;
    inc_verify->add_option("trace", trace_path, "trace JSON")->required();
    auto* inc_mesh = inc->add_subcommand("meshulam", "one Meshulam step");
    inc_mesh->add_option("--set", set_path, "set file")->required();
    inc_run->callback([&] {
        action = [&] {
            const Config c = effective_config(gl);
            DriverConfig dc;
            dc.C = c.get_double("increment.C", dc.C);
            dc.many_aps = c.get_double("increment.many_aps", dc.many_aps);
            dc.max_order = static_cast<std::uint64_t>(c.get_int("increment.max_order", static_cast<std::int64_t>(dc.max_order)));
            auto tr = increment_driver(load_set(c, set_path), dc);
            verify_trace(tr);
            emit_json(trace_to_json(tr), gl.out);
            return tr.valid ? kOk : kCertifiedFailure;
        };
    });
    inc_verify->callback([&] {
        action = [&] {
            auto tr = trace_from_json(read_json_file(trace_path));
            std::string why;
            const bool ok = verify_trace(tr, &why);
            emit_json(json{{"valid", ok}, {"steps", tr.steps.size()}, {"diagnostic", why}}, gl.out);
            return ok ? kOk : kCertifiedFailure;
        };
    });
    inc_mesh->callback([&] {
        action = [&] {
            const auto r = meshulam_step(load_set(effective_config(gl), set_path));
            emit_json(meshulam_to_json(r), gl.out);
            return r.verified ? kOk : kCertifiedFailure;
        };
    });

    // extremal
    auto* ex = app.add_subcommand("extremal", "3-AP-free sets in {1..N}");
    ex->require_subcommand(1);
    std::int64_t n = 0;
    for (const char* name : {"exact", "greedy", "behrend"}) {
        auto* sub = ex->add_subcommand(name, std::string(name) + " construction");
        sub->add_option("--n", n, "N")->required();
        const std::string method = name;
        sub->callback([&, method] {
            action = [&, method] {
                const auto r = method == "exact" ? exact_max_ap_free(n) : method == "greedy" ? greedy_ap_free(n) : behrend_construct(n);
                emit_json(extremal_to_json(r), gl.out);
                return kOk;
            };
        });
    }
    std::string ns;
    double cexp = -1;
    auto* ex_csv = ex->add_subcommand("csv", "size table with the N/(log N)^(1+c) comparison");
    ex_csv->add_option("--ns", ns, "comma separated N values");
    ex_csv->add_option("--c", cexp, "exponent c");
    ex_csv->callback([&] {
        action = [&] {
            const Config c = effective_config(gl);
            const auto list = parse_list<std::int64_t>(ns.empty() ? c.get_string("extremal.ns", "") : ns, "--ns");
            emit(extremal_csv(list, cexp >= 0 ? cexp : c.get_double("extremal.c", 0.1)), gl.out);
            return kOk;
        };
    });

    // audit
    auto* au = app.add_subcommand("audit", "inequality audit registry");
    au->require_subcommand(1);
    std::string suite = "default", sizes, baseline, bundle_path;
    auto* au_run = au->add_subcommand("run", "run the registry over generated instances; writes the ratio CSV");
    au_run->add_option("--suite", suite, "suite name")->check(CLI::IsMember({"default", "small"}));
    au_run->add_option("--sizes", sizes, "comma separated instance sizes (overrides the suite)");
    au_run->add_option("--baseline", baseline, "baseline CSV; ratios moving beyond the factor are flagged");
    au_run->add_option("--bundle", bundle_path, "write the full JSON bundle here");
    std::string lemma, instance_path;
    auto* au_one = au->add_subcommand("one", "audit one instance");
    au_one->add_option("--lemma", lemma, "lemma id")->required();
    au_one->add_option("--instance", instance_path, "instance JSON")->required();
    auto* au_list = au->add_subcommand("list", "list registry ids");
    au_run->callback([&] {
        action = [&] {
            const Config c = effective_config(gl);
            std::string sz = sizes;
            if (sz.empty()) sz = suite == "small" ? "101" : c.get_string("audit.sizes", "101,401,2003");
            const auto b = audit_suite(static_cast<std::uint64_t>(c.get_int("seed", 7)), parse_list<std::uint64_t>(sz, "--sizes"),
                                       static_cast<unsigned>(c.get_int("threads", 0)));
            emit(audit_csv(b), gl.out.empty() ? "ratios.csv" : gl.out);
            if (!bundle_path.empty()) write_text_file(bundle_path, audit_bundle_to_json(b).dump(2) + "\n");
            json summary{{"seed", b.seed}, {"rows", b.rows.size()}, {"certified_failures", b.certified_failures},
                         {"nonpositive_ratios", b.nonpositive_ratios}};
            if (!baseline.empty()) {
                std::ifstream in(baseline);
                if (!in) throw SchemaError("cannot open baseline " + baseline);
                std::stringstream ss;
                ss << in.rdbuf();
                json flags = json::array();
                for (const auto& f : compare_baseline(ss.str(), b, c.get_double("audit.baseline_factor", 2)))
                    flags.push_back({{"key", f.key}, {"baseline", f.baseline}, {"current", f.current}});
                summary["review_flags"] = flags;
            }
            std::cerr << summary.dump() << "\n";
            return b.certified_failures == 0 ? kOk : kCertifiedFailure;
        };
    });
    au_one->callback([&] {
        action = [&] {
            const auto e = audit(lemma, read_json_file(instance_path));
            emit_json(audit_to_json(e), gl.out);
            return e.certified && e.verdict == "fails" ? kCertifiedFailure : kOk;
        };
    });
    au_list->callback([&] {
        action = [&] {
            json ids = json::array();
            for (const auto& s : audit_registry()) ids.push_back(s.id);
            emit_json(ids, gl.out);
            return kOk;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kSchema;
    }
    try {
        return action ? action() : kOk;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kSchema;
    } catch (const json::exception& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kSchema;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSchema;
    }
}
