#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "actk/counts.hpp"
#include "actk/harmonics.hpp"

namespace actk {

using json = nlohmann::json;

namespace base64 {

inline std::string encode(const std::vector<std::uint8_t>& bytes) {
    static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
        out += tbl[(v >> 18) & 63];
        out += tbl[(v >> 12) & 63];
        out += tbl[(v >> 6) & 63];
        out += tbl[v & 63];
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t v = std::uint32_t{bytes[i]} << 16;
        out += tbl[(v >> 18) & 63];
        out += tbl[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
        out += tbl[(v >> 18) & 63];
        out += tbl[(v >> 12) & 63];
        out += tbl[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

inline std::vector<std::uint8_t> decode(const std::string& s) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    std::uint32_t buf = 0;
    int bits = 0;
    for (char c : s) {
        if (c == '=' || std::isspace(static_cast<unsigned char>(c))) continue;
        const int v = val(c);
        if (v < 0) throw SchemaError("invalid base64 character");
        buf = (buf << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((buf >> bits) & 0xff));
        }
    }
    return out;
}

}  // namespace base64

/// parse "zn:2001", "f3:4", "fp:5:3", or "factors:3,3,9"
inline Group parse_group_spec(const std::string& spec, std::uint64_t max_order = kDefaultMaxOrder) {
    auto fail = [&]() -> Group { throw SchemaError("unrecognised group spec '" + spec + "'"); };
    auto num = [&](const std::string& s) -> std::uint32_t {
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) fail();
        return static_cast<std::uint32_t>(std::stoul(s));
    };
    const auto colon = spec.find(':');
    if (colon == std::string::npos) return fail();
    const std::string kind = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (kind == "zn") return Group::build({num(rest)}, max_order);
    if (kind == "factors") {
        std::vector<std::uint32_t> fs;
        std::stringstream ss(rest);
        std::string tok;
        while (std::getline(ss, tok, ',')) fs.push_back(num(tok));
        return Group::build(fs, max_order);
    }
    if (kind == "fp") {
        const auto c2 = rest.find(':');
        if (c2 == std::string::npos) return fail();
        return Group::build(std::vector<std::uint32_t>(num(rest.substr(c2 + 1)), num(rest.substr(0, c2))), max_order);
    }
    if (kind.size() >= 2 && kind[0] == 'f') {
        const std::uint32_t p = num(kind.substr(1));
        return Group::build(std::vector<std::uint32_t>(num(rest), p), max_order);
    }
    return fail();
}

inline json group_to_json(const Group& g) { return json{{"factors", g.factors()}}; }

inline Group group_from_json(const json& j, std::uint64_t max_order = kDefaultMaxOrder) {
    if (!j.is_object() || !j.contains("factors") || !j["factors"].is_array()) throw SchemaError("group JSON needs a 'factors' array");
    std::vector<std::uint32_t> fs;
    for (const auto& v : j["factors"]) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw SchemaError("factors must be non-negative integers");
        fs.push_back(v.get<std::uint32_t>());
    }
    return Group::build(fs, max_order);
}

inline std::string set_to_base64(const GSet& s) {
    std::vector<std::uint8_t> bytes((s.group().size() + 7) / 8, 0);
    for (auto x : s.elements()) bytes[x / 8] |= static_cast<std::uint8_t>(1u << (x % 8));
    return base64::encode(bytes);
}

/// {"factors":[...], "set":[indices]} or with "set": "<base64 bitmap>"
inline json set_to_json(const GSet& s, bool bitmap = false) {
    json j = group_to_json(s.group());
    if (bitmap) j["set"] = set_to_base64(s);
    else j["set"] = s.elements();
    return j;
}

inline GSet set_from_json_in(const Group& g, const json& v) {
    GSet s(g);
    if (v.is_array()) {
        for (const auto& e : v) {
            if (!e.is_number_integer()) throw SchemaError("set members must be integers");
            const auto x = e.get<std::int64_t>();
            if (x < 0 || static_cast<std::uint64_t>(x) >= g.order()) throw SchemaError("set member out of range");
            s.insert(static_cast<elem_t>(x));
        }
    } else if (v.is_string()) {
        const auto bytes = base64::decode(v.get<std::string>());
        if (bytes.size() != (g.size() + 7) / 8) throw SchemaError("bitmap length does not match group order");
        for (std::size_t x = 0; x < g.size(); ++x)
            if ((bytes[x / 8] >> (x % 8)) & 1u) s.insert(static_cast<elem_t>(x));
        for (std::size_t x = g.size(); x < bytes.size() * 8; ++x)
            if ((bytes[x / 8] >> (x % 8)) & 1u) throw SchemaError("bitmap has bits beyond the group order");
    } else {
        throw SchemaError("'set' must be an index list or a base64 bitmap");
    }
    return s;
}

inline GSet set_from_json(const json& j, std::uint64_t max_order = kDefaultMaxOrder) {
    const Group g = group_from_json(j, max_order);
    if (!j.contains("set")) throw SchemaError("set JSON needs a 'set' field");
    return set_from_json_in(g, j["set"]);
}

inline json function_to_json(const GFunction& f) {
    json vals = json::array();
    for (auto v : f.values) vals.push_back({v.real(), v.imag()});
    return json{{"factors", f.group.factors()}, {"side", side_name(f.side)}, {"values", vals}};
}

inline GFunction function_from_json(const json& j) {
    const Group g = group_from_json(j);
    Side s = Side::physical;
    if (j.contains("side")) {
        const auto name = j["side"].get<std::string>();
        if (name == "dual") s = Side::dual;
        else if (name != "physical") throw SchemaError("side must be 'physical' or 'dual'");
    }
    if (!j.contains("values") || !j["values"].is_array() || j["values"].size() != g.size())
        throw SchemaError("function JSON needs 'values' of length N");
    GFunction f(g, s);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& p = j["values"][i];
        if (p.is_array() && p.size() == 2) f.values[i] = {p[0].get<double>(), p[1].get<double>()};
        else if (p.is_number()) f.values[i] = {p.get<double>(), 0.0};
        else throw SchemaError("function values must be [re, im] pairs");
    }
    return f;
}

template <class Int>
json counts_to_json(const CountFunction<Int>& f) {
    json vals = json::array();
    for (const auto& v : f.values) vals.push_back(to_decimal(v));
    return json{{"factors", f.group.factors()}, {"values", vals}};
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("JSON parse error in ") + path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

/**
 * @brief flat key = value configuration with [section] headers (keys become section.key)
 *
 * Values keep their source text; environment variables PREFIX_SECTION_KEY override entries.
 */
class Config {
public:
    static Config parse(const std::string& text) {
        Config c;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = strip_comment(line);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']') throw SchemaError("config line " + std::to_string(lineno) + ": bad section header");
                section = trim(t.substr(1, t.size() - 2));
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw SchemaError("config line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(t.substr(0, eq));
            std::string val = trim(t.substr(eq + 1));
            if (key.empty()) throw SchemaError("config line " + std::to_string(lineno) + ": empty key");
            if (val.size() >= 2 && val.front() == '"' && val.back() == '"') val = val.substr(1, val.size() - 2);
            c.values_[section.empty() ? key : section + "." + key] = val;
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw SchemaError("cannot open config " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    /// canonical text: sorted keys, sections grouped
    std::string dump() const {
        std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
        for (const auto& [k, v] : values_) {
            const auto dot = k.rfind('.');
            if (dot == std::string::npos) sections[""].emplace_back(k, v);
            else sections[k.substr(0, dot)].emplace_back(k.substr(dot + 1), v);
        }
        // the root section sorts first, so its keys precede every header
        std::ostringstream os;
        bool first = true;
        for (const auto& [sec, kvs] : sections) {
            if (!sec.empty()) os << (first ? "" : "\n") << "[" << sec << "]\n";
            for (const auto& [k, v] : kvs) os << k << " = " << quote(v) << "\n";
            first = false;
        }
        return os.str();
    }

    void apply_env(const std::string& prefix) {
        for (auto& [k, v] : values_) {
            if (const char* e = std::getenv(env_name(prefix, k).c_str())) v = e;
        }
    }

    static std::string env_name(const std::string& prefix, const std::string& key) {
        std::string out = prefix + "_";
        for (char ch : key) out += (ch == '.' || ch == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        return out;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    const std::map<std::string, std::string>& entries() const { return values_; }

    std::string get_string(const std::string& key, const std::string& def) const {
        auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    double get_double(const std::string& key, double def) const {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        char* end = nullptr;
        const double v = std::strtod(it->second.c_str(), &end);
        if (end == it->second.c_str() || *end != '\0') throw SchemaError("config key " + key + " is not a number");
        return v;
    }

    std::int64_t get_int(const std::string& key, std::int64_t def) const {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        char* end = nullptr;
        const long long v = std::strtoll(it->second.c_str(), &end, 10);
        if (end == it->second.c_str() || *end != '\0') throw SchemaError("config key " + key + " is not an integer");
        return v;
    }

    bool operator==(const Config& o) const { return values_ == o.values_; }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    static std::string strip_comment(const std::string& line) {
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '#' && !in_str) return trim(line.substr(0, i));
        }
        return trim(line);
    }

    static std::string quote(const std::string& v) {
        const bool plain = !v.empty() && std::all_of(v.begin(), v.end(), [](char ch) {
            return std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '+' || ch == '_';
        });
        return plain ? v : "\"" + v + "\"";
    }

    std::map<std::string, std::string> values_;
};

}  // namespace actk
