#include "thinlayer/config.hpp"

#include "thinlayer/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace thinlayer {

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& p : problems) {
              msg += "\n  " + p;
          }
          return msg;
      }()),
      problems_(std::move(problems))
{
}

namespace {

// ---------------------------------------------------------------------------
// Syntax: a TOML subset with [section] headers, key = value lines, numbers,
// booleans, double-quoted strings and (possibly multi-line) numeric arrays.

enum class Kind { Number, Bool, String, Array };

struct Value {
    Kind kind = Kind::Number;
    std::string text;                ///< raw token for scalars, unescaped for strings
    std::vector<std::string> items;  ///< raw tokens for arrays
    int line = 0;
};

using Table = std::map<std::string, std::map<std::string, Value>>;

std::string trim(std::string_view s)
{
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])) != 0) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])) != 0) {
        --b;
    }
    return std::string(s.substr(a, b - a));
}

// Remove a trailing comment that is not inside a string.
std::string strip_comment(std::string_view line)
{
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_string && c == '\\') {
            ++i;
        } else if (c == '"') {
            in_string = !in_string;
        } else if (c == '#' && !in_string) {
            return std::string(line.substr(0, i));
        }
    }
    return std::string(line);
}

bool valid_key(std::string_view k)
{
    return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
    });
}

bool parse_string(std::string_view raw, std::string& out)
{
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
        return false;
    }
    out.clear();
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\\') {
            if (i + 2 >= raw.size()) {
                return false;
            }
            c = raw[++i];
            if (c == 'n') {
                c = '\n';
            } else if (c == 't') {
                c = '\t';
            } else if (c != '\\' && c != '"') {
                return false;
            }
        } else if (c == '"') {
            return false;
        }
        out.push_back(c);
    }
    return true;
}

bool looks_numeric(std::string_view s)
{
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    return ec == std::errc() && ptr == end;
}

Table parse_syntax(std::string_view text)
{
    Table table;
    std::vector<std::string> errors;
    std::istringstream in{std::string(text)};
    std::string section;
    std::string line;
    int lineno = 0;
    std::set<std::string> seen_sections;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = trim(strip_comment(line));
        if (body.empty()) {
            continue;
        }
        if (body.front() == '[') {
            if (body.back() != ']') {
                errors.push_back(fmt::format("line {}: unterminated section header", lineno));
                continue;
            }
            section = trim(std::string_view(body).substr(1, body.size() - 2));
            if (!valid_key(section)) {
                errors.push_back(fmt::format("line {}: invalid section name '{}'", lineno, section));
            } else if (!seen_sections.insert(section).second) {
                errors.push_back(fmt::format("line {}: section [{}] repeated", lineno, section));
            }
            table[section];
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            errors.push_back(fmt::format("line {}: expected 'key = value'", lineno));
            continue;
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        std::string raw = trim(std::string_view(body).substr(eq + 1));
        const int key_line = lineno;
        if (!valid_key(key)) {
            errors.push_back(fmt::format("line {}: invalid key '{}'", lineno, key));
            continue;
        }
        if (section.empty()) {
            errors.push_back(fmt::format("line {}: key '{}' outside any section", lineno, key));
            continue;
        }
        Value v;
        v.line = key_line;
        bool ok = true;
        if (!raw.empty() && raw.front() == '[') {
            // Arrays may continue over several lines until the closing bracket.
            while (raw.find(']') == std::string::npos && std::getline(in, line)) {
                ++lineno;
                raw += " " + trim(strip_comment(line));
            }
            const auto close = raw.find(']');
            if (close == std::string::npos || !trim(std::string_view(raw).substr(close + 1)).empty()) {
                errors.push_back(fmt::format("line {}: malformed array for '{}'", key_line, key));
                continue;
            }
            v.kind = Kind::Array;
            const std::string inner = raw.substr(1, close - 1);
            std::stringstream items(inner);
            std::string item;
            std::vector<std::string> parts;
            while (std::getline(items, item, ',')) {
                parts.push_back(trim(item));
            }
            if (!parts.empty() && parts.back().empty()) {
                parts.pop_back();  // trailing comma
            }
            for (const auto& p : parts) {
                if (!looks_numeric(p)) {
                    ok = false;
                }
            }
            if (!ok) {
                errors.push_back(fmt::format("line {}: array '{}' must hold numbers only", key_line, key));
                continue;
            }
            v.items = std::move(parts);
        } else if (!raw.empty() && raw.front() == '"') {
            v.kind = Kind::String;
            if (!parse_string(raw, v.text)) {
                errors.push_back(fmt::format("line {}: malformed string for '{}'", key_line, key));
                continue;
            }
        } else if (raw == "true" || raw == "false") {
            v.kind = Kind::Bool;
            v.text = raw;
        } else if (looks_numeric(raw)) {
            v.kind = Kind::Number;
            v.text = raw;
        } else {
            errors.push_back(fmt::format("line {}: cannot parse value '{}' for '{}'", key_line, raw, key));
            continue;
        }
        auto& sec = table[section];
        if (sec.count(key) != 0) {
            errors.push_back(fmt::format("line {}: key '{}.{}' repeated", key_line, section, key));
            continue;
        }
        sec.emplace(key, std::move(v));
    }
    if (!errors.empty()) {
        throw ConfigError(std::move(errors));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Typed extraction with error collection.

class Reader {
public:
    explicit Reader(Table table) : table_(std::move(table)) {}

    std::vector<std::string>& errors() { return errors_; }

    bool has_section(const std::string& s) const { return table_.count(s) != 0; }

    void number(const std::string& s, const std::string& k, double& out)
    {
        const Value* v = find(s, k);
        if (v == nullptr) {
            return;
        }
        if (v->kind != Kind::Number) {
            bad(s, k, *v, "expected a number");
            return;
        }
        out = to_double(v->text);
    }

    void integer(const std::string& s, const std::string& k, std::int64_t& out)
    {
        const Value* v = find(s, k);
        if (v == nullptr) {
            return;
        }
        std::int64_t r = 0;
        if (v->kind != Kind::Number || !to_int(v->text, r)) {
            bad(s, k, *v, "expected an integer");
            return;
        }
        out = r;
    }

    void unsigned_integer(const std::string& s, const std::string& k, std::uint64_t& out)
    {
        const Value* v = find(s, k);
        if (v == nullptr) {
            return;
        }
        std::uint64_t r = 0;
        const auto* end = v->text.data() + v->text.size();
        auto [ptr, ec] = std::from_chars(v->text.data(), end, r);
        if (v->kind != Kind::Number || ec != std::errc() || ptr != end) {
            bad(s, k, *v, "expected a non-negative integer");
            return;
        }
        out = r;
    }

    void boolean(const std::string& s, const std::string& k, bool& out)
    {
        const Value* v = find(s, k);
        if (v == nullptr) {
            return;
        }
        if (v->kind != Kind::Bool) {
            bad(s, k, *v, "expected true or false");
            return;
        }
        out = v->text == "true";
    }

    void string(const std::string& s, const std::string& k, std::string& out)
    {
        const Value* v = find(s, k);
        if (v == nullptr) {
            return;
        }
        if (v->kind != Kind::String) {
            bad(s, k, *v, "expected a string");
            return;
        }
        out = v->text;
    }

    void array(const std::string& s, const std::string& k, std::vector<double>& out)
    {
        const Value* v = find(s, k);
        if (v == nullptr) {
            return;
        }
        if (v->kind != Kind::Array) {
            bad(s, k, *v, "expected an array of numbers");
            return;
        }
        out.clear();
        for (const auto& item : v->items) {
            out.push_back(to_double(item));
        }
    }

    void optional_number(const std::string& s, const std::string& k, std::optional<double>& out)
    {
        if (find(s, k) != nullptr) {
            double v = 0.0;
            number(s, k, v);
            out = v;
        }
    }

    /// Report every key that was never read and every unknown section.
    void reject_unknown(const std::set<std::string>& sections)
    {
        for (const auto& [s, keys] : table_) {
            if (sections.count(s) == 0) {
                const int line = keys.empty() ? 0 : keys.begin()->second.line;
                errors_.push_back(line > 0 ? fmt::format("line {}: unknown section [{}]", line, s)
                                           : fmt::format("unknown section [{}]", s));
                continue;
            }
            for (const auto& [k, v] : keys) {
                if (used_.count(s + "." + k) == 0) {
                    errors_.push_back(fmt::format("line {}: unknown key {}.{}", v.line, s, k));
                }
            }
        }
    }

    int line_of(const std::string& s, const std::string& k) const
    {
        const auto it = table_.find(s);
        if (it == table_.end()) {
            return 0;
        }
        const auto jt = it->second.find(k);
        return jt == it->second.end() ? 0 : jt->second.line;
    }

private:
    const Value* find(const std::string& s, const std::string& k)
    {
        const auto it = table_.find(s);
        if (it == table_.end()) {
            return nullptr;
        }
        const auto jt = it->second.find(k);
        if (jt == it->second.end()) {
            return nullptr;
        }
        used_.insert(s + "." + k);
        return &jt->second;
    }

    void bad(const std::string& s, const std::string& k, const Value& v, const char* what)
    {
        errors_.push_back(fmt::format("line {}: {}.{}: {}", v.line, s, k, what));
    }

    static double to_double(const std::string& t)
    {
        double v = 0.0;
        std::from_chars(t.data(), t.data() + t.size(), v);
        return v;
    }

    static bool to_int(const std::string& t, std::int64_t& out)
    {
        const auto* end = t.data() + t.size();
        auto [ptr, ec] = std::from_chars(t.data(), end, out);
        return ec == std::errc() && ptr == end;
    }

    Table table_;
    std::set<std::string> used_;
    std::vector<std::string> errors_;
};

// ---------------------------------------------------------------------------

void validate(const RunConfig& c, Reader& r)
{
    auto& e = r.errors();
    auto fail = [&](const std::string& section, const std::string& key, const std::string& msg) {
        const int line = r.line_of(section, key);
        e.push_back(line > 0 ? fmt::format("line {}: {}.{}: {}", line, section, key, msg)
                             : fmt::format("{}.{}: {}", section, key, msg));
    };

    bool layers_ok = true;
    double H = 0.0;
    try {
        const LayerStack s = make_layers(c);
        H = s.depth();
    } catch (const Error& ex) {
        layers_ok = false;
        fail("layers", "interfaces", ex.what());
    }

    if (!(c.profile.delta > 0.0)) {
        fail("profile", "delta", fmt::format("must be positive, got {}", c.profile.delta));
    } else if (layers_ok && !(c.profile.delta < 0.5 * H)) {
        fail("profile", "delta", fmt::format("must be below H/2 = {}, got {}", 0.5 * H, c.profile.delta));
    }
    if (!std::isfinite(c.profile.c0)) {
        fail("profile", "c0", "must be finite");
    }
    if (!std::isfinite(c.profile.c_mH)) {
        fail("profile", "c_mH", "must be finite");
    }

    if (c.grid.nx < 4 || c.grid.nx % 2 != 0) {
        fail("grid", "nx", fmt::format("must be even and at least 4, got {}", c.grid.nx));
    }
    if (!(c.grid.target_dz > 0.0)) {
        fail("grid", "target_dz", "must be positive");
    }
    if (c.grid.cell_budget <= 0) {
        fail("grid", "cell_budget", "must be positive");
    }

    if (!(c.time.t_end >= 0.0)) {
        fail("time", "t_end", "must be non-negative");
    }
    if (!(c.time.dt_max > 0.0)) {
        fail("time", "dt_max", "must be positive");
    }
    if (!(c.time.safety > 0.0 && c.time.safety <= 1.0)) {
        fail("time", "safety", "must lie in (0, 1]");
    }
    if (c.time.observer_cadence < 1) {
        fail("time", "observer_cadence", "must be at least 1");
    }

    static const std::set<std::string> kinds{"zero", "mode", "random", "snapshot"};
    if (kinds.count(c.init.kind) == 0) {
        fail("init", "kind", fmt::format("unknown kind '{}' (zero, mode, random, snapshot)", c.init.kind));
    }
    if (c.init.kind == "snapshot" && c.init.snapshot_path.empty()) {
        fail("init", "snapshot_path", "required when kind = \"snapshot\"");
    }
    if (c.init.mode < 0) {
        fail("init", "mode", "must be non-negative");
    }
    if (c.init.vertical_mode < 1) {
        fail("init", "vertical_mode", "must be at least 1");
    }
    if (!(c.init.norm >= 0.0)) {
        fail("init", "norm", "must be non-negative");
    }

    if (c.thin.present) {
        if (!(c.thin.K > 0.0)) {
            fail("thin", "K", "must be positive");
        }
        if (!(c.thin.D > 0.0)) {
            fail("thin", "D", "must be positive");
        }
        if (c.thin.samples < 1) {
            fail("thin", "samples", "must be at least 1");
        }
        bool j_ok = false;
        double h = 0.0;
        if (layers_ok) {
            const auto l = static_cast<std::int64_t>(c.layers.K.size());
            if (c.thin.j < 2 || c.thin.j > l + 1) {
                fail("thin", "j", fmt::format("must lie in [2, {}], got {}", l + 1, c.thin.j));
            } else {
                j_ok = true;
                const auto i = static_cast<std::size_t>(c.thin.j - 2);
                h = c.layers.interfaces[i] - c.layers.interfaces[i + 1];
                if (c.thin.h && std::abs(*c.thin.h - h) > 1e-12 * std::max(1.0, h)) {
                    fail("thin", "h", fmt::format("is {} but layer {} of the base stack is {} thick", *c.thin.h,
                                                  c.thin.j - 1, h));
                }
            }
        }
        if (c.thin.epsilons.empty()) {
            fail("thin", "epsilons", "must list at least one value");
        }
        for (std::size_t k = 0; k < c.thin.epsilons.size(); ++k) {
            const double eps = c.thin.epsilons[k];
            if (!(eps >= 0.0)) {
                fail("thin", "epsilons", fmt::format("entry {} = {} is negative", k, eps));
            } else if (j_ok && !(eps < h)) {
                fail("thin", "epsilons", fmt::format("entry {} = {} is not below h = {}", k, eps, h));
            }
            if (k > 0 && !(eps < c.thin.epsilons[k - 1])) {
                fail("thin", "epsilons", "must be strictly decreasing");
            }
        }
    }

    if (c.attractor.n_init < 1) {
        fail("attractor", "n_init", "must be at least 1");
    }
    if (!(c.attractor.window >= 0.0)) {
        fail("attractor", "window", "must be non-negative");
    }
    if (!(c.attractor.cadence > 0.0)) {
        fail("attractor", "cadence", "must be positive");
    }
    if (!(c.attractor.radius > 0.0)) {
        fail("attractor", "radius", "must be positive");
    }
    if (!(c.attractor.spin_pad >= 0.0)) {
        fail("attractor", "spin_pad", "must be non-negative");
    }
    if (c.attractor.min_snapshots < 1) {
        fail("attractor", "min_snapshots", "must be at least 1");
    }
    if (c.attractor.nx != 0 && (c.attractor.nx < 4 || c.attractor.nx % 2 != 0)) {
        fail("attractor", "nx", "must be 0 or even and at least 4");
    }
    if (!(c.attractor.target_dz >= 0.0)) {
        fail("attractor", "target_dz", "must be non-negative");
    }

    const std::pair<const char*, double> embed[] = {{"C1", c.estimates.C1},   {"C2", c.estimates.C2},
                                                    {"C_u", c.estimates.C_u}, {"C_p", c.estimates.C_p},
                                                    {"C_generic", c.estimates.C}};
    for (const auto& [name, v] : embed) {
        if (!(v > 0.0)) {
            fail("estimates", name, "must be positive");
        }
    }

    if (!(c.audit.tol_factor > 0.0)) {
        fail("audit", "tol_factor", "must be positive");
    }
    if (!(c.audit.slope_rel >= 0.0)) {
        fail("audit", "slope_rel", "must be non-negative");
    }
    if (!(c.audit.coef_slope_tol > 0.0)) {
        fail("audit", "coef_slope_tol", "must be positive");
    }
    if (!(c.audit.null_factor > 0.0)) {
        fail("audit", "null_factor", "must be positive");
    }

    if (c.run.schema != kSchemaVersion) {
        fail("run", "schema", fmt::format("unsupported schema {}, expected {}", c.run.schema, kSchemaVersion));
    }
    if (c.run.workers < 0) {
        fail("run", "workers", "must be non-negative");
    }
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string array(const std::vector<double>& v)
{
    std::string out = "[";
    for (std::size_t k = 0; k < v.size(); ++k) {
        out += (k == 0 ? "" : ", ") + num(v[k]);
    }
    return out + "]";
}

std::string quoted(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
            out.push_back(c);
        } else if (c == '\n') {
            out += "\\n";
        } else if (c == '\t') {
            out += "\\t";
        } else {
            out.push_back(c);
        }
    }
    return out + "\"";
}

const char* boolean(bool b) { return b ? "true" : "false"; }

}  // namespace

RunConfig parse_config(std::string_view text)
{
    Reader r(parse_syntax(text));
    RunConfig c;

    r.array("layers", "interfaces", c.layers.interfaces);
    r.array("layers", "K", c.layers.K);
    r.array("layers", "D", c.layers.D);
    r.number("layers", "L", c.layers.L);

    r.number("profile", "delta", c.profile.delta);
    r.number("profile", "c0", c.profile.c0);
    r.number("profile", "c_mH", c.profile.c_mH);

    r.integer("grid", "nx", c.grid.nx);
    r.number("grid", "target_dz", c.grid.target_dz);
    r.integer("grid", "cell_budget", c.grid.cell_budget);

    r.number("time", "t_end", c.time.t_end);
    r.number("time", "dt_max", c.time.dt_max);
    r.number("time", "safety", c.time.safety);
    r.integer("time", "observer_cadence", c.time.observer_cadence);
    r.boolean("time", "upwind", c.time.upwind);

    r.string("init", "kind", c.init.kind);
    r.number("init", "amplitude", c.init.amplitude);
    r.integer("init", "mode", c.init.mode);
    r.integer("init", "vertical_mode", c.init.vertical_mode);
    r.unsigned_integer("init", "seed", c.init.seed);
    r.number("init", "norm", c.init.norm);
    r.string("init", "snapshot_path", c.init.snapshot_path);

    c.thin.present = r.has_section("thin");
    r.integer("thin", "j", c.thin.j);
    r.optional_number("thin", "h", c.thin.h);
    r.array("thin", "epsilons", c.thin.epsilons);
    r.number("thin", "K", c.thin.K);
    r.number("thin", "D", c.thin.D);
    r.integer("thin", "samples", c.thin.samples);

    r.integer("attractor", "n_init", c.attractor.n_init);
    r.number("attractor", "window", c.attractor.window);
    r.number("attractor", "cadence", c.attractor.cadence);
    r.unsigned_integer("attractor", "seed", c.attractor.seed);
    r.number("attractor", "radius", c.attractor.radius);
    r.number("attractor", "spin_pad", c.attractor.spin_pad);
    r.integer("attractor", "min_snapshots", c.attractor.min_snapshots);
    r.integer("attractor", "nx", c.attractor.nx);
    r.number("attractor", "target_dz", c.attractor.target_dz);

    r.number("estimates", "C1", c.estimates.C1);
    r.number("estimates", "C2", c.estimates.C2);
    r.number("estimates", "C_u", c.estimates.C_u);
    r.number("estimates", "C_p", c.estimates.C_p);
    r.number("estimates", "C_generic", c.estimates.C);

    r.boolean("audit", "enabled", c.audit.enabled);
    r.number("audit", "tol_factor", c.audit.tol_factor);
    r.number("audit", "rate_min", c.audit.rate_min);
    r.number("audit", "slope_rel", c.audit.slope_rel);
    r.number("audit", "coef_slope_tol", c.audit.coef_slope_tol);
    r.number("audit", "null_factor", c.audit.null_factor);

    r.integer("run", "schema", c.run.schema);
    r.integer("run", "workers", c.run.workers);

    r.reject_unknown({"layers", "profile", "grid", "time", "init", "thin", "attractor", "estimates", "audit", "run"});
    validate(c, r);
    if (!r.errors().empty()) {
        throw ConfigError(std::move(r.errors()));
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({fmt::format("cannot read {}", path.string())});
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize(const RunConfig& c)
{
    std::string o;
    auto line = [&o](const std::string& k, const std::string& v) { o += k + " = " + v + "\n"; };
    o += fmt::format("[run]\n");
    line("schema", std::to_string(c.run.schema));
    line("workers", std::to_string(c.run.workers));

    o += "\n[layers]\n";
    line("interfaces", array(c.layers.interfaces));
    line("K", array(c.layers.K));
    line("D", array(c.layers.D));
    line("L", num(c.layers.L));

    o += "\n[profile]\n";
    line("delta", num(c.profile.delta));
    line("c0", num(c.profile.c0));
    line("c_mH", num(c.profile.c_mH));

    o += "\n[grid]\n";
    line("nx", std::to_string(c.grid.nx));
    line("target_dz", num(c.grid.target_dz));
    line("cell_budget", std::to_string(c.grid.cell_budget));

    o += "\n[time]\n";
    line("t_end", num(c.time.t_end));
    line("dt_max", num(c.time.dt_max));
    line("safety", num(c.time.safety));
    line("observer_cadence", std::to_string(c.time.observer_cadence));
    line("upwind", boolean(c.time.upwind));

    o += "\n[init]\n";
    line("kind", quoted(c.init.kind));
    line("amplitude", num(c.init.amplitude));
    line("mode", std::to_string(c.init.mode));
    line("vertical_mode", std::to_string(c.init.vertical_mode));
    line("seed", std::to_string(c.init.seed));
    line("norm", num(c.init.norm));
    line("snapshot_path", quoted(c.init.snapshot_path));

    if (c.thin.present) {
        o += "\n[thin]\n";
        line("j", std::to_string(c.thin.j));
        if (c.thin.h) {
            line("h", num(*c.thin.h));
        }
        line("epsilons", array(c.thin.epsilons));
        line("K", num(c.thin.K));
        line("D", num(c.thin.D));
        line("samples", std::to_string(c.thin.samples));
    }

    o += "\n[attractor]\n";
    line("n_init", std::to_string(c.attractor.n_init));
    line("window", num(c.attractor.window));
    line("cadence", num(c.attractor.cadence));
    line("seed", std::to_string(c.attractor.seed));
    line("radius", num(c.attractor.radius));
    line("spin_pad", num(c.attractor.spin_pad));
    line("min_snapshots", std::to_string(c.attractor.min_snapshots));
    line("nx", std::to_string(c.attractor.nx));
    line("target_dz", num(c.attractor.target_dz));

    o += "\n[estimates]\n";
    line("C1", num(c.estimates.C1));
    line("C2", num(c.estimates.C2));
    line("C_u", num(c.estimates.C_u));
    line("C_p", num(c.estimates.C_p));
    line("C_generic", num(c.estimates.C));

    o += "\n[audit]\n";
    line("enabled", boolean(c.audit.enabled));
    line("tol_factor", num(c.audit.tol_factor));
    line("rate_min", num(c.audit.rate_min));
    line("slope_rel", num(c.audit.slope_rel));
    line("coef_slope_tol", num(c.audit.coef_slope_tol));
    line("null_factor", num(c.audit.null_factor));
    return o;
}

LayerStack make_layers(const RunConfig& c)
{
    return LayerStack(c.layers.L, c.layers.interfaces, c.layers.K, c.layers.D);
}

BackgroundProfile make_profile(const RunConfig& c)
{
    return build_profile(make_layers(c), c.profile.delta, c.profile.c0, c.profile.c_mH);
}

ThinFamily make_family(const RunConfig& c)
{
    if (!c.thin.present) {
        throw ConfigError({"[thin] section required for this command"});
    }
    std::vector<double> eps;
    for (double e : c.thin.epsilons) {
        if (e > 0.0) {
            eps.push_back(e);
        }
    }
    return build_family(make_layers(c), static_cast<int>(c.thin.j), std::move(eps), c.thin.K, c.thin.D);
}

InitSpec make_init(const RunConfig& c)
{
    InitSpec s;
    if (c.init.kind == "mode") {
        s.kind = InitKind::Mode;
    } else if (c.init.kind == "random") {
        s.kind = InitKind::Random;
    } else if (c.init.kind == "snapshot") {
        s.kind = InitKind::Snapshot;
    }
    s.amplitude = c.init.amplitude;
    s.mode = static_cast<int>(c.init.mode);
    s.vertical_mode = static_cast<int>(c.init.vertical_mode);
    s.seed = c.init.seed;
    s.norm = c.init.norm;
    s.snapshot_path = c.init.snapshot_path;
    return s;
}

TransportOptions make_transport(const RunConfig& c)
{
    TransportOptions t;
    t.dt_max = c.time.dt_max;
    t.safety = c.time.safety;
    t.upwind = c.time.upwind;
    return t;
}

}  // namespace thinlayer
