#include "spl/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "spl/expression.hpp"

namespace spl {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        return Expression::parse(v)(0.0, 0.0);
    } catch (const ParseError& e) {
        throw ParseError("config key '" + key + "': " + e.what());
    }
}

long long to_integer(const std::string& key, const std::string& v)
{
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ParseError("config key '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

struct Accessor {
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define SPL_STRING(name) \
    {#name, {[](const ExperimentConfig& c) { return c.name; }, [](ExperimentConfig& c, const std::string& v) { c.name = v; }}}
#define SPL_DOUBLE(name)                                                                     \
    {#name, {[](const ExperimentConfig& c) { return format_double(c.name); },                 \
             [](ExperimentConfig& c, const std::string& v) { c.name = to_double(#name, v); }}}
#define SPL_INT(name)                                                                          \
    {#name, {[](const ExperimentConfig& c) { return std::to_string(c.name); },                  \
             [](ExperimentConfig& c, const std::string& v) { c.name = decltype(c.name)(to_integer(#name, v)); }}}

const std::vector<std::pair<std::string, Accessor>>& fields()
{
    static const std::vector<std::pair<std::string, Accessor>> table = {
        SPL_STRING(curve),
        SPL_STRING(q),
        SPL_STRING(domain),
        SPL_STRING(method),
        SPL_INT(grid),
        SPL_INT(nodes),
        SPL_STRING(radii),
        SPL_DOUBLE(alpha),
        SPL_STRING(probes),
        SPL_INT(node_stride),
        SPL_DOUBLE(u0),
        SPL_STRING(epsilons),
        SPL_INT(steps),
        SPL_INT(seed),
        SPL_STRING(json),
        SPL_STRING(csv),
        SPL_STRING(raster),
        SPL_DOUBLE(tol_radial_greens),
        SPL_DOUBLE(tol_radial_grid),
        SPL_DOUBLE(tol_jump),
        SPL_DOUBLE(tol_methods),
        SPL_DOUBLE(tol_pv),
        SPL_DOUBLE(tol_lipschitz_change),
        SPL_DOUBLE(growth_lo),
        SPL_DOUBLE(growth_hi),
        SPL_DOUBLE(tol_blowup_ratio),
        SPL_DOUBLE(tol_theta),
        SPL_DOUBLE(tol_trace),
        SPL_DOUBLE(tol_wolff),
        SPL_DOUBLE(comparison_lo),
        SPL_DOUBLE(comparison_hi),
        SPL_DOUBLE(tol_crosscheck),
        SPL_DOUBLE(tol_v1_lipschitz),
        SPL_DOUBLE(gradient_floor),
    };
    return table;
}

#undef SPL_STRING
#undef SPL_DOUBLE
#undef SPL_INT

} // namespace

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string ExperimentConfig::canonical() const
{
    std::string out;
    for (const auto& [key, f] : fields()) out += key + " = " + f.get(*this) + "\n";
    return out;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, f] : fields()) out.emplace_back(key, f.get(*this));
    return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value)
{
    for (const auto& [name, f] : fields())
        if (name == key) {
            f.set(*this, value);
            return;
        }
    throw ParseError("unknown config key '" + key + "'");
}

ExperimentConfig ExperimentConfig::parse(const std::string& text)
{
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(number) + ": expected 'key = value'");
        c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return c;
}

std::vector<double> parse_list(const std::string& text)
{
    const std::string t = trim(text);
    const auto dots = t.find("..");
    if (dots != std::string::npos) {
        const std::string a = trim(t.substr(0, dots)), b = trim(t.substr(dots + 2));
        const auto ca = a.find('^'), cb = b.find('^');
        if (ca == std::string::npos || cb == std::string::npos || a.substr(0, ca) != b.substr(0, cb))
            throw ParseError("range '" + text + "': expected base^e1..base^e2");
        const double base = to_double("range", a.substr(0, ca));
        const long long e1 = to_integer("range", a.substr(ca + 1));
        const long long e2 = to_integer("range", b.substr(cb + 1));
        std::vector<double> out;
        const long long step = e2 >= e1 ? 1 : -1;
        for (long long e = e1;; e += step) {
            out.push_back(std::pow(base, double(e)));
            if (e == e2) break;
        }
        return out;
    }
    std::vector<double> out;
    for (const std::string& part : split(t, ','))
        if (!part.empty()) out.push_back(to_double("list", part));
    return out;
}

std::vector<Vec2> parse_points(const std::string& text)
{
    std::vector<Vec2> out;
    for (const std::string& part : split(text, ';')) {
        if (part.empty()) continue;
        const std::vector<double> xy = parse_list(part);
        if (xy.size() != 2) throw ParseError("point '" + part + "': expected x,y");
        out.emplace_back(xy[0], xy[1]);
    }
    return out;
}

Density parse_density(const std::string& spec, const CurveDiscretization& disc)
{
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ParseError("density spec '" + spec + "': expected const:c or expr:...");
    const std::string kind = spec.substr(0, colon), body = spec.substr(colon + 1);
    if (kind == "const") {
        const double c = to_double("q", body);
        return sample_density(disc, [c](const Vec2&) { return c; });
    }
    if (kind == "expr") {
        const Expression e = Expression::parse(body);
        return sample_density(disc, [e](const Vec2& x) { return e(x.x(), x.y()); });
    }
    throw ParseError("density spec '" + spec + "': unknown kind '" + kind + "'");
}

} // namespace spl
