#include "spl/report.hpp"

#include <cmath>

#include <json.hpp>

namespace spl {

bool Report::passed() const
{
    for (const Check& c : checks)
        if (!c.pass) return false;
    return true;
}

Check& Report::add(Check c)
{
    checks.push_back(std::move(c));
    return checks.back();
}

namespace {

nlohmann::ordered_json number(double x)
{
    if (std::isfinite(x)) return x;
    return nullptr;
}

} // namespace

std::string to_json(const Report& report, int indent)
{
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    for (const auto& [key, value] : report.config) config[key] = value;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const Check& c : report.checks) {
        nlohmann::ordered_json j;
        j["name"] = c.name;
        j["paper_ref"] = c.paper_ref;
        j["pass"] = c.pass;
        j["measured"] = number(c.measured);
        j["bound"] = number(c.bound);
        j["tolerance"] = number(c.tolerance);
        checks.push_back(std::move(j));
    }
    nlohmann::ordered_json root;
    root["config"] = std::move(config);
    root["checks"] = std::move(checks);
    return root.dump(indent);
}

Check upper(std::string name, std::string ref, double measured, double bound, double tolerance)
{
    return {std::move(name), std::move(ref), measured <= bound + tolerance, measured, bound, tolerance};
}

Check near(std::string name, std::string ref, double measured, double expected, double tolerance)
{
    return {std::move(name), std::move(ref), std::abs(measured - expected) <= tolerance, measured, expected,
            tolerance};
}

Check within(std::string name, std::string ref, double measured, double lo, double hi)
{
    return {std::move(name), std::move(ref), measured >= lo && measured <= hi, measured, hi, hi - lo};
}

} // namespace spl
