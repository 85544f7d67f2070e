#pragma once

#include <string>
#include <utility>
#include <vector>

namespace spl {

/// One verified inequality or identity.
struct Check {
    std::string name;
    std::string paper_ref; ///< what property the check exercises
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
};

struct Report {
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<Check> checks;

    bool passed() const;
    Check& add(Check c);
};

/// {"config": {...}, "checks": [...]} with keys in insertion order.
std::string to_json(const Report& report, int indent = 2);

/// Check that measured <= bound.
Check upper(std::string name, std::string ref, double measured, double bound, double tolerance = 0.0);
/// Check that |measured - expected| <= tolerance.
Check near(std::string name, std::string ref, double measured, double expected, double tolerance);
/// Check that lo <= measured <= hi (bound = hi, tolerance = hi - lo).
Check within(std::string name, std::string ref, double measured, double lo, double hi);

} // namespace spl
