#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spl/discretization.hpp"

namespace spl {

/// Settings shared by every CLI subcommand. Tolerance defaults equal the acceptance values.
struct ExperimentConfig {
    std::string curve = "circle:rho=0.5";
    std::string q = "const:1";           ///< const:c | expr:<expression in x, y>
    std::string domain = "disk";         ///< disk | square:L (side L centred at the origin)
    std::string method = "greens";       ///< greens | grid
    int grid = 512;                      ///< cells per axis
    int nodes = 4096;
    std::string radii = "0.1,0.05,0.025,0.0125";
    double alpha = 0.5;
    std::string probes = "0,0";          ///< x,y;x,y;...
    int node_stride = 16;
    double u0 = 0.02;                    ///< Alt-Caffarelli boundary value
    std::string epsilons = "0.008,0.004";
    int steps = 3000;
    std::uint64_t seed = 1;
    std::string json;                    ///< report path, empty for stdout
    std::string csv;
    std::string raster;

    double tol_radial_greens = 1e-6;
    double tol_radial_grid = 2e-3;
    double tol_jump = 0.01;
    double tol_methods = 0.005;
    double tol_pv = 1e-3;
    double tol_lipschitz_change = 0.05;
    double growth_lo = 1.7;
    double growth_hi = 2.3;
    double tol_blowup_ratio = 0.67;
    double tol_theta = 0.02;
    double tol_trace = 0.02;
    double tol_wolff = 0.05;
    double comparison_lo = 0.5;
    double comparison_hi = 1.5;
    double tol_crosscheck = 5e-3;
    double tol_v1_lipschitz = 0.1;
    double gradient_floor = 1e-6;

    /// `key = value` lines in a fixed key order, doubles in shortest round-trip form.
    std::string canonical() const;
    static ExperimentConfig parse(const std::string& text);
    /// Assigns one key; throws ParseError for unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
    std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Comma-separated expressions, or a power range such as `2^-4..2^-12` (step one in the exponent).
std::vector<double> parse_list(const std::string& text);
std::vector<Vec2> parse_points(const std::string& text);
/// const:c or expr:<expression>; the result keeps the exact field.
Density parse_density(const std::string& spec, const CurveDiscretization& disc);
std::string format_double(double x);

} // namespace spl
