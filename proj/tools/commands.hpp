#pragma once

#include <functional>
#include <map>
#include <string>

#include "spl/config.hpp"
#include "spl/report.hpp"

namespace spl::cli {

using Command = std::function<Report(const ExperimentConfig&)>;

/// Subcommand name -> implementation, excluding verify-all.
const std::map<std::string, Command>& commands();

/// Every subcommand on fixed configurations; `quick` shrinks node counts and grids.
Report verify_all(const ExperimentConfig& base, bool quick);

} // namespace spl::cli
