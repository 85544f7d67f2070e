#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "spl/parallel.hpp"
#include "spl/types.hpp"

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw spl::ParseError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Measure-data Poisson solver and regularity experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    bool quick = false;
    int threads = 0;
    app.add_option("--config", config_path, "key = value config file, applied before flags");
    app.add_option("--threads", threads, "worker threads (overrides SPL_THREADS)");

    const spl::ExperimentConfig defaults;
    std::map<std::string, std::string> overrides;
    for (const auto& [key, value] : defaults.entries()) {
        std::string flag = "--" + key;
        if (key == "probes") flag += ",--probe";
        app.add_option(flag, overrides[key])->default_str(value);
    }

    std::string subcommand;
    for (const auto& [name, cmd] : spl::cli::commands())
        app.add_subcommand(name)->callback([&subcommand, n = name] { subcommand = n; });
    auto* all = app.add_subcommand("verify-all", "run every experiment on fixed configurations");
    all->add_flag("--quick", quick, "smaller node counts and grids");
    all->callback([&subcommand] { subcommand = "verify-all"; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (threads > 0) spl::set_thread_count(unsigned(threads));
        spl::ExperimentConfig config =
            config_path.empty() ? spl::ExperimentConfig{} : spl::ExperimentConfig::parse(read_file(config_path));
        for (const auto& [key, value] : overrides)
            if (!value.empty()) config.set(key, value);

        const auto started = std::chrono::steady_clock::now();
        const spl::Report report = subcommand == "verify-all" ? spl::cli::verify_all(config, quick)
                                                              : spl::cli::commands().at(subcommand)(config);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        const std::string text = spl::to_json(report) + "\n";
        if (config.json.empty()) {
            std::cout << text;
        } else {
            std::ofstream(config.json) << text;
            nlohmann::ordered_json meta;
            meta["subcommand"] = subcommand;
            meta["timestamp"] = utc_timestamp();
            meta["seconds"] = seconds;
            meta["threads"] = spl::thread_count();
            std::ofstream(config.json + ".meta.json") << meta.dump(2) << "\n";
        }

        nlohmann::json failed = nlohmann::json::array();
        for (const auto& c : report.checks)
            if (!c.pass) failed.push_back(c.name);
        if (!failed.empty()) {
            std::cerr << failed.dump() << "\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    }
}
