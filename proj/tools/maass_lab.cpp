#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "maass/cli.hpp"

using namespace maass::cli;

namespace {

// flag name, config key, help
struct ValueFlag {
    const char* flag;
    const char* key;
    const char* help;
};
const ValueFlag kValueFlags[] = {
    {"--level", "level", "level N of Gamma_0(N), 1 or a prime"},
    {"--sym", "sym", "even+, even-, odd+, odd- or all"},
    {"--r", "r", "spectral parameter range LO:HI"},
    {"--eps", "eps", "truncation error target"},
    {"--tol", "tol", "refinement tolerance in R"},
    {"--delta", "delta", "L-function series split point (0: 1/sqrt(N))"},
    {"--tmax", "tmax", "largest t of the Z(t) grid"},
    {"--seed", "seed", "seed of every random choice"},
    {"--out", "out", "store directory"},
    {"--delete-one", "delete_one", "stats weyl: drop the newform with 1/4 + R^2 nearest X"},
    {"--threads", "threads", "worker threads (0: all)"},
    {"--n-points", "n_points", "collocation points per refine (0: 4M + 8)"},
    {"--y0", "y0", "collocation height (0: automatic)"},
    {"--window", "window", "audit window in entries (0: automatic)"},
    {"--cache-dir", "cache_dir", "level-one cache directory"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Maass cusp forms on Gamma_0(N): locate, refine, L-functions, statistics"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_file;
    bool print_config = false;
    std::vector<std::string> ids;
    std::map<std::string, std::string> values;
    app.add_option("--config", config_file, "key = value configuration file; flags override it");
    app.add_flag("--print-config", print_config, "print every setting with its default and exit");
    for (const auto& f : kValueFlags) app.add_option(f.flag, values[f.key], f.help);
    app.add_option("--id", ids, "form ids for lfun (as listed in forms.jsonl)");

    auto* scan = app.add_subcommand("scan", "scan an R range, refine every dip, write the store");
    auto* refine = app.add_subcommand("refine", "refine one eigenvalue inside --r LO:HI and add it to the store");
    auto* lfun = app.add_subcommand("lfun", "compute Z(t) grids, zeros and critical values for stored forms");
    auto* stats = app.add_subcommand("stats", "spectral and L-function statistics as CSV series");
    std::string which;
    stats->add_option("which", which, "weyl, spacing, oldforms, firstzero, critvals or zerospacing")->required();
    auto* verify = app.add_subcommand("verify", "re-check every stored form");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kValidation;
    }

    RunConfig cfg;
    try {
        if (print_config) {
            write_default_config(std::cout);
            return kOk;
        }
        if (!config_file.empty()) load_config_file(cfg, config_file);
        for (const auto& f : kValueFlags) {
            if (app.count(f.flag) > 0) apply_setting(cfg, f.key, values[f.key]);
        }
        cfg.ids = ids;

        std::signal(SIGINT, [](int) { request_stop(); });
        if (*scan) return cmd_scan(cfg, std::cout);
        if (*refine) return cmd_refine(cfg, std::cout);
        if (*lfun) return cmd_lfun(cfg, std::cout);
        if (*stats) return cmd_stats(cfg, which, std::cout);
        if (*verify) return cmd_verify(cfg, std::cout);
        std::cout << app.help();
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "maass-lab: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
