#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "viab/experiments.hpp"
#include "viab/parallel.hpp"

namespace {

struct RunOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 0;
};

void add_common(CLI::App* sub, RunOptions& opt) {
    sub->add_option("--config", opt.config, "experiment config (INI)")->required();
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--out", opt.out, "artifact directory (default: [output] directory or .)");
    sub->add_option("--threads", opt.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
}

int run_kind(const std::string& kind, const RunOptions& opt) {
    viab::ExperimentConfig cfg;
    try {
        cfg = viab::parse_config_file(opt.config, kind);
        if (opt.seed) cfg.set_seed(*opt.seed);
    } catch (const viab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return viab::kExitConfig;
    }
    const viab::RunResult res = viab::run_checked(cfg);
    if (res.exit_code == viab::kExitConfig || res.exit_code == viab::kExitNumerical) {
        std::cerr << res.summary << '\n';
        return res.exit_code;
    }
    const std::string dir = !opt.out.empty() ? opt.out : cfg.section("output").get_string("directory", ".");
    try {
        viab::write_artifacts(res, dir);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return viab::kExitConfig;
    }
    std::cout << res.kind << " (seed " << res.seed << "): " << res.summary << '\n';
    for (const auto& [name, content] : res.artifacts) std::cout << "  wrote " << dir << '/' << name << '\n';
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"viab-qt: quasi-tangency and viability experiments for semilinear stochastic control systems"};
    app.require_subcommand(1);

    RunOptions opt;
    for (const auto& kind : viab::kExperimentKinds) {
        auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        add_common(sub, opt);
    }
    std::string replay_path;
    int replay_threads = 0;
    auto* rp = app.add_subcommand("replay", "re-run stored configs and require byte-identical CSVs");
    rp->add_option("path", replay_path, "artifact directory or stored .ini")->required();
    rp->add_option("--threads", replay_threads, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : viab::kExitConfig;
    }

    if (rp->parsed()) {
        if (replay_threads > 0) viab::set_thread_count(replay_threads);
        const viab::ReplayResult r = viab::replay(replay_path);
        (r.exit_code == viab::kExitPass ? std::cout : std::cerr) << r.message << (r.message.empty() || r.message.back() == '\n' ? "" : "\n");
        return r.exit_code;
    }
    if (opt.threads > 0) viab::set_thread_count(opt.threads);
    for (const auto& kind : viab::kExperimentKinds)
        if (app.got_subcommand(kind)) return run_kind(kind, opt);
    return viab::kExitConfig;
}
