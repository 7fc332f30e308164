#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "corel/runner.hpp"
#include "corel/verify.hpp"

namespace {

// 2 for bad inputs of any kind, 1 for runtime/verification failures
int exit_code_for(corel::Errc code) {
    switch (code) {
        case corel::Errc::invalid_config:
        case corel::Errc::invalid_input:
        case corel::Errc::invalid_corpus:
        case corel::Errc::invalid_sequence:
        case corel::Errc::invalid_distribution:
        case corel::Errc::invalid_weighting:
        case corel::Errc::dimension_mismatch:
            return 2;
        default:
            return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CoRel: Bayesian optimization of discrete sequences via continuous relaxation"};
    app.require_subcommand(1);

    std::string run_config;
    std::uint64_t seed_value = 0;
    int seed_count = 1;
    std::string baseline;
    CLI::App* run = app.add_subcommand("run", "Run a configured experiment");
    run->add_option("config", run_config, "experiment config (JSON)")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed_value, "override the config seed");
    run->add_option("--seeds", seed_count, "run seeds s..s+K-1 and aggregate")
        ->check(CLI::PositiveNumber);
    run->add_option("--baseline", baseline, "add a control trace (random-mutation)");

    std::string level = "fast";
    CLI::App* verify = app.add_subcommand("verify", "Run the built-in invariant checks");
    verify->add_option("--level", level, "fast (default) or full")
        ->check(CLI::IsMember({"fast", "full"}));

    std::string km_config, km_seqs, km_out;
    CLI::App* km = app.add_subcommand("kernel-matrix",
                                      "Write the configured kernel's Gram matrix as CSV");
    km->add_option("config", km_config, "experiment config (JSON)")->required();
    km->add_option("seqs", km_seqs, "sequences, one per line")->required();
    km->add_option("out", km_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            if (!baseline.empty() && baseline != "random-mutation") {
                std::fprintf(stderr, "error: unknown baseline '%s' (try random-mutation)\n",
                             baseline.c_str());
                return 2;
            }
            corel::RunOptions opts;
            opts.config_path = run_config;
            if (seed_opt->count() > 0) opts.seed_override = seed_value;
            opts.seed_count = seed_count;
            opts.with_baseline = !baseline.empty();
            return corel::cmd_run(opts);
        }
        if (verify->parsed()) return corel::cmd_verify(level == "full");
        if (km->parsed()) return corel::cmd_kernel_matrix(km_config, km_seqs, km_out);
    } catch (const corel::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
