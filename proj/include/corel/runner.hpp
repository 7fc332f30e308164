#ifndef COREL_RUNNER_HPP
#define COREL_RUNNER_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "corel/config.hpp"

namespace corel {

struct RunOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    int seed_count = 1;         // runs seeds s .. s+K-1
    bool with_baseline = false; // adds a random-mutation trace per seed
};

/// Runs the configured experiment for each seed, writing per-seed iteration
/// logs, per-evaluation curves, summaries, and a wall-clock sidecar under
/// output_dir, plus mean/stderr aggregates when seed_count > 1. Returns 0 on
/// success (budget exhaustion included), 1 if any run aborted.
int cmd_run(const RunOptions& opts);

/// Writes the configured kernel's Gram matrix over the indicator embeddings of
/// the sequences in `seqs_path` (one per line) as CSV, plus a `.params.json`
/// sidecar with the kernel constants used.
int cmd_kernel_matrix(const std::string& config_path, const std::string& seqs_path,
                      const std::string& out_path);

// COREL_LOG=0 silent (default), 1 per-run lines, 2 per-iteration lines; all on stderr.
int log_level();
void log_info(const std::string& message);
void log_debug(const std::string& message);

/// %.12g, the fixed width used by every CSV the runner emits.
std::string format_real(double v);

void write_text_atomic(const std::string& path, const std::string& content);

} // namespace corel

#endif
