#ifndef COREL_VERIFY_HPP
#define COREL_VERIFY_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace corel {

/// One self-check: returns std::nullopt on success, else a failure message.
/// The seed is printed on failure so the exact instance can be replayed.
struct VerifyCheck {
    std::string name;
    bool fast = true;  // fast checks run at both levels
    std::uint64_t seed = 1;
    std::function<std::optional<std::string>(std::uint64_t seed)> run;
};

const std::vector<VerifyCheck>& verify_checks();

/// Runs the registry (fast subset unless `full`), printing one line per
/// check; returns 0 when everything holds, 1 otherwise.
int cmd_verify(bool full);

} // namespace corel

#endif
