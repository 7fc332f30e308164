#ifndef COREL_ERROR_HPP
#define COREL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace corel {

enum class Errc {
    invalid_sequence,
    invalid_distribution,
    invalid_weighting,
    dimension_mismatch,
    budget,            // enumeration space too large for an exact routine
    incomplete_table,
    unfittable_model,
    invalid_reference,
    undefined_metric,
    optimization_failed,
    invalid_corpus,
    invalid_input,
    budget_exhausted,  // metered black box out of evaluations
    invalid_config,
    internal
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace corel

#endif
