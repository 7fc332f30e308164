#ifndef COREL_BLACKBOX_HPP
#define COREL_BLACKBOX_HPP

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "corel/acquisition.hpp"
#include "corel/sequence.hpp"

namespace corel {

/// Deterministic objective over sequences, 1 or 2 objective values per call.
/// `maximize` gives the sense of each raw objective; the BO loop negates
/// minimized objectives internally. The evaluation counter is shared across
/// copies, so a metered wrapper and its source see the same count.
class BlackBox {
public:
    using EvalFn = std::function<std::vector<double>(const Sequence&)>;

    BlackBox(int objective_count, std::vector<bool> maximize, EvalFn fn);

    std::vector<double> evaluate(const Sequence& x) const;

    int objective_count() const { return objective_count_; }
    const std::vector<bool>& maximize() const { return maximize_; }
    long long count() const { return counter_->load(); }
    std::optional<long long> budget() const { return budget_; }

    friend BlackBox metered(const BlackBox& bb, long long budget);

private:
    int objective_count_;
    std::vector<bool> maximize_;
    EvalFn fn_;
    std::shared_ptr<std::atomic<long long>> counter_;
    std::optional<long long> budget_;
};

/// Budget-limited view with a fresh counter; over-budget calls raise
/// budget_exhausted without touching the wrapped function.
BlackBox metered(const BlackBox& bb, long long budget);

/// Plateau with a cut-off: f(x) = base while matches(x, target) < threshold,
/// then base − slope·(matches − threshold + 1). Minimization; optimum at the
/// target itself.
BlackBox cutoff_motif_landscape(const Sequence& target, int threshold, double base, double slope);

/// f(x) = Σ_l weight[l]·[x[l] ≠ target[l]]. Minimization.
BlackBox weighted_hamming_landscape(const Sequence& target, const std::vector<double>& position_weights);

/// Maximization pair (−dist(x, targetA), −dist(x, targetB)); conflicting
/// whenever the targets differ.
BlackBox two_objective_landscape(const Sequence& targetA, const Sequence& targetB);

struct EnumerationMinimum {
    double value = 0.0;
    std::vector<Sequence> argmins;  // lexicographic order
};

/// Exhaustive single-objective minimum of the raw value over all A^L
/// sequences (A^L ≤ 1e6). Test oracle.
EnumerationMinimum enumerate_minimum(const BlackBox& bb, int length, int alphabet_size);

struct EnumerationPareto {
    std::vector<Sequence> sequences;  // lexicographic order
    std::vector<Point2> values;       // maximization convention, senses applied
};

/// Exhaustive bi-objective Pareto set over all A^L sequences (A^L ≤ 1e6).
EnumerationPareto enumerate_pareto(const BlackBox& bb, int length, int alphabet_size);

} // namespace corel

#endif
