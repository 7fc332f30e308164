#include "corel/blackbox.hpp"

#include <limits>

#include "corel/distribution.hpp"
#include "corel/error.hpp"

namespace corel {

BlackBox::BlackBox(int objective_count, std::vector<bool> maximize, EvalFn fn)
    : objective_count_(objective_count),
      maximize_(std::move(maximize)),
      fn_(std::move(fn)),
      counter_(std::make_shared<std::atomic<long long>>(0)) {
    if (objective_count_ < 1 || objective_count_ > 2)
        throw Error(Errc::invalid_input, "objective count must be 1 or 2");
    if (static_cast<int>(maximize_.size()) != objective_count_)
        throw Error(Errc::invalid_input, "one sense flag per objective required");
    if (!fn_) throw Error(Errc::invalid_input, "black box needs an evaluation function");
}

std::vector<double> BlackBox::evaluate(const Sequence& x) const {
    if (budget_) {
        // Reserve a slot first so concurrent over-budget calls never reach fn_.
        long long cur = counter_->load();
        for (;;) {
            if (cur >= *budget_)
                throw Error(Errc::budget_exhausted, "black-box evaluation budget exhausted");
            if (counter_->compare_exchange_weak(cur, cur + 1)) break;
        }
        try {
            auto values = fn_(x);
            if (static_cast<int>(values.size()) != objective_count_)
                throw Error(Errc::internal, "black box returned wrong objective count");
            return values;
        } catch (...) {
            counter_->fetch_sub(1);
            throw;
        }
    }
    auto values = fn_(x);
    if (static_cast<int>(values.size()) != objective_count_)
        throw Error(Errc::internal, "black box returned wrong objective count");
    counter_->fetch_add(1);
    return values;
}

BlackBox metered(const BlackBox& bb, long long budget) {
    if (budget < 0) throw Error(Errc::invalid_input, "budget must be nonnegative");
    BlackBox wrapped(bb.objective_count_, bb.maximize_, bb.fn_);
    wrapped.budget_ = budget;
    return wrapped;
}

namespace {

int matches(const Sequence& x, const Sequence& target) {
    if (x.length() != target.length())
        throw Error(Errc::dimension_mismatch, "sequence length does not match the landscape");
    int m = 0;
    for (int l = 0; l < x.length(); ++l) m += x[l] == target[l];
    return m;
}

} // namespace

BlackBox cutoff_motif_landscape(const Sequence& target, int threshold, double base, double slope) {
    if (threshold < 0 || threshold > target.length())
        throw Error(Errc::invalid_input, "threshold must lie in [0, L]");
    return BlackBox(1, {false}, [target, threshold, base, slope](const Sequence& x) {
        const int m = matches(x, target);
        const double value = m < threshold ? base : base - slope * (m - threshold + 1);
        return std::vector<double>{value};
    });
}

BlackBox weighted_hamming_landscape(const Sequence& target,
                                    const std::vector<double>& position_weights) {
    if (static_cast<int>(position_weights.size()) != target.length())
        throw Error(Errc::dimension_mismatch, "one weight per position required");
    for (double w : position_weights)
        if (w < 0.0) throw Error(Errc::invalid_input, "position weights must be nonnegative");
    return BlackBox(1, {false}, [target, position_weights](const Sequence& x) {
        if (x.length() != target.length())
            throw Error(Errc::dimension_mismatch, "sequence length does not match the landscape");
        double value = 0.0;
        for (int l = 0; l < x.length(); ++l)
            if (x[l] != target[l]) value += position_weights[l];
        return std::vector<double>{value};
    });
}

BlackBox two_objective_landscape(const Sequence& targetA, const Sequence& targetB) {
    if (targetA.length() != targetB.length())
        throw Error(Errc::dimension_mismatch, "targets must share a length");
    return BlackBox(2, {true, true}, [targetA, targetB](const Sequence& x) {
        return std::vector<double>{-static_cast<double>(hamming_distance(x, targetA)),
                                   -static_cast<double>(hamming_distance(x, targetB))};
    });
}

EnumerationMinimum enumerate_minimum(const BlackBox& bb, int length, int alphabet_size) {
    if (bb.objective_count() != 1)
        throw Error(Errc::invalid_input, "enumerate_minimum needs a single-objective black box");
    EnumerationMinimum out;
    out.value = std::numeric_limits<double>::infinity();
    for_each_sequence(length, alphabet_size, [&](const Sequence& x) {
        const double v = bb.evaluate(x)[0];
        if (v < out.value) {
            out.value = v;
            out.argmins.clear();
        }
        if (v == out.value) out.argmins.push_back(x);
    });
    return out;
}

EnumerationPareto enumerate_pareto(const BlackBox& bb, int length, int alphabet_size) {
    if (bb.objective_count() != 2)
        throw Error(Errc::invalid_input, "enumerate_pareto needs a two-objective black box");
    std::vector<Sequence> seqs;
    std::vector<Point2> vals;
    for_each_sequence(length, alphabet_size, [&](const Sequence& x) {
        const auto raw = bb.evaluate(x);
        vals.push_back({bb.maximize()[0] ? raw[0] : -raw[0], bb.maximize()[1] ? raw[1] : -raw[1]});
        seqs.push_back(x);
    });
    EnumerationPareto out;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < seqs.size() && !dominated; ++j)
            dominated = dominates(vals[j], vals[i]);
        if (!dominated) {
            out.sequences.push_back(seqs[i]);
            out.values.push_back(vals[i]);
        }
    }
    return out;
}

} // namespace corel
