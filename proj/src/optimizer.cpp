#include "corel/optimizer.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>

#include "corel/error.hpp"

namespace corel {

namespace {

// Shared bookkeeping for the discrete search: caches values, counts real
// acquisition calls, and remembers visit order for tie-breaking.
class DiscreteEvaluator {
public:
    DiscreteEvaluator(const AcqFn& acq, int alphabet_size, int max_evals)
        : acq_(acq), alphabet_size_(alphabet_size), max_evals_(max_evals) {}

    // Returns false when the budget is exhausted and x was never scored.
    bool score(const Sequence& x, double& value) {
        auto it = cache_.find(x);
        if (it != cache_.end()) {
            value = it->second;
            return true;
        }
        if (evals_ >= max_evals_) return false;
        ++evals_;
        assert(evals_ <= max_evals_);
        value = acq_(indicator(x, alphabet_size_));
        cache_.emplace(x, value);
        order_.push_back({x, value});
        return true;
    }

    int evals() const { return evals_; }
    const std::vector<ScoredSequence>& visit_order() const { return order_; }

private:
    const AcqFn& acq_;
    int alphabet_size_;
    int max_evals_;
    int evals_ = 0;
    std::map<Sequence, double> cache_;
    std::vector<ScoredSequence> order_;
};

} // namespace

DiscreteSearchResult optimize_acq_discrete(const AcqFn& acq, const std::vector<Sequence>& seeds,
                                           const Alphabet& alphabet, const ProposalBudget& budget) {
    if (seeds.empty()) throw Error(Errc::invalid_input, "discrete search needs at least one seed");
    if (budget.max_acq_evals < 1)
        throw Error(Errc::invalid_input, "max_acq_evals must be positive");
    for (const auto& s : seeds) validate_sequence(s, alphabet);

    DiscreteEvaluator eval(acq, alphabet.size(), budget.max_acq_evals);
    bool exhausted = false;
    for (const auto& seed : seeds) {
        Sequence current = seed;
        double current_value = 0.0;
        if (!eval.score(current, current_value)) {
            exhausted = true;
            break;
        }
        for (bool improved = true; improved && !exhausted;) {
            improved = false;
            Sequence best_neighbor;
            double best_value = -std::numeric_limits<double>::infinity();
            for (int l = 0; l < current.length() && !exhausted; ++l) {
                for (int token : alphabet.mutation_tokens()) {
                    if (token == current[l]) continue;
                    Sequence neighbor = current;
                    neighbor.tokens[l] = token;
                    double value = 0.0;
                    if (!eval.score(neighbor, value)) {
                        exhausted = true;
                        break;
                    }
                    if (value > best_value) {  // strict: first-visited wins ties
                        best_value = value;
                        best_neighbor = neighbor;
                    }
                }
            }
            if (!exhausted && best_value > current_value) {
                current = best_neighbor;
                current_value = best_value;
                improved = true;
            }
        }
        if (exhausted) break;
    }

    DiscreteSearchResult result;
    result.visited = eval.visit_order();
    result.acq_evals = eval.evals();
    result.degraded = exhausted;
    if (result.visited.empty())
        throw Error(Errc::optimization_failed, "budget allowed no acquisition evaluation");
    std::stable_sort(result.visited.begin(), result.visited.end(),
                     [](const ScoredSequence& a, const ScoredSequence& b) { return a.acq > b.acq; });
    result.best = result.visited.front().seq;
    result.best_acq = result.visited.front().acq;
    return result;
}

namespace {

// One simplex-reflection (Nelder–Mead) run, maximizing. Returns the best
// point ever evaluated, including the start.
struct SimplexRun {
    std::vector<double> best_z;
    double best_value = -std::numeric_limits<double>::infinity();
    int evals = 0;
    bool any_finite = false;
};

SimplexRun simplex_maximize(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& start, int max_evals) {
    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
    constexpr double kTol = 1e-6;
    const int d = static_cast<int>(start.size());

    SimplexRun run;
    auto eval = [&](const std::vector<double>& z) {
        ++run.evals;
        double v = f(z);
        if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
        run.any_finite = true;
        if (v > run.best_value) {
            run.best_value = v;
            run.best_z = z;
        }
        return v;
    };

    struct Vertex {
        std::vector<double> z;
        double value;
    };
    std::vector<Vertex> simplex;
    simplex.push_back({start, eval(start)});
    for (int i = 0; i < d && run.evals < max_evals; ++i) {
        std::vector<double> z = start;
        z[i] += 0.5;
        simplex.push_back({z, eval(z)});
    }

    while (run.evals < max_evals && static_cast<int>(simplex.size()) == d + 1) {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Vertex& a, const Vertex& b) { return a.value > b.value; });
        const double spread = simplex.front().value - simplex.back().value;
        if (std::isfinite(spread) && spread <= kTol) break;

        std::vector<double> centroid(d, 0.0);
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) centroid[k] += simplex[i].z[k] / d;
        auto blend = [&](double coeff) {
            std::vector<double> z(d);
            for (int k = 0; k < d; ++k)
                z[k] = centroid[k] + coeff * (centroid[k] - simplex.back().z[k]);
            return z;
        };

        const auto reflected = blend(kReflect);
        const double fr = eval(reflected);
        if (fr > simplex.front().value) {
            if (run.evals >= max_evals) break;
            const auto expanded = blend(kExpand);
            const double fe = eval(expanded);
            simplex.back() = fe > fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
        } else if (fr > simplex[d - 1].value) {
            simplex.back() = {reflected, fr};
        } else {
            if (run.evals >= max_evals) break;
            const bool outside = fr > simplex.back().value;
            const auto contracted = blend(outside ? kContract : -kContract);
            const double fc = eval(contracted);
            if (fc > (outside ? fr : simplex.back().value)) {
                simplex.back() = {contracted, fc};
            } else {
                for (int i = 1; i <= d && run.evals < max_evals; ++i) {
                    for (int k = 0; k < d; ++k)
                        simplex[i].z[k] =
                            simplex[0].z[k] + kShrink * (simplex[i].z[k] - simplex[0].z[k]);
                    simplex[i].value = eval(simplex[i].z);
                }
            }
        }
    }
    if (run.best_z.empty()) run.best_z = start;  // nothing finite seen
    return run;
}

} // namespace

ContinuousSearchResult optimize_acq_continuous(const AcqFn& acq, const DecodeFn& decode,
                                               int latent_dim,
                                               const std::vector<std::vector<double>>& z_starts,
                                               const ProposalBudget& budget) {
    if (z_starts.empty())
        throw Error(Errc::invalid_input, "continuous search needs at least one start");
    if (budget.max_acq_evals < 1)
        throw Error(Errc::invalid_input, "max_acq_evals must be positive");
    auto beta = [&](const std::vector<double>& z) { return acq(decode(z)); };

    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<double> best_z;
    int acq_evals = 0;
    bool any_finite = false;
    for (const auto& start : z_starts) {
        if (static_cast<int>(start.size()) != latent_dim)
            throw Error(Errc::dimension_mismatch, "start vector has wrong latent dimension");
        SimplexRun run = simplex_maximize(beta, start, budget.max_acq_evals);
        acq_evals += run.evals;
        any_finite = any_finite || run.any_finite;
        if (run.any_finite && run.best_value > best_value) {
            best_value = run.best_value;
            best_z = run.best_z;
        }
    }
    if (!any_finite)
        throw Error(Errc::optimization_failed, "every acquisition evaluation was non-finite");
    return ContinuousSearchResult{best_z, decode(best_z), best_value, acq_evals};
}

ContinuousSearchResult optimize_acq_continuous(const AcqFn& acq, const ToyDecoder& dec,
                                               const std::vector<std::vector<double>>& z_starts,
                                               const ProposalBudget& budget) {
    return optimize_acq_continuous(
        acq, [&dec](const std::vector<double>& z) { return dec.decode(z); }, dec.latent_dim(),
        z_starts, budget);
}

Sequence sequence_from_distribution(const FactorizedDistribution& P, const AcqFn& acq, int b,
                                    Rng& rng) {
    if (b < 0) throw Error(Errc::invalid_input, "sample budget must be nonnegative");
    Sequence incumbent = argmax_sequence(P);
    double best = acq(indicator(incumbent, P.alphabet_size()));
    std::map<Sequence, double> cache{{incumbent, best}};
    for (int i = 0; i < b; ++i) {
        Sequence x = sample_sequence(P, rng);
        auto it = cache.find(x);
        const double value =
            it != cache.end() ? it->second : acq(indicator(x, P.alphabet_size()));
        if (it == cache.end()) cache.emplace(x, value);
        if (value > best) {
            best = value;
            incumbent = x;
        }
    }
    return incumbent;
}

std::vector<ScoredSequence> ranked_pool_from_distribution(const FactorizedDistribution& P,
                                                          const AcqFn& acq, int b, Rng& rng) {
    if (b < 0) throw Error(Errc::invalid_input, "sample budget must be nonnegative");
    std::vector<ScoredSequence> pool;  // first-seen order
    std::map<Sequence, std::size_t> seen;
    auto add = [&](const Sequence& x) {
        if (seen.count(x)) return;
        seen.emplace(x, pool.size());
        pool.push_back({x, acq(indicator(x, P.alphabet_size()))});
    };
    add(argmax_sequence(P));
    for (int i = 0; i < b; ++i) add(sample_sequence(P, rng));
    std::stable_sort(pool.begin(), pool.end(),
                     [](const ScoredSequence& a, const ScoredSequence& b) { return a.acq > b.acq; });
    return pool;
}

BatchResult batch_from_distribution(const FactorizedDistribution& P, const AcqFn& acq,
                                    int batch_size, int b, Rng& rng) {
    if (batch_size < 1) throw Error(Errc::invalid_input, "batch_size must be at least 1");
    auto pool = ranked_pool_from_distribution(P, acq, b, rng);
    for (int extra = 0; extra < 10 * b && static_cast<int>(pool.size()) < batch_size; ++extra) {
        const Sequence x = sample_sequence(P, rng);
        const bool known = std::any_of(pool.begin(), pool.end(),
                                       [&](const ScoredSequence& s) { return s.seq == x; });
        if (!known) pool.push_back({x, acq(indicator(x, P.alphabet_size()))});
    }
    std::stable_sort(pool.begin(), pool.end(),
                     [](const ScoredSequence& a, const ScoredSequence& b) { return a.acq > b.acq; });

    BatchResult result;
    result.short_batch = static_cast<int>(pool.size()) < batch_size;
    const auto take = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(batch_size));
    result.batch.reserve(take);
    for (std::size_t i = 0; i < take; ++i) result.batch.push_back(pool[i].seq);
    return result;
}

} // namespace corel
