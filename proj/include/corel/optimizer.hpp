#ifndef COREL_OPTIMIZER_HPP
#define COREL_OPTIMIZER_HPP

#include <functional>
#include <utility>
#include <vector>

#include "corel/distribution.hpp"
#include "corel/priors.hpp"
#include "corel/rng.hpp"

namespace corel {

using AcqFn = std::function<double(const FactorizedDistribution&)>;

struct ProposalBudget {
    int max_acq_evals = 2000;
    int restarts = 1;
    int sample_budget = 100;  // draws per sampling subroutine call
};

struct ScoredSequence {
    Sequence seq;
    double acq = 0.0;
};

struct DiscreteSearchResult {
    Sequence best;
    double best_acq = 0.0;
    std::vector<ScoredSequence> visited;  // acq descending, first-visited breaking ties
    int acq_evals = 0;
    bool degraded = false;  // budget ran out before every climb converged
};

/// Best-improvement hill climbing over single-token substitutions (gap token
/// excluded as a target), restarted from each seed. The acquisition is scored
/// on indicator distributions; repeat visits hit a cache and do not consume
/// budget.
DiscreteSearchResult optimize_acq_discrete(const AcqFn& acq, const std::vector<Sequence>& seeds,
                                           const Alphabet& alphabet, const ProposalBudget& budget);

struct ContinuousSearchResult {
    std::vector<double> z;
    FactorizedDistribution dist;
    double value = 0.0;
    int acq_evals = 0;
};

using DecodeFn = std::function<FactorizedDistribution(const std::vector<double>&)>;

/// Derivative-free simplex-reflection search of z ↦ acq(decode(z)), restarted
/// from each start with at most max_acq_evals evaluations each; returns the
/// best point ever evaluated (never worse than the best start).
ContinuousSearchResult optimize_acq_continuous(const AcqFn& acq, const DecodeFn& decode,
                                               int latent_dim,
                                               const std::vector<std::vector<double>>& z_starts,
                                               const ProposalBudget& budget);
ContinuousSearchResult optimize_acq_continuous(const AcqFn& acq, const ToyDecoder& dec,
                                               const std::vector<std::vector<double>>& z_starts,
                                               const ProposalBudget& budget);

/// Full ranked sample pool behind batch_from_distribution: argmax plus b
/// distinct draws, ordered by acquisition (first-seen breaking ties).
std::vector<ScoredSequence> ranked_pool_from_distribution(const FactorizedDistribution& P,
                                                          const AcqFn& acq, int b, Rng& rng);

/// Mode-plus-sampling selection: start from the distribution argmax, draw b
/// samples, keep the acquisition-best (strict improvements only).
Sequence sequence_from_distribution(const FactorizedDistribution& P, const AcqFn& acq, int b,
                                    Rng& rng);

struct BatchResult {
    std::vector<Sequence> batch;
    bool short_batch = false;  // dedup could not reach batch_size distinct sequences
};

/// Pool = argmax plus b samples (plus up to 10·b extra draws if needed for
/// distinctness); returns the top batch_size by acquisition, first-seen
/// breaking ties.
BatchResult batch_from_distribution(const FactorizedDistribution& P, const AcqFn& acq,
                                    int batch_size, int b, Rng& rng);

} // namespace corel

#endif
