#ifndef COREL_DISTRIBUTION_HPP
#define COREL_DISTRIBUTION_HPP

#include <Eigen/Core>
#include <functional>
#include <map>
#include <optional>

#include "corel/rng.hpp"
#include "corel/sequence.hpp"

namespace corel {

// Row sums may drift by this much (softmax round-off) and are renormalized;
// larger deviations are rejected.
inline constexpr double kRowSumTolerance = 1e-9;

/// Product of independent per-position categoricals, stored as an L x A
/// row-stochastic matrix.
class FactorizedDistribution {
public:
    explicit FactorizedDistribution(Eigen::MatrixXd probs);

    int length() const { return static_cast<int>(probs_.rows()); }
    int alphabet_size() const { return static_cast<int>(probs_.cols()); }
    double operator()(int l, int a) const { return probs_(l, a); }
    const Eigen::MatrixXd& probs() const { return probs_; }

    /// Probability of one full sequence: product over positions.
    double sequence_probability(const Sequence& x) const;

private:
    Eigen::MatrixXd probs_;
};

/// Nonnegative L x A factorized weighting over tokens. An all-zero weighting
/// is allowed; it collapses every weighted distance to zero.
class PositionWeighting {
public:
    explicit PositionWeighting(Eigen::MatrixXd weights);

    int length() const { return static_cast<int>(weights_.rows()); }
    int alphabet_size() const { return static_cast<int>(weights_.cols()); }
    double operator()(int l, int a) const { return weights_(l, a); }
    const Eigen::MatrixXd& weights() const { return weights_; }

    /// Weight of one full sequence: product over positions.
    double sequence_weight(const Sequence& x) const;

private:
    Eigen::MatrixXd weights_;
};

FactorizedDistribution indicator(const Sequence& x, const Alphabet& alphabet);
FactorizedDistribution indicator(const Sequence& x, int alphabet_size);
FactorizedDistribution uniform_distribution(int length, int alphabet_size);

/// Per-position argmax; ties go to the lowest alphabet index.
Sequence argmax_sequence(const FactorizedDistribution& p);

/// Independent categorical draw per position.
Sequence sample_sequence(const FactorizedDistribution& p, Rng& rng);

/// Hellinger distance in [0,1] via the O(L*A) product form:
/// r^2 = 1 - prod_l sum_a sqrt(p[l,a] q[l,a]).
double hellinger_distance(const FactorizedDistribution& p, const FactorizedDistribution& q);
double hellinger_sq(const FactorizedDistribution& p, const FactorizedDistribution& q);

/// Weighted squared Hellinger distance, evaluated as the sum of three
/// separate L-fold products:
///   r_w^2 = 1/2 prod_l(sum_a w p) + 1/2 prod_l(sum_a w q) - prod_l(sum_a w sqrt(p q))
double weighted_hellinger_sq(const FactorizedDistribution& p, const FactorizedDistribution& q,
                             const PositionWeighting& w);

/// Definitional sum over all A^L sequences; exact but exponential.
/// Requires A^L <= 1e6 (throws a budget error otherwise).
double brute_force_hellinger_sq(const FactorizedDistribution& p, const FactorizedDistribution& q,
                                const PositionWeighting* w = nullptr);

/// Calls fn for every sequence of the given shape, in lexicographic order.
/// Requires A^L <= 1e6.
void for_each_sequence(int length, int alphabet_size,
                       const std::function<void(const Sequence&)>& fn);

/// Expectation of a fully tabulated objective under p. The table must cover
/// all A^L sequences.
double relaxed_objective(const std::map<Sequence, double>& f_table,
                         const FactorizedDistribution& p);

} // namespace corel

#endif
