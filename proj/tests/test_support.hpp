#ifndef COREL_TEST_SUPPORT_HPP
#define COREL_TEST_SUPPORT_HPP

#include <Eigen/Core>
#include <set>
#include <vector>

#include "corel/distribution.hpp"
#include "corel/rng.hpp"

namespace corel::test {

/// Strictly positive rows normalized to 1.
inline FactorizedDistribution random_distribution(Rng& rng, int length, int alphabet_size) {
    Eigen::MatrixXd p(length, alphabet_size);
    for (int l = 0; l < length; ++l) {
        double sum = 0.0;
        for (int a = 0; a < alphabet_size; ++a) {
            p(l, a) = 0.05 + rng.uniform();
            sum += p(l, a);
        }
        p.row(l) /= sum;
    }
    return FactorizedDistribution(p);
}

inline PositionWeighting random_weighting(Rng& rng, int length, int alphabet_size) {
    Eigen::MatrixXd w(length, alphabet_size);
    for (int l = 0; l < length; ++l)
        for (int a = 0; a < alphabet_size; ++a) w(l, a) = 0.1 + rng.uniform();
    return PositionWeighting(w);
}

inline Sequence random_sequence(Rng& rng, int length, int alphabet_size) {
    Sequence s;
    for (int l = 0; l < length; ++l)
        s.tokens.push_back(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(alphabet_size))));
    return s;
}

inline std::vector<Sequence> distinct_random_sequences(Rng& rng, int count, int length,
                                                       int alphabet_size) {
    std::set<Sequence> seen;
    std::vector<Sequence> out;
    while (static_cast<int>(out.size()) < count) {
        Sequence s = random_sequence(rng, length, alphabet_size);
        if (seen.insert(s).second) out.push_back(std::move(s));
    }
    return out;
}

} // namespace corel::test

#endif
