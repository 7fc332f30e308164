#include "corel/distribution.hpp"

#include <algorithm>
#include <cmath>

namespace corel {

namespace {

constexpr double kMaxEnumeration = 1e6;

double enumeration_count(int length, int alphabet_size) {
    return std::pow(static_cast<double>(alphabet_size), static_cast<double>(length));
}

void check_same_shape(int lr, int lc, int rr, int rc, const char* what) {
    if (lr != rr || lc != rc)
        throw Error(Errc::dimension_mismatch, std::string(what) + ": shape mismatch");
}

} // namespace

FactorizedDistribution::FactorizedDistribution(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
    if (probs_.rows() < 1 || probs_.cols() < 2)
        throw Error(Errc::invalid_distribution, "distribution needs L >= 1 rows and A >= 2 columns");
    for (Eigen::Index l = 0; l < probs_.rows(); ++l) {
        double sum = 0.0;
        for (Eigen::Index a = 0; a < probs_.cols(); ++a) {
            double v = probs_(l, a);
            if (!(v >= 0.0))
                throw Error(Errc::invalid_distribution, "negative or non-finite probability entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) >= kRowSumTolerance)
            throw Error(Errc::invalid_distribution, "row does not sum to 1 within tolerance");
        probs_.row(l) /= sum;
    }
}

double FactorizedDistribution::sequence_probability(const Sequence& x) const {
    if (x.length() != length())
        throw Error(Errc::dimension_mismatch, "sequence length does not match distribution");
    double prod = 1.0;
    for (int l = 0; l < length(); ++l) prod *= probs_(l, x[l]);
    return prod;
}

PositionWeighting::PositionWeighting(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
    if (weights_.rows() < 1 || weights_.cols() < 2)
        throw Error(Errc::invalid_weighting, "weighting needs L >= 1 rows and A >= 2 columns");
    for (Eigen::Index l = 0; l < weights_.rows(); ++l)
        for (Eigen::Index a = 0; a < weights_.cols(); ++a)
            if (!(weights_(l, a) >= 0.0))
                throw Error(Errc::invalid_weighting, "negative or non-finite weight entry");
}

double PositionWeighting::sequence_weight(const Sequence& x) const {
    if (x.length() != length())
        throw Error(Errc::dimension_mismatch, "sequence length does not match weighting");
    double prod = 1.0;
    for (int l = 0; l < length(); ++l) prod *= weights_(l, x[l]);
    return prod;
}

FactorizedDistribution indicator(const Sequence& x, const Alphabet& alphabet) {
    validate_sequence(x, alphabet);
    return indicator(x, alphabet.size());
}

FactorizedDistribution indicator(const Sequence& x, int alphabet_size) {
    if (x.length() == 0) throw Error(Errc::invalid_sequence, "empty sequence");
    Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(x.length(), alphabet_size);
    for (int l = 0; l < x.length(); ++l) {
        if (x[l] < 0 || x[l] >= alphabet_size)
            throw Error(Errc::invalid_sequence, "token index outside the alphabet");
        probs(l, x[l]) = 1.0;
    }
    return FactorizedDistribution(std::move(probs));
}

FactorizedDistribution uniform_distribution(int length, int alphabet_size) {
    Eigen::MatrixXd probs =
        Eigen::MatrixXd::Constant(length, alphabet_size, 1.0 / alphabet_size);
    return FactorizedDistribution(std::move(probs));
}

Sequence argmax_sequence(const FactorizedDistribution& p) {
    Sequence x;
    x.tokens.resize(p.length());
    for (int l = 0; l < p.length(); ++l) {
        int best = 0;
        for (int a = 1; a < p.alphabet_size(); ++a)
            if (p(l, a) > p(l, best)) best = a;
        x.tokens[l] = best;
    }
    return x;
}

Sequence sample_sequence(const FactorizedDistribution& p, Rng& rng) {
    Sequence x;
    x.tokens.resize(p.length());
    for (int l = 0; l < p.length(); ++l) {
        double u = rng.uniform();
        double acc = 0.0;
        int chosen = p.alphabet_size() - 1;  // guards against round-off at u ~ 1
        for (int a = 0; a < p.alphabet_size(); ++a) {
            acc += p(l, a);
            if (u < acc) {
                chosen = a;
                break;
            }
        }
        x.tokens[l] = chosen;
    }
    return x;
}

double hellinger_sq(const FactorizedDistribution& p, const FactorizedDistribution& q) {
    check_same_shape(p.length(), p.alphabet_size(), q.length(), q.alphabet_size(),
                     "hellinger_distance");
    double bc = 1.0;  // Bhattacharyya coefficient, product over positions
    for (int l = 0; l < p.length(); ++l) {
        double row = 0.0;
        for (int a = 0; a < p.alphabet_size(); ++a) row += std::sqrt(p(l, a) * q(l, a));
        bc *= row;
    }
    return std::clamp(1.0 - bc, 0.0, 1.0);
}

double hellinger_distance(const FactorizedDistribution& p, const FactorizedDistribution& q) {
    return std::sqrt(hellinger_sq(p, q));
}

double weighted_hellinger_sq(const FactorizedDistribution& p, const FactorizedDistribution& q,
                             const PositionWeighting& w) {
    check_same_shape(p.length(), p.alphabet_size(), q.length(), q.alphabet_size(),
                     "weighted_hellinger_sq");
    check_same_shape(p.length(), p.alphabet_size(), w.length(), w.alphabet_size(),
                     "weighted_hellinger_sq");
    double wp = 1.0, wq = 1.0, cross = 1.0;
    for (int l = 0; l < p.length(); ++l) {
        double row_wp = 0.0, row_wq = 0.0, row_cross = 0.0;
        for (int a = 0; a < p.alphabet_size(); ++a) {
            double wv = w(l, a);
            row_wp += wv * p(l, a);
            row_wq += wv * q(l, a);
            row_cross += wv * std::sqrt(p(l, a) * q(l, a));
        }
        wp *= row_wp;
        wq *= row_wq;
        cross *= row_cross;
    }
    return std::max(0.0, 0.5 * wp + 0.5 * wq - cross);
}

void for_each_sequence(int length, int alphabet_size,
                       const std::function<void(const Sequence&)>& fn) {
    if (enumeration_count(length, alphabet_size) > kMaxEnumeration)
        throw Error(Errc::budget, "sequence space too large to enumerate");
    Sequence x;
    x.tokens.assign(length, 0);
    while (true) {
        fn(x);
        int l = length - 1;
        while (l >= 0 && ++x.tokens[l] == alphabet_size) x.tokens[l--] = 0;
        if (l < 0) break;
    }
}

double brute_force_hellinger_sq(const FactorizedDistribution& p, const FactorizedDistribution& q,
                                const PositionWeighting* w) {
    check_same_shape(p.length(), p.alphabet_size(), q.length(), q.alphabet_size(),
                     "brute_force_hellinger_sq");
    double total = 0.0;
    for_each_sequence(p.length(), p.alphabet_size(), [&](const Sequence& x) {
        double diff = std::sqrt(p.sequence_probability(x)) - std::sqrt(q.sequence_probability(x));
        double term = 0.5 * diff * diff;
        if (w) term *= w->sequence_weight(x);
        total += term;
    });
    return total;
}

double relaxed_objective(const std::map<Sequence, double>& f_table,
                         const FactorizedDistribution& p) {
    double total = 0.0;
    for_each_sequence(p.length(), p.alphabet_size(), [&](const Sequence& x) {
        auto it = f_table.find(x);
        if (it == f_table.end())
            throw Error(Errc::incomplete_table, "objective table missing a sequence");
        total += it->second * p.sequence_probability(x);
    });
    return total;
}

} // namespace corel
