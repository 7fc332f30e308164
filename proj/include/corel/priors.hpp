#ifndef COREL_PRIORS_HPP
#define COREL_PRIORS_HPP

#include <string>
#include <vector>

#include "corel/distribution.hpp"
#include "corel/rng.hpp"

namespace corel {

/// Position-specific emission profile with Laplace-style smoothing; every
/// entry is strictly positive for pseudocount > 0.
class ProfileModel {
public:
    ProfileModel(FactorizedDistribution probs, double pseudocount);

    const FactorizedDistribution& probs() const { return probs_; }
    double pseudocount() const { return pseudocount_; }
    int length() const { return probs_.length(); }
    int alphabet_size() const { return probs_.alphabet_size(); }

private:
    FactorizedDistribution probs_;
    double pseudocount_;
};

ProfileModel profile_from_sequences(const std::vector<Sequence>& seqs, const Alphabet& alphabet,
                                    double pseudocount);

enum class WeightingDirection { proportional, inverse };

/// proportional: w[l,a] = scale·probs[l,a]; inverse: w[l,a] = scale·(1 − probs[l,a]).
PositionWeighting weighting_from_profile(const ProfileModel& model, double scale,
                                         WeightingDirection direction = WeightingDirection::proportional);

void save_profile(const ProfileModel& model, const std::string& path);
ProfileModel load_profile(const std::string& path);

/// Reads one token-string per line, pads shorter lines with the gap symbol to
/// the longest length, and parses against the alphabet.
std::vector<Sequence> read_corpus(const std::string& path, const Alphabet& alphabet);

/// Seeded random affine map R^d -> L×A scores with per-row softmax: a stand-in
/// continuous parameterization of the distribution space.
class ToyDecoder {
public:
    ToyDecoder(int length, int alphabet_size, int latent_dim, std::uint64_t seed);

    FactorizedDistribution decode(const std::vector<double>& z) const;
    int latent_dim() const { return latent_dim_; }
    int length() const { return length_; }
    int alphabet_size() const { return alphabet_size_; }

private:
    int length_;
    int alphabet_size_;
    int latent_dim_;
    std::vector<double> weights_;  // row-major (L·A) × d
    std::vector<double> bias_;     // L·A
};

} // namespace corel

#endif
