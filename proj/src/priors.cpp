#include "corel/priors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "corel/error.hpp"

namespace corel {

ProfileModel::ProfileModel(FactorizedDistribution probs, double pseudocount)
    : probs_(std::move(probs)), pseudocount_(pseudocount) {
    if (!(pseudocount_ > 0.0))
        throw Error(Errc::invalid_corpus, "pseudocount must be positive");
    for (int l = 0; l < probs_.length(); ++l)
        for (int a = 0; a < probs_.alphabet_size(); ++a)
            if (!(probs_(l, a) > 0.0))
                throw Error(Errc::invalid_corpus, "profile entries must be strictly positive");
}

ProfileModel profile_from_sequences(const std::vector<Sequence>& seqs, const Alphabet& alphabet,
                                    double pseudocount) {
    if (seqs.empty()) throw Error(Errc::invalid_corpus, "empty corpus");
    if (!(pseudocount > 0.0)) throw Error(Errc::invalid_corpus, "pseudocount must be positive");
    const int L = seqs.front().length();
    const int A = alphabet.size();
    for (const auto& s : seqs) {
        if (s.length() != L)
            throw Error(Errc::invalid_corpus, "corpus sequences must share a common length");
        validate_sequence(s, alphabet);
    }
    const auto n = static_cast<double>(seqs.size());
    Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(L, A);
    for (const auto& s : seqs)
        for (int l = 0; l < L; ++l) probs(l, s[l]) += 1.0;
    probs.array() += pseudocount;
    probs /= n + A * pseudocount;
    return {FactorizedDistribution(probs), pseudocount};
}

PositionWeighting weighting_from_profile(const ProfileModel& model, double scale,
                                         WeightingDirection direction) {
    if (!(scale > 0.0)) throw Error(Errc::invalid_weighting, "weighting scale must be positive");
    const int L = model.length(), A = model.alphabet_size();
    Eigen::MatrixXd w(L, A);
    for (int l = 0; l < L; ++l)
        for (int a = 0; a < A; ++a)
            w(l, a) = direction == WeightingDirection::proportional
                          ? scale * model.probs()(l, a)
                          : scale * (1.0 - model.probs()(l, a));
    return PositionWeighting(w);
}

void save_profile(const ProfileModel& model, const std::string& path) {
    nlohmann::json j;
    j["pseudocount"] = model.pseudocount();
    auto rows = nlohmann::json::array();
    for (int l = 0; l < model.length(); ++l) {
        auto row = nlohmann::json::array();
        for (int a = 0; a < model.alphabet_size(); ++a) row.push_back(model.probs()(l, a));
        rows.push_back(std::move(row));
    }
    j["probs"] = std::move(rows);
    std::ofstream out(path);
    if (!out) throw Error(Errc::invalid_input, "cannot open profile file for writing: " + path);
    out << j.dump(2) << '\n';
}

ProfileModel load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_input, "cannot open profile file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_corpus, std::string("malformed profile file: ") + e.what());
    }
    if (!j.contains("probs") || !j["probs"].is_array() || j["probs"].empty())
        throw Error(Errc::invalid_corpus, "profile file lacks a probs matrix");
    const auto& rows = j["probs"];
    const auto L = static_cast<int>(rows.size());
    const auto A = static_cast<int>(rows.front().size());
    Eigen::MatrixXd probs(L, A);
    for (int l = 0; l < L; ++l) {
        if (static_cast<int>(rows[l].size()) != A)
            throw Error(Errc::invalid_corpus, "ragged probs matrix in profile file");
        for (int a = 0; a < A; ++a) probs(l, a) = rows[l][a].get<double>();
    }
    return {FactorizedDistribution(probs), j.value("pseudocount", 1.0)};
}

std::vector<Sequence> read_corpus(const std::string& path, const Alphabet& alphabet) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_corpus, "cannot open corpus file: " + path);
    std::vector<std::string> lines;
    std::size_t longest = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        longest = std::max(longest, line.size());
        lines.push_back(std::move(line));
    }
    if (lines.empty()) throw Error(Errc::invalid_corpus, "corpus file has no sequences: " + path);

    std::vector<Sequence> seqs;
    seqs.reserve(lines.size());
    for (auto& text : lines) {
        if (text.size() < longest) {
            if (!alphabet.has_gap())
                throw Error(Errc::invalid_corpus,
                            "corpus needs gap padding but the alphabet has no gap symbol");
            text.append(longest - text.size(), alphabet.symbol(alphabet.gap_index()));
        }
        try {
            seqs.push_back(parse_sequence(text, alphabet));
        } catch (const Error& e) {
            throw Error(Errc::invalid_corpus, std::string("bad corpus line: ") + e.what());
        }
    }
    return seqs;
}

ToyDecoder::ToyDecoder(int length, int alphabet_size, int latent_dim, std::uint64_t seed)
    : length_(length), alphabet_size_(alphabet_size), latent_dim_(latent_dim) {
    if (length_ < 1 || alphabet_size_ < 2 || latent_dim_ < 1)
        throw Error(Errc::invalid_input, "decoder dimensions must be positive (alphabet >= 2)");
    Rng rng(seed);
    const double sigma = 1.0 / std::sqrt(static_cast<double>(latent_dim_));
    weights_.resize(static_cast<std::size_t>(length_) * alphabet_size_ * latent_dim_);
    bias_.resize(static_cast<std::size_t>(length_) * alphabet_size_);
    for (auto& w : weights_) w = sigma * rng.normal();
    for (auto& b : bias_) b = rng.normal();
}

FactorizedDistribution ToyDecoder::decode(const std::vector<double>& z) const {
    if (static_cast<int>(z.size()) != latent_dim_)
        throw Error(Errc::dimension_mismatch, "latent vector has wrong dimension");
    for (double v : z)
        if (!std::isfinite(v)) throw Error(Errc::invalid_input, "non-finite latent vector");

    Eigen::MatrixXd probs(length_, alphabet_size_);
    for (int l = 0; l < length_; ++l) {
        double row_max = -std::numeric_limits<double>::infinity();
        std::vector<double> scores(alphabet_size_);
        for (int a = 0; a < alphabet_size_; ++a) {
            const std::size_t idx = (static_cast<std::size_t>(l) * alphabet_size_ + a);
            double s = bias_[idx];
            const double* w = &weights_[idx * latent_dim_];
            for (int k = 0; k < latent_dim_; ++k) s += w[k] * z[k];
            scores[a] = s;
            row_max = std::max(row_max, s);
        }
        double total = 0.0;
        for (int a = 0; a < alphabet_size_; ++a) {
            const double e = std::exp(scores[a] - row_max);
            probs(l, a) = e;
            total += e;
        }
        probs.row(l) /= total;
    }
    return FactorizedDistribution(probs);
}

} // namespace corel
