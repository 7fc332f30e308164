#include "corel/kernel.hpp"

#include <cmath>

#include "corel/error.hpp"

namespace corel {

KernelParams::KernelParams(double theta_in, double lambda_in) : theta(theta_in), lambda(lambda_in) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw Error(Errc::invalid_config, "kernel amplitude must be positive and finite");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error(Errc::invalid_config, "kernel length-scale parameter must be positive and finite");
}

KernelSpec KernelSpec::plain(KernelParams params) {
    KernelSpec spec;
    spec.variant = KernelVariant::plain_hellinger;
    spec.params = params;
    return spec;
}

KernelSpec KernelSpec::weighted(PositionWeighting w, KernelParams params) {
    KernelSpec spec;
    spec.variant = KernelVariant::weighted_hellinger;
    spec.weightings.push_back(std::move(w));
    spec.params = params;
    return spec;
}

KernelSpec KernelSpec::product(std::vector<PositionWeighting> ws, KernelParams params) {
    if (ws.empty())
        throw Error(Errc::invalid_config, "product kernel needs at least one weighting");
    KernelSpec spec;
    spec.variant = KernelVariant::product_of_weightings;
    spec.weightings = std::move(ws);
    spec.params = params;
    return spec;
}

KernelSpec KernelSpec::with_params(KernelParams p) const {
    KernelSpec spec = *this;
    spec.params = p;
    return spec;
}

namespace {

void check_spec(const KernelSpec& spec) {
    switch (spec.variant) {
    case KernelVariant::plain_hellinger:
        return;
    case KernelVariant::weighted_hellinger:
        if (spec.weightings.size() != 1)
            throw Error(Errc::invalid_config, "weighted kernel needs exactly one weighting");
        return;
    case KernelVariant::product_of_weightings:
        if (spec.weightings.empty())
            throw Error(Errc::invalid_config, "product kernel needs at least one weighting");
        return;
    }
    throw Error(Errc::internal, "unknown kernel variant");
}

} // namespace

double kernel_distance(const KernelSpec& spec, const FactorizedDistribution& p,
                       const FactorizedDistribution& q) {
    check_spec(spec);
    switch (spec.variant) {
    case KernelVariant::plain_hellinger:
        return hellinger_distance(p, q);
    case KernelVariant::weighted_hellinger:
        return std::sqrt(weighted_hellinger_sq(p, q, spec.weightings.front()));
    case KernelVariant::product_of_weightings: {
        double sum = 0.0;
        for (const auto& w : spec.weightings)
            sum += std::sqrt(weighted_hellinger_sq(p, q, w));
        return sum;
    }
    }
    throw Error(Errc::internal, "unknown kernel variant");
}

double kernel_eval(const KernelSpec& spec, const FactorizedDistribution& p,
                   const FactorizedDistribution& q) {
    return spec.params.theta * std::exp(-spec.params.lambda * kernel_distance(spec, p, q));
}

Eigen::MatrixXd distance_matrix(const KernelSpec& spec,
                                const std::vector<FactorizedDistribution>& points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd distances = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = kernel_distance(spec, points[i], points[j]);
            distances(i, j) = d;
            distances(j, i) = d;
        }
    }
    return distances;
}

Eigen::MatrixXd gram_from_distances(const KernelParams& params, const Eigen::MatrixXd& distances) {
    return params.theta * (-params.lambda * distances.array()).exp().matrix();
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            const std::vector<FactorizedDistribution>& points) {
    return gram_from_distances(spec.params, distance_matrix(spec, points));
}

double canonical_induced_kernel(
    const std::function<double(const Sequence&, const Sequence&)>& k_base,
    const FactorizedDistribution& p, const FactorizedDistribution& q) {
    if (p.length() != q.length() || p.alphabet_size() != q.alphabet_size())
        throw Error(Errc::dimension_mismatch, "induced kernel needs matching shapes");
    const double count = std::pow(static_cast<double>(p.alphabet_size()), p.length());
    if (count > 1e4)
        throw Error(Errc::budget, "induced kernel is limited to spaces of at most 1e4 sequences");

    double total = 0.0;
    for_each_sequence(p.length(), p.alphabet_size(), [&](const Sequence& x) {
        const double px = p.sequence_probability(x);
        if (px == 0.0) return;
        for_each_sequence(p.length(), p.alphabet_size(), [&](const Sequence& y) {
            const double qy = q.sequence_probability(y);
            if (qy == 0.0) return;
            total += px * k_base(x, y) * qy;
        });
    });
    return total;
}

} // namespace corel
