#ifndef COREL_KERNEL_HPP
#define COREL_KERNEL_HPP

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "corel/distribution.hpp"

namespace corel {

// Relative jitter added to Gram diagonals before factorization.
inline constexpr double kGramJitter = 1e-8;

struct KernelParams {
    double theta = 1.0;   // amplitude
    double lambda = 1.0;  // inverse length scale

    KernelParams() = default;
    KernelParams(double theta_in, double lambda_in);
};

enum class KernelVariant {
    plain_hellinger,
    weighted_hellinger,
    product_of_weightings,
};

/// Covariance spec on the space of factorized distributions:
///   plain     k = theta * exp(-lambda * r(p,q))
///   weighted  k = theta * exp(-lambda * r_w(p,q))
///   product   k = theta * exp(-lambda * sum_n r_{w_n}(p,q))
/// The product variant applies the amplitude once, not once per factor.
struct KernelSpec {
    KernelVariant variant = KernelVariant::plain_hellinger;
    std::vector<PositionWeighting> weightings;  // 1 for weighted, >=1 for product
    KernelParams params;

    static KernelSpec plain(KernelParams params = {});
    static KernelSpec weighted(PositionWeighting w, KernelParams params = {});
    static KernelSpec product(std::vector<PositionWeighting> ws, KernelParams params = {});

    KernelSpec with_params(KernelParams p) const;
};

/// The lambda-independent part of the kernel exponent (r, r_w, or sum of r_w).
double kernel_distance(const KernelSpec& spec, const FactorizedDistribution& p,
                       const FactorizedDistribution& q);

double kernel_eval(const KernelSpec& spec, const FactorizedDistribution& p,
                   const FactorizedDistribution& q);

/// Symmetric matrix of pairwise kernel distances (zero diagonal), computed
/// once per unordered pair.
Eigen::MatrixXd distance_matrix(const KernelSpec& spec,
                                const std::vector<FactorizedDistribution>& points);

/// theta * exp(-lambda * D), elementwise over a distance matrix.
Eigen::MatrixXd gram_from_distances(const KernelParams& params, const Eigen::MatrixXd& distances);

Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            const std::vector<FactorizedDistribution>& points);

/// Exact double sum  sum_{x,x'} p(x) k_base(x,x') q(x').  Exponential in L;
/// requires A^L <= 1e4. Test oracle only.
double canonical_induced_kernel(
    const std::function<double(const Sequence&, const Sequence&)>& k_base,
    const FactorizedDistribution& p, const FactorizedDistribution& q);

} // namespace corel

#endif
