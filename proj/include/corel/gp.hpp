#ifndef COREL_GP_HPP
#define COREL_GP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <vector>

#include "corel/kernel.hpp"

namespace corel {

struct MeanAmplitude {
    double mean = 0.0;
    double amplitude = 1.0;
};

/// Closed-form constant-mean GLS fit and amplitude estimate for a Gram matrix:
///   mu    = (1ᵀK⁻¹y) / (1ᵀK⁻¹1)
///   theta = (y−mu)ᵀK⁻¹(y−mu) / (N−1), floored at 1e-12
/// K is used as given (no jitter added here). N=1 falls back to mu=y[0], theta=1.
MeanAmplitude mean_and_amplitude(const Eigen::MatrixXd& K, const Eigen::VectorXd& y);

struct FitStep {
    double lambda = 0.0;
    double noise_var = 0.0;
    double log_evidence = 0.0;
};

/// Evidence-search bounds: a log-spaced grid followed by coordinate descent.
struct FitOptions {
    double lambda_lo = 1e-3;
    double lambda_hi = 1e3;
    int lambda_count = 25;
    double noise_lo = 1e-8;
    double noise_hi = 1e1;
    int noise_count = 13;
    int max_refine_steps = 50;
    double refine_tol = 1e-4;
};

struct FitReport {
    KernelParams params;
    double mean = 0.0;
    double noise_var = 0.0;
    double log_evidence = 0.0;
    std::vector<FitStep> path;  // grid optimum then accepted refinements; evidence non-decreasing
};

/// GP regression over factorized distributions with constant mean mu and
/// covariance theta·k1(lambda) + sigma²·I, where k1 is the unit-amplitude
/// configured kernel. mu and theta come from mean_and_amplitude on the
/// jittered unit Gram; lambda and sigma² maximize the evidence.
class GpModel {
public:
    explicit GpModel(KernelSpec spec, FitOptions options = {});

    FitReport fit(const std::vector<FactorizedDistribution>& points, const std::vector<double>& y);
    FitReport fit_fixed(const std::vector<FactorizedDistribution>& points,
                        const std::vector<double>& y, double lambda, double noise_var);

    /// Log marginal likelihood of the stored data at (lambda, sigma²), with
    /// mu and theta re-derived at that lambda. Requires a prior fit call.
    double log_evidence(double lambda, double noise_var) const;

    struct Posterior {
        double mean = 0.0;
        double var = 0.0;      // clamped at 0
        double var_raw = 0.0;  // pre-clamp; deficit bounded by the jitter scale
    };
    Posterior posterior(const FactorizedDistribution& p) const;

    const KernelSpec& spec() const { return spec_; }
    double mean() const { return mean_; }
    double amplitude() const { return spec_.params.theta; }
    double noise_var() const { return noise_var_; }
    int size() const { return static_cast<int>(points_.size()); }

private:
    struct Profile {
        double mean = 0.0;
        double amplitude = 1.0;
        Eigen::VectorXd eigvals;     // of the jittered unit Gram
        Eigen::VectorXd y_rot;       // Qᵀ(y − mean·1)
    };
    Profile profile_at(double lambda) const;
    double evidence_of(const Profile& prof, double noise_var) const;
    void prepare(const std::vector<FactorizedDistribution>& points, const std::vector<double>& y);
    void finalize(double lambda, double noise_var);

    KernelSpec spec_;
    FitOptions options_;
    std::vector<FactorizedDistribution> points_;
    Eigen::VectorXd y_;
    Eigen::MatrixXd distances_;  // cached unit-kernel exponents, fit-time reuse
    double mean_ = 0.0;
    double noise_var_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> chol_;  // of theta·K1 + sigma²·I
    Eigen::VectorXd alpha_;             // (theta·K1 + sigma²·I)⁻¹ (y − mu·1)
    bool fitted_ = false;
};

} // namespace corel

#endif
