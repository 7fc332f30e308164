#include "corel/gp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "corel/error.hpp"

namespace corel {

namespace {

constexpr double kAmplitudeFloor = 1e-12;
constexpr double kLogTwoPi = 1.8378770664093453;

void check_options(const FitOptions& o) {
    if (!(o.lambda_lo > 0.0) || !(o.lambda_hi >= o.lambda_lo) || o.lambda_count < 2 ||
        !(o.noise_lo >= 0.0) || !(o.noise_hi >= o.noise_lo) || o.noise_count < 2 ||
        o.max_refine_steps < 0 || !(o.refine_tol > 0.0))
        throw Error(Errc::invalid_config, "malformed evidence-search bounds");
}

} // namespace

MeanAmplitude mean_and_amplitude(const Eigen::MatrixXd& K, const Eigen::VectorXd& y) {
    const auto n = y.size();
    if (K.rows() != n || K.cols() != n)
        throw Error(Errc::dimension_mismatch, "Gram size does not match observation count");
    if (n < 1) throw Error(Errc::invalid_input, "need at least one observation");
    if (n == 1) return {y[0], 1.0};

    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success)
        throw Error(Errc::unfittable_model, "Gram matrix is not positive definite");
    const Eigen::VectorXd Kinv_y = llt.solve(y);
    const Eigen::VectorXd Kinv_1 = llt.solve(Eigen::VectorXd::Ones(n));
    const double denom = Kinv_1.sum();
    if (!(denom > 0.0))
        throw Error(Errc::unfittable_model, "degenerate Gram matrix in mean fit");
    const double mu = Kinv_y.sum() / denom;
    const Eigen::VectorXd r = y.array() - mu;
    const double theta = r.dot(llt.solve(r)) / static_cast<double>(n - 1);
    return {mu, std::max(theta, kAmplitudeFloor)};
}

GpModel::GpModel(KernelSpec spec, FitOptions options)
    : spec_(std::move(spec)), options_(options) {
    check_options(options_);
}

void GpModel::prepare(const std::vector<FactorizedDistribution>& points,
                      const std::vector<double>& y) {
    if (points.empty()) throw Error(Errc::invalid_input, "need at least one training point");
    if (points.size() != y.size())
        throw Error(Errc::dimension_mismatch, "training points and observations differ in count");
    for (double v : y)
        if (!std::isfinite(v)) throw Error(Errc::invalid_input, "non-finite observation");
    points_ = points;
    y_ = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    distances_ = distance_matrix(spec_, points_);  // validates pairwise shapes
    fitted_ = false;
}

GpModel::Profile GpModel::profile_at(double lambda) const {
    const auto n = y_.size();
    Profile prof;
    if (n == 1) {
        prof.mean = y_[0];
        prof.amplitude = 1.0;
        prof.eigvals = Eigen::VectorXd::Constant(1, 1.0 + kGramJitter);
        prof.y_rot = Eigen::VectorXd::Zero(1);
        return prof;
    }
    Eigen::MatrixXd K1 = (-lambda * distances_.array()).exp().matrix();
    K1.diagonal().array() += kGramJitter;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K1);
    if (eig.info() != Eigen::Success)
        throw Error(Errc::unfittable_model, "eigendecomposition of the Gram matrix failed");
    prof.eigvals = eig.eigenvalues().cwiseMax(kAmplitudeFloor);
    const Eigen::MatrixXd& Q = eig.eigenvectors();
    const Eigen::VectorXd y_rot = Q.transpose() * y_;
    const Eigen::VectorXd one_rot = Q.transpose() * Eigen::VectorXd::Ones(n);
    const double denom = one_rot.cwiseQuotient(prof.eigvals).dot(one_rot);
    if (!(denom > 0.0))
        throw Error(Errc::unfittable_model, "degenerate Gram matrix in mean fit");
    prof.mean = one_rot.cwiseQuotient(prof.eigvals).dot(y_rot) / denom;
    prof.y_rot = y_rot - prof.mean * one_rot;
    const double theta =
        prof.y_rot.cwiseQuotient(prof.eigvals).dot(prof.y_rot) / static_cast<double>(n - 1);
    prof.amplitude = std::max(theta, kAmplitudeFloor);
    return prof;
}

double GpModel::evidence_of(const Profile& prof, double noise_var) const {
    const auto n = prof.eigvals.size();
    double quad = 0.0, logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = prof.amplitude * prof.eigvals[i] + noise_var;
        if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
        quad += prof.y_rot[i] * prof.y_rot[i] / s;
        logdet += std::log(s);
    }
    return -0.5 * (quad + logdet + static_cast<double>(n) * kLogTwoPi);
}

double GpModel::log_evidence(double lambda, double noise_var) const {
    if (points_.empty()) throw Error(Errc::invalid_input, "log_evidence requires training data");
    if (!(lambda > 0.0)) throw Error(Errc::invalid_input, "lambda must be positive");
    if (noise_var < 0.0) throw Error(Errc::invalid_input, "noise variance must be nonnegative");
    return evidence_of(profile_at(lambda), noise_var);
}

void GpModel::finalize(double lambda, double noise_var) {
    const Profile prof = profile_at(lambda);
    spec_.params = KernelParams(prof.amplitude, lambda);
    mean_ = prof.mean;
    noise_var_ = noise_var;

    const auto n = y_.size();
    Eigen::MatrixXd K1 = (-lambda * distances_.array()).exp().matrix();
    K1.diagonal().array() += kGramJitter;
    Eigen::MatrixXd cov = prof.amplitude * K1;
    cov.diagonal().array() += noise_var;
    chol_.compute(cov);
    if (chol_.info() != Eigen::Success)
        throw Error(Errc::unfittable_model, "training covariance is not positive definite");
    alpha_ = chol_.solve(y_ - Eigen::VectorXd::Constant(n, mean_));
    fitted_ = true;
}

FitReport GpModel::fit(const std::vector<FactorizedDistribution>& points,
                       const std::vector<double>& y) {
    prepare(points, y);

    const double lambda_step =
        std::pow(options_.lambda_hi / options_.lambda_lo, 1.0 / (options_.lambda_count - 1));
    const double noise_lo = std::max(options_.noise_lo, 1e-300);
    const double noise_step =
        std::pow(options_.noise_hi / noise_lo, 1.0 / (options_.noise_count - 1));

    // Refinement may step moderately past the grid but stays in a sane box.
    const double lambda_min = options_.lambda_lo / 10.0, lambda_max = options_.lambda_hi * 10.0;
    const double noise_min = noise_lo / 10.0, noise_max = options_.noise_hi * 10.0;

    double best_lambda = 0.0, best_noise = 0.0;
    double best_ev = -std::numeric_limits<double>::infinity();
    double lambda = options_.lambda_lo;
    for (int i = 0; i < options_.lambda_count; ++i, lambda *= lambda_step) {
        const Profile prof = profile_at(lambda);
        double noise = noise_lo;
        for (int j = 0; j < options_.noise_count; ++j, noise *= noise_step) {
            const double ev = evidence_of(prof, noise);
            if (ev > best_ev) {
                best_ev = ev;
                best_lambda = lambda;
                best_noise = noise;
            }
        }
    }
    if (!std::isfinite(best_ev))
        throw Error(Errc::unfittable_model, "no hyperparameter candidate gave finite evidence");

    FitReport report;
    report.path.push_back({best_lambda, best_noise, best_ev});

    // Coordinate descent with shrinking multiplicative steps; strict-improvement
    // acceptance keeps the evidence path monotone.
    double f_lambda = lambda_step, f_noise = noise_step;
    Profile cur_prof = profile_at(best_lambda);
    for (int step = 0; step < options_.max_refine_steps; ++step) {
        if (f_lambda - 1.0 < options_.refine_tol && f_noise - 1.0 < options_.refine_tol) break;
        bool improved = false;
        for (double cand : {best_lambda * f_lambda, best_lambda / f_lambda}) {
            cand = std::clamp(cand, lambda_min, lambda_max);
            if (cand == best_lambda) continue;
            const Profile prof = profile_at(cand);
            const double ev = evidence_of(prof, best_noise);
            if (ev > best_ev) {
                best_ev = ev;
                best_lambda = cand;
                cur_prof = prof;
                report.path.push_back({best_lambda, best_noise, best_ev});
                improved = true;
                break;
            }
        }
        for (double cand : {best_noise * f_noise, best_noise / f_noise}) {
            cand = std::clamp(cand, noise_min, noise_max);
            if (cand == best_noise) continue;
            const double ev = evidence_of(cur_prof, cand);
            if (ev > best_ev) {
                best_ev = ev;
                best_noise = cand;
                report.path.push_back({best_lambda, best_noise, best_ev});
                improved = true;
                break;
            }
        }
        if (!improved) {
            f_lambda = std::sqrt(f_lambda);
            f_noise = std::sqrt(f_noise);
        }
    }

    finalize(best_lambda, best_noise);
    report.params = spec_.params;
    report.mean = mean_;
    report.noise_var = noise_var_;
    report.log_evidence = best_ev;
    return report;
}

FitReport GpModel::fit_fixed(const std::vector<FactorizedDistribution>& points,
                             const std::vector<double>& y, double lambda, double noise_var) {
    if (!(lambda > 0.0)) throw Error(Errc::invalid_input, "lambda must be positive");
    if (noise_var < 0.0) throw Error(Errc::invalid_input, "noise variance must be nonnegative");
    prepare(points, y);
    finalize(lambda, noise_var);
    FitReport report;
    report.params = spec_.params;
    report.mean = mean_;
    report.noise_var = noise_var_;
    report.log_evidence = evidence_of(profile_at(lambda), noise_var);
    report.path.push_back({lambda, noise_var, report.log_evidence});
    return report;
}

GpModel::Posterior GpModel::posterior(const FactorizedDistribution& p) const {
    if (!fitted_) throw Error(Errc::invalid_input, "posterior requires a fitted model");
    const auto n = static_cast<Eigen::Index>(points_.size());
    Eigen::VectorXd k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) k_star[i] = kernel_eval(spec_, points_[i], p);
    Posterior post;
    post.mean = mean_ + k_star.dot(alpha_);
    const double theta = spec_.params.theta;
    post.var_raw = theta - k_star.dot(chol_.solve(k_star));
    post.var = std::max(0.0, post.var_raw);
    return post;
}

} // namespace corel
