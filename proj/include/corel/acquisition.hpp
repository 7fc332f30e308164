#ifndef COREL_ACQUISITION_HPP
#define COREL_ACQUISITION_HPP

#include <vector>

#include "corel/rng.hpp"

namespace corel {

double normal_pdf(double z);
double normal_cdf(double z);

/// Expected improvement for minimization: E[max(best − F, 0)], F ~ N(mean, variance).
double expected_improvement(double mean, double variance, double best_so_far);

/// UCB score for minimization, to be maximized by a proposer: −mean + kappa·sigma.
double ucb_score(double mean, double variance, double kappa);

/// A 2-objective value, maximization convention on both coordinates.
struct Point2 {
    double y1 = 0.0;
    double y2 = 0.0;
};

bool operator==(const Point2& a, const Point2& b);

/// a ⪰ b with a ≠ b (componentwise maximization).
bool dominates(const Point2& a, const Point2& b);

/// Non-dominated subset; exact duplicates of a front point are all retained.
std::vector<Point2> pareto_front(const std::vector<Point2>& points);

/// Exact area dominated by `front` relative to `ref` (union of boxes [ref, p]).
/// Every input point must satisfy p ⪰ ref.
double hypervolume_2d(const std::vector<Point2>& front, const Point2& ref);

/// Observed objective vectors plus their Pareto front and a fixed reference.
/// Hypervolume counts only front members at or above the reference.
class ParetoState {
public:
    explicit ParetoState(Point2 ref);

    void add(const Point2& p);
    const std::vector<Point2>& points() const { return points_; }
    const std::vector<Point2>& front() const { return front_; }
    const Point2& ref() const { return ref_; }
    double hypervolume() const;

private:
    Point2 ref_;
    std::vector<Point2> points_;
    std::vector<Point2> front_;
};

/// Exact expected hypervolume improvement of a candidate with independent
/// Gaussian marginals N(mean.y1, var.y1) × N(mean.y2, var.y2). An empty front
/// degenerates to the expected volume dominated over the reference point.
double ehvi_2d(const Point2& mean, const Point2& var, const ParetoState& state);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo EHVI estimator; test oracle for ehvi_2d.
McEstimate ehvi_2d_mc(const Point2& mean, const Point2& var, const ParetoState& state,
                      int samples, Rng& rng);

/// hypervolume(current front) / hypervolume(initial front), shared reference.
double relative_hypervolume(const ParetoState& state, const std::vector<Point2>& initial_front);

enum class AcqKind { ei, ucb, ehvi };

struct AcqSpec {
    AcqKind kind = AcqKind::ei;
    double kappa = 2.0;    // UCB only
    int mc_samples = 100000;  // MC oracle only
};

} // namespace corel

#endif
