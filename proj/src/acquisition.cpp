#include "corel/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "corel/error.hpp"

namespace corel {

double normal_pdf(double z) {
    constexpr double inv_sqrt_two_pi = 0.3989422804014327;
    return inv_sqrt_two_pi * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double expected_improvement(double mean, double variance, double best_so_far) {
    if (variance < 0.0) throw Error(Errc::invalid_input, "negative variance");
    const double gap = best_so_far - mean;
    if (variance == 0.0) return std::max(gap, 0.0);
    const double sigma = std::sqrt(variance);
    const double z = gap / sigma;
    return std::max(0.0, gap * normal_cdf(z) + sigma * normal_pdf(z));
}

double ucb_score(double mean, double variance, double kappa) {
    if (variance < 0.0) throw Error(Errc::invalid_input, "negative variance");
    if (kappa < 0.0) throw Error(Errc::invalid_input, "negative kappa");
    return -mean + kappa * std::sqrt(variance);
}

bool operator==(const Point2& a, const Point2& b) { return a.y1 == b.y1 && a.y2 == b.y2; }

bool dominates(const Point2& a, const Point2& b) {
    return a.y1 >= b.y1 && a.y2 >= b.y2 && (a.y1 > b.y1 || a.y2 > b.y2);
}

std::vector<Point2> pareto_front(const std::vector<Point2>& points) {
    std::vector<Point2> front;
    for (const auto& p : points) {
        bool dominated = false;
        for (const auto& q : points) {
            if (dominates(q, p)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) front.push_back(p);
    }
    return front;
}

namespace {

// Staircase area over points already known to lie at or above ref.
double staircase_area(std::vector<Point2> pts, const Point2& ref) {
    if (pts.empty()) return 0.0;
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.y1 != b.y1 ? a.y1 > b.y1 : a.y2 > b.y2;
    });
    double area = 0.0;
    double best_y2 = ref.y2;
    std::vector<Point2> kept;
    for (const auto& p : pts) {
        if (p.y2 <= best_y2) continue;  // dominated within the sweep
        kept.push_back(p);
        best_y2 = p.y2;
    }
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const double x_lo = i + 1 < kept.size() ? kept[i + 1].y1 : ref.y1;
        area += (kept[i].y1 - x_lo) * (kept[i].y2 - ref.y2);
    }
    return area;
}

bool at_or_above(const Point2& p, const Point2& ref) { return p.y1 >= ref.y1 && p.y2 >= ref.y2; }

} // namespace

double hypervolume_2d(const std::vector<Point2>& front, const Point2& ref) {
    for (const auto& p : front)
        if (!at_or_above(p, ref))
            throw Error(Errc::invalid_reference, "front point does not dominate the reference");
    return staircase_area(front, ref);
}

ParetoState::ParetoState(Point2 ref) : ref_(ref) {}

void ParetoState::add(const Point2& p) {
    points_.push_back(p);
    front_ = pareto_front(points_);
}

double ParetoState::hypervolume() const {
    std::vector<Point2> usable;
    for (const auto& p : front_)
        if (at_or_above(p, ref_)) usable.push_back(p);
    return staircase_area(std::move(usable), ref_);
}

namespace {

// E[(X − h)+] for X ~ N(m, s²); the one-sided linear loss.
double plus_expectation(double h, double m, double s) {
    if (std::isinf(h)) return h > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    if (s == 0.0) return std::max(m - h, 0.0);
    const double t = (h - m) / s;
    return s * normal_pdf(t) + (m - h) * normal_cdf(-t);
}

} // namespace

double ehvi_2d(const Point2& mean, const Point2& var, const ParetoState& state) {
    if (var.y1 < 0.0 || var.y2 < 0.0) throw Error(Errc::invalid_input, "negative variance");
    const Point2 ref = state.ref();
    const double s1 = std::sqrt(var.y1), s2 = std::sqrt(var.y2);

    // Usable front: members at or above ref, non-dominated, deduplicated,
    // sorted by descending y1 (hence ascending y2).
    std::vector<Point2> front;
    for (const auto& p : state.front())
        if (at_or_above(p, ref)) front.push_back(p);
    front = pareto_front(front);
    std::sort(front.begin(), front.end(), [](const Point2& a, const Point2& b) {
        return a.y1 != b.y1 ? a.y1 > b.y1 : a.y2 > b.y2;
    });
    front.erase(std::unique(front.begin(), front.end(),
                            [](const Point2& a, const Point2& b) { return a == b; }),
                front.end());

    // Stripe j covers first-coordinate interval (b[j], b[j-1]) with staircase
    // level h[j]; the improvement integrand separates per stripe, so the
    // expectation is a sum of products of one-dimensional loss terms.
    const std::size_t n = front.size();
    double total = 0.0;
    double psi1_prev = 0.0;  // E[(Z1 − b[j-1])+], starts at b[0] = +inf
    for (std::size_t j = 1; j <= n + 1; ++j) {
        const double b_j = j <= n ? front[j - 1].y1 : ref.y1;
        const double h_j = j == 1 ? ref.y2 : front[j - 2].y2;
        const double psi1 = plus_expectation(b_j, mean.y1, s1);
        total += std::max(0.0, psi1 - psi1_prev) * plus_expectation(h_j, mean.y2, s2);
        psi1_prev = psi1;
    }
    return std::max(0.0, total);
}

McEstimate ehvi_2d_mc(const Point2& mean, const Point2& var, const ParetoState& state,
                      int samples, Rng& rng) {
    if (samples < 1) throw Error(Errc::invalid_input, "mc_samples must be at least 1");
    const Point2 ref = state.ref();
    std::vector<Point2> base;
    for (const auto& p : state.front())
        if (at_or_above(p, ref)) base.push_back(p);
    const double base_area = staircase_area(base, ref);
    const double s1 = std::sqrt(var.y1), s2 = std::sqrt(var.y2);

    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < samples; ++i) {
        Point2 z{mean.y1 + s1 * rng.normal(), mean.y2 + s2 * rng.normal()};
        double imp = 0.0;
        if (at_or_above(z, ref)) {
            std::vector<Point2> extended = base;
            extended.push_back(z);
            imp = staircase_area(std::move(extended), ref) - base_area;
        }
        sum += imp;
        sum_sq += imp * imp;
    }
    McEstimate out;
    out.value = sum / samples;
    if (samples > 1) {
        const double var_est = std::max(0.0, (sum_sq - sum * sum / samples) / (samples - 1));
        out.std_error = std::sqrt(var_est / samples);
    }
    return out;
}

double relative_hypervolume(const ParetoState& state, const std::vector<Point2>& initial_front) {
    const double initial = hypervolume_2d(initial_front, state.ref());
    if (!(initial > 0.0))
        throw Error(Errc::undefined_metric, "relative hypervolume needs a positive initial volume");
    return state.hypervolume() / initial;
}

} // namespace corel
