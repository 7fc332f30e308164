#include "corel/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "corel/boloop.hpp"
#include "corel/runner.hpp"

namespace corel {
namespace {

FactorizedDistribution random_distribution(Rng& rng, int length, int alphabet_size) {
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

PositionWeighting random_weighting(Rng& rng, int length, int alphabet_size) {
    Eigen::MatrixXd w(length, alphabet_size);
    for (int l = 0; l < length; ++l)
        for (int a = 0; a < alphabet_size; ++a) w(l, a) = 0.1 + rng.uniform();
    return PositionWeighting(w);
}

Sequence random_sequence(Rng& rng, int length, int alphabet_size) {
    Sequence s;
    for (int l = 0; l < length; ++l)
        s.tokens.push_back(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(alphabet_size))));
    return s;
}

std::optional<std::string> fail(const std::string& msg) { return msg; }

std::optional<std::string> check_hellinger_brute_force(std::uint64_t seed) {
    Rng rng(seed);
    for (int length = 1; length <= 4; ++length)
        for (int alphabet = 2; alphabet <= 4; ++alphabet)
            for (int trial = 0; trial < 5; ++trial) {
                const auto p = random_distribution(rng, length, alphabet);
                const auto q = random_distribution(rng, length, alphabet);
                const double fast = hellinger_sq(p, q);
                const double brute = brute_force_hellinger_sq(p, q);
                if (std::abs(fast - brute) > 1e-12) {
                    std::ostringstream os;
                    os << "product form " << fast << " vs definition " << brute << " at L="
                       << length << " A=" << alphabet;
                    return fail(os.str());
                }
            }
    return std::nullopt;
}

std::optional<std::string> check_weighted_hellinger(std::uint64_t seed) {
    Rng rng(seed);
    for (int length = 1; length <= 4; ++length)
        for (int alphabet = 2; alphabet <= 4; ++alphabet)
            for (int trial = 0; trial < 5; ++trial) {
                const auto p = random_distribution(rng, length, alphabet);
                const auto q = random_distribution(rng, length, alphabet);
                const auto w = random_weighting(rng, length, alphabet);
                const double fast = weighted_hellinger_sq(p, q, w);
                const double brute = brute_force_hellinger_sq(p, q, &w);
                if (std::abs(fast - brute) > 1e-12)
                    return fail("weighted product form disagrees with the definitional sum");

                Sequence x = random_sequence(rng, length, alphabet);
                Sequence y = x;
                // force at least one differing position
                const int l = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(length)));
                y.tokens[static_cast<size_t>(l)] = (x[l] + 1) % alphabet;
                const double d = weighted_hellinger_sq(indicator(x, alphabet),
                                                       indicator(y, alphabet), w);
                const double expect = 0.5 * (w.sequence_weight(x) + w.sequence_weight(y));
                if (std::abs(d - expect) > 1e-12)
                    return fail("indicator identity (w(x)+w(x'))/2 violated");
            }
    return std::nullopt;
}

std::optional<std::string> check_kernel_psd(std::uint64_t seed) {
    Rng rng(seed);
    const int length = 6, alphabet = 4, n = 20;
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<FactorizedDistribution> points;
        for (int i = 0; i < n; ++i) points.push_back(random_distribution(rng, length, alphabet));
        const KernelParams params(0.5 + 2.0 * rng.uniform(), 0.2 + 3.0 * rng.uniform());
        const std::vector<KernelSpec> specs = {
            KernelSpec::plain(params),
            KernelSpec::weighted(random_weighting(rng, length, alphabet), params),
            KernelSpec::product({random_weighting(rng, length, alphabet),
                                 random_weighting(rng, length, alphabet)},
                                params),
        };
        for (const KernelSpec& spec : specs) {
            const Eigen::MatrixXd gram = gram_matrix(spec, points);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
            const double min_eig = eig.eigenvalues().minCoeff();
            if (min_eig < -1e-8 * params.theta) {
                std::ostringstream os;
                os << "Gram eigenvalue " << min_eig << " below tolerance for variant "
                   << static_cast<int>(spec.variant);
                return fail(os.str());
            }
        }
    }
    return std::nullopt;
}

std::optional<std::string> check_relaxation_consistency(std::uint64_t seed) {
    Rng rng(seed);
    const int length = 3, alphabet = 3;
    const Sequence target = random_sequence(rng, length, alphabet);
    const BlackBox bb = cutoff_motif_landscape(target, 2, 1.0, 0.5);

    std::map<Sequence, double> table;
    double min_f = std::numeric_limits<double>::infinity();
    for_each_sequence(length, alphabet, [&](const Sequence& x) {
        const double v = bb.evaluate(x)[0];
        table[x] = v;
        min_f = std::min(min_f, v);
    });
    for (const auto& [x, v] : table) {
        const double relaxed = relaxed_objective(table, indicator(x, alphabet));
        if (std::abs(relaxed - v) > 1e-12) return fail("relaxed objective differs at a vertex");
    }
    for (int trial = 0; trial < 200; ++trial) {
        const double relaxed = relaxed_objective(table, random_distribution(rng, length, alphabet));
        if (relaxed < min_f - 1e-9) return fail("relaxed objective drops below the discrete minimum");
    }
    return std::nullopt;
}

std::optional<std::string> check_gp_interpolation(std::uint64_t seed) {
    Rng rng(seed);
    const int length = 4, alphabet = 3;
    std::set<Sequence> seen;
    std::vector<FactorizedDistribution> points;
    std::vector<double> y;
    while (points.size() < 8) {
        const Sequence s = random_sequence(rng, length, alphabet);
        if (!seen.insert(s).second) continue;
        points.push_back(indicator(s, alphabet));
        y.push_back(rng.normal());
    }
    GpModel model(KernelSpec::plain());
    model.fit_fixed(points, y, 2.0, 1e-12);
    const double theta = model.amplitude();
    for (size_t i = 0; i < points.size(); ++i) {
        const auto post = model.posterior(points[i]);
        if (std::abs(post.mean - y[i]) > 1e-6) {
            std::ostringstream os;
            os << "posterior mean " << post.mean << " misses observation " << y[i];
            return fail(os.str());
        }
        if (post.var_raw < -1e-8 * theta || post.var > theta * (1.0 + 1e-8))
            return fail("posterior variance escapes [0, theta]");
    }
    return std::nullopt;
}

std::optional<std::string> check_gp_closed_form(std::uint64_t) {
    Eigen::VectorXd y(2);
    y << 0.0, 2.0;
    const MeanAmplitude ma = mean_and_amplitude(Eigen::MatrixXd::Identity(2, 2), y);
    if (std::abs(ma.mean - 1.0) > 1e-12 || std::abs(ma.amplitude - 2.0) > 1e-12)
        return fail("identity-Gram mean/amplitude off the closed form");

    GpModel model(KernelSpec::plain());
    model.fit({indicator(Sequence({0, 1}), 2)}, {0.25});
    if (std::abs(model.mean() - 0.25) > 1e-12 || std::abs(model.amplitude() - 1.0) > 1e-12)
        return fail("single-observation conventions violated");
    return std::nullopt;
}

std::optional<std::string> check_acquisition_closed_form(std::uint64_t) {
    if (std::abs(normal_pdf(0.0) - 0.3989422804014327) > 1e-15)
        return fail("standard normal density at 0");
    if (std::abs(expected_improvement(0.0, 1.0, 0.0) - normal_pdf(0.0)) > 1e-12)
        return fail("EI at zero gap, unit variance");
    // minimization convention: improvement is best_so_far - X
    if (expected_improvement(-1.0, 0.0, 0.0) != 1.0 || expected_improvement(1.0, 0.0, 0.0) != 0.0)
        return fail("EI degenerate-variance branch");
    if (std::abs(ucb_score(1.0, 4.0, 2.0) - 3.0) > 1e-12) return fail("UCB arithmetic");

    if (std::abs(hypervolume_2d({{2.0, 1.0}, {1.0, 2.0}}, {0.0, 0.0}) - 3.0) > 1e-12)
        return fail("two-point staircase hypervolume");

    ParetoState state({0.0, 0.0});
    state.add({2.0, 2.0});
    if (ehvi_2d({1.0, 1.0}, {0.0, 0.0}, state) != 0.0)
        return fail("EHVI of a dominated deterministic point");
    if (std::abs(ehvi_2d({3.0, 3.0}, {0.0, 0.0}, state) - 5.0) > 1e-12)
        return fail("EHVI of a dominating deterministic point");
    return std::nullopt;
}

std::optional<std::string> check_pareto_front_oracle(std::uint64_t seed) {
    Rng rng(seed);
    ParetoState state({0.0, 0.0});
    double last_hv = 0.0;
    for (int i = 0; i < 100; ++i) {
        state.add({3.0 * rng.uniform() - 1.0, 3.0 * rng.uniform() - 1.0});
        const double hv = state.hypervolume();
        if (hv + 1e-12 < last_hv) return fail("hypervolume decreased as points were added");
        last_hv = hv;

        auto expect = pareto_front(state.points());
        auto got = state.front();
        auto key = [](const Point2& p) { return std::make_pair(p.y1, p.y2); };
        std::sort(expect.begin(), expect.end(),
                  [&](const Point2& a, const Point2& b) { return key(a) < key(b); });
        std::sort(got.begin(), got.end(),
                  [&](const Point2& a, const Point2& b) { return key(a) < key(b); });
        if (expect.size() != got.size()) return fail("incremental front size drifts from oracle");
        for (size_t j = 0; j < got.size(); ++j)
            if (key(got[j]) != key(expect[j])) return fail("incremental front drifts from oracle");
    }
    return std::nullopt;
}

std::optional<std::string> check_discrete_search(std::uint64_t seed) {
    Rng rng(seed);
    const int length = 5, alphabet = 4;
    const Alphabet ab = Alphabet::generated(alphabet);
    for (int instance = 0; instance < 20; ++instance) {
        Eigen::MatrixXd c(length, alphabet);
        for (int l = 0; l < length; ++l)
            for (int a = 0; a < alphabet; ++a) c(l, a) = rng.uniform();
        // separable objective: best-improvement climbing must reach the exact optimum
        const AcqFn acq = [&](const FactorizedDistribution& p) {
            double v = 0.0;
            for (int l = 0; l < length; ++l)
                for (int a = 0; a < alphabet; ++a) v += c(l, a) * p(l, a);
            return v;
        };
        const double exact = c.rowwise().maxCoeff().sum();
        std::vector<Sequence> seeds;
        for (int s = 0; s < 3; ++s) seeds.push_back(random_sequence(rng, length, alphabet));
        const auto res = optimize_acq_discrete(acq, seeds, ab, {2000, 1, 100});
        if (std::abs(res.best_acq - exact) > 1e-12) {
            std::ostringstream os;
            os << "climb reached " << res.best_acq << ", exact optimum " << exact;
            return fail(os.str());
        }
    }
    return std::nullopt;
}

std::optional<std::string> check_sampling_selection(std::uint64_t seed) {
    Rng rng(seed);
    const int length = 4, alphabet = 4;
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = random_distribution(rng, length, alphabet);
        Eigen::MatrixXd c(length, alphabet);
        for (int l = 0; l < length; ++l)
            for (int a = 0; a < alphabet; ++a) c(l, a) = rng.normal();
        const AcqFn acq = [&](const FactorizedDistribution& q) {
            double v = 0.0;
            for (int l = 0; l < length; ++l)
                for (int a = 0; a < alphabet; ++a) v += c(l, a) * q(l, a);
            return v;
        };
        const Sequence mode = argmax_sequence(p);
        const Sequence plain = sequence_from_distribution(p, acq, 0, rng);
        if (!(plain == mode)) return fail("b=0 must return the distribution argmax");
        const Sequence chosen = sequence_from_distribution(p, acq, 60, rng);
        if (acq(indicator(chosen, alphabet)) < acq(indicator(mode, alphabet)))
            return fail("sampling selection returned something worse than the argmax");

        const auto pool = ranked_pool_from_distribution(p, acq, 20, rng);
        for (size_t i = 1; i < pool.size(); ++i)
            if (pool[i - 1].acq < pool[i].acq) return fail("ranked pool is not sorted");
    }
    return std::nullopt;
}

std::optional<std::string> check_blackbox_budget(std::uint64_t) {
    const BlackBox base(1, {false}, [](const Sequence&) { return std::vector<double>{0.0}; });
    const BlackBox capped = metered(base, 5);
    const Sequence x({0, 1});
    for (int i = 0; i < 5; ++i) capped.evaluate(x);
    if (capped.count() != 5) return fail("metered counter off after 5 calls");
    try {
        capped.evaluate(x);
        return fail("6th call of a 5-call budget went through");
    } catch (const Error& e) {
        if (e.code() != Errc::budget_exhausted) return fail("wrong error on budget exhaustion");
    }
    if (capped.count() != 5) return fail("rejected call consumed budget");
    if (base.count() != 0) return fail("metered view leaked into the source counter");
    return std::nullopt;
}

std::optional<std::string> check_run_determinism(std::uint64_t seed) {
    Rng seq_rng(seed);
    const int length = 6, alphabet = 4;
    const Alphabet ab = Alphabet::generated(alphabet);
    const Sequence target = random_sequence(seq_rng, length, alphabet);
    const BlackBox bb = cutoff_motif_landscape(target, 3, 1.0, 1.0);

    std::vector<Sequence> initial = {random_sequence(seq_rng, length, alphabet),
                                     random_sequence(seq_rng, length, alphabet)};
    if (initial[0] == initial[1]) initial.pop_back();

    LoopConfig cfg;
    cfg.variant = LoopVariant::discrete;
    cfg.t_max = 3;
    cfg.batch_size = 1;
    cfg.kernel = KernelSpec::plain();
    const PriorBundle bundle{ab, initial, std::nullopt, std::nullopt};

    auto once = [&] {
        Rng rng(seed + 17);
        return run_bo(cfg, bb, bundle, rng);
    };
    const RunRecord a = once();
    const RunRecord b = once();
    if (a.iterations.size() != b.iterations.size()) return fail("iteration counts differ");
    if (a.curve != b.curve) return fail("curves differ between identical runs");
    for (size_t i = 0; i < a.iterations.size(); ++i) {
        const auto& ia = a.iterations[i];
        const auto& ib = b.iterations[i];
        if (!(ia.proposed == ib.proposed)) return fail("proposed sequences differ");
        if (ia.raw_values != ib.raw_values) return fail("observed values differ");
        for (size_t m = 0; m < ia.gp.size(); ++m)
            if (ia.gp[m].lambda != ib.gp[m].lambda || ia.gp[m].sigma_sq != ib.gp[m].sigma_sq ||
                ia.gp[m].mu != ib.gp[m].mu || ia.gp[m].theta != ib.gp[m].theta)
                return fail("fitted hyperparameters differ");
    }
    return std::nullopt;
}

/// Smoothed indicator: mass `peak` on the sequence token, rest spread evenly.
FactorizedDistribution soft_indicator(const Sequence& x, int alphabet, double peak) {
    Eigen::MatrixXd p =
        Eigen::MatrixXd::Constant(x.length(), alphabet, (1.0 - peak) / (alphabet - 1));
    for (int l = 0; l < x.length(); ++l) p(l, x[l]) = peak;
    return FactorizedDistribution(p);
}

/// Mutation chains away from random centers, smoothed: pairwise distances
/// spread over a wide band instead of concentrating, so lambda is identifiable.
std::vector<FactorizedDistribution> spread_points(Rng& rng, int count, int length, int alphabet) {
    std::vector<FactorizedDistribution> points;
    Sequence current = random_sequence(rng, length, alphabet);
    for (int i = 0; i < count; ++i) {
        if (i % length == 0) current = random_sequence(rng, length, alphabet);
        const int l = i % length;
        current.tokens[static_cast<size_t>(l)] =
            (current[l] + 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(alphabet - 1)))) %
            alphabet;
        points.push_back(soft_indicator(current, alphabet, 0.55));
    }
    return points;
}

std::optional<std::string> check_lambda_recovery(std::uint64_t seed) {
    const int length = 8, alphabet = 4, n = 40;
    const double true_lambda = 1.0, true_theta = 1.5, true_mu = 0.7;
    for (int rep = 0; rep < 2; ++rep) {
        Rng rng(seed + static_cast<std::uint64_t>(rep));
        std::vector<FactorizedDistribution> points = spread_points(rng, n, length, alphabet);
        const KernelSpec spec = KernelSpec::plain({true_theta, true_lambda});
        Eigen::MatrixXd gram = gram_matrix(spec, points);
        gram.diagonal().array() += 1e-8 * true_theta;
        const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(gram).matrixL();
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z[i] = rng.normal();
        const Eigen::VectorXd y_vec = chol * z + Eigen::VectorXd::Constant(n, true_mu);
        std::vector<double> y(y_vec.data(), y_vec.data() + n);

        GpModel model(KernelSpec::plain());
        const FitReport report = model.fit(points, y);
        if (report.params.lambda < true_lambda / 10.0 || report.params.lambda > true_lambda * 10.0) {
            std::ostringstream os;
            os << "recovered lambda " << report.params.lambda << " outside [0.1, 10]";
            return fail(os.str());
        }
    }
    return std::nullopt;
}

std::optional<std::string> check_ehvi_vs_mc(std::uint64_t seed) {
    Rng rng(seed);
    for (int config = 0; config < 10; ++config) {
        ParetoState state({-0.5, -0.5});
        const int front_size = 1 + static_cast<int>(rng.uniform_int(5));
        for (int i = 0; i < front_size; ++i)
            state.add({2.0 * rng.uniform(), 2.0 * rng.uniform()});
        const Point2 mean{3.0 * rng.uniform() - 0.5, 3.0 * rng.uniform() - 0.5};
        const Point2 var{0.01 + rng.uniform(), 0.01 + rng.uniform()};
        const double exact = ehvi_2d(mean, var, state);
        Rng mc_rng(rng.uniform_int(1u << 30));
        const McEstimate mc = ehvi_2d_mc(mean, var, state, 100000, mc_rng);
        const double tol = std::max(4.0 * mc.std_error, 1e-9);
        if (std::abs(exact - mc.value) > tol) {
            std::ostringstream os;
            os << "exact " << exact << " vs MC " << mc.value << " +- " << mc.std_error;
            return fail(os.str());
        }
    }
    return std::nullopt;
}

std::optional<std::string> check_hypervolume_vs_mc(std::uint64_t seed) {
    Rng rng(seed);
    for (int config = 0; config < 5; ++config) {
        const int count = 2 + static_cast<int>(rng.uniform_int(5));
        std::vector<Point2> points;
        for (int i = 0; i < count; ++i)
            points.push_back({0.2 + 1.8 * rng.uniform(), 0.2 + 1.8 * rng.uniform()});
        const Point2 ref{0.0, 0.0};
        const auto front = pareto_front(points);
        const double exact = hypervolume_2d(front, ref);

        double x_max = 0.0, y_max = 0.0;
        for (const Point2& p : front) {
            x_max = std::max(x_max, p.y1);
            y_max = std::max(y_max, p.y2);
        }
        const double box = x_max * y_max;
        const int n = 1000000;
        long long hits = 0;
        for (int i = 0; i < n; ++i) {
            const Point2 s{x_max * rng.uniform(), y_max * rng.uniform()};
            for (const Point2& p : front)
                if (p.y1 >= s.y1 && p.y2 >= s.y2) {
                    ++hits;
                    break;
                }
        }
        const double p_hat = static_cast<double>(hits) / n;
        const double mc = p_hat * box;
        const double se = std::sqrt(std::max(p_hat * (1.0 - p_hat) / n, 0.0)) * box;
        if (std::abs(exact - mc) > std::max(3.0 * se, 1e-9)) {
            std::ostringstream os;
            os << "staircase " << exact << " vs MC " << mc << " +- " << se;
            return fail(os.str());
        }
    }
    return std::nullopt;
}

} // namespace

const std::vector<VerifyCheck>& verify_checks() {
    static const std::vector<VerifyCheck> checks = {
        {"hellinger-brute-force", true, 101, check_hellinger_brute_force},
        {"weighted-hellinger", true, 102, check_weighted_hellinger},
        {"kernel-psd", true, 103, check_kernel_psd},
        {"relaxation-consistency", true, 104, check_relaxation_consistency},
        {"gp-interpolation", true, 105, check_gp_interpolation},
        {"gp-closed-form", true, 106, check_gp_closed_form},
        {"acquisition-closed-form", true, 107, check_acquisition_closed_form},
        {"pareto-front-oracle", true, 108, check_pareto_front_oracle},
        {"discrete-search", true, 109, check_discrete_search},
        {"sampling-selection", true, 110, check_sampling_selection},
        {"blackbox-budget", true, 111, check_blackbox_budget},
        {"run-determinism", true, 112, check_run_determinism},
        {"gp-lambda-recovery", false, 113, check_lambda_recovery},
        {"ehvi-vs-mc", false, 114, check_ehvi_vs_mc},
        {"hypervolume-vs-mc", false, 115, check_hypervolume_vs_mc},
    };
    return checks;
}

int cmd_verify(bool full) {
    int failures = 0, ran = 0;
    for (const VerifyCheck& check : verify_checks()) {
        if (!full && !check.fast) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        std::optional<std::string> result;
        try {
            result = check.run(check.seed);
        } catch (const std::exception& e) {
            result = std::string("unexpected exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (result) {
            ++failures;
            std::printf("FAIL %-24s %s (reproduce: seed %llu)\n", check.name.c_str(),
                        result->c_str(), static_cast<unsigned long long>(check.seed));
        } else {
            std::printf("ok   %s\n", check.name.c_str());
        }
        log_debug(check.name + " took " + std::to_string(secs) + "s");
    }
    std::printf("verify %s: %d checks, %d failure%s\n", full ? "full" : "fast", ran, failures,
                failures == 1 ? "" : "s");
    return failures > 0 ? 1 : 0;
}

} // namespace corel
