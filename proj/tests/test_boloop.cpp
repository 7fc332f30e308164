#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "corel/boloop.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace corel;

namespace {

std::vector<Sequence> distinct_starts(Rng& rng, int count, int length, int asize) {
    return test::distinct_random_sequences(rng, count, length, asize);
}

LoopConfig small_ei_config() {
    LoopConfig config;
    config.variant = LoopVariant::discrete;
    config.t_max = 5;
    config.batch_size = 1;
    config.acq.kind = AcqKind::ei;
    config.budgets.max_acq_evals = 400;
    return config;
}

double min_raw(const Dataset& data) {
    double best = 1e300;
    for (const auto& row : data.raw_values()) best = std::min(best, row[0]);
    return best;
}

} // namespace

TEST_CASE("dataset bookkeeping") {
    Dataset data;
    const Sequence a{{0, 1}}, b{{1, 0}};
    CHECK(data.size() == 0);
    CHECK(!data.contains(a));
    CHECK(!data.find(a).has_value());

    data.add(a, {2.0}, {-2.0});
    data.note_evaluation();
    CHECK(data.size() == 1);
    CHECK(data.contains(a));
    CHECK(data.find(a).value() == 0);
    CHECK(data.eval_count() == 1);

    data.add(b, {1.0}, {-1.0});
    data.note_evaluation();
    CHECK(data.find(b).value() == 1);
    CHECK(data.sequences()[1] == b);
    CHECK(data.raw_values()[1][0] == 1.0);
    CHECK(data.internal_values()[1][0] == -1.0);

    try {
        data.add(a, {0.0}, {0.0});
        FAIL("expected internal error on duplicate");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::internal);
    }
    CHECK_THROWS_AS(data.add(Sequence{{1, 1}}, {0.0, 1.0}, {0.0}), Error);
}

TEST_CASE("loop configuration is validated up front") {
    Rng rng(101);
    const Alphabet alphabet = Alphabet::generated(3);
    const Sequence target = test::random_sequence(rng, 5, 3);
    const BlackBox bb = weighted_hamming_landscape(target, {1, 1, 1, 1, 1});
    const BlackBox bb2 = two_objective_landscape(target, target);
    PriorBundle bundle{alphabet, distinct_starts(rng, 2, 5, 3), std::nullopt, std::nullopt};

    const auto expect_config_error = [&](LoopConfig config, const BlackBox& box,
                                         const PriorBundle& bun) {
        Rng r(1);
        try {
            run_bo(config, box, bun, r);
            FAIL("expected invalid_config");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::invalid_config);
        }
    };

    LoopConfig config = small_ei_config();
    config.t_max = 0;
    expect_config_error(config, bb, bundle);

    config = small_ei_config();
    config.batch_size = 0;
    expect_config_error(config, bb, bundle);

    config = small_ei_config();
    config.eval_budget = 4;  // below t_max * batch_size = 5
    expect_config_error(config, bb, bundle);

    config = small_ei_config();
    config.acq.kind = AcqKind::ehvi;  // single objective cannot use EHVI
    expect_config_error(config, bb, bundle);

    config = small_ei_config();  // two objectives require EHVI
    expect_config_error(config, bb2, bundle);

    config = small_ei_config();
    config.acq.kappa = -1.0;
    expect_config_error(config, bb, bundle);

    config = small_ei_config();
    config.variant = LoopVariant::parameterized;  // needs a decoder
    expect_config_error(config, bb, bundle);

    PriorBundle empty_bundle{alphabet, {}, std::nullopt, std::nullopt};
    expect_config_error(small_ei_config(), bb, empty_bundle);

    PriorBundle ragged{alphabet,
                       {test::random_sequence(rng, 5, 3), test::random_sequence(rng, 4, 3)},
                       std::nullopt,
                       std::nullopt};
    expect_config_error(small_ei_config(), bb, ragged);

    PriorBundle wrong_decoder{alphabet, bundle.initial, std::nullopt, ToyDecoder(4, 3, 2, 1)};
    LoopConfig param = small_ei_config();
    param.variant = LoopVariant::parameterized;
    expect_config_error(param, bb, wrong_decoder);

    const Alphabet gap_only("A-");  // a single substitutable token cannot mutate
    PriorBundle stuck{gap_only, {Sequence{{0, 0, 0, 0, 0}}}, std::nullopt, std::nullopt};
    expect_config_error(small_ei_config(), bb, stuck);
}

TEST_CASE("single-objective run tracks a monotone incumbent without re-evaluating") {
    Rng rng(102);
    const Alphabet alphabet = Alphabet::generated(3);
    const Sequence target = test::random_sequence(rng, 5, 3);
    const BlackBox bb = weighted_hamming_landscape(target, {1.0, 0.5, 2.0, 1.0, 0.8});
    PriorBundle bundle{alphabet, distinct_starts(rng, 3, 5, 3), std::nullopt, std::nullopt};

    Rng loop_rng(7);
    const RunRecord rec = run_bo(small_ei_config(), bb, bundle, loop_rng);

    CHECK(rec.objective_count == 1);
    CHECK(rec.initial_evals == 3);
    CHECK(rec.data.eval_count() == 3 + 5);
    CHECK(rec.data.size() == rec.data.eval_count());  // dedup: nothing evaluated twice
    CHECK(rec.iterations.size() == 5);
    CHECK(!rec.aborted);
    CHECK(!rec.budget_exhausted);

    // The curve is the per-evaluation best-so-far of a minimized objective.
    REQUIRE(rec.curve.size() == rec.data.raw_values().size());
    double best = 1e300;
    for (std::size_t i = 0; i < rec.curve.size(); ++i) {
        best = std::min(best, rec.data.raw_values()[i][0]);
        CHECK(rec.curve[i] == doctest::Approx(best).epsilon(1e-12));
        if (i > 0) CHECK(rec.curve[i] <= rec.curve[i - 1] + 1e-12);
    }
    CHECK(rec.best_raw == doctest::Approx(min_raw(rec.data)));
    CHECK(bb.evaluate(rec.best_sequence)[0] == doctest::Approx(rec.best_raw));

    int prev_count = rec.initial_evals;
    for (std::size_t i = 0; i < rec.iterations.size(); ++i) {
        const auto& it = rec.iterations[i];
        CHECK(it.iteration == static_cast<int>(i) + 1);
        REQUIRE(it.proposed.size() == 1);
        REQUIRE(it.gp.size() == 1);
        CHECK(it.gp[0].theta > 0.0);
        CHECK(it.gp[0].lambda > 0.0);
        for (int count : it.eval_counts) {
            CHECK(count == prev_count + 1);
            prev_count = count;
        }
        CHECK(it.incumbent_raw == doctest::Approx(rec.curve[static_cast<std::size_t>(prev_count) - 1]));
    }
}

TEST_CASE("ucb runs obey the same contract") {
    Rng rng(103);
    const Alphabet alphabet = Alphabet::generated(3);
    const Sequence target = test::random_sequence(rng, 4, 3);
    const BlackBox bb = weighted_hamming_landscape(target, {1.0, 1.0, 1.0, 1.0});
    PriorBundle bundle{alphabet, distinct_starts(rng, 2, 4, 3), std::nullopt, std::nullopt};

    LoopConfig config = small_ei_config();
    config.acq.kind = AcqKind::ucb;
    config.acq.kappa = 2.0;
    config.t_max = 4;

    Rng loop_rng(8);
    const RunRecord rec = run_bo(config, bb, bundle, loop_rng);
    CHECK(rec.iterations.size() == 4);
    CHECK(rec.data.eval_count() == 2 + 4);
    for (std::size_t i = 1; i < rec.curve.size(); ++i)
        CHECK(rec.curve[i] <= rec.curve[i - 1] + 1e-12);
}

TEST_CASE("batched runs add batch_size novel sequences per iteration") {
    Rng rng(104);
    const Alphabet alphabet = Alphabet::generated(4);
    const Sequence target = test::random_sequence(rng, 6, 4);
    const BlackBox bb = weighted_hamming_landscape(target, std::vector<double>(6, 1.0));
    PriorBundle bundle{alphabet, distinct_starts(rng, 3, 6, 4), std::nullopt, std::nullopt};

    LoopConfig config = small_ei_config();
    config.t_max = 3;
    config.batch_size = 4;
    config.eval_budget = 12;

    Rng loop_rng(9);
    const RunRecord rec = run_bo(config, bb, bundle, loop_rng);
    CHECK(rec.data.eval_count() == 3 + 12);
    CHECK(!rec.budget_exhausted);  // planned evaluations fit the budget exactly
    for (const auto& it : rec.iterations) {
        CHECK(it.proposed.size() == 4);
        std::set<Sequence> unique(it.proposed.begin(), it.proposed.end());
        CHECK(unique.size() == 4);
    }
}

TEST_CASE("duplicated problem sequences are evaluated once") {
    Rng rng(105);
    const Alphabet alphabet = Alphabet::generated(3);
    const Sequence target = test::random_sequence(rng, 4, 3);
    const BlackBox bb = weighted_hamming_landscape(target, {1, 1, 1, 1});
    const Sequence s0 = test::random_sequence(rng, 4, 3);
    PriorBundle bundle{alphabet, {s0, s0, s0}, std::nullopt, std::nullopt};

    LoopConfig config = small_ei_config();
    config.t_max = 2;
    Rng loop_rng(10);
    const RunRecord rec = run_bo(config, bb, bundle, loop_rng);
    CHECK(rec.initial_evals == 1);
    CHECK(rec.data.eval_count() == 1 + 2);
}

TEST_CASE("black-box failure aborts with a partial trace") {
    Rng rng(106);
    const Alphabet alphabet = Alphabet::generated(3);
    // Fails at the sixth call: two initial evaluations plus three loop steps
    // succeed, the fourth loop proposal trips the fault.
    auto counter = std::make_shared<int>(0);
    const BlackBox flaky(1, {false}, [counter](const Sequence& x) {
        if (++*counter >= 6) throw std::runtime_error("sensor offline");
        return std::vector<double>{static_cast<double>(x[0])};
    });
    PriorBundle bundle{alphabet, distinct_starts(rng, 2, 4, 3), std::nullopt, std::nullopt};

    LoopConfig config = small_ei_config();
    config.t_max = 8;
    Rng loop_rng(11);
    const RunRecord rec = run_bo(config, flaky, bundle, loop_rng);

    CHECK(rec.aborted);
    CHECK(rec.abort_message == "sensor offline");
    CHECK(!rec.budget_exhausted);
    CHECK(rec.data.eval_count() == 5);
    CHECK(rec.iterations.size() == 3);  // the failing iteration recorded nothing
    CHECK(rec.curve.size() == 5);
}

TEST_CASE("exhausting the sequence space fails loudly rather than repeating") {
    Rng rng(107);
    const Alphabet alphabet = Alphabet::generated(2);
    const Sequence target{{0, 1}};
    const BlackBox bb = weighted_hamming_landscape(target, {1.0, 1.0});
    PriorBundle bundle{alphabet, {Sequence{{0, 0}}}, std::nullopt, std::nullopt};

    LoopConfig config = small_ei_config();
    config.t_max = 10;  // only 4 sequences exist
    Rng loop_rng(12);
    try {
        run_bo(config, bb, bundle, loop_rng);
        FAIL("expected optimization_failed");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::optimization_failed);
    }
}

TEST_CASE("bi-objective runs keep a non-decreasing relative hypervolume") {
    const Alphabet alphabet = Alphabet::generated(3);
    Rng rng(108);
    const Sequence ta = test::random_sequence(rng, 6, 3);
    Sequence tb = ta;
    for (int l = 0; l < 6; ++l) tb.tokens[static_cast<size_t>(l)] = (ta[l] + 1) % 3;
    const BlackBox bb = two_objective_landscape(ta, tb);
    PriorBundle bundle{alphabet, {ta, tb}, std::nullopt, std::nullopt};

    LoopConfig config;
    config.variant = LoopVariant::discrete;
    config.t_max = 4;
    config.batch_size = 2;
    config.acq.kind = AcqKind::ehvi;
    config.budgets.max_acq_evals = 400;

    Rng loop_rng(13);
    const RunRecord rec = run_bo(config, bb, bundle, loop_rng);

    CHECK(rec.objective_count == 2);
    CHECK(rec.initial_evals == 2);
    CHECK(rec.initial_hv > 0.0);
    REQUIRE(!rec.initial_front.empty());

    // Default reference: componentwise minimum minus 1% of the range.
    double min1 = 1e300, max1 = -1e300, min2 = 1e300, max2 = -1e300;
    for (const auto& row : {bb.evaluate(ta), bb.evaluate(tb)}) {
        min1 = std::min(min1, row[0]);
        max1 = std::max(max1, row[0]);
        min2 = std::min(min2, row[1]);
        max2 = std::max(max2, row[1]);
    }
    CHECK(rec.ref_point.y1 == doctest::Approx(min1 - 0.01 * (max1 - min1)).epsilon(1e-12));
    CHECK(rec.ref_point.y2 == doctest::Approx(min2 - 0.01 * (max2 - min2)).epsilon(1e-12));

    // The relative-hypervolume trace normalizes to 1 at the initial front and
    // never decreases afterwards.
    REQUIRE(rec.curve.size() == static_cast<std::size_t>(rec.data.eval_count()));
    CHECK(rec.curve[static_cast<std::size_t>(rec.initial_evals) - 1] == doctest::Approx(1.0));
    for (std::size_t i = 1; i < rec.curve.size(); ++i)
        CHECK(rec.curve[i] >= rec.curve[i - 1] - 1e-12);

    double prev_hv = 0.0;
    for (const auto& it : rec.iterations) {
        REQUIRE(it.gp.size() == 2);
        CHECK(it.front_size >= 1);
        CHECK(it.rel_hv >= prev_hv - 1e-12);
        prev_hv = it.rel_hv;
    }
}

TEST_CASE("an explicit reference point is honored") {
    const Alphabet alphabet = Alphabet::generated(2);
    const Sequence ta = parse_sequence("AAAA", alphabet);
    const Sequence tb = parse_sequence("BBBB", alphabet);
    const BlackBox bb = two_objective_landscape(ta, tb);
    PriorBundle bundle{alphabet, {ta, tb}, std::nullopt, std::nullopt};

    LoopConfig config;
    config.t_max = 2;
    config.batch_size = 1;
    config.acq.kind = AcqKind::ehvi;
    config.ref_point = Point2{-5.0, -5.0};

    Rng loop_rng(14);
    const RunRecord rec = run_bo(config, bb, bundle, loop_rng);
    CHECK(rec.ref_point.y1 == -5.0);
    CHECK(rec.ref_point.y2 == -5.0);
    CHECK(rec.initial_hv ==
          doctest::Approx(hypervolume_2d(rec.initial_front, rec.ref_point)).epsilon(1e-12));
}

TEST_CASE("runs are reproducible from the rng seed") {
    Rng rng(109);
    const Alphabet alphabet = Alphabet::generated(3);
    const Sequence target = test::random_sequence(rng, 5, 3);
    const BlackBox bb = weighted_hamming_landscape(target, {1.0, 0.3, 0.7, 1.2, 0.5});
    PriorBundle bundle{alphabet, distinct_starts(rng, 3, 5, 3), std::nullopt, std::nullopt};

    Rng r1(77), r2(77);
    const RunRecord a = run_bo(small_ei_config(), bb, bundle, r1);
    const RunRecord b = run_bo(small_ei_config(), bb, bundle, r2);
    REQUIRE(a.data.size() == b.data.size());
    for (int i = 0; i < a.data.size(); ++i) {
        CHECK(a.data.sequences()[static_cast<std::size_t>(i)] ==
              b.data.sequences()[static_cast<std::size_t>(i)]);
        CHECK(a.data.raw_values()[static_cast<std::size_t>(i)] ==
              b.data.raw_values()[static_cast<std::size_t>(i)]);
    }
    CHECK(a.best_sequence == b.best_sequence);
    CHECK(a.curve == b.curve);
}

TEST_CASE("prior sampling produces novel distinct sequences") {
    Rng rng(110);
    const Alphabet alphabet = Alphabet::generated(3);
    Dataset data;
    for (const auto& s : distinct_starts(rng, 4, 5, 3)) data.add(s, {0.0}, {0.0});

    const FactorizedDistribution P = uniform_distribution(5, 3);
    Rng draw(15);
    const auto picked = sample_novel_from_prior(P, 6, data, alphabet, draw);
    REQUIRE(picked.size() == 6);
    std::set<Sequence> unique;
    for (const auto& x : picked) {
        CHECK(unique.insert(x).second);
        CHECK(!data.contains(x));
    }
    CHECK_THROWS_AS(sample_novel_from_prior(P, 0, data, alphabet, draw), Error);
}

TEST_CASE("prior sampling falls back to mutation when the prior is atomic") {
    Rng rng(111);
    const Alphabet alphabet = Alphabet::generated(3);
    const Sequence support = test::random_sequence(rng, 5, 3);
    Dataset data;
    data.add(support, {0.0}, {0.0});  // the only sample the prior can draw

    const FactorizedDistribution atom = indicator(support, alphabet);
    Rng draw(16);
    const auto picked = sample_novel_from_prior(atom, 3, data, alphabet, draw);
    REQUIRE(picked.size() == 3);
    std::set<Sequence> unique;
    for (const auto& x : picked) {
        CHECK(unique.insert(x).second);
        CHECK(!(x == support));
    }
}

TEST_CASE("baseline population control") {
    Rng rng(112);
    const Alphabet alphabet = Alphabet::generated(4);
    const Sequence target = test::random_sequence(rng, 8, 4);
    const BlackBox bb = cutoff_motif_landscape(target, 5, 3.0, 1.0);
    const auto initial = distinct_starts(rng, 3, 8, 4);

    Rng base_rng(17);
    const RunRecord rec = random_mutation_baseline(initial, bb, alphabet, 6, std::nullopt, base_rng);

    CHECK(rec.initial_evals == 3);
    CHECK(rec.iterations.size() == 6);
    for (const auto& it : rec.iterations) {
        // One child per population member, every generation.
        CHECK(it.proposed.size() == 16);
        for (const auto& child : it.proposed) CHECK(child.length() == 8);
    }
    CHECK(rec.best_raw == doctest::Approx(min_raw(rec.data)));
    // Re-proposed duplicates spend no budget, so the dataset may be smaller
    // than the proposal count but never larger.
    CHECK(rec.data.size() <= 3 + 6 * 16);
    CHECK(rec.data.size() == rec.data.eval_count());
}

TEST_CASE("baseline stops gracefully when the budget runs out") {
    Rng rng(113);
    const Alphabet alphabet = Alphabet::generated(3);
    const Sequence target = test::random_sequence(rng, 6, 3);
    const BlackBox bb = weighted_hamming_landscape(target, std::vector<double>(6, 1.0));
    const auto initial = distinct_starts(rng, 2, 6, 3);

    Rng base_rng(18);
    const RunRecord rec = random_mutation_baseline(initial, bb, alphabet, 50, 20, base_rng);
    CHECK(rec.budget_exhausted);
    CHECK(rec.data.eval_count() == 2 + 20);  // initial evaluations are free
    CHECK(!rec.aborted);
}

TEST_CASE("baseline input validation") {
    const Alphabet alphabet = Alphabet::generated(3);
    const BlackBox bb = weighted_hamming_landscape(Sequence{{0}}, {1.0});
    Rng rng(19);
    CHECK_THROWS_AS(random_mutation_baseline({}, bb, alphabet, 5, std::nullopt, rng), Error);
    // Two-position mutation is impossible at length 1.
    try {
        random_mutation_baseline({Sequence{{0}}}, bb, alphabet, 5, std::nullopt, rng);
        FAIL("expected invalid_config");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_config);
    }
    const BlackBox bb4 = weighted_hamming_landscape(Sequence{{0, 1, 2, 0}}, {1, 1, 1, 1});
    CHECK_THROWS_AS(
        random_mutation_baseline({Sequence{{0, 1, 2, 0}}}, bb4, alphabet, 0, std::nullopt, rng),
        Error);
}

TEST_CASE("baseline runs are reproducible and respect the pareto survivor rule") {
    const Alphabet alphabet = Alphabet::generated(3);
    Rng rng(114);
    const Sequence ta = test::random_sequence(rng, 6, 3);
    Sequence tb = ta;
    for (int l = 0; l < 6; ++l) tb.tokens[static_cast<size_t>(l)] = (ta[l] + 1) % 3;
    const BlackBox bb = two_objective_landscape(ta, tb);

    Rng r1(20), r2(20);
    const RunRecord a = random_mutation_baseline({ta, tb}, bb, alphabet, 5, 60, r1);
    const RunRecord b = random_mutation_baseline({ta, tb}, bb, alphabet, 5, 60, r2);
    REQUIRE(a.iterations.size() == b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i)
        CHECK(a.iterations[i].proposed == b.iterations[i].proposed);

    for (std::size_t i = 1; i < a.curve.size(); ++i)
        CHECK(a.curve[i] >= a.curve[i - 1] - 1e-12);
}
