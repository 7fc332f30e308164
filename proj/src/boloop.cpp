#include "corel/boloop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "corel/error.hpp"

namespace corel {

void Dataset::add(const Sequence& x, std::vector<double> raw, std::vector<double> internal) {
    if (index_.count(x)) throw Error(Errc::internal, "sequence added to the dataset twice");
    if (raw.size() != internal.size())
        throw Error(Errc::dimension_mismatch, "raw and internal objective counts differ");
    index_.emplace(x, seqs_.size());
    seqs_.push_back(x);
    raw_.push_back(std::move(raw));
    internal_.push_back(std::move(internal));
}

namespace {

// Always-on invariant check; these must hold in release builds too.
void runtime_check(bool ok, const char* msg) {
    if (!ok) throw Error(Errc::internal, msg);
}

std::vector<double> to_internal(const std::vector<double>& raw, const std::vector<bool>& maximize) {
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = maximize[i] ? raw[i] : -raw[i];
    return out;
}

Point2 point_of(const std::vector<double>& internal) { return {internal[0], internal[1]}; }

// Componentwise minimum of the initial observations minus 1% of their range;
// a degenerate range falls back to 1% of max(1, |min|) so the pad stays positive.
Point2 default_ref(const std::vector<Point2>& pts) {
    double mins[2] = {std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
    double maxs[2] = {-std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
    for (const auto& p : pts) {
        const double v[2] = {p.y1, p.y2};
        for (int k = 0; k < 2; ++k) {
            mins[k] = std::min(mins[k], v[k]);
            maxs[k] = std::max(maxs[k], v[k]);
        }
    }
    double pad[2];
    for (int k = 0; k < 2; ++k) {
        pad[k] = 0.01 * (maxs[k] - mins[k]);
        if (pad[k] <= 0.0) pad[k] = 0.01 * std::max(1.0, std::abs(mins[k]));
    }
    return {mins[0] - pad[0], mins[1] - pad[1]};
}

int random_different_token(int current, const Alphabet& alphabet, Rng& rng) {
    const auto& toks = alphabet.mutation_tokens();
    int cur_pos = -1;
    for (std::size_t i = 0; i < toks.size(); ++i)
        if (toks[i] == current) cur_pos = static_cast<int>(i);
    if (cur_pos < 0) return toks[rng.uniform_int(toks.size())];
    const int pick = static_cast<int>(rng.uniform_int(toks.size() - 1));
    return toks[pick >= cur_pos ? pick + 1 : pick];
}

Sequence mutate_positions(const Sequence& base, int k, const Alphabet& alphabet, Rng& rng) {
    const int L = base.length();
    std::vector<int> ids(L);
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(L - i)));
        std::swap(ids[i], ids[j]);
    }
    Sequence x = base;
    for (int i = 0; i < k; ++i) x.tokens[ids[i]] = random_different_token(base[ids[i]], alphabet, rng);
    return x;
}

template <typename TakenFn>
Sequence mutate_until_novel(const Sequence& base, const TakenFn& taken, const Alphabet& alphabet,
                            Rng& rng) {
    int total = 0;
    for (int k = 1; k <= base.length(); ++k) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            if (++total > 10000)
                throw Error(Errc::optimization_failed, "could not find an unevaluated sequence");
            const Sequence x = mutate_positions(base, k, alphabet, rng);
            if (!taken(x)) return x;
        }
    }
    throw Error(Errc::optimization_failed, "could not find an unevaluated sequence");
}

// Loop-internal incumbent / front bookkeeping shared by BO and the baseline.
struct Incumbents {
    double best_internal = -std::numeric_limits<double>::infinity();
    Sequence best_seq;
    std::optional<ParetoState> front_state;
};

void record_eval(RunRecord& rec, Incumbents& inc, const std::vector<bool>& maximize,
                 const Sequence& x, const std::vector<double>& raw) {
    auto internal = to_internal(raw, maximize);
    rec.data.add(x, raw, internal);
    rec.data.note_evaluation();
    if (rec.objective_count == 1) {
        if (internal[0] > inc.best_internal) {
            inc.best_internal = internal[0];
            inc.best_seq = x;
        }
        rec.curve.push_back(maximize[0] ? inc.best_internal : -inc.best_internal);
    } else {
        inc.front_state->add(point_of(internal));
        rec.curve.push_back(inc.front_state->hypervolume() / rec.initial_hv);
    }
}

// Evaluates the problem-defining sequences on the unmetered black box and
// fixes the reference point, initial front, and curve prefix.
void evaluate_initial(RunRecord& rec, Incumbents& inc, const BlackBox& bb,
                      const std::vector<Sequence>& initial, const std::optional<Point2>& ref) {
    for (const auto& x : initial) {
        if (rec.data.contains(x)) continue;
        auto raw = bb.evaluate(x);
        rec.data.add(x, raw, to_internal(raw, bb.maximize()));
        rec.data.note_evaluation();
    }
    rec.initial_evals = rec.data.eval_count();

    if (rec.objective_count == 2) {
        std::vector<Point2> pts;
        for (const auto& row : rec.data.internal_values()) pts.push_back(point_of(row));
        rec.ref_point = ref ? *ref : default_ref(pts);
        ParetoState init_state(rec.ref_point);
        for (const auto& p : pts) init_state.add(p);
        rec.initial_front = init_state.front();
        rec.initial_hv = init_state.hypervolume();
        if (!(rec.initial_hv > 0.0))
            throw Error(Errc::undefined_metric,
                        "initial observations span no hypervolume over the reference point");
        inc.front_state.emplace(rec.ref_point);
        for (const auto& p : pts) {
            inc.front_state->add(p);
            rec.curve.push_back(inc.front_state->hypervolume() / rec.initial_hv);
        }
    } else {
        for (std::size_t i = 0; i < rec.data.internal_values().size(); ++i) {
            const double v = rec.data.internal_values()[i][0];
            if (v > inc.best_internal) {
                inc.best_internal = v;
                inc.best_seq = rec.data.sequences()[i];
            }
            rec.curve.push_back(bb.maximize()[0] ? inc.best_internal : -inc.best_internal);
        }
    }
}

std::vector<Sequence> front_sequences(const Dataset& data) {
    std::vector<Point2> vals;
    for (const auto& row : data.internal_values()) vals.push_back(point_of(row));
    std::vector<Sequence> out;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < vals.size() && !dominated; ++j)
            dominated = dominates(vals[j], vals[i]);
        if (!dominated) out.push_back(data.sequences()[i]);
    }
    return out;
}

std::vector<ScoredSequence> select_novel(const std::vector<ScoredSequence>& pool, int batch_size,
                                         const Dataset& data, const AcqFn& acq,
                                         const Alphabet& alphabet, Rng& rng) {
    runtime_check(!pool.empty(), "empty proposal pool");
    std::vector<ScoredSequence> out;
    std::set<Sequence> chosen;
    for (const auto& entry : pool) {
        if (data.contains(entry.seq) || chosen.count(entry.seq)) continue;
        out.push_back(entry);
        chosen.insert(entry.seq);
        if (static_cast<int>(out.size()) == batch_size) return out;
    }
    const auto taken = [&](const Sequence& x) { return data.contains(x) || chosen.count(x) > 0; };
    while (static_cast<int>(out.size()) < batch_size) {
        const Sequence x = mutate_until_novel(pool.front().seq, taken, alphabet, rng);
        chosen.insert(x);
        out.push_back({x, acq(indicator(x, alphabet.size()))});
    }
    return out;
}

FactorizedDistribution softmax_rows(const std::vector<double>& z, int L, int A) {
    Eigen::MatrixXd probs(L, A);
    for (int l = 0; l < L; ++l) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < A; ++a) row_max = std::max(row_max, z[static_cast<std::size_t>(l) * A + a]);
        double total = 0.0;
        for (int a = 0; a < A; ++a) {
            const double e = std::exp(z[static_cast<std::size_t>(l) * A + a] - row_max);
            probs(l, a) = e;
            total += e;
        }
        probs.row(l) /= total;
    }
    return FactorizedDistribution(std::move(probs));
}

std::vector<std::vector<double>> make_starts(int count, int dim, Rng& rng) {
    std::vector<std::vector<double>> starts;
    starts.emplace_back(dim, 0.0);
    for (int i = 1; i < count; ++i) {
        std::vector<double> z(dim);
        for (auto& v : z) v = rng.normal();
        starts.push_back(std::move(z));
    }
    return starts;
}

} // namespace

std::vector<Sequence> sample_novel_from_prior(const FactorizedDistribution& P, int count,
                                              const Dataset& data, const Alphabet& alphabet,
                                              Rng& rng) {
    if (count < 1) throw Error(Errc::invalid_input, "need a positive sample count");
    std::vector<Sequence> out;
    std::set<Sequence> chosen;
    const auto taken = [&](const Sequence& x) { return data.contains(x) || chosen.count(x) > 0; };
    for (int i = 0; i < 50 * count && static_cast<int>(out.size()) < count; ++i) {
        const Sequence x = sample_sequence(P, rng);
        if (!taken(x)) {
            chosen.insert(x);
            out.push_back(x);
        }
    }
    while (static_cast<int>(out.size()) < count) {
        const Sequence x = mutate_until_novel(argmax_sequence(P), taken, alphabet, rng);
        chosen.insert(x);
        out.push_back(x);
    }
    return out;
}

RunRecord run_bo(const LoopConfig& config, const BlackBox& bb, const PriorBundle& bundle,
                 Rng& rng) {
    const int M = bb.objective_count();
    if (config.t_max < 1 || config.batch_size < 1)
        throw Error(Errc::invalid_config, "t_max and batch_size must be positive");
    if (bundle.initial.empty())
        throw Error(Errc::invalid_config, "need at least one problem-defining sequence");
    if (M == 1 && config.acq.kind == AcqKind::ehvi)
        throw Error(Errc::invalid_config, "EHVI needs two objectives");
    if (M == 2 && config.acq.kind != AcqKind::ehvi)
        throw Error(Errc::invalid_config, "two-objective runs use EHVI");
    if (config.acq.kappa < 0.0) throw Error(Errc::invalid_config, "kappa must be nonnegative");
    if (config.variant == LoopVariant::parameterized && !bundle.decoder)
        throw Error(Errc::invalid_config, "the parameterized variant needs a decoder");
    if (bundle.alphabet.mutation_tokens().size() < 2)
        throw Error(Errc::invalid_config, "need at least two substitutable tokens");
    const int L = bundle.initial.front().length();
    const int A = bundle.alphabet.size();
    for (const auto& x : bundle.initial) {
        validate_sequence(x, bundle.alphabet);
        if (x.length() != L)
            throw Error(Errc::invalid_config, "problem-defining sequences must share a length");
    }
    if (bundle.decoder &&
        (bundle.decoder->length() != L || bundle.decoder->alphabet_size() != A))
        throw Error(Errc::invalid_config, "decoder shape does not match the problem");
    if (config.eval_budget) {
        if (*config.eval_budget < 0)
            throw Error(Errc::invalid_config, "evaluation budget must be nonnegative");
        if (static_cast<long long>(config.t_max) * config.batch_size > *config.eval_budget)
            throw Error(Errc::invalid_config, "planned evaluations exceed the budget");
    }

    RunRecord rec;
    rec.objective_count = M;
    Incumbents inc;
    evaluate_initial(rec, inc, bb, bundle.initial, config.ref_point);
    const BlackBox loop_bb = config.eval_budget ? metered(bb, *config.eval_budget) : bb;

    for (int t = 1; t <= config.t_max && !rec.budget_exhausted && !rec.aborted; ++t) {
        const auto t_start = std::chrono::steady_clock::now();
        IterationRecord it;
        it.iteration = t;

        std::vector<ScoredSequence> proposals;
        try {
            // Fit one GP per objective on indicator embeddings of everything seen.
            std::vector<FactorizedDistribution> obs;
            obs.reserve(rec.data.size());
            for (const auto& x : rec.data.sequences()) obs.push_back(indicator(x, A));
            std::vector<GpModel> models;
            models.reserve(M);
            for (int m = 0; m < M; ++m) {
                std::vector<double> y;
                y.reserve(rec.data.size());
                for (const auto& row : rec.data.internal_values()) y.push_back(row[m]);
                GpModel g(config.kernel, config.fit);
                const FitReport rep = g.fit(obs, y);
                it.gp.push_back(
                    {rep.mean, rep.params.theta, rep.params.lambda, rep.noise_var, rep.log_evidence});
                models.push_back(std::move(g));
            }

            AcqFn acq;
            if (M == 1) {
                const GpModel& g = models[0];
                const double best_int = inc.best_internal;
                if (config.acq.kind == AcqKind::ei) {
                    acq = [&g, best_int](const FactorizedDistribution& p) {
                        const auto post = g.posterior(p);
                        return expected_improvement(-post.mean, post.var, -best_int);
                    };
                } else {
                    const double kappa = config.acq.kappa;
                    acq = [&g, kappa](const FactorizedDistribution& p) {
                        const auto post = g.posterior(p);
                        return ucb_score(-post.mean, post.var, kappa);
                    };
                }
            } else {
                const ParetoState& st = *inc.front_state;
                const GpModel& g1 = models[0];
                const GpModel& g2 = models[1];
                acq = [&g1, &g2, &st](const FactorizedDistribution& p) {
                    const auto p1 = g1.posterior(p);
                    const auto p2 = g2.posterior(p);
                    return ehvi_2d({p1.mean, p2.mean}, {p1.var, p2.var}, st);
                };
            }

            switch (config.variant) {
            case LoopVariant::parameterized: {
                const auto starts =
                    make_starts(std::max(1, config.budgets.restarts), bundle.decoder->latent_dim(), rng);
                const auto res = optimize_acq_continuous(acq, *bundle.decoder, starts, config.budgets);
                const auto pool = ranked_pool_from_distribution(res.dist, acq,
                                                                config.budgets.sample_budget, rng);
                proposals = select_novel(pool, config.batch_size, rec.data, acq, bundle.alphabet, rng);
                break;
            }
            case LoopVariant::continuous: {
                const int d = L * A;
                const DecodeFn decode = [L, A](const std::vector<double>& z) {
                    return softmax_rows(z, L, A);
                };
                const auto starts = make_starts(std::max(1, config.budgets.restarts), d, rng);
                const auto res = optimize_acq_continuous(acq, decode, d, starts, config.budgets);
                const auto pool = ranked_pool_from_distribution(res.dist, acq,
                                                                config.budgets.sample_budget, rng);
                proposals = select_novel(pool, config.batch_size, rec.data, acq, bundle.alphabet, rng);
                break;
            }
            case LoopVariant::discrete: {
                std::vector<Sequence> seeds;
                if (M == 2) {
                    seeds = front_sequences(rec.data);
                } else {
                    seeds.push_back(inc.best_seq);
                    for (int k = 0; k < 4; ++k)
                        seeds.push_back(
                            rec.data.sequences()[rng.uniform_int(static_cast<std::uint64_t>(
                                rec.data.size()))]);
                    std::vector<Sequence> unique_seeds;
                    for (const auto& s : seeds)
                        if (std::find(unique_seeds.begin(), unique_seeds.end(), s) ==
                            unique_seeds.end())
                            unique_seeds.push_back(s);
                    seeds = std::move(unique_seeds);
                }
                const auto res = optimize_acq_discrete(acq, seeds, bundle.alphabet, config.budgets);
                proposals =
                    select_novel(res.visited, config.batch_size, rec.data, acq, bundle.alphabet, rng);
                break;
            }
            }
        } catch (const Error& e) {
            if (e.code() != Errc::unfittable_model) throw;
            // Model-free iteration: propose straight from the prior.
            it.prior_fallback = true;
            it.gp.clear();
            const FactorizedDistribution P =
                bundle.profile ? bundle.profile->probs() : uniform_distribution(L, A);
            proposals.clear();
            for (auto& x :
                 sample_novel_from_prior(P, config.batch_size, rec.data, bundle.alphabet, rng))
                proposals.push_back({std::move(x), 0.0});
        }
        it.best_acq = proposals.front().acq;

        for (const auto& cand : proposals) {
            std::vector<double> raw;
            try {
                raw = loop_bb.evaluate(cand.seq);
            } catch (const Error& e) {
                if (e.code() == Errc::budget_exhausted) {
                    rec.budget_exhausted = true;
                } else {
                    rec.aborted = true;
                    rec.abort_message = e.what();
                }
                break;
            } catch (const std::exception& e) {
                rec.aborted = true;
                rec.abort_message = e.what();
                break;
            }
            record_eval(rec, inc, bb.maximize(), cand.seq, raw);
            it.proposed.push_back(cand.seq);
            it.raw_values.push_back(raw);
            it.proposed_acq.push_back(cand.acq);
            it.eval_counts.push_back(rec.data.eval_count());
        }

        if (!it.proposed.empty()) {
            if (M == 1) {
                it.incumbent = inc.best_seq;
                it.incumbent_raw = bb.maximize()[0] ? inc.best_internal : -inc.best_internal;
            } else {
                it.rel_hv = inc.front_state->hypervolume() / rec.initial_hv;
                it.front_size = static_cast<int>(inc.front_state->front().size());
            }
            it.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
            rec.iterations.push_back(std::move(it));
        }
    }

    if (M == 1) {
        rec.best_sequence = inc.best_seq;
        rec.best_raw = bb.maximize()[0] ? inc.best_internal : -inc.best_internal;
    }
    return rec;
}

RunRecord random_mutation_baseline(const std::vector<Sequence>& initial, const BlackBox& bb,
                                   const Alphabet& alphabet, int iterations,
                                   std::optional<long long> eval_budget, Rng& rng) {
    constexpr int kPopulation = 16;
    const int M = bb.objective_count();
    if (initial.empty()) throw Error(Errc::invalid_config, "need at least one initial sequence");
    if (iterations < 1) throw Error(Errc::invalid_config, "need at least one iteration");
    if (alphabet.mutation_tokens().size() < 2)
        throw Error(Errc::invalid_config, "need at least two substitutable tokens");
    const int L = initial.front().length();
    if (L < 2) throw Error(Errc::invalid_config, "two-position mutation needs length >= 2");
    for (const auto& x : initial) {
        validate_sequence(x, alphabet);
        if (x.length() != L)
            throw Error(Errc::invalid_config, "initial sequences must share a length");
    }

    RunRecord rec;
    rec.objective_count = M;
    Incumbents inc;
    evaluate_initial(rec, inc, bb, initial, std::nullopt);
    const BlackBox loop_bb = eval_budget ? metered(bb, *eval_budget) : bb;

    auto mutate_two = [&](const Sequence& parent) {
        const Sequence child = mutate_positions(parent, 2, alphabet, rng);
        runtime_check(child.length() == parent.length(), "mutation must preserve length");
        runtime_check(hamming_distance(child, parent) == 2,
                      "child must differ from its parent at exactly 2 positions");
        return child;
    };
    auto pad_population = [&](std::vector<Sequence> survivors) {
        runtime_check(!survivors.empty(), "empty survivor set");
        const auto parents = survivors.size();
        if (static_cast<int>(survivors.size()) > kPopulation) survivors.resize(kPopulation);
        while (static_cast<int>(survivors.size()) < kPopulation)
            survivors.push_back(mutate_two(survivors[rng.uniform_int(parents)]));
        runtime_check(static_cast<int>(survivors.size()) == kPopulation,
                      "population size must be exactly 16");
        return survivors;
    };

    std::vector<Sequence> population = pad_population(rec.data.sequences());
    for (int gen = 1; gen <= iterations && !rec.budget_exhausted && !rec.aborted; ++gen) {
        const auto t_start = std::chrono::steady_clock::now();
        IterationRecord it;
        it.iteration = gen;
        runtime_check(static_cast<int>(population.size()) == kPopulation,
                      "population size must be exactly 16");

        for (const auto& parent : population) {
            const Sequence child = mutate_two(parent);
            std::vector<double> raw;
            if (const auto idx = rec.data.find(child)) {
                raw = rec.data.raw_values()[*idx];  // already evaluated; no budget spent
            } else {
                try {
                    raw = loop_bb.evaluate(child);
                } catch (const Error& e) {
                    if (e.code() == Errc::budget_exhausted) {
                        rec.budget_exhausted = true;
                    } else {
                        rec.aborted = true;
                        rec.abort_message = e.what();
                    }
                    break;
                } catch (const std::exception& e) {
                    rec.aborted = true;
                    rec.abort_message = e.what();
                    break;
                }
                record_eval(rec, inc, bb.maximize(), child, raw);
            }
            it.proposed.push_back(child);
            it.raw_values.push_back(raw);
            it.proposed_acq.push_back(0.0);
            it.eval_counts.push_back(rec.data.eval_count());
        }

        if (!it.proposed.empty()) {
            if (M == 1) {
                it.incumbent = inc.best_seq;
                it.incumbent_raw = bb.maximize()[0] ? inc.best_internal : -inc.best_internal;
            } else {
                it.rel_hv = inc.front_state->hypervolume() / rec.initial_hv;
                it.front_size = static_cast<int>(inc.front_state->front().size());
            }
            it.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
            rec.iterations.push_back(std::move(it));
        }
        if (rec.budget_exhausted || rec.aborted) break;

        std::vector<Sequence> survivors;
        if (M == 2) {
            survivors = front_sequences(rec.data);
        } else {
            std::vector<std::size_t> order(rec.data.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return rec.data.internal_values()[a][0] > rec.data.internal_values()[b][0];
            });
            for (std::size_t i = 0; i < order.size() && static_cast<int>(survivors.size()) < kPopulation;
                 ++i)
                survivors.push_back(rec.data.sequences()[order[i]]);
        }
        population = pad_population(std::move(survivors));
    }

    if (M == 1) {
        rec.best_sequence = inc.best_seq;
        rec.best_raw = bb.maximize()[0] ? inc.best_internal : -inc.best_internal;
    }
    return rec;
}

} // namespace corel
