#ifndef COREL_BOLOOP_HPP
#define COREL_BOLOOP_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corel/acquisition.hpp"
#include "corel/blackbox.hpp"
#include "corel/gp.hpp"
#include "corel/optimizer.hpp"
#include "corel/priors.hpp"

namespace corel {

/// Evaluated sequences with raw and internal (all-maximized) objective rows.
/// Duplicate sequences are rejected; eval_count tracks black-box calls.
class Dataset {
public:
    void add(const Sequence& x, std::vector<double> raw, std::vector<double> internal);
    bool contains(const Sequence& x) const { return index_.count(x) > 0; }
    std::optional<std::size_t> find(const Sequence& x) const {
        const auto it = index_.find(x);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    int size() const { return static_cast<int>(seqs_.size()); }

    const std::vector<Sequence>& sequences() const { return seqs_; }
    const std::vector<std::vector<double>>& raw_values() const { return raw_; }
    const std::vector<std::vector<double>>& internal_values() const { return internal_; }

    void note_evaluation() { ++eval_count_; }
    int eval_count() const { return eval_count_; }

private:
    std::vector<Sequence> seqs_;
    std::vector<std::vector<double>> raw_;
    std::vector<std::vector<double>> internal_;
    std::map<Sequence, std::size_t> index_;
    int eval_count_ = 0;
};

enum class LoopVariant { parameterized, continuous, discrete };

struct LoopConfig {
    LoopVariant variant = LoopVariant::discrete;
    int t_max = 10;
    int batch_size = 1;
    AcqSpec acq;
    ProposalBudget budgets;
    KernelSpec kernel;  // params are refit every iteration
    FitOptions fit;
    std::optional<long long> eval_budget;  // loop evaluations only; initial ones are free
    std::optional<Point2> ref_point;       // bi-objective; default derived from initial data
};

struct PriorBundle {
    Alphabet alphabet;
    std::vector<Sequence> initial;           // problem-defining sequences
    std::optional<ProfileModel> profile;     // sampling prior for the fallback path
    std::optional<ToyDecoder> decoder;       // required by the parameterized variant
};

struct GpHyper {
    double mu = 0.0;
    double theta = 0.0;
    double lambda = 0.0;
    double sigma_sq = 0.0;
    double log_evidence = 0.0;
};

struct IterationRecord {
    int iteration = 0;  // 1-based
    std::vector<Sequence> proposed;
    std::vector<std::vector<double>> raw_values;
    std::vector<double> proposed_acq;  // acquisition score per proposal
    std::vector<int> eval_counts;      // cumulative black-box calls after each proposal
    Sequence incumbent;           // single-objective best so far
    double incumbent_raw = 0.0;
    double rel_hv = 0.0;          // bi-objective
    int front_size = 0;
    std::vector<GpHyper> gp;      // one per objective; empty on prior fallback
    double best_acq = 0.0;
    bool prior_fallback = false;
    double seconds = 0.0;  // wall time; excluded from determinism guarantees
};

struct RunRecord {
    int objective_count = 1;
    Dataset data;
    std::vector<IterationRecord> iterations;
    std::vector<double> curve;  // per evaluation: raw best-so-far (M=1) or relative HV (M=2)
    int initial_evals = 0;
    bool budget_exhausted = false;
    bool aborted = false;
    std::string abort_message;
    Point2 ref_point{};
    double initial_hv = 0.0;
    std::vector<Point2> initial_front;  // internal values
    Sequence best_sequence;             // single-objective
    double best_raw = 0.0;
};

/// The outer BO loop: refit GPs on indicator embeddings each iteration,
/// maximize the acquisition per the configured variant, evaluate batch_size
/// novel sequences, and log the trace. Budget exhaustion ends the run
/// gracefully; any other black-box failure aborts with a partial trace.
RunRecord run_bo(const LoopConfig& config, const BlackBox& bb, const PriorBundle& bundle, Rng& rng);

/// Evolutionary control: population of exactly 16, each member mutated at
/// exactly 2 random positions per generation, selection keeps the Pareto
/// front (M=2) or the best 16 (M=1), padded with mutants of the survivors.
RunRecord random_mutation_baseline(const std::vector<Sequence>& initial, const BlackBox& bb,
                                   const Alphabet& alphabet, int iterations,
                                   std::optional<long long> eval_budget, Rng& rng);

/// Draws `count` sequences from P that are new w.r.t. the dataset and each
/// other; used when the GP cannot be fitted. Falls back to mutating the
/// distribution argmax when sampling keeps colliding.
std::vector<Sequence> sample_novel_from_prior(const FactorizedDistribution& P, int count,
                                              const Dataset& data, const Alphabet& alphabet,
                                              Rng& rng);

} // namespace corel

#endif
