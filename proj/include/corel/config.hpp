#ifndef COREL_CONFIG_HPP
#define COREL_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "corel/boloop.hpp"

namespace corel {

struct ProblemConfig {
    std::string landscape;  // cutoff_motif | weighted_hamming | two_objective
    std::string alphabet_symbols;  // explicit symbols; empty means generated
    int alphabet_size = 0;         // generated alphabet (A-Z a-z 0-9 pool)
    bool with_gap = false;
    int length = 0;
    std::string target;  // cutoff_motif, weighted_hamming
    int threshold = 0;
    double base = 0.0;
    double slope = 1.0;
    std::vector<double> position_weights;  // weighted_hamming; empty = all ones
    std::string target_a, target_b;        // two_objective
    std::vector<std::string> starts;       // explicit problem-defining sequences
    int random_starts = 0;                 // generated from the run seed instead
};

struct WeightingConfig {
    WeightingDirection direction = WeightingDirection::proportional;
    double scale = 1.0;
};

struct PriorConfig {
    std::vector<std::string> sequences;  // inline corpus
    std::string corpus_path;             // or a one-sequence-per-line file
    std::string profile_path;            // or a serialized profile
    double pseudocount = 1.0;
    WeightingConfig weighting;
};

struct KernelConfig {
    KernelVariant variant = KernelVariant::plain_hellinger;
    double theta = 1.0;
    double lambda = 1.0;
    std::vector<WeightingConfig> product_weightings;  // product variant only
};

struct OptimizerConfig {
    LoopVariant variant = LoopVariant::discrete;
    ProposalBudget budgets;
    int latent_dim = 8;                   // parameterized variant
    std::uint64_t decoder_seed = 20240u;  // decoder geometry, independent of the run seed
};

struct ExperimentConfig {
    ProblemConfig problem;
    PriorConfig prior;
    KernelConfig kernel;
    FitOptions model;
    AcqSpec acquisition;
    OptimizerConfig optimizer;
    int t_max = 10;
    int batch_size = 1;
    std::optional<long long> eval_budget;
    std::optional<Point2> ref_point;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::string config_dir;  // directory of the config file; resolves relative paths
};

/// Parses and validates a JSON experiment config; diagnostics name the
/// offending field. Relative file paths are resolved against the config file.
ExperimentConfig load_config(const std::string& path);

/// Everything a run needs, concretized for one seed (random starts drawn,
/// priors loaded, weightings built, decoder constructed).
struct AssembledExperiment {
    BlackBox bb;
    PriorBundle bundle;
    LoopConfig loop;
};

AssembledExperiment assemble_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

} // namespace corel

#endif
