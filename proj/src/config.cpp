#include "corel/config.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "corel/error.hpp"

namespace corel {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw Error(Errc::invalid_config, "config field '" + where + "': " + what);
}

const json* find(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
    }
}

const json& require(const json& obj, const std::string& where, const std::string& key) {
    const json* v = find(obj, key);
    if (!v) bad(where.empty() ? key : where + "." + key, "missing required field");
    return *v;
}

std::string sub(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

double as_double(const json& v, const std::string& where) {
    if (!v.is_number()) bad(where, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) bad(where, "expected an integer");
    return v.get<int>();
}

long long as_int64(const json& v, const std::string& where) {
    if (!v.is_number_integer()) bad(where, "expected an integer");
    return v.get<long long>();
}

std::uint64_t as_uint64(const json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        bad(where, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) bad(where, "expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) bad(where, "expected a string");
    return v.get<std::string>();
}

std::vector<std::string> as_string_list(const json& v, const std::string& where) {
    if (!v.is_array()) bad(where, "expected an array of strings");
    std::vector<std::string> out;
    for (size_t i = 0; i < v.size(); ++i)
        out.push_back(as_string(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> as_double_list(const json& v, const std::string& where) {
    if (!v.is_array()) bad(where, "expected an array of numbers");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i)
        out.push_back(as_double(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

int positive_int(const json& v, const std::string& where) {
    int n = as_int(v, where);
    if (n < 1) bad(where, "must be >= 1");
    return n;
}

double positive_double(const json& v, const std::string& where) {
    double x = as_double(v, where);
    if (!(x > 0.0)) bad(where, "must be > 0");
    return x;
}

WeightingDirection parse_direction(const json& v, const std::string& where) {
    std::string s = as_string(v, where);
    if (s == "proportional") return WeightingDirection::proportional;
    if (s == "inverse") return WeightingDirection::inverse;
    bad(where, "expected \"proportional\" or \"inverse\"");
}

WeightingConfig parse_weighting(const json& v, const std::string& where) {
    if (!v.is_object()) bad(where, "expected an object");
    check_keys(v, where, {"direction", "scale"});
    WeightingConfig w;
    if (const json* d = find(v, "direction")) w.direction = parse_direction(*d, sub(where, "direction"));
    if (const json* s = find(v, "scale")) w.scale = positive_double(*s, sub(where, "scale"));
    return w;
}

ProblemConfig parse_problem(const json& v, const std::string& where) {
    if (!v.is_object()) bad(where, "expected an object");
    check_keys(v, where,
               {"landscape", "alphabet", "length", "target", "threshold", "base", "slope",
                "position_weights", "target_a", "target_b", "starts", "random_starts"});
    ProblemConfig p;
    p.landscape = as_string(require(v, where, "landscape"), sub(where, "landscape"));
    if (p.landscape != "cutoff_motif" && p.landscape != "weighted_hamming" &&
        p.landscape != "two_objective")
        bad(sub(where, "landscape"),
            "expected \"cutoff_motif\", \"weighted_hamming\", or \"two_objective\"");

    const json& al = require(v, where, "alphabet");
    const std::string al_where = sub(where, "alphabet");
    if (!al.is_object()) bad(al_where, "expected an object");
    check_keys(al, al_where, {"symbols", "size", "with_gap"});
    if (const json* s = find(al, "symbols")) p.alphabet_symbols = as_string(*s, sub(al_where, "symbols"));
    if (const json* s = find(al, "size")) p.alphabet_size = positive_int(*s, sub(al_where, "size"));
    if (const json* g = find(al, "with_gap")) p.with_gap = as_bool(*g, sub(al_where, "with_gap"));
    if (p.alphabet_symbols.empty() == (p.alphabet_size == 0))
        bad(al_where, "give exactly one of \"symbols\" or \"size\"");

    p.length = positive_int(require(v, where, "length"), sub(where, "length"));

    if (const json* t = find(v, "target")) p.target = as_string(*t, sub(where, "target"));
    if (const json* t = find(v, "threshold")) p.threshold = as_int(*t, sub(where, "threshold"));
    if (const json* t = find(v, "base")) p.base = as_double(*t, sub(where, "base"));
    if (const json* t = find(v, "slope")) p.slope = as_double(*t, sub(where, "slope"));
    if (const json* t = find(v, "position_weights"))
        p.position_weights = as_double_list(*t, sub(where, "position_weights"));
    if (const json* t = find(v, "target_a")) p.target_a = as_string(*t, sub(where, "target_a"));
    if (const json* t = find(v, "target_b")) p.target_b = as_string(*t, sub(where, "target_b"));
    if (const json* t = find(v, "starts")) p.starts = as_string_list(*t, sub(where, "starts"));
    if (const json* t = find(v, "random_starts")) {
        p.random_starts = as_int(*t, sub(where, "random_starts"));
        if (p.random_starts < 0) bad(sub(where, "random_starts"), "must be >= 0");
    }

    if (p.landscape == "two_objective") {
        if (p.target_a.empty()) bad(sub(where, "target_a"), "required for two_objective");
        if (p.target_b.empty()) bad(sub(where, "target_b"), "required for two_objective");
    } else if (p.target.empty()) {
        bad(sub(where, "target"), "required for " + p.landscape);
    }
    if (p.starts.empty() && p.random_starts == 0)
        bad(where, "needs \"starts\" and/or \"random_starts\" > 0");
    return p;
}

PriorConfig parse_prior(const json& v, const std::string& where) {
    if (!v.is_object()) bad(where, "expected an object");
    check_keys(v, where, {"sequences", "corpus_path", "profile_path", "pseudocount", "weighting"});
    PriorConfig p;
    if (const json* s = find(v, "sequences")) p.sequences = as_string_list(*s, sub(where, "sequences"));
    if (const json* s = find(v, "corpus_path")) p.corpus_path = as_string(*s, sub(where, "corpus_path"));
    if (const json* s = find(v, "profile_path")) p.profile_path = as_string(*s, sub(where, "profile_path"));
    const int sources = (!p.sequences.empty() ? 1 : 0) + (!p.corpus_path.empty() ? 1 : 0) +
                        (!p.profile_path.empty() ? 1 : 0);
    if (sources > 1) bad(where, "give at most one of \"sequences\", \"corpus_path\", \"profile_path\"");
    if (const json* s = find(v, "pseudocount")) p.pseudocount = positive_double(*s, sub(where, "pseudocount"));
    if (const json* w = find(v, "weighting")) p.weighting = parse_weighting(*w, sub(where, "weighting"));
    return p;
}

KernelConfig parse_kernel(const json& v, const std::string& where) {
    if (!v.is_object()) bad(where, "expected an object");
    check_keys(v, where, {"variant", "theta", "lambda", "product_weightings"});
    KernelConfig k;
    if (const json* s = find(v, "variant")) {
        std::string name = as_string(*s, sub(where, "variant"));
        if (name == "plain_hellinger") k.variant = KernelVariant::plain_hellinger;
        else if (name == "weighted_hellinger") k.variant = KernelVariant::weighted_hellinger;
        else if (name == "product_of_weightings") k.variant = KernelVariant::product_of_weightings;
        else
            bad(sub(where, "variant"),
                "expected \"plain_hellinger\", \"weighted_hellinger\", or \"product_of_weightings\"");
    }
    if (const json* s = find(v, "theta")) k.theta = positive_double(*s, sub(where, "theta"));
    if (const json* s = find(v, "lambda")) k.lambda = positive_double(*s, sub(where, "lambda"));
    if (const json* s = find(v, "product_weightings")) {
        if (!s->is_array()) bad(sub(where, "product_weightings"), "expected an array");
        for (size_t i = 0; i < s->size(); ++i)
            k.product_weightings.push_back(
                parse_weighting((*s)[i], sub(where, "product_weightings") + "[" + std::to_string(i) + "]"));
    }
    if (k.variant == KernelVariant::product_of_weightings && k.product_weightings.empty())
        bad(sub(where, "product_weightings"), "required for product_of_weightings");
    if (k.variant != KernelVariant::product_of_weightings && !k.product_weightings.empty())
        bad(sub(where, "product_weightings"), "only valid for product_of_weightings");
    return k;
}

FitOptions parse_model(const json& v, const std::string& where) {
    if (!v.is_object()) bad(where, "expected an object");
    check_keys(v, where,
               {"lambda_bounds", "lambda_count", "noise_bounds", "noise_count",
                "max_refine_steps", "refine_tol"});
    FitOptions f;
    if (const json* b = find(v, "lambda_bounds")) {
        auto xs = as_double_list(*b, sub(where, "lambda_bounds"));
        if (xs.size() != 2 || !(xs[0] > 0.0) || !(xs[1] >= xs[0]))
            bad(sub(where, "lambda_bounds"), "expected [lo, hi] with 0 < lo <= hi");
        f.lambda_lo = xs[0];
        f.lambda_hi = xs[1];
    }
    if (const json* c = find(v, "lambda_count")) {
        f.lambda_count = as_int(*c, sub(where, "lambda_count"));
        if (f.lambda_count < 2) bad(sub(where, "lambda_count"), "must be >= 2");
    }
    if (const json* b = find(v, "noise_bounds")) {
        auto xs = as_double_list(*b, sub(where, "noise_bounds"));
        if (xs.size() != 2 || !(xs[0] >= 0.0) || !(xs[1] >= xs[0]))
            bad(sub(where, "noise_bounds"), "expected [lo, hi] with 0 <= lo <= hi");
        f.noise_lo = xs[0];
        f.noise_hi = xs[1];
    }
    if (const json* c = find(v, "noise_count")) {
        f.noise_count = as_int(*c, sub(where, "noise_count"));
        if (f.noise_count < 2) bad(sub(where, "noise_count"), "must be >= 2");
    }
    if (const json* c = find(v, "max_refine_steps")) {
        f.max_refine_steps = as_int(*c, sub(where, "max_refine_steps"));
        if (f.max_refine_steps < 0) bad(sub(where, "max_refine_steps"), "must be >= 0");
    }
    if (const json* c = find(v, "refine_tol"))
        f.refine_tol = positive_double(*c, sub(where, "refine_tol"));
    return f;
}

AcqSpec parse_acquisition(const json& v, const std::string& where) {
    if (!v.is_object()) bad(where, "expected an object");
    check_keys(v, where, {"kind", "kappa", "mc_samples"});
    AcqSpec a;
    if (const json* s = find(v, "kind")) {
        std::string name = as_string(*s, sub(where, "kind"));
        if (name == "ei") a.kind = AcqKind::ei;
        else if (name == "ucb") a.kind = AcqKind::ucb;
        else if (name == "ehvi") a.kind = AcqKind::ehvi;
        else bad(sub(where, "kind"), "expected \"ei\", \"ucb\", or \"ehvi\"");
    }
    if (const json* s = find(v, "kappa")) {
        a.kappa = as_double(*s, sub(where, "kappa"));
        if (!(a.kappa >= 0.0)) bad(sub(where, "kappa"), "must be >= 0");
    }
    if (const json* s = find(v, "mc_samples")) a.mc_samples = positive_int(*s, sub(where, "mc_samples"));
    return a;
}

OptimizerConfig parse_optimizer(const json& v, const std::string& where) {
    if (!v.is_object()) bad(where, "expected an object");
    check_keys(v, where,
               {"variant", "max_acq_evals", "restarts", "sample_budget", "latent_dim",
                "decoder_seed"});
    OptimizerConfig o;
    if (const json* s = find(v, "variant")) {
        std::string name = as_string(*s, sub(where, "variant"));
        if (name == "discrete") o.variant = LoopVariant::discrete;
        else if (name == "continuous") o.variant = LoopVariant::continuous;
        else if (name == "parameterized") o.variant = LoopVariant::parameterized;
        else bad(sub(where, "variant"), "expected \"discrete\", \"continuous\", or \"parameterized\"");
    }
    if (const json* s = find(v, "max_acq_evals"))
        o.budgets.max_acq_evals = positive_int(*s, sub(where, "max_acq_evals"));
    if (const json* s = find(v, "restarts")) o.budgets.restarts = positive_int(*s, sub(where, "restarts"));
    if (const json* s = find(v, "sample_budget")) {
        o.budgets.sample_budget = as_int(*s, sub(where, "sample_budget"));
        if (o.budgets.sample_budget < 0) bad(sub(where, "sample_budget"), "must be >= 0");
    }
    if (const json* s = find(v, "latent_dim")) o.latent_dim = positive_int(*s, sub(where, "latent_dim"));
    if (const json* s = find(v, "decoder_seed")) o.decoder_seed = as_uint64(*s, sub(where, "decoder_seed"));
    return o;
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_config, "cannot open config file: " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::invalid_config, "config is not valid JSON: " + std::string(e.what()));
    }
    if (!root.is_object()) throw Error(Errc::invalid_config, "config root must be a JSON object");
    check_keys(root, "",
               {"problem", "prior", "kernel", "model", "acquisition", "optimizer", "loop",
                "seed", "output_dir"});

    ExperimentConfig cfg;
    cfg.problem = parse_problem(require(root, "", "problem"), "problem");
    if (const json* v = find(root, "prior")) cfg.prior = parse_prior(*v, "prior");
    if (const json* v = find(root, "kernel")) cfg.kernel = parse_kernel(*v, "kernel");
    if (const json* v = find(root, "model")) cfg.model = parse_model(*v, "model");
    if (const json* v = find(root, "acquisition")) cfg.acquisition = parse_acquisition(*v, "acquisition");
    if (const json* v = find(root, "optimizer")) cfg.optimizer = parse_optimizer(*v, "optimizer");

    if (const json* v = find(root, "loop")) {
        if (!v->is_object()) bad("loop", "expected an object");
        check_keys(*v, "loop", {"t_max", "batch_size", "eval_budget", "ref_point"});
        if (const json* s = find(*v, "t_max")) cfg.t_max = positive_int(*s, "loop.t_max");
        if (const json* s = find(*v, "batch_size")) cfg.batch_size = positive_int(*s, "loop.batch_size");
        if (const json* s = find(*v, "eval_budget")) {
            long long b = as_int64(*s, "loop.eval_budget");
            if (b < 1) bad("loop.eval_budget", "must be >= 1");
            cfg.eval_budget = b;
        }
        if (const json* s = find(*v, "ref_point")) {
            auto xs = as_double_list(*s, "loop.ref_point");
            if (xs.size() != 2) bad("loop.ref_point", "expected [y1, y2]");
            cfg.ref_point = Point2{xs[0], xs[1]};
        }
    }
    if (const json* v = find(root, "seed")) cfg.seed = as_uint64(*v, "seed");
    if (const json* v = find(root, "output_dir")) cfg.output_dir = as_string(*v, "output_dir");

    // cross-section checks that don't need the alphabet yet
    if (cfg.acquisition.kind == AcqKind::ehvi && cfg.problem.landscape != "two_objective")
        bad("acquisition.kind", "ehvi needs the two_objective landscape");
    if (cfg.problem.landscape == "two_objective" && cfg.acquisition.kind != AcqKind::ehvi)
        bad("acquisition.kind", "two_objective needs ehvi");
    if (cfg.kernel.variant != KernelVariant::plain_hellinger && cfg.prior.sequences.empty() &&
        cfg.prior.corpus_path.empty() && cfg.prior.profile_path.empty())
        bad("kernel.variant", "weighted kernels need a prior section");
    if (cfg.eval_budget &&
        static_cast<long long>(cfg.t_max) * cfg.batch_size > *cfg.eval_budget)
        bad("loop.eval_budget", "t_max * batch_size exceeds the evaluation budget");

    cfg.config_dir = std::filesystem::path(path).parent_path().string();
    return cfg;
}

namespace {

std::string resolve_path(const ExperimentConfig& cfg, const std::string& p) {
    std::filesystem::path q(p);
    if (q.is_relative() && !cfg.config_dir.empty())
        q = std::filesystem::path(cfg.config_dir) / q;
    return q.string();
}

Sequence parse_against(const std::string& text, const Alphabet& alphabet, int length,
                       const std::string& what) {
    Sequence s;
    try {
        s = parse_sequence(text, alphabet);
    } catch (const Error& e) {
        throw Error(Errc::invalid_config, what + ": " + e.what());
    }
    if (s.length() != length)
        throw Error(Errc::invalid_config, what + ": length " + std::to_string(s.length()) +
                                              " does not match problem.length " +
                                              std::to_string(length));
    return s;
}

BlackBox make_blackbox(const ProblemConfig& p, const Alphabet& alphabet) {
    if (p.landscape == "cutoff_motif") {
        Sequence target = parse_against(p.target, alphabet, p.length, "problem.target");
        return cutoff_motif_landscape(target, p.threshold, p.base, p.slope);
    }
    if (p.landscape == "weighted_hamming") {
        Sequence target = parse_against(p.target, alphabet, p.length, "problem.target");
        std::vector<double> w = p.position_weights;
        if (w.empty()) w.assign(static_cast<size_t>(p.length), 1.0);
        if (static_cast<int>(w.size()) != p.length)
            throw Error(Errc::invalid_config,
                        "problem.position_weights: size does not match problem.length");
        return weighted_hamming_landscape(target, w);
    }
    Sequence a = parse_against(p.target_a, alphabet, p.length, "problem.target_a");
    Sequence b = parse_against(p.target_b, alphabet, p.length, "problem.target_b");
    return two_objective_landscape(a, b);
}

} // namespace

AssembledExperiment assemble_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
    const ProblemConfig& p = cfg.problem;
    Alphabet alphabet = p.alphabet_symbols.empty()
                            ? Alphabet::generated(p.alphabet_size, p.with_gap)
                            : Alphabet(p.alphabet_symbols);

    BlackBox bb = make_blackbox(p, alphabet);

    std::vector<Sequence> initial;
    for (const std::string& s : p.starts)
        initial.push_back(parse_against(s, alphabet, p.length, "problem.starts entry"));
    if (p.random_starts > 0) {
        // dedicated stream so the draw doesn't disturb the loop's randomness
        Rng starts_rng = Rng(seed).child(2);
        const std::vector<int>& tokens = alphabet.mutation_tokens();
        for (int i = 0; i < p.random_starts; ++i) {
            Sequence s;
            s.tokens.reserve(static_cast<size_t>(p.length));
            for (int l = 0; l < p.length; ++l)
                s.tokens.push_back(tokens[starts_rng.uniform_int(static_cast<int>(tokens.size()))]);
            initial.push_back(std::move(s));
        }
    }

    std::optional<ProfileModel> profile;
    if (!cfg.prior.profile_path.empty()) {
        profile = load_profile(resolve_path(cfg, cfg.prior.profile_path));
    } else if (!cfg.prior.corpus_path.empty()) {
        std::vector<Sequence> corpus = read_corpus(resolve_path(cfg, cfg.prior.corpus_path), alphabet);
        profile = profile_from_sequences(corpus, alphabet, cfg.prior.pseudocount);
    } else if (!cfg.prior.sequences.empty()) {
        std::vector<Sequence> corpus;
        for (const std::string& s : cfg.prior.sequences)
            corpus.push_back(parse_against(s, alphabet, p.length, "prior.sequences entry"));
        profile = profile_from_sequences(corpus, alphabet, cfg.prior.pseudocount);
    }
    if (profile &&
        (profile->length() != p.length || profile->alphabet_size() != alphabet.size()))
        throw Error(Errc::invalid_config, "prior profile shape does not match the problem");

    KernelParams params(cfg.kernel.theta, cfg.kernel.lambda);
    KernelSpec kspec;
    switch (cfg.kernel.variant) {
        case KernelVariant::plain_hellinger:
            kspec = KernelSpec::plain(params);
            break;
        case KernelVariant::weighted_hellinger:
            if (!profile)
                throw Error(Errc::invalid_config, "kernel.variant: weighted_hellinger needs a prior");
            kspec = KernelSpec::weighted(
                weighting_from_profile(*profile, cfg.prior.weighting.scale, cfg.prior.weighting.direction),
                params);
            break;
        case KernelVariant::product_of_weightings: {
            if (!profile)
                throw Error(Errc::invalid_config,
                            "kernel.variant: product_of_weightings needs a prior");
            std::vector<PositionWeighting> ws;
            for (const WeightingConfig& w : cfg.kernel.product_weightings)
                ws.push_back(weighting_from_profile(*profile, w.scale, w.direction));
            kspec = KernelSpec::product(std::move(ws), params);
            break;
        }
    }

    std::optional<ToyDecoder> decoder;
    if (cfg.optimizer.variant == LoopVariant::parameterized)
        decoder = ToyDecoder(p.length, alphabet.size(), cfg.optimizer.latent_dim,
                             cfg.optimizer.decoder_seed);

    LoopConfig loop;
    loop.variant = cfg.optimizer.variant;
    loop.t_max = cfg.t_max;
    loop.batch_size = cfg.batch_size;
    loop.acq = cfg.acquisition;
    loop.budgets = cfg.optimizer.budgets;
    loop.kernel = std::move(kspec);
    loop.fit = cfg.model;
    loop.eval_budget = cfg.eval_budget;
    loop.ref_point = cfg.ref_point;

    PriorBundle bundle{std::move(alphabet), std::move(initial), std::move(profile),
                       std::move(decoder)};
    return AssembledExperiment{std::move(bb), std::move(bundle), std::move(loop)};
}

} // namespace corel
