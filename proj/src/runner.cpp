#include "corel/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "corel/error.hpp"

namespace corel {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const char* variant_name(KernelVariant v) {
    switch (v) {
        case KernelVariant::plain_hellinger: return "plain_hellinger";
        case KernelVariant::weighted_hellinger: return "weighted_hellinger";
        case KernelVariant::product_of_weightings: return "product_of_weightings";
    }
    return "?";
}

std::string iso_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Hyperparameter cell: one value per objective, ";"-joined so the column
/// count stays fixed across objective counts.
std::string hyper_cell(const IterationRecord& it, int objectives, double GpHyper::* field) {
    std::string out;
    for (int m = 0; m < objectives; ++m) {
        if (m > 0) out += ';';
        if (m < static_cast<int>(it.gp.size()))
            out += format_real(it.gp[static_cast<size_t>(m)].*field);
        else
            out += "nan";  // prior fallback: no model this iteration
    }
    return out;
}

std::string iteration_csv(const RunRecord& rec, const Alphabet& alphabet) {
    const int m_count = rec.objective_count;
    std::string out = "iteration,eval_count,proposed_sequence";
    if (m_count == 1) {
        out += ",objective";
    } else {
        for (int m = 1; m <= m_count; ++m) out += ",objective_" + std::to_string(m);
    }
    out += ",incumbent_or_relHV,mu,theta,lambda,sigma_sq,acq_value,seconds\n";

    for (const IterationRecord& it : rec.iterations) {
        const std::string mu = hyper_cell(it, m_count, &GpHyper::mu);
        const std::string theta = hyper_cell(it, m_count, &GpHyper::theta);
        const std::string lambda = hyper_cell(it, m_count, &GpHyper::lambda);
        const std::string sigma_sq = hyper_cell(it, m_count, &GpHyper::sigma_sq);
        for (size_t i = 0; i < it.proposed.size(); ++i) {
            out += std::to_string(it.iteration);
            out += ',' + std::to_string(it.eval_counts[i]);
            out += ',' + format_sequence(it.proposed[i], alphabet);
            for (double v : it.raw_values[i]) out += ',' + format_real(v);
            // the curve holds best-so-far (M=1) or relative HV (M=2) after each evaluation
            const int ix = it.eval_counts[i] - 1;
            out += ',' + format_real(rec.curve[static_cast<size_t>(ix)]);
            out += ',' + mu + ',' + theta + ',' + lambda + ',' + sigma_sq;
            out += ',' + format_real(it.proposed_acq[i]);
            out += ",0.000\n";  // wall time lives in the meta sidecar only
        }
    }
    return out;
}

std::string curve_csv(const RunRecord& rec) {
    std::string out = "eval,value\n";
    for (size_t i = 0; i < rec.curve.size(); ++i)
        out += std::to_string(i + 1) + ',' + format_real(rec.curve[i]) + '\n';
    return out;
}

json summary_json(const RunRecord& rec, const Alphabet& alphabet, std::uint64_t seed,
                  const std::string& trace) {
    json out;
    out["trace"] = trace;
    out["seed"] = seed;
    out["objective_count"] = rec.objective_count;
    out["eval_count"] = rec.data.eval_count();
    out["initial_evals"] = rec.initial_evals;
    out["iterations"] = rec.iterations.size();
    out["budget_exhausted"] = rec.budget_exhausted;
    out["aborted"] = rec.aborted;
    if (rec.aborted) out["abort_message"] = rec.abort_message;
    if (!rec.curve.empty()) out["final_curve_value"] = rec.curve.back();

    if (rec.objective_count == 1) {
        if (rec.best_sequence.length() > 0)
            out["best_sequence"] = format_sequence(rec.best_sequence, alphabet);
        out["best_raw"] = rec.best_raw;
    } else {
        out["ref_point"] = {rec.ref_point.y1, rec.ref_point.y2};
        out["initial_hv"] = rec.initial_hv;
        // final non-dominated set, reported in raw objective values
        const auto& internal = rec.data.internal_values();
        json front = json::array();
        for (size_t i = 0; i < internal.size(); ++i) {
            bool dominated = false;
            for (size_t j = 0; j < internal.size() && !dominated; ++j)
                if (j != i)
                    dominated = dominates(Point2{internal[j][0], internal[j][1]},
                                          Point2{internal[i][0], internal[i][1]});
            if (dominated) continue;
            json entry;
            entry["sequence"] = format_sequence(rec.data.sequences()[i], alphabet);
            entry["values"] = rec.data.raw_values()[i];
            front.push_back(entry);
        }
        out["front"] = front;
    }
    return out;
}

json meta_json(const RunRecord& rec, const std::string& started, const std::string& finished,
               double total_seconds) {
    json out;
    out["started_at"] = started;
    out["finished_at"] = finished;
    out["total_seconds"] = total_seconds;
    json secs = json::array();
    for (const IterationRecord& it : rec.iterations) secs.push_back(it.seconds);
    out["iteration_seconds"] = secs;
    return out;
}

void write_run_outputs(const fs::path& dir, const std::string& prefix, std::uint64_t seed,
                       const RunRecord& rec, const Alphabet& alphabet,
                       const std::string& started, const std::string& finished,
                       double total_seconds) {
    const std::string tag = prefix + "_seed" + std::to_string(seed);
    write_text_atomic((dir / (tag + ".csv")).string(), iteration_csv(rec, alphabet));
    write_text_atomic((dir / (tag + "_curve.csv")).string(), curve_csv(rec));
    write_text_atomic((dir / (tag + "_summary.json")).string(),
                      summary_json(rec, alphabet, seed, prefix).dump(2) + "\n");
    write_text_atomic((dir / (tag + "_meta.json")).string(),
                      meta_json(rec, started, finished, total_seconds).dump(2) + "\n");
}

/// Pads every curve with its last value to a common length, then writes
/// per-evaluation mean and standard error across seeds.
void write_aggregate_curve(const fs::path& path, const std::vector<std::vector<double>>& curves) {
    size_t len = 0;
    for (const auto& c : curves) len = std::max(len, c.size());
    if (len == 0) return;
    std::string out = "eval,mean,stderr\n";
    const double k = static_cast<double>(curves.size());
    for (size_t i = 0; i < len; ++i) {
        double sum = 0.0, sum_sq = 0.0;
        for (const auto& c : curves) {
            const double v = c.empty() ? 0.0 : (i < c.size() ? c[i] : c.back());
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / k;
        double se = 0.0;
        if (curves.size() > 1) {
            const double var = std::max(0.0, (sum_sq - k * mean * mean) / (k - 1.0));
            se = std::sqrt(var / k);
        }
        out += std::to_string(i + 1) + ',' + format_real(mean) + ',' + format_real(se) + '\n';
    }
    write_text_atomic(path.string(), out);
}

long long baseline_budget(const ExperimentConfig& cfg) {
    if (cfg.eval_budget) return *cfg.eval_budget;
    return static_cast<long long>(cfg.t_max) * cfg.batch_size;
}

int baseline_generations(long long budget) {
    // generous upper bound; the metered budget is what actually stops the run
    return static_cast<int>(10 * ((budget + 15) / 16 + 1));
}

} // namespace

int log_level() {
    static const int level = [] {
        const char* v = std::getenv("COREL_LOG");
        if (!v || !*v) return 0;
        const std::string s(v);
        if (s == "0" || s == "off" || s == "quiet") return 0;
        if (s == "2" || s == "debug") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& message) {
    if (log_level() >= 1) std::fprintf(stderr, "[corel] %s\n", message.c_str());
}

void log_debug(const std::string& message) {
    if (log_level() >= 2) std::fprintf(stderr, "[corel] %s\n", message.c_str());
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::invalid_input, "cannot write " + tmp);
        out << content;
        if (!out) throw Error(Errc::invalid_input, "short write to " + tmp);
    }
    fs::rename(tmp, path);
}

int cmd_run(const RunOptions& opts) {
    const ExperimentConfig cfg = load_config(opts.config_path);
    const std::uint64_t base_seed = opts.seed_override.value_or(cfg.seed);
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);

    bool any_aborted = false;
    std::vector<std::vector<double>> curves, baseline_curves;

    for (int k = 0; k < opts.seed_count; ++k) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);

        AssembledExperiment ax = assemble_experiment(cfg, seed);
        Rng rng(seed);
        const std::string started = iso_utc_now();
        const auto t0 = std::chrono::steady_clock::now();
        const RunRecord rec = run_bo(ax.loop, ax.bb, ax.bundle, rng);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_run_outputs(dir, "corel", seed, rec, ax.bundle.alphabet, started, iso_utc_now(), elapsed);
        curves.push_back(rec.curve);
        any_aborted = any_aborted || rec.aborted;
        log_info("seed " + std::to_string(seed) + ": " + std::to_string(rec.data.eval_count()) +
                 " evaluations" + (rec.budget_exhausted ? ", budget exhausted" : "") +
                 (rec.aborted ? ", aborted: " + rec.abort_message : ""));

        if (opts.with_baseline) {
            // identical starts and black box; only the control strategy differs
            AssembledExperiment bx = assemble_experiment(cfg, seed);
            Rng brng = Rng(seed).child(1);
            const long long budget = baseline_budget(cfg);
            const std::string bstarted = iso_utc_now();
            const auto b0 = std::chrono::steady_clock::now();
            const RunRecord brec =
                random_mutation_baseline(bx.bundle.initial, bx.bb, bx.bundle.alphabet,
                                         baseline_generations(budget), budget, brng);
            const double belapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - b0).count();
            write_run_outputs(dir, "baseline", seed, brec, bx.bundle.alphabet, bstarted,
                              iso_utc_now(), belapsed);
            baseline_curves.push_back(brec.curve);
            any_aborted = any_aborted || brec.aborted;
            log_info("seed " + std::to_string(seed) + " baseline: " +
                     std::to_string(brec.data.eval_count()) + " evaluations");
        }
    }

    if (opts.seed_count > 1) {
        write_aggregate_curve(dir / "corel_curve_aggregate.csv", curves);
        if (opts.with_baseline)
            write_aggregate_curve(dir / "baseline_curve_aggregate.csv", baseline_curves);
    }
    return any_aborted ? 1 : 0;
}

int cmd_kernel_matrix(const std::string& config_path, const std::string& seqs_path,
                      const std::string& out_path) {
    const ExperimentConfig cfg = load_config(config_path);
    AssembledExperiment ax = assemble_experiment(cfg, cfg.seed);
    const Alphabet& alphabet = ax.bundle.alphabet;

    std::ifstream in(seqs_path);
    if (!in) throw Error(Errc::invalid_config, "cannot open sequences file: " + seqs_path);
    std::vector<FactorizedDistribution> points;
    std::string line;
    int line_no = 0, length = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = seqs_path + " line " + std::to_string(line_no);
        Sequence s;
        try {
            s = parse_sequence(line, alphabet);
        } catch (const Error& e) {
            throw Error(Errc::invalid_config, where + ": " + e.what());
        }
        if (length == 0) length = s.length();
        if (s.length() != length)
            throw Error(Errc::invalid_config, where + ": inconsistent sequence length");
        if (!ax.loop.kernel.weightings.empty() && s.length() != cfg.problem.length)
            throw Error(Errc::invalid_config,
                        where + ": weighted kernel needs sequences of problem.length");
        points.push_back(indicator(s, alphabet));
    }
    if (points.empty()) throw Error(Errc::invalid_config, seqs_path + ": no sequences");

    const Eigen::MatrixXd gram = gram_matrix(ax.loop.kernel, points);
    std::string csv;
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        for (Eigen::Index j = 0; j < gram.cols(); ++j) {
            if (j > 0) csv += ',';
            csv += format_real(gram(i, j));
        }
        csv += '\n';
    }
    write_text_atomic(out_path, csv);

    json params;
    params["theta"] = ax.loop.kernel.params.theta;
    params["lambda"] = ax.loop.kernel.params.lambda;
    params["mu"] = 0.0;  // raw kernel dump: no data, so no fitted mean
    params["variant"] = variant_name(ax.loop.kernel.variant);
    write_text_atomic(out_path + ".params.json", params.dump(2) + "\n");
    log_info("wrote " + std::to_string(points.size()) + "x" + std::to_string(points.size()) +
             " kernel matrix to " + out_path);
    return 0;
}

} // namespace corel
