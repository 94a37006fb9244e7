#ifndef BFL_COMMANDS_HPP
#define BFL_COMMANDS_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errors.hpp"
#include "gibbs.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "posterior_summary.hpp"
#include "simulation.hpp"

// Batch commands behind the command-line tool. Each command reads a RunConfig,
// writes its outputs into config.out_dir through atomic writes, and returns a
// process exit status.

namespace bfl::cli {

using json = nlohmann::json;

/// Configuration or flag values that are invalid before any work starts.
class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum ExitStatus : int { exit_ok = 0, exit_runtime_failure = 1, exit_usage = 2 };

struct EmitFlags {
    bool samples = true;
    bool summary = true;
    bool metrics = true;
    bool plot_data = true;
};

struct RunConfig {
    std::vector<std::string> models{"lbfh"};
    // data source: a file (fit / predict) or a synthetic case (simulate)
    std::string data_path;
    std::string format = "matrix";  // matrix | ucr
    int response_col = -1;
    std::string label_map;          // ucr only; empty = -1:0,1:1
    bool standardize = false;
    std::string summary_path;       // predict: saved summary JSON
    std::string samples_path;       // summarize: saved samples CSV
    double intercept_shift = 0.0;   // predict: added to the fitted intercept
    HyperConfig hyper;
    CaseSpec case_spec;
    std::optional<Preset> preset;
    int chains = 1;
    unsigned threads = 0;
    std::string out_dir = "out";
    EmitFlags emit;
};

/// Key-value rendering of everything that determines a command's output.
inline std::string canonical_config(const RunConfig& c, std::string_view command) {
    std::ostringstream os;
    os << "command=" << command << '\n';
    os << "models=";
    for (const auto& m : c.models) os << m << ';';
    os << "\ndata=" << c.data_path << "\nformat=" << c.format << "\nresponse_col=" << c.response_col
       << "\nlabel_map=" << c.label_map << "\nstandardize=" << c.standardize << "\nsummary=" << c.summary_path
       << "\nsamples=" << c.samples_path << "\nintercept_shift=" << io::format_double(c.intercept_shift)
       << "\nr1=" << io::format_double(c.hyper.r1) << "\ndelta1=" << io::format_double(c.hyper.delta1)
       << "\nr2=" << io::format_double(c.hyper.r2) << "\ndelta2=" << io::format_double(c.hyper.delta2)
       << "\nalpha=" << io::format_double(c.hyper.alpha) << "\niters=" << c.hyper.iterations
       << "\nburnin=" << c.hyper.burnin << "\nthin=" << c.hyper.thin << "\nseed=" << c.hyper.seed
       << "\ncase=" << c.case_spec.case_id << "\nbeta_variant=" << to_string(c.case_spec.beta_variant)
       << "\nrho=" << io::format_double(c.case_spec.rho) << "\nn=" << c.case_spec.n
       << "\nreps=" << c.case_spec.replications << "\ntest_size=" << c.case_spec.test_size
       << "\nchains=" << c.chains << '\n';
    return os.str();
}

inline std::string config_hash(const RunConfig& c, std::string_view command) {
    return io::hex64(io::fnv1a64(canonical_config(c, command)));
}

/// Applies the preset (if any) and checks the configuration for a command.
inline void resolve_and_validate(RunConfig& c, std::string_view command) {
    if (c.preset) apply_preset(*c.preset, c.case_spec, c.hyper);
    try {
        c.hyper.validate();
        for (const auto& m : c.models) parse_model_tag(m);
        if (command == "simulate") c.case_spec.validate();
    } catch (const std::exception& e) {
        throw usage_error(e.what());
    }
    if (c.models.empty()) throw usage_error("at least one model is required");
    if (c.format != "matrix" && c.format != "ucr") throw usage_error("format must be 'matrix' or 'ucr'");
    if (c.chains < 1) throw usage_error("chains must be at least 1");
    if ((command == "fit" || command == "predict") && c.data_path.empty()) throw usage_error("--data is required");
    if (command == "fit" && c.models.size() != 1) throw usage_error("fit takes exactly one model");
    if (command == "predict" && c.summary_path.empty()) throw usage_error("--summary is required for predict");
    if (command == "summarize" && c.samples_path.empty()) throw usage_error("--samples is required for summarize");
}

struct LoadedData {
    Dataset data;
    io::Standardization standardization;
};

inline LoadedData load_data(const RunConfig& c, const std::string& path) {
    LoadedData out;
    if (c.format == "ucr") {
        out.data = io::load_ucr(path, c.label_map.empty() ? io::default_label_map() : io::parse_label_map(c.label_map));
        if (c.standardize) out.standardization = io::standardize_columns(out.data.X);
    } else {
        auto loaded = io::load_matrix(path, c.response_col, c.standardize);
        out.data = std::move(loaded.data);
        out.standardization = std::move(loaded.standardization);
    }
    return out;
}

inline json meta_block(const RunConfig& c, std::string_view command, std::string_view model) {
    return json{{"command", command},
                {"model", model},
                {"seed", c.hyper.seed},
                {"config_hash", config_hash(c, command)}};
}

inline std::string csv_header_block(const RunConfig& c, std::string_view command, std::string_view model) {
    std::ostringstream os;
    os << "# command=" << command << "\n# model=" << model << "\n# seed=" << c.hyper.seed
       << "\n# config_hash=" << config_hash(c, command) << '\n';
    return os.str();
}

inline json interval_array(const std::vector<Interval>& v) {
    json out = json::array();
    for (const auto& ci : v) out.push_back({ci.lo, ci.hi});
    return out;
}

inline json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json summary_json(const PosteriorSummary& s) {
    return json{{"beta0_mean", s.beta0_mean},
                {"beta_mean", to_json(s.beta_mean)},
                {"coef_level", s.coef_level},
                {"diff_level", s.diff_level},
                {"ci_beta", interval_array(s.ci_beta)},
                {"ci_diff", interval_array(s.ci_diff)},
                {"selected", s.selected},
                {"fused", s.fused},
                {"zero_count", std::count(s.selected.begin(), s.selected.end(), false)},
                {"group_count", count_groups(s.fused)},
                {"retained", s.draws}};
}

inline json ess_json(const Eigen::VectorXd& beta0_draws, const Eigen::MatrixXd& beta_draws,
                     const std::vector<long>& chain_sizes) {
    // per-chain ESS summed over chains
    auto ess_of = [&](auto column) {
        double total = 0.0;
        bool degenerate = false;
        Eigen::Index start = 0;
        for (long len : chain_sizes) {
            if (len >= 100) {
                const Eigen::VectorXd seg = column.segment(start, len);
                const auto r = effective_sample_size(seg);
                total += r.value;
                degenerate = degenerate || r.degenerate;
            }
            start += len;
        }
        return std::pair{total, degenerate};
    };
    json beta = json::array();
    json degenerate = json::array();
    for (Eigen::Index j = 0; j < beta_draws.cols(); ++j) {
        const auto [v, d] = ess_of(beta_draws.col(j));
        beta.push_back(v);
        degenerate.push_back(d);
    }
    const auto [b0, b0d] = ess_of(beta0_draws);
    return json{{"beta0", b0}, {"beta0_degenerate", b0d}, {"beta", beta}, {"beta_degenerate", degenerate}};
}

inline std::string plot_data_csv(const PosteriorSummary& s, std::string_view header_block) {
    std::ostringstream os;
    os << header_block << "index,posterior_mean,ci_lo,ci_hi,selected,fusion_boundary,group\n";
    long group = 1;
    for (std::size_t j = 0; j < s.ci_beta.size(); ++j) {
        const bool boundary = j > 0 && s.fused[j - 1];
        if (boundary) ++group;
        os << (j + 1) << ',' << io::format_double(s.beta_mean[static_cast<Eigen::Index>(j)]) << ','
           << io::format_double(s.ci_beta[j].lo) << ',' << io::format_double(s.ci_beta[j].hi) << ','
           << (s.selected[j] ? 1 : 0) << ',' << (boundary ? 1 : 0) << ',' << group << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// fit

/// Runs config.chains chains of one model and writes samples.csv, summary.json,
/// plot_data.csv and timing.json.
inline int cmd_fit(RunConfig config) {
    resolve_and_validate(config, "fit");
    const auto started = std::chrono::steady_clock::now();
    const ModelTag model = parse_model_tag(config.models.front());
    const LoadedData loaded = load_data(config, config.data_path);
    const Dataset& data = loaded.data;

    std::vector<Chain> chains(static_cast<std::size_t>(config.chains));
    std::vector<std::string> errors(chains.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t c = 0; c < chains.size(); ++c) {
            pool.emplace_back([&, c] {
                try {
                    chains[c] = run_chain(model, data, config.hyper, c);
                } catch (const std::exception& e) {
                    errors[c] = e.what();
                }
            });
        }
    }
    for (std::size_t c = 0; c < errors.size(); ++c) {
        if (!errors[c].empty()) throw chain_failure("chain " + std::to_string(c) + ": " + errors[c]);
    }

    const Eigen::Index p = data.p();
    const long per_chain = chains.front().retained;
    const long total = per_chain * config.chains;
    Eigen::VectorXd beta0(total);
    Eigen::MatrixXd beta(total, p);
    std::vector<long> sizes;
    long pd_retries = 0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        beta0.segment(static_cast<Eigen::Index>(c) * per_chain, per_chain) = chains[c].beta0_draws;
        beta.middleRows(static_cast<Eigen::Index>(c) * per_chain, per_chain) = chains[c].beta_draws;
        sizes.push_back(per_chain);
        pd_retries += chains[c].pd_retry_count;
    }
    const PosteriorSummary summary = summarize_draws(beta0, beta);
    const auto model_name = std::string(to_string(model));
    const std::filesystem::path out(config.out_dir);

    if (config.emit.samples) {
        std::ostringstream os;
        os << csv_header_block(config, "fit", model_name) << "iter,beta0";
        for (Eigen::Index j = 0; j < p; ++j) os << ",beta_" << (j + 1);
        for (const auto& h : chains.front().hyper_names) os << ',' << h;
        if (config.chains > 1) os << ",chain";
        os << '\n';
        for (std::size_t c = 0; c < chains.size(); ++c) {
            const Chain& ch = chains[c];
            for (long r = 0; r < ch.retained; ++r) {
                os << ch.iteration[static_cast<std::size_t>(r)] << ',' << io::format_double(ch.beta0_draws[r]);
                for (Eigen::Index j = 0; j < p; ++j) os << ',' << io::format_double(ch.beta_draws(r, j));
                for (Eigen::Index h = 0; h < ch.hyper_draws.cols(); ++h) os << ',' << io::format_double(ch.hyper_draws(r, h));
                if (config.chains > 1) os << ',' << c;
                os << '\n';
            }
        }
        io::atomic_write(out / "samples.csv", os.str());
    }

    if (config.emit.summary) {
        json j = summary_json(summary);
        j["meta"] = meta_block(config, "fit", model_name);
        j["meta"]["iterations"] = config.hyper.iterations;
        j["meta"]["burnin"] = config.hyper.burnin;
        j["meta"]["thin"] = config.hyper.thin;
        j["meta"]["chains"] = config.chains;
        j["meta"]["data"] = config.data_path;
        j["meta"]["format"] = config.format;
        j["meta"]["standardized"] = config.standardize;
        j["n"] = data.n();
        j["p"] = p;
        j["train_positive_rate"] = data.y.mean();
        j["pd_retry_count"] = pd_retries;
        j["ess"] = ess_json(beta0, beta, sizes);
        json hyper_means = json::object();
        for (std::size_t h = 0; h < chains.front().hyper_names.size(); ++h) {
            double acc = 0.0;
            for (const auto& ch : chains) acc += ch.hyper_draws.col(static_cast<Eigen::Index>(h)).sum();
            hyper_means[chains.front().hyper_names[h]] = acc / static_cast<double>(total);
        }
        j["hyper_means"] = hyper_means;
        if (!loaded.standardization.empty()) {
            j["standardization"] = {{"center", to_json(loaded.standardization.center)},
                                    {"scale", to_json(loaded.standardization.scale)}};
        }
        io::atomic_write(out / "summary.json", j.dump(2) + "\n");
    }

    if (config.emit.plot_data) {
        io::atomic_write(out / "plot_data.csv", plot_data_csv(summary, csv_header_block(config, "fit", model_name)));
    }

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    io::atomic_write(out / "timing.json", json{{"runtime_seconds", seconds}}.dump(2) + "\n");
    return exit_ok;
}

// ---------------------------------------------------------------------------
// summarize

struct SampleTable {
    Eigen::VectorXd beta0;
    Eigen::MatrixXd beta;
    std::vector<long> chain_sizes;
    std::string model;
};

/// Reads a samples.csv written by fit (columns iter, beta0, beta_1..beta_p, ...).
inline SampleTable read_samples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    std::string line;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    SampleTable out;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("# model=", 0) == 0) out.model = line.substr(8);
        if (io::is_blank_or_comment(line)) continue;
        const auto fields = io::split_fields(line);
        if (header.empty()) {
            for (auto f : fields) header.emplace_back(f);
            continue;
        }
        if (fields.size() != header.size()) {
            throw parse_error(path.string() + ":" + std::to_string(line_no) + ": wrong field count");
        }
        std::vector<double> row;
        for (auto f : fields) {
            double v = 0;
            if (!io::parse_double(f, v)) throw parse_error(path.string() + ":" + std::to_string(line_no) + ": bad number");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    const auto find = [&](const std::string& name) -> long {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<long>(it - header.begin());
    };
    const long b0 = find("beta0");
    if (b0 < 0) throw parse_error(path.string() + ": no beta0 column");
    std::vector<long> beta_cols;
    for (long j = 1;; ++j) {
        const long k = find("beta_" + std::to_string(j));
        if (k < 0) break;
        beta_cols.push_back(k);
    }
    if (beta_cols.empty()) throw parse_error(path.string() + ": no beta_1.. columns");
    const long chain_col = find("chain");
    const auto m = static_cast<Eigen::Index>(rows.size());
    out.beta0.resize(m);
    out.beta.resize(m, static_cast<Eigen::Index>(beta_cols.size()));
    double prev_chain = -1;
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        out.beta0[r] = row[static_cast<std::size_t>(b0)];
        for (std::size_t j = 0; j < beta_cols.size(); ++j) {
            out.beta(r, static_cast<Eigen::Index>(j)) = row[static_cast<std::size_t>(beta_cols[j])];
        }
        const double ch = chain_col >= 0 ? row[static_cast<std::size_t>(chain_col)] : 0.0;
        if (ch != prev_chain) out.chain_sizes.push_back(0);
        ++out.chain_sizes.back();
        prev_chain = ch;
    }
    return out;
}

/// Re-summarizes a saved samples.csv into summary.json.
inline int cmd_summarize(RunConfig config) {
    resolve_and_validate(config, "summarize");
    const SampleTable t = read_samples(config.samples_path);
    const PosteriorSummary s = summarize_draws(t.beta0, t.beta);
    json j = summary_json(s);
    j["meta"] = meta_block(config, "summarize", t.model);
    j["meta"]["samples"] = config.samples_path;
    j["p"] = t.beta.cols();
    j["ess"] = ess_json(t.beta0, t.beta, t.chain_sizes);
    io::atomic_write(std::filesystem::path(config.out_dir) / "summary.json", j.dump(2) + "\n");
    return exit_ok;
}

// ---------------------------------------------------------------------------
// predict

/// Predicted probabilities from a saved summary; AUC and PR-AUC when both classes are present.
inline int cmd_predict(RunConfig config) {
    resolve_and_validate(config, "predict");
    std::ifstream in(config.summary_path);
    if (!in) throw parse_error("cannot open " + config.summary_path);
    json saved;
    try {
        saved = json::parse(in);
    } catch (const json::exception& e) {
        throw parse_error(config.summary_path + ": " + e.what());
    }
    const auto beta_vec = saved.at("beta_mean").get<std::vector<double>>();
    const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(beta_vec.data(), static_cast<Eigen::Index>(beta_vec.size()));
    const double beta0 = saved.at("beta0_mean").get<double>() + config.intercept_shift;

    RunConfig load_cfg = config;
    load_cfg.standardize = false;
    LoadedData loaded = load_data(load_cfg, config.data_path);
    Dataset& data = loaded.data;
    if (data.p() != beta.size()) {
        throw dimension_error("feature file has " + std::to_string(data.p()) + " columns but the summary has " +
                              std::to_string(beta.size()) + " coefficients");
    }
    if (saved.contains("standardization")) {
        io::Standardization s;
        const auto c = saved["standardization"].at("center").get<std::vector<double>>();
        const auto sc = saved["standardization"].at("scale").get<std::vector<double>>();
        s.center = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        s.scale = Eigen::Map<const Eigen::VectorXd>(sc.data(), static_cast<Eigen::Index>(sc.size()));
        io::apply_standardization(data.X, s);
    }

    const std::string model = saved.contains("meta") ? saved["meta"].value("model", "") : "";
    Eigen::VectorXd prob(data.n());
    std::ostringstream os;
    os << csv_header_block(config, "predict", model) << "row,probability,label\n";
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        prob[i] = predict_prob(beta0, beta, data.X.row(i).transpose());
        os << (i + 1) << ',' << io::format_double(prob[i]) << ',' << io::format_double(data.y[i]) << '\n';
    }
    const std::filesystem::path out(config.out_dir);
    io::atomic_write(out / "predictions.csv", os.str());

    json metrics = meta_block(config, "predict", model);
    metrics["n"] = data.n();
    metrics["positives"] = data.y.sum();
    const double positives = data.y.sum();
    if (positives > 0 && positives < static_cast<double>(data.n())) {
        metrics["auc"] = auc(prob, data.y);
        metrics["pr_auc"] = pr_auc(prob, data.y);
    }
    if (config.emit.metrics) io::atomic_write(out / "predict_metrics.json", metrics.dump(2) + "\n");
    return exit_ok;
}

// ---------------------------------------------------------------------------
// simulate

inline std::string format_cell(const std::optional<MeanSd>& v, bool sd) {
    if (!v) return "NA";
    return io::format_double(sd ? v->sd : v->mean);
}

inline json rate_json(const std::optional<MeanSd>& v) {
    if (!v) return nullptr;
    return json{{"mean", v->mean}, {"sd", v->sd}};
}

/// Replicated experiment for each model; writes metrics.csv and metrics.json.
inline int cmd_simulate(RunConfig config) {
    resolve_and_validate(config, "simulate");
    const std::filesystem::path out(config.out_dir);
    const std::string joined_models = [&] {
        std::string s;
        for (const auto& m : config.models) s += (s.empty() ? "" : ",") + m;
        return s;
    }();

    std::ostringstream preamble;
    preamble << csv_header_block(config, "simulate", joined_models);
    preamble << "# case=" << config.case_spec.case_id << " beta_variant=" << to_string(config.case_spec.beta_variant)
             << " rho=" << io::format_double(config.case_spec.rho) << " n=" << config.case_spec.n
             << " reps=" << config.case_spec.replications << " test_size=" << config.case_spec.test_size << '\n';
    std::ostringstream csv, csv_sd;
    csv << preamble.str() << "model,mse,el,pv,pzv,av,pf,pnf,af\n";
    csv_sd << preamble.str() << "model,mse_sd,el_sd,pv_sd,pzv_sd,av_sd,pf_sd,pnf_sd,af_sd\n";
    json rows = json::array();
    bool any_failed = false;
    for (const auto& name : config.models) {
        const ExperimentResult r = run_experiment(config.case_spec, parse_model_tag(name), config.hyper, config.threads);
        const MetricTable& t = r.table;
        any_failed = any_failed || t.completed == 0;
        const std::optional<MeanSd> mse = t.completed ? std::optional(t.mse) : std::nullopt;
        const std::optional<MeanSd> el = t.completed ? std::optional(t.el) : std::nullopt;
        const std::optional<MeanSd> el_sum = t.completed ? std::optional(t.el_sum) : std::nullopt;
        const std::optional<MeanSd> av = t.completed ? std::optional(t.av) : std::nullopt;
        const std::optional<MeanSd> af = t.completed ? std::optional(t.af) : std::nullopt;
        csv << name;
        csv_sd << name;
        for (const auto* cell : {&mse, &el, &t.pv, &t.pzv, &av, &t.pf, &t.pnf, &af}) {
            csv << ',' << format_cell(*cell, false);
            csv_sd << ',' << format_cell(*cell, true);
        }
        csv << '\n';
        csv_sd << '\n';
        rows.push_back(json{{"model", name},
                            {"mse", rate_json(mse)},
                            {"el", rate_json(el)},
                            {"el_sum", rate_json(el_sum)},
                            {"pv", rate_json(t.pv)},
                            {"pzv", rate_json(t.pzv)},
                            {"av", rate_json(av)},
                            {"pf", rate_json(t.pf)},
                            {"pnf", rate_json(t.pnf)},
                            {"af", rate_json(af)},
                            {"completed", t.completed},
                            {"failed", t.failed},
                            {"failures", r.failures},
                            {"pd_retry_count", r.pd_retries}});
    }
    json j{{"meta", meta_block(config, "simulate", joined_models)},
           {"case", {{"case_id", config.case_spec.case_id},
                     {"beta_variant", to_string(config.case_spec.beta_variant)},
                     {"rho", config.case_spec.rho},
                     {"n", config.case_spec.n},
                     {"replications", config.case_spec.replications},
                     {"test_size", config.case_spec.test_size},
                     {"seed", config.case_spec.seed}}},
           {"iterations", config.hyper.iterations},
           {"burnin", config.hyper.burnin},
           {"rows", rows}};
    if (config.emit.metrics) {
        io::atomic_write(out / "metrics.csv", csv.str());
        io::atomic_write(out / "metrics_sd.csv", csv_sd.str());
        io::atomic_write(out / "metrics.json", j.dump(2) + "\n");
    }
    return any_failed ? exit_runtime_failure : exit_ok;
}

/// Machine-readable error record.
inline std::string error_record(std::string_view kind, std::string_view message) {
    return json{{"status", "error"}, {"kind", kind}, {"message", message}}.dump();
}

} // namespace bfl::cli

#endif
