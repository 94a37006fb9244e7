// bfl: fit, simulate, predict and summarize fused-lasso logistic models.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bfl/commands.hpp"

namespace {

using bfl::cli::RunConfig;

// Turns "key = value" lines into "--key=value" arguments; '#' starts a comment.
std::vector<std::string> config_file_args(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bfl::cli::usage_error("cannot open config file " + path);
    std::vector<std::string> args;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw bfl::cli::usage_error(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        auto trim = [](std::string s) {
            const auto first = s.find_first_not_of(" \t\r");
            if (first == std::string::npos) return std::string{};
            return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
        };
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        for (char& ch : key) {
            if (ch == '_') ch = '-';
        }
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

// Config-file arguments go right after the subcommand so command-line flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> raw(argv, argv + argc);
    std::string config_path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == "--config" && i + 1 < raw.size()) {
            config_path = raw[++i];
        } else if (raw[i].rfind("--config=", 0) == 0) {
            config_path = raw[i].substr(9);
        } else {
            kept.push_back(raw[i]);
        }
    }
    if (config_path.empty() || kept.size() < 2) return kept;
    const auto extra = config_file_args(config_path);
    kept.insert(kept.begin() + 2, extra.begin(), extra.end());
    return kept;
}

struct Flags {
    std::string model;
    std::string beta_variant = "b1";
    std::string preset;
    std::string emit = "samples,summary,metrics,plot";
    std::uint64_t seed = 1;
};

void add_common(CLI::App& sub, RunConfig& c, Flags& f) {
    sub.add_option("--model", f.model, "blasso, lbfl or lbfh (simulate: comma list)");
    sub.add_option("--seed", f.seed, "random seed for data generation and chains");
    sub.add_option("--out", c.out_dir, "output directory")->capture_default_str();
    sub.add_option("--emit", f.emit, "outputs to write: samples,summary,metrics,plot")->capture_default_str();
    sub.add_option("--config", "key = value configuration file; flags override it");
}

void add_data(CLI::App& sub, RunConfig& c) {
    sub.add_option("--data", c.data_path, "data file");
    sub.add_option("--format", c.format, "matrix or ucr")->capture_default_str();
    sub.add_option("--response-col", c.response_col, "0-based response column (negative counts from the end)")
        ->capture_default_str();
    sub.add_option("--label-map", c.label_map, "UCR label map, e.g. \"-1:1,1:0\" (default -1:0,1:1)");
    sub.add_flag("--standardize", c.standardize, "center and scale each feature column");
}

void add_sampler(CLI::App& sub, RunConfig& c, Flags& f) {
    sub.add_option("--iters", c.hyper.iterations, "total Gibbs sweeps")->capture_default_str();
    sub.add_option("--burnin", c.hyper.burnin, "discarded initial sweeps")->capture_default_str();
    sub.add_option("--thin", c.hyper.thin, "keep every thin-th sweep after burn-in")->capture_default_str();
    sub.add_option("--r1", c.hyper.r1, "shape of the lambda1^2 Gamma prior")->capture_default_str();
    sub.add_option("--delta1", c.hyper.delta1, "rate of the lambda1^2 Gamma prior")->capture_default_str();
    sub.add_option("--r2", c.hyper.r2, "shape of the lambda2^2 Gamma prior (lbfl)")->capture_default_str();
    sub.add_option("--delta2", c.hyper.delta2, "rate of the lambda2^2 Gamma prior (lbfl)")->capture_default_str();
    sub.add_option("--alpha", c.hyper.alpha, "intercept prior half-width")->capture_default_str();
    sub.add_option("--threads", c.threads, "worker threads (0 = hardware count)")->capture_default_str();
    sub.add_option("--preset", f.preset, "desk or paper run sizes; explicit flags take precedence");
}

void add_case(CLI::App& sub, RunConfig& c, Flags& f) {
    sub.add_option("--case", c.case_spec.case_id, "covariance case 1-4")->capture_default_str();
    sub.add_option("--rho", c.case_spec.rho, "Case 1 correlation")->capture_default_str();
    sub.add_option("--beta-variant", f.beta_variant, "b1, b2 or b4")->capture_default_str();
    sub.add_option("--n", c.case_spec.n, "training size")->capture_default_str();
    sub.add_option("--reps", c.case_spec.replications, "replications")->capture_default_str();
    sub.add_option("--test-size", c.case_spec.test_size, "test size")->capture_default_str();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Finishes RunConfig from the string flags; preset values fill only what was not given explicitly.
void finish_config(const CLI::App& sub, RunConfig& c, const Flags& f, std::string_view command) {
    const std::string default_model = command == "simulate" ? "lbfl,lbfh" : "lbfh";
    c.models = split_list(f.model.empty() ? default_model : f.model);
    c.hyper.seed = f.seed;
    c.case_spec.seed = f.seed;
    try {
        c.case_spec.beta_variant = bfl::parse_beta_variant(f.beta_variant);
        if (!f.preset.empty()) {
            bfl::CaseSpec spec = c.case_spec;
            bfl::HyperConfig hyper = c.hyper;
            bfl::apply_preset(bfl::parse_preset(f.preset), spec, hyper);
            auto unset = [&](const char* name) {
                const auto* opt = sub.get_option_no_throw(name);
                return opt == nullptr || opt->count() == 0;
            };
            if (unset("--reps")) c.case_spec.replications = spec.replications;
            if (unset("--n")) c.case_spec.n = spec.n;
            if (unset("--test-size")) c.case_spec.test_size = spec.test_size;
            if (unset("--iters")) c.hyper.iterations = hyper.iterations;
            if (unset("--burnin")) c.hyper.burnin = hyper.burnin;
            if (unset("--thin")) c.hyper.thin = hyper.thin;
        }
    } catch (const std::exception& e) {
        throw bfl::cli::usage_error(e.what());
    }
    c.emit = {false, false, false, false};
    for (const auto& e : split_list(f.emit)) {
        if (e == "samples") c.emit.samples = true;
        else if (e == "summary") c.emit.summary = true;
        else if (e == "metrics") c.emit.metrics = true;
        else if (e == "plot") c.emit.plot_data = true;
        else throw bfl::cli::usage_error("unknown --emit item '" + e + "'");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian fused-lasso logistic regression (Gibbs sampling with Polya-Gamma augmentation)"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    RunConfig fit_cfg, sim_cfg, pred_cfg, sum_cfg;
    Flags fit_f, sim_f, pred_f, sum_f;

    auto* fit = app.add_subcommand("fit", "run Gibbs chains on a data file");
    add_common(*fit, fit_cfg, fit_f);
    add_data(*fit, fit_cfg);
    add_sampler(*fit, fit_cfg, fit_f);
    fit->add_option("--chains", fit_cfg.chains, "independent chains (one per worker)")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "replicated synthetic experiments");
    add_common(*sim, sim_cfg, sim_f);
    add_sampler(*sim, sim_cfg, sim_f);
    add_case(*sim, sim_cfg, sim_f);

    auto* pred = app.add_subcommand("predict", "predicted probabilities from a saved summary");
    add_common(*pred, pred_cfg, pred_f);
    add_data(*pred, pred_cfg);
    pred->add_option("--summary", pred_cfg.summary_path, "summary.json written by fit");
    pred->add_option("--intercept-shift", pred_cfg.intercept_shift, "added to the fitted intercept")
        ->capture_default_str();

    auto* summ = app.add_subcommand("summarize", "rebuild summary.json from samples.csv");
    add_common(*summ, sum_cfg, sum_f);
    summ->add_option("--samples", sum_cfg.samples_path, "samples.csv written by fit");

    for (auto* sub : {fit, sim, pred, summ}) sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::string kind = "usage";
    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::vector<char*> cargs;
        for (auto& a : args) cargs.push_back(a.data());
        try {
            app.parse(static_cast<int>(cargs.size()), cargs.data());
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            std::cerr << bfl::cli::error_record("usage", e.what()) << '\n';
            return bfl::cli::exit_usage;
        }

        if (fit->parsed()) {
            finish_config(*fit, fit_cfg, fit_f, "fit");
            kind = "runtime";
            return bfl::cli::cmd_fit(fit_cfg);
        }
        if (sim->parsed()) {
            finish_config(*sim, sim_cfg, sim_f, "simulate");
            kind = "runtime";
            return bfl::cli::cmd_simulate(sim_cfg);
        }
        if (pred->parsed()) {
            finish_config(*pred, pred_cfg, pred_f, "predict");
            kind = "runtime";
            return bfl::cli::cmd_predict(pred_cfg);
        }
        finish_config(*summ, sum_cfg, sum_f, "summarize");
        kind = "runtime";
        return bfl::cli::cmd_summarize(sum_cfg);
    } catch (const bfl::cli::usage_error& e) {
        std::cerr << bfl::cli::error_record("usage", e.what()) << '\n';
        return bfl::cli::exit_usage;
    } catch (const std::exception& e) {
        std::cerr << bfl::cli::error_record(kind, e.what()) << '\n';
        return bfl::cli::exit_runtime_failure;
    }
}
