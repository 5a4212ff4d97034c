// qlink: Monte Carlo estimates of entanglement-link fidelity and rate for
// microwave-optical transducer hardware. See README.md for the config schema.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qlink/config.hpp"
#include "qlink/report.hpp"
#include "qlink/sweeps.hpp"
#include "qlink/version.hpp"

namespace {

using namespace qlink;

struct CommonOptions {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    unsigned threads = 1;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::uint64_t> trials_override;
};

void add_common_options(CLI::App& cmd, CommonOptions& opt, bool config_required) {
    auto* config = cmd.add_option("--config", opt.config_path, "JSON config file");
    if (config_required)
        config->required();
    cmd.add_option("--out", opt.out_path,
                   "output file; results go to stdout when omitted");
    cmd.add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd.add_option("--threads", opt.threads, "worker threads")
        ->check(CLI::Range(1u, 512u))
        ->capture_default_str();
    cmd.add_option("--seed", opt.seed_override, "override the config seed");
    cmd.add_option("--trials", opt.trials_override, "override the config trial count");
}

JobConfig load_job(const CommonOptions& opt) {
    JobConfig job = load_config_string(read_text_file(opt.config_path));
    if (opt.seed_override)
        job.run.master_seed = *opt.seed_override;
    if (opt.trials_override) {
        job.run.trials = *opt.trials_override;
        job.run.validate();
    }
    return job;
}

std::string render_rows(const std::vector<ResultRow>& rows, const std::string& format) {
    return format == "json" ? json_document(rows) : csv_document(rows);
}

void summarize_row(const ResultRow& row) {
    std::printf("protocol=%s p_e=%s trials=%llu heralds=%llu accepted=%llu "
                "fidelity_mean=%s fidelity_sem=%s ebit_rate_hz=%s\n",
                protocol_name(row.protocol), format_metric(row.config.attempt.p_e).c_str(),
                static_cast<unsigned long long>(row.metrics.trials),
                static_cast<unsigned long long>(row.metrics.heralds),
                static_cast<unsigned long long>(row.metrics.accepted),
                format_metric(row.metrics.fidelity_mean).c_str(),
                format_metric(row.metrics.fidelity_sem).c_str(),
                format_metric(row.metrics.ebit_rate_hz).c_str());
}

// Writes the document plus a sibling manifest, or prints it when no --out.
void deliver(const std::string& document, const JobConfig& job, const std::string& command,
             const CommonOptions& opt) {
    if (opt.out_path.empty()) {
        std::fputs(document.c_str(), stdout);
        return;
    }
    write_text_file(opt.out_path, document);
    const OutputDigest digest{opt.out_path, fnv1a64_hex(document), document.size()};
    const auto manifest = build_manifest(job, command, {digest});
    write_text_file(opt.out_path + ".manifest.json", manifest.dump(2) + "\n");
    std::printf("wrote %s (%s, %zu bytes, fnv1a64 %s) and %s.manifest.json\n",
                opt.out_path.c_str(), opt.format.c_str(), document.size(),
                digest.fnv1a64.c_str(), opt.out_path.c_str());
}

int cmd_run(const CommonOptions& opt) {
    const JobConfig job = load_job(opt);
    const ProtocolConfig cfg = job.resolved();
    ResultRow row{cfg.protocol, cfg, run_trials(cfg, opt.threads)};
    deliver(render_rows({row}, opt.format), job, "run", opt);
    if (!opt.out_path.empty())
        summarize_row(row);
    return 0;
}

int cmd_sweep(const CommonOptions& opt) {
    const JobConfig job = load_job(opt);
    const SweepSpec spec = job.sweep_spec();
    const auto points = run_sweep(spec, opt.threads);
    std::vector<ResultRow> rows;
    rows.reserve(points.size());
    for (const auto& point : points)
        rows.push_back({point.protocol, point.config, point.metrics});
    deliver(render_rows(rows, opt.format), job, "sweep", opt);
    if (!opt.out_path.empty())
        std::printf("%zu sweep points\n", rows.size());
    return 0;
}

int cmd_optimize(const CommonOptions& opt, const std::string& objective_name, int grid,
                 std::uint64_t candidate_trials) {
    const JobConfig job = load_job(opt);
    const ProtocolConfig cfg = job.resolved();
    const OptimizeObjective objective = objective_name == "rate"
                                            ? OptimizeObjective::EbitRate
                                            : OptimizeObjective::FidelityMean;
    const OptimizeResult result =
        optimize_pe(cfg, objective, grid, opt.threads, candidate_trials);

    ProtocolConfig best_cfg = cfg;
    best_cfg.attempt.p_e = result.best_p_e;
    ResultRow row{best_cfg.protocol, best_cfg, result.metrics};

    if (opt.format == "json") {
        nlohmann::json j;
        j["objective"] = objective_name;
        j["best_p_e"] = result.best_p_e;
        j["scanned"] = nlohmann::json::array();
        for (const auto& [pe, value] : result.scanned)
            j["scanned"].push_back({pe, qlink::detail::metric_to_json(value)});
        j["result"] = row_json(row);
        deliver(j.dump(2) + "\n", job, "optimize-pe", opt);
    } else {
        deliver(csv_document({row}), job, "optimize-pe", opt);
    }
    std::printf("best_p_e=%s objective=%s\n", format_metric(result.best_p_e).c_str(),
                objective_name.c_str());
    summarize_row(row);
    return 0;
}

int cmd_presets(const std::string& format) {
    if (format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& p : list_presets()) {
            nlohmann::json row;
            row["name"] = p.name;
            row["summary"] = p.summary;
            row["eta"] = p.eta;
            row["n_add"] = p.n_add;
            row["attempt_rate_hz"] = p.attempt_rate_hz;
            row["t1_s"] = qlink::detail::metric_to_json(p.t1_s);
            row["t2phi_s"] = qlink::detail::metric_to_json(p.t2phi_s);
            j.push_back(std::move(row));
        }
        std::printf("%s\n", j.dump(2).c_str());
        return 0;
    }
    std::printf("%-22s %-10s %-8s %-16s %-8s %s\n", "name", "eta", "n_add",
                "attempt_rate_hz", "t1_s", "summary");
    for (const auto& p : list_presets())
        std::printf("%-22s %-10g %-8g %-16g %-8g %s\n", p.name, p.eta, p.n_add,
                    p.attempt_rate_hz, p.t1_s, p.summary);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entanglement-link Monte Carlo simulator for quantum transducers"};
    app.set_version_flag("--version", qlink::kVersionString);
    app.require_subcommand(1);

    CommonOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "simulate one configuration");
    add_common_options(*run_cmd, run_opt, true);

    CommonOptions sweep_opt;
    auto* sweep_cmd = app.add_subcommand("sweep", "simulate a parameter sweep");
    add_common_options(*sweep_cmd, sweep_opt, true);

    CommonOptions opt_opt;
    std::string objective = "fidelity";
    int grid = 19;
    std::uint64_t candidate_trials = 8000;
    auto* opt_cmd =
        app.add_subcommand("optimize-pe", "scan the drive probability for an optimum");
    add_common_options(*opt_cmd, opt_opt, true);
    opt_cmd->add_option("--objective", objective, "quantity to maximize")
        ->check(CLI::IsMember({"fidelity", "rate"}))
        ->capture_default_str();
    opt_cmd->add_option("--grid", grid, "coarse scan points")
        ->check(CLI::Range(1, 10000))
        ->capture_default_str();
    opt_cmd->add_option("--candidate-trials", candidate_trials,
                        "trial budget per scanned candidate")
        ->capture_default_str();

    std::string presets_format = "table";
    auto* presets_cmd = app.add_subcommand("presets", "list named device scenarios");
    presets_cmd->add_option("--format", presets_format, "table or json")
        ->check(CLI::IsMember({"table", "json"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed())
            return cmd_run(run_opt);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_opt);
        if (opt_cmd->parsed())
            return cmd_optimize(opt_opt, objective, grid, candidate_trials);
        if (presets_cmd->parsed())
            return cmd_presets(presets_format);
    } catch (const qlink::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const qlink::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
