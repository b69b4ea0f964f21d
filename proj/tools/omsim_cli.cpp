// Command-line front end: run sweep/heatmap configs to CSV, validate
// configs, and extract peak locations from result files.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "omsim/sweep.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override, int threads) {
    omsim::ExperimentConfig cfg = omsim::ExperimentConfig::from_json_file(config_path);
    std::string out_path = out_override.empty() ? cfg.output_path : out_override;

    const std::size_t total = cfg.sweep
        ? static_cast<std::size_t>(cfg.sweep->points)
        : static_cast<std::size_t>(cfg.heatmap->first.points) * cfg.heatmap->second.points;
    std::cerr << (cfg.name.empty() ? config_path : cfg.name) << ": solving " << total
              << (cfg.heatmap ? " grid points" : " points") << " with " << threads
              << (threads == 1 ? " thread\n" : " threads\n");

    auto progress = [&](std::size_t done, std::size_t n) {
        std::cerr << "\r  " << done << "/" << n << std::flush;
        if (done == n) std::cerr << '\n';
    };

    std::vector<omsim::SweepRow> rows = cfg.sweep ? omsim::run_sweep(cfg, threads, progress)
                                                  : omsim::run_heatmap(cfg, threads, progress);

    if (out_path == "-") {
        omsim::write_csv(std::cout, cfg, rows);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write '" << out_path << "'\n";
            return 1;
        }
        omsim::write_csv(out, cfg, rows);
        std::cerr << "wrote " << rows.size() << " rows to " << out_path << '\n';
    }

    std::size_t bad = 0;
    for (const auto& row : rows)
        if (!row.converged) ++bad;
    if (bad > 0) {
        std::cerr << "warning: " << bad << " of " << rows.size() << " points unconverged\n";
        return 2;
    }
    return 0;
}

int cmd_peaks(const std::string& csv_path, const std::string& column) {
    omsim::CsvTable table;
    if (csv_path == "-") {
        table = omsim::read_csv(std::cin);
    } else {
        std::ifstream in(csv_path);
        if (!in) {
            std::cerr << "error: cannot open '" << csv_path << "'\n";
            return 1;
        }
        table = omsim::read_csv(in);
    }
    for (const omsim::Peak& p : omsim::locate_peaks(table, column)) {
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", p.axis, p.height);
        std::cout << buf;
    }
    return 0;
}

int cmd_check(const std::string& config_path) {
    omsim::ExperimentConfig cfg = omsim::ExperimentConfig::from_json_file(config_path);
    const omsim::Index dim = cfg.trunc.joint_dim();
    std::cout << "config ok: " << (cfg.name.empty() ? config_path : cfg.name) << '\n'
              << "  mode: " << (cfg.sweep ? "sweep" : "heatmap") << '\n';
    if (cfg.sweep)
        std::cout << "  axis: " << cfg.sweep->units_label() << " in [" << cfg.sweep->start
                  << ", " << cfg.sweep->stop << "], " << cfg.sweep->points << " points\n";
    else
        std::cout << "  grid: " << cfg.heatmap->first.points << " x "
                  << cfg.heatmap->second.points << " (delta x G)\n";
    std::cout << "  truncation: n_cav=" << cfg.trunc.n_cav << " n_mech=" << cfg.trunc.n_mech
              << " (joint dim " << dim << ", " << dim * dim << " unknowns)"
              << (cfg.trunc.auto_converge ? ", auto-convergence on" : "") << '\n'
              << "  solver: " << (dim * dim <= cfg.solver.direct_threshold ? "direct LU"
                                                                           : "BiCGSTAB+ILUT")
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady-state photon statistics of a driven optomechanical cavity"};
    app.require_subcommand(1);

    std::string config_path, out_override, csv_path;
    std::string column = "g2";
    int threads = 1;

    CLI::App* run = app.add_subcommand("run", "Solve a sweep/heatmap config and write CSV");
    run->add_option("config", config_path, "JSON experiment config")->required();
    run->add_option("--out", out_override, "Output path override ('-' for stdout)");
    run->add_option("--threads", threads, "Worker threads (0 = hardware)")->capture_default_str();

    CLI::App* peaks = app.add_subcommand("peaks", "List local maxima of a CSV column");
    peaks->add_option("csv", csv_path, "CSV produced by 'run' ('-' for stdin)")->required();
    peaks->add_option("--column", column, "Observable column")->capture_default_str();

    CLI::App* check = app.add_subcommand("check", "Validate a config without solving");
    check->add_option("config", config_path, "JSON experiment config")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_override, threads);
        if (peaks->parsed()) return cmd_peaks(csv_path, column);
        if (check->parsed()) return cmd_check(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
