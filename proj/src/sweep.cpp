#include "omsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace omsim {

namespace {

using nlohmann::json;

SweepAxis parse_axis(const std::string& s) {
    if (s == "delta") return SweepAxis::Delta;
    if (s == "g" || s == "coupling") return SweepAxis::Coupling;
    if (s == "temperature") return SweepAxis::Temperature;
    throw std::invalid_argument("unknown sweep axis '" + s + "' (expected delta, g, or temperature)");
}

AxisUnits parse_units(const std::string& s) {
    if (s == "delta0") return AxisUnits::Delta0;
    if (s == "omega_m") return AxisUnits::OmegaM;
    if (s == "mhz" || s == "MHz") return AxisUnits::MHz;
    if (s == "kelvin" || s == "K") return AxisUnits::Kelvin;
    throw std::invalid_argument("unknown axis units '" + s + "'");
}

AxisUnits default_units(SweepAxis a) {
    switch (a) {
        case SweepAxis::Delta: return AxisUnits::Delta0;
        case SweepAxis::Coupling: return AxisUnits::OmegaM;
        case SweepAxis::Temperature: return AxisUnits::Kelvin;
    }
    return AxisUnits::Delta0;
}

void check_axis_units(const AxisSpec& spec) {
    switch (spec.axis) {
        case SweepAxis::Delta:
            if (spec.units != AxisUnits::Delta0)
                throw std::invalid_argument("delta axis values must be in delta0 units");
            break;
        case SweepAxis::Coupling:
            if (spec.units != AxisUnits::OmegaM && spec.units != AxisUnits::MHz)
                throw std::invalid_argument("coupling axis values must be in omega_m or MHz units");
            break;
        case SweepAxis::Temperature:
            if (spec.units != AxisUnits::Kelvin)
                throw std::invalid_argument("temperature axis values must be in kelvin");
            break;
    }
}

const std::vector<std::string> kObservables = {"mean_n", "g2", "g3", "g32", "c2", "p_n"};

}  // namespace

std::vector<double> AxisSpec::values() const {
    std::vector<double> v(static_cast<std::size_t>(points));
    if (points == 1) {
        v[0] = start;
        return v;
    }
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = start + step * i;
    v.back() = stop;  // exact endpoint regardless of rounding
    return v;
}

std::string AxisSpec::units_label() const {
    switch (axis) {
        case SweepAxis::Delta: return "delta/delta0";
        case SweepAxis::Coupling:
            return units == AxisUnits::OmegaM ? "G/omega_m" : "G_MHz";
        case SweepAxis::Temperature: return "T_K";
    }
    return "?";
}

void AxisSpec::validate(bool allow_single_point) const {
    check_axis_units(*this);
    const int min_points = allow_single_point ? 1 : 2;
    if (points < min_points)
        throw std::invalid_argument("axis needs at least " + std::to_string(min_points) + " points");
    if (points == 1) {
        if (start != stop)
            throw std::invalid_argument("single-point axis requires start == stop");
    } else if (!(start < stop)) {
        throw std::invalid_argument("axis requires start < stop");
    }
    if (!std::isfinite(start) || !std::isfinite(stop))
        throw std::invalid_argument("axis bounds must be finite");
    if (axis == SweepAxis::Coupling && start < 0.0)
        throw std::invalid_argument("coupling axis must be non-negative");
    if (axis == SweepAxis::Temperature && start < 0.0)
        throw std::invalid_argument("temperature axis must be non-negative");
}

namespace {

AxisSpec axis_from_json(const json& j, std::optional<SweepAxis> fixed_axis = std::nullopt) {
    AxisSpec spec;
    if (fixed_axis) {
        spec.axis = *fixed_axis;
    } else {
        if (!j.contains("axis")) throw std::invalid_argument("sweep block needs an 'axis' name");
        spec.axis = parse_axis(j.at("axis").get<std::string>());
    }
    spec.start = j.at("start").get<double>();
    spec.stop = j.at("stop").get<double>();
    spec.points = j.at("points").get<int>();
    spec.units = j.contains("units") ? parse_units(j.at("units").get<std::string>())
                                     : default_units(spec.axis);
    return spec;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& item : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return item.key() == k;
            }) == allowed.end())
            throw std::invalid_argument("unknown key '" + item.key() + "' in " + where);
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    reject_unknown_keys(j, {"name", "params", "truncation", "solver", "sweep", "heatmap",
                            "observables", "output"},
                        "config");

    ExperimentConfig cfg;
    cfg.name = j.value("name", std::string{});

    const json& p = j.at("params");
    reject_unknown_keys(p, {"omega_m", "g", "eps_c", "gamma", "gamma_m", "temperature",
                            "delta", "delta_in_delta0", "omega_0"},
                        "params");
    std::optional<double> omega0;
    if (p.contains("omega_0")) omega0 = p.at("omega_0").get<double>();
    cfg.params = ModelParams::from_frequency_mhz(
        p.at("omega_m").get<double>(), p.at("g").get<double>(), p.at("eps_c").get<double>(),
        p.at("gamma").get<double>(), p.at("gamma_m").get<double>(),
        p.value("delta", 0.0), p.at("temperature").get<double>(), omega0);
    if (p.contains("delta_in_delta0")) {
        if (p.contains("delta"))
            throw std::invalid_argument("params: give either delta or delta_in_delta0, not both");
        cfg.delta_in_delta0 = p.at("delta_in_delta0").get<double>();
        cfg.params.delta = *cfg.delta_in_delta0 * delta0(cfg.params);
    }

    if (j.contains("truncation")) {
        const json& t = j.at("truncation");
        reject_unknown_keys(t, {"n_cav", "n_mech", "auto_converge", "rel_tol", "max_dim"},
                            "truncation");
        cfg.trunc.n_cav = t.at("n_cav").get<Index>();
        cfg.trunc.n_mech = t.at("n_mech").get<Index>();
        cfg.trunc.auto_converge = t.value("auto_converge", true);
        cfg.trunc.rel_tol = t.value("rel_tol", cfg.trunc.rel_tol);
        cfg.trunc.max_dim = t.value("max_dim", cfg.trunc.max_dim);
    }

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        reject_unknown_keys(s, {"residual_tol", "direct_threshold", "krylov_tol",
                                "krylov_max_iterations"},
                            "solver");
        cfg.solver.residual_tol = s.value("residual_tol", cfg.solver.residual_tol);
        cfg.solver.direct_threshold = s.value("direct_threshold", cfg.solver.direct_threshold);
        cfg.solver.krylov_tol = s.value("krylov_tol", cfg.solver.krylov_tol);
        cfg.solver.krylov_max_iterations =
            s.value("krylov_max_iterations", cfg.solver.krylov_max_iterations);
    }

    if (j.contains("sweep")) cfg.sweep = axis_from_json(j.at("sweep"));
    if (j.contains("heatmap")) {
        const json& h = j.at("heatmap");
        reject_unknown_keys(h, {"delta", "g"}, "heatmap");
        cfg.heatmap = std::make_pair(axis_from_json(h.at("delta"), SweepAxis::Delta),
                                     axis_from_json(h.at("g"), SweepAxis::Coupling));
    }

    if (j.contains("observables")) {
        cfg.observables = j.at("observables").get<std::vector<std::string>>();
        for (const auto& name : cfg.observables)
            if (std::find(kObservables.begin(), kObservables.end(), name) == kObservables.end())
                throw std::invalid_argument("unknown observable '" + name + "'");
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        reject_unknown_keys(o, {"path", "format"}, "output");
        cfg.output_path = o.value("path", cfg.output_path);
        cfg.output_format = o.value("format", cfg.output_format);
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_json_text(buf.str());
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

void ExperimentConfig::validate() const {
    params.validate();
    trunc.validate();
    if (output_format != "csv")
        throw std::invalid_argument("unsupported output format '" + output_format + "'");
    if (sweep && heatmap)
        throw std::invalid_argument("config defines both sweep and heatmap; pick one");
    if (!sweep && !heatmap)
        throw std::invalid_argument("config needs a sweep or heatmap block");
    if (sweep) sweep->validate(false);
    if (heatmap) {
        heatmap->first.validate(true);
        heatmap->second.validate(true);
        if (heatmap->first.points * heatmap->second.points < 2)
            throw std::invalid_argument("heatmap grid needs at least 2 points");
    }
    if (delta_in_delta0 && sweep && sweep->axis == SweepAxis::Delta)
        throw std::invalid_argument("delta_in_delta0 conflicts with a delta sweep axis");
    if (delta_in_delta0 && heatmap)
        throw std::invalid_argument("delta_in_delta0 conflicts with a heatmap delta axis");
}

bool ExperimentConfig::wants(const std::string& observable) const {
    if (observables.empty()) return true;
    return std::find(observables.begin(), observables.end(), observable) != observables.end();
}

namespace {

// Apply one axis value to a parameter set. Coupling and temperature are
// applied before detuning so that delta0-relative detunings see the updated G.
void apply_axis(ModelParams& p, const AxisSpec& spec, double value) {
    switch (spec.axis) {
        case SweepAxis::Coupling:
            p.g = (spec.units == AxisUnits::OmegaM) ? value * p.omega_m
                                                    : angular_from_mhz(value);
            break;
        case SweepAxis::Temperature:
            p.temperature = value;
            break;
        case SweepAxis::Delta:
            p.delta = value * delta0(p);
            break;
    }
}

struct PointTask {
    double axis = 0.0;
    std::optional<double> axis2;
    ModelParams params;
};

SweepRow solve_point(const ExperimentConfig& cfg, const PointTask& task,
                     const std::string& units_label) {
    SweepRow row;
    row.axis = task.axis;
    row.axis2 = task.axis2;
    row.value_units = units_label;
    try {
        SteadyStateResult result = solve_converged(task.params, cfg.trunc, cfg.solver);
        row.residual = result.residual;
        row.n_cav = result.truncation_used.n_cav;
        row.n_mech = result.truncation_used.n_mech;
        row.converged = result.converged;
        try {
            row.stats = stats(result.rho);
            row.correlations_defined = true;
        } catch (const UndefinedCorrelationError&) {
            // Dark cavity: the photon number and distribution are still
            // perfectly well defined, only the normalized correlators are not.
            row.stats.mean_n = mean_photon_number(result.rho);
            row.stats.c2 = c2(result.rho);
            row.stats.p_n = photon_distribution(result.rho);
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.stats.g2 = nan;
            row.stats.g3 = nan;
            row.stats.g32 = nan;
            row.correlations_defined = false;
        }
        row.stats_valid = true;
    } catch (const std::exception&) {
        row.converged = false;
        row.stats_valid = false;
    }
    return row;
}

std::vector<SweepRow> run_points(const ExperimentConfig& cfg, const std::vector<PointTask>& tasks,
                                 const std::string& units_label, int threads,
                                 const ProgressFn& progress) {
    std::vector<SweepRow> rows(tasks.size());
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    threads = std::min<int>(threads, static_cast<int>(tasks.size()));

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            rows[i] = solve_point(cfg, tasks[i], units_label);
            const std::size_t finished = done.fetch_add(1) + 1;
            if (progress) progress(finished, tasks.size());
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rows;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, int threads,
                                const ProgressFn& progress) {
    config.validate();
    if (!config.sweep) throw std::invalid_argument("run_sweep needs a sweep axis");
    const AxisSpec& axis = *config.sweep;

    std::vector<PointTask> tasks;
    for (double v : axis.values()) {
        PointTask task;
        task.axis = v;
        task.params = config.params;
        apply_axis(task.params, axis, v);
        if (axis.axis != SweepAxis::Delta && config.delta_in_delta0)
            task.params.delta = *config.delta_in_delta0 * delta0(task.params);
        tasks.push_back(std::move(task));
    }
    return run_points(config, tasks, axis.units_label(), threads, progress);
}

std::vector<SweepRow> run_heatmap(const ExperimentConfig& config, int threads,
                                  const ProgressFn& progress) {
    config.validate();
    if (!config.heatmap) throw std::invalid_argument("run_heatmap needs a heatmap block");
    const AxisSpec& delta_axis = config.heatmap->first;
    const AxisSpec& g_axis = config.heatmap->second;

    std::vector<PointTask> tasks;
    for (double dv : delta_axis.values()) {
        for (double gv : g_axis.values()) {
            PointTask task;
            task.axis = dv;
            task.axis2 = gv;
            task.params = config.params;
            apply_axis(task.params, g_axis, gv);     // coupling first: delta0 depends on G
            apply_axis(task.params, delta_axis, dv);
            tasks.push_back(std::move(task));
        }
    }
    const std::string units = delta_axis.units_label() + ";" + g_axis.units_label();
    return run_points(config, tasks, units, threads, progress);
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void write_csv(std::ostream& out, const ExperimentConfig& config,
               const std::vector<SweepRow>& rows) {
    const bool heat = !rows.empty() && rows.front().axis2.has_value();
    out << "axis," << (heat ? "axis2," : "")
        << "value_units,mean_n,g2,g3,g32,c2,p0,p1,p2,p3,residual,n_cav,n_mech,converged\n";

    // Missing means missing: unrequested observables, unsolved rows, and
    // values undefined at this truncation (p3 when n_cav = 3, correlations of
    // a photonless state) all render as the empty cell, never "nan" text.
    auto cell = [&](const SweepRow& row, const std::string& name, double v) -> std::string {
        if (!config.wants(name) || !row.stats_valid || !std::isfinite(v)) return "";
        return fmt_double(v);
    };

    for (const SweepRow& row : rows) {
        out << fmt_double(row.axis) << ',';
        if (heat) out << fmt_double(row.axis2.value_or(std::numeric_limits<double>::quiet_NaN())) << ',';
        out << row.value_units << ','
            << cell(row, "mean_n", row.stats.mean_n) << ','
            << cell(row, "g2", row.stats.g2) << ','
            << cell(row, "g3", row.stats.g3) << ','
            << cell(row, "g32", row.stats.g32) << ','
            << cell(row, "c2", row.stats.c2) << ',';
        for (int n = 0; n < 4; ++n) {
            const double p = (row.stats_valid && n < static_cast<int>(row.stats.p_n.size()))
                                 ? row.stats.p_n[static_cast<std::size_t>(n)]
                                 : std::numeric_limits<double>::quiet_NaN();
            out << cell(row, "p_n", p) << ',';
        }
        out << (row.stats_valid ? fmt_double(row.residual) : "") << ','
            << row.n_cav << ',' << row.n_mech << ','
            << (row.converged ? 1 : 0) << '\n';
    }
}

std::string csv_string(const ExperimentConfig& config, const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    write_csv(out, config, rows);
    return out.str();
}

std::vector<Peak> locate_peaks(std::span<const double> axis, std::span<const double> height) {
    if (axis.size() != height.size())
        throw std::invalid_argument("locate_peaks: axis/height length mismatch");
    std::vector<std::size_t> order(axis.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return axis[a] < axis[b]; });

    std::vector<double> x(axis.size()), y(axis.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        x[i] = axis[order[i]];
        y[i] = height[order[i]];
    }

    std::vector<Peak> peaks;
    const std::size_t n = y.size();
    std::size_t i = 1;
    while (n >= 3 && i + 1 < n) {
        if (!(y[i] > y[i - 1])) {  // NaN comparisons land here and are skipped
            ++i;
            continue;
        }
        // Extend across an exact plateau; the tie resolves to its left edge.
        std::size_t j = i;
        while (j + 1 < n && y[j + 1] == y[i]) ++j;
        if (j + 1 < n && y[i] > y[j + 1]) {
            peaks.push_back({x[i], y[i]});
            i = j + 1;
        } else {
            i = j + 1;
        }
    }
    return peaks;
}

std::vector<Peak> locate_peaks(const std::vector<SweepRow>& rows, const std::string& column) {
    std::vector<double> axis(rows.size()), height(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        axis[i] = rows[i].axis;
        const PhotonStats& s = rows[i].stats;
        double v = std::numeric_limits<double>::quiet_NaN();
        if (rows[i].stats_valid) {
            if (column == "mean_n") v = s.mean_n;
            else if (column == "g2") v = s.g2;
            else if (column == "g3") v = s.g3;
            else if (column == "g32") v = s.g32;
            else if (column == "c2") v = s.c2;
            else throw std::invalid_argument("unknown peak column '" + column + "'");
        }
        height[i] = v;
    }
    return locate_peaks(axis, height);
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV input");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        out.push_back(cur);
        return out;
    };
    table.columns = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != table.columns.size())
            throw std::runtime_error("CSV row has " + std::to_string(cells.size()) +
                                     " cells, header has " + std::to_string(table.columns.size()));
        std::vector<double> row(cells.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cells[i], &used);
                if (used == cells[i].size()) row[i] = v;
            } catch (const std::exception&) {
                // leave as NaN: units and flag columns are not numeric
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::size_t CsvTable::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::runtime_error("CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<Peak> locate_peaks(const CsvTable& table, const std::string& column) {
    const std::size_t ci = table.column_index(column);
    const std::size_t ai = table.column_index("axis");
    std::vector<double> axis(table.rows.size()), height(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        axis[i] = table.rows[i][ai];
        height[i] = table.rows[i][ci];
    }
    return locate_peaks(axis, height);
}

}  // namespace omsim
