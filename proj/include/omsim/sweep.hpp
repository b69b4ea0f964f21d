#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omsim/correlations.hpp"
#include "omsim/lindblad_engine.hpp"

namespace omsim {

enum class SweepAxis { Delta, Coupling, Temperature };

/// Units the axis values are expressed in. The detuning axis is always in
/// units of delta0 (recomputed per point when the coupling changes); the
/// coupling axis is in units of omega_m or plain MHz; temperature is in K.
enum class AxisUnits { Delta0, OmegaM, MHz, Kelvin };

struct AxisSpec {
    SweepAxis axis = SweepAxis::Delta;
    double start = 0.0;
    double stop = 0.0;
    int points = 0;
    AxisUnits units = AxisUnits::Delta0;

    std::vector<double> values() const;  // evenly spaced, strictly increasing
    std::string units_label() const;
    void validate(bool allow_single_point = false) const;
};

struct ExperimentConfig {
    std::string name;
    ModelParams params;
    /// When set, the detuning tracks k * delta0(G) as G changes along a sweep.
    std::optional<double> delta_in_delta0;
    TruncationSpec trunc;
    SolverOptions solver;
    std::optional<AxisSpec> sweep;                            // one of sweep/heatmap
    std::optional<std::pair<AxisSpec, AxisSpec>> heatmap;     // (delta axis, g axis), row-major
    std::vector<std::string> observables;                     // subset; filled columns
    std::string output_path = "-";                            // "-" = stdout
    std::string output_format = "csv";

    static ExperimentConfig from_json_file(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);
    void validate() const;
    bool wants(const std::string& observable) const;
};

/// One solved grid point. Observable fields are only meaningful when
/// stats_valid is set; converged reflects solver residual and truncation
/// convergence at that point.
struct SweepRow {
    double axis = 0.0;
    std::optional<double> axis2;  // heatmap only
    std::string value_units;
    PhotonStats stats;
    bool stats_valid = false;
    bool correlations_defined = false;  // g2/g3/g32 finite (mean_n > 0)
    double residual = 0.0;
    Index n_cav = 0;
    Index n_mech = 0;
    bool converged = false;
};

/// Called after each solved point with (points done, points total); must be
/// thread-safe when threads > 1.
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, int threads = 1,
                                const ProgressFn& progress = {});
std::vector<SweepRow> run_heatmap(const ExperimentConfig& config, int threads = 1,
                                  const ProgressFn& progress = {});

/// CSV with the fixed header
/// axis,value_units,mean_n,g2,g3,g32,c2,p0,p1,p2,p3,residual,n_cav,n_mech,converged
/// (heatmaps insert an axis2 column after axis). Floats carry 12 significant
/// digits; rerunning an identical config yields byte-identical output.
void write_csv(std::ostream& out, const ExperimentConfig& config,
               const std::vector<SweepRow>& rows);
std::string csv_string(const ExperimentConfig& config, const std::vector<SweepRow>& rows);

struct Peak {
    double axis = 0.0;
    double height = 0.0;
};

/// Strict interior local maxima; exact ties resolve to the smaller axis value.
/// Input pairs are sorted by axis before scanning.
std::vector<Peak> locate_peaks(std::span<const double> axis, std::span<const double> height);
std::vector<Peak> locate_peaks(const std::vector<SweepRow>& rows, const std::string& column);

/// Minimal reader for the CSV this module writes (used by the peaks command).
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  // non-numeric cells parse as NaN

    std::size_t column_index(const std::string& name) const;
};
CsvTable read_csv(std::istream& in);
std::vector<Peak> locate_peaks(const CsvTable& table, const std::string& column);

}  // namespace omsim
