// Numbered end-to-end checks against the physics this library exists to
// reproduce. Each check prints one PASS/FAIL line (plus indented measured
// numbers) and the binary exits nonzero if anything failed.
//
// Usage: acceptance [N]   -- run check N only (1..9), or everything.
//
// Every tolerance is pinned here, next to the number it judges. Two checks
// (4 and 5) assert closed-form weak-drive agreement bands that the exact
// steady state misses at the pinned drive strength; they are kept as stated
// and report the measured miss rather than being loosened to fit.

#include <omsim/correlations.hpp>
#include <omsim/fock_algebra.hpp>
#include <omsim/lindblad_engine.hpp>
#include <omsim/optomech_model.hpp>
#include <omsim/sweep.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace omsim;

namespace {

// ---------------------------------------------------------------------------
// Operating point (ordinary frequencies, MHz): 10 MHz mechanical mode,
// G/2pi = 2.5 (so delta0/2pi = 0.625), drive 0.1 gamma, sideband-resolved
// decay gamma/2pi = 0.1, gamma_m/2pi = 0.01.
constexpr double kOmegaM = 10.0;
constexpr double kG = 2.5;
constexpr double kEps = 0.01;
constexpr double kGamma = 0.1;
constexpr double kGammaM = 0.01;
constexpr double kDelta0 = kG * kG / kOmegaM;  // 0.625 MHz

ModelParams reference_params(double delta_in_d0, double temperature) {
    ModelParams p = ModelParams::from_frequency_mhz(kOmegaM, kG, kEps, kGamma, kGammaM,
                                                    /*delta*/ 0.0, temperature);
    p.delta = delta_in_d0 * delta0(p);
    return p;
}

struct CheckList {
    bool pass = true;
    std::ostringstream lines;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        lines << "    [" << (ok ? " ok " : "FAIL") << "] " << what << "\n";
    }
    void note(const std::string& what) { lines << "    [note] " << what << "\n"; }
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PhotonStats solve_stats(const ModelParams& p, Index n_cav, Index n_mech) {
    TruncationSpec trunc{.n_cav = n_cav, .n_mech = n_mech, .auto_converge = false};
    auto result = solve_converged(p, trunc);
    if (!result.converged)
        throw std::runtime_error("steady state did not converge (residual " +
                                 num(result.residual) + ")");
    return stats(result.rho);
}

// Width of the <n>(x) resonance at half its maximum, linearly interpolated.
double fwhm(const std::vector<SweepRow>& rows) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
        x.push_back(r.axis);
        y.push_back(r.stats.mean_n);
    }
    std::size_t imax = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] > y[imax]) imax = i;
    const double half = 0.5 * y[imax];

    auto cross = [&](bool leftward) -> double {
        std::size_t i = imax;
        while (true) {
            std::size_t j = leftward ? i - 1 : i + 1;
            if ((leftward && i == 0) || (!leftward && j >= y.size()))
                return std::numeric_limits<double>::quiet_NaN();
            if (y[j] < half) {
                // interpolate between j (below) and i (above)
                const double t = (half - y[j]) / (y[i] - y[j]);
                return x[j] + t * (x[i] - x[j]);
            }
            i = j;
        }
    };
    const double left = cross(true), right = cross(false);
    return right - left;  // NaN propagates if either side never drops below
}

ExperimentConfig sweep_config(const ModelParams& params, const AxisSpec& axis,
                              std::optional<double> delta_in_d0 = std::nullopt,
                              Index n_cav = 4, Index n_mech = 12) {
    ExperimentConfig cfg;
    cfg.params = params;
    cfg.delta_in_delta0 = delta_in_d0;
    cfg.trunc = TruncationSpec{.n_cav = n_cav, .n_mech = n_mech, .auto_converge = false};
    cfg.sweep = axis;
    return cfg;
}

// ---------------------------------------------------------------------------
// 1. Coherent-state oracle: with the mechanics decoupled and the drive on
//    resonance the cavity settles into |alpha = 2i eps/gamma>, so every
//    statistic has a closed form.
void criterion1(CheckList& c) {
    const auto t0 = std::chrono::steady_clock::now();
    ModelParams p = ModelParams::from_frequency_mhz(kOmegaM, 0.0, kEps, kGamma, kGammaM,
                                                    0.0, 0.0);
    PhotonStats st = solve_stats(p, 12, 2);
    const double elapsed = seconds_since(t0);

    c.check(std::abs(st.mean_n / 0.04 - 1.0) <= 1e-6,
            "<n> = " + num(st.mean_n) + " vs 4 eps^2/gamma^2 = 0.04 (rel tol 1e-6)");
    c.check(std::abs(st.g2 - 1.0) <= 1e-4, "g2 = " + num(st.g2) + " vs 1 (tol 1e-4)");
    c.check(std::abs(st.g3 - 1.0) <= 1e-3, "g3 = " + num(st.g3) + " vs 1 (tol 1e-3)");
    c.check(elapsed < 1.0, "runtime " + num(elapsed) + " s (budget 1 s)");
}

// ---------------------------------------------------------------------------
// 2. Spectrum oracle: the eigenvalues of the undriven Hamiltonian must match
//    E(n,m) = n omega_0 - n^2 delta0 + m omega_m for the low-lying states.
void criterion2(CheckList& c) {
    const auto t0 = std::chrono::steady_clock::now();
    ModelParams p = reference_params(0.0, 1e-6);
    p.eps_c = 0.0;
    p.omega_0 = angular_from_mhz(1000.0);
    TruncationSpec trunc{.n_cav = 6, .n_mech = 60};

    auto eig = eig_hermitian(hamiltonian_lab(p, trunc));
    double worst = 0.0;
    for (int n = 0; n <= 3; ++n) {
        for (int m = 0; m <= 3; ++m) {
            const double want = spectrum_analytic(n, m, p);
            double best = std::numeric_limits<double>::infinity();
            for (Index k = 0; k < eig.eigenvalues.size(); ++k)
                best = std::min(best, std::abs(eig.eigenvalues(k) - want));
            worst = std::max(worst, best / std::max(std::abs(want), 1.0));
        }
    }
    const double elapsed = seconds_since(t0);
    c.check(worst <= 1e-6,
            "numeric vs analytic E(n<=3, m<=3): worst rel dev " + num(worst) +
                " (tol 1e-6, n_cav 6, n_mech 60)");
    c.check(elapsed < 10.0, "runtime " + num(elapsed) + " s (budget 10 s)");
}

// ---------------------------------------------------------------------------
// 3. Photon-number resonance: <n>(Delta) peaks at Delta = delta0 and the
//    peak broadens with mechanical damping and with temperature.
void criterion3(CheckList& c) {
    const AxisSpec axis{SweepAxis::Delta, 0.0, 2.0, 81, AxisUnits::Delta0};

    ModelParams base = reference_params(0.0, 1e-6);
    auto rows_base = run_sweep(sweep_config(base, axis, std::nullopt, 4, 12));

    ModelParams damped = base;
    damped.gamma_m = angular_from_mhz(0.1);
    auto rows_damped = run_sweep(sweep_config(damped, axis, std::nullopt, 4, 12));

    ModelParams warm = base;
    warm.temperature = 2e-3;
    auto rows_warm = run_sweep(sweep_config(warm, axis, std::nullopt, 3, 36));

    for (const auto* rows : {&rows_base, &rows_damped, &rows_warm})
        for (const auto& r : *rows)
            if (!r.converged) {
                c.check(false, "sweep point failed to converge");
                return;
            }

    std::size_t imax = 0;
    for (std::size_t i = 1; i < rows_base.size(); ++i)
        if (rows_base[i].stats.mean_n > rows_base[imax].stats.mean_n) imax = i;
    c.check(std::abs(rows_base[imax].axis - 1.0) < 1e-12,
            "<n> maximal at Delta/delta0 = " + num(rows_base[imax].axis) +
                " (grid point nearest 1, step 0.025)");

    const double w_base = fwhm(rows_base);
    const double w_damped = fwhm(rows_damped);
    const double w_warm = fwhm(rows_warm);
    c.check(w_damped > w_base, "FWHM " + num(w_base) + " -> " + num(w_damped) +
                                   " delta0 units when gamma_m x10 (must increase)");
    c.check(w_warm > w_base, "FWHM " + num(w_base) + " -> " + num(w_warm) +
                                 " delta0 units when T: 1 uK -> 2 mK (must increase)");
}

// ---------------------------------------------------------------------------
// 4. Blockade and tunneling at the pinned drive eps_c = 0.1 gamma: signs of
//    g2 - 1 and c2 at the one- and two-photon resonances, plus quantitative
//    agreement bands against the weak-drive Lorentzian ratios.
void criterion4(CheckList& c) {
    const auto t0 = std::chrono::steady_clock::now();
    PhotonStats at_d0 = solve_stats(reference_params(1.0, 1e-6), 5, 12);
    PhotonStats at_2d0 = solve_stats(reference_params(2.0, 1e-6), 5, 12);
    const double elapsed = seconds_since(t0);

    c.check(at_d0.g2 < 1.0, "g2(delta0) = " + num(at_d0.g2) + " < 1 (blockade)");
    c.check(at_d0.c2 < 0.0, "c2(delta0) = " + num(at_d0.c2) + " < 0");
    c.check(at_2d0.g2 > 1.0, "g2(2 delta0) = " + num(at_2d0.g2) + " > 1 (tunneling)");
    c.check(at_2d0.c2 > 0.0, "c2(2 delta0) = " + num(at_2d0.c2) + " > 0");

    const double f_d0 = g2_weak_drive(kDelta0, kDelta0, kGamma);      // 6.359e-3
    const double f_2d0 = g2_weak_drive(2 * kDelta0, kDelta0, kGamma); // 157.25
    const double dev_d0 = std::abs(at_d0.g2 / f_d0 - 1.0);
    const double dev_2d0 = std::abs(at_2d0.g2 / f_2d0 - 1.0);
    c.check(dev_d0 <= 0.50, "g2(delta0) = " + num(at_d0.g2) + " vs formula " + num(f_d0) +
                                ": dev " + num(100 * dev_d0) + "% (band 50%)");
    c.check(dev_2d0 <= 0.15, "g2(2 delta0) = " + num(at_2d0.g2) + " vs formula " +
                                 num(f_2d0) + ": dev " + num(100 * dev_2d0) + "% (band 15%)");
    if (dev_2d0 > 0.15)
        c.note("the 15% band is missed by finite-drive saturation at eps_c = 0.1 gamma; "
               "the deviation shrinks to ~3% by eps_c = 0.01 gamma (see README)");
    c.check(elapsed < 120.0, "runtime " + num(elapsed) + " s (budget 120 s)");
}

// ---------------------------------------------------------------------------
// 5. Weak-drive curve agreement over Delta/delta0 in [0.5, 3.5], 51 points:
//    exact g2, g3, g32 against the closed-form Lorentzian-ratio formulas.
void criterion5(CheckList& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const AxisSpec axis{SweepAxis::Delta, 0.5, 3.5, 51, AxisUnits::Delta0};

    struct Worst {
        double dev = 0.0, at = 0.0;
    };
    Worst wg2, wg3, wg32;          // exact vs closed form
    Worst ag2, ag3, ag32;          // exact vs hierarchy ratios from the same state

    for (double v : axis.values()) {
        PhotonStats st = solve_stats(reference_params(v, 1e-6), 5, 12);
        const double d = v * kDelta0;
        auto track = [&](Worst& w, double exact, double approx) {
            const double dev = std::abs(exact / approx - 1.0);
            if (dev > w.dev) w = {dev, v};
        };
        track(wg2, st.g2, g2_weak_drive(d, kDelta0, kGamma));
        track(wg3, st.g3, g3_weak_drive(d, kDelta0, kGamma));
        track(wg32, st.g32, g32_weak_drive(d, kDelta0, kGamma));

        // First-order hierarchy approximants computed from the same solved
        // distribution (diagnostic only; not part of the stated band).
        const double p1 = st.p_n.at(1), p2 = st.p_n.at(2), p3 = st.p_n.at(3);
        track(ag2, st.g2, 2.0 * p2 / (p1 * p1));
        track(ag3, st.g3, 6.0 * p3 / (p1 * p1 * p1));
        track(ag32, st.g32, 3.0 * p3 / (p1 * p2));
    }
    const double elapsed = seconds_since(t0);

    c.check(wg2.dev <= 0.15, "max |g2_exact/g2_formula - 1| = " + num(100 * wg2.dev) +
                                 "% at Delta/delta0 = " + num(wg2.at) + " (band 15%)");
    c.check(wg3.dev <= 0.15, "max |g3_exact/g3_formula - 1| = " + num(100 * wg3.dev) +
                                 "% at Delta/delta0 = " + num(wg3.at) + " (band 15%)");
    c.check(wg32.dev <= 0.15, "max |g32_exact/g32_formula - 1| = " + num(100 * wg32.dev) +
                                  "% at Delta/delta0 = " + num(wg32.at) + " (band 15%)");
    c.note("closed forms omit the three-photon resonance at 3 delta0, which the exact "
           "solution resolves; the deviation concentrates there");
    c.note("hierarchy ratios 2P2/P1^2, 6P3/P1^3, 3P3/(P1 P2) from the same states "
           "agree with the exact correlators to " +
           num(100 * ag2.dev) + "% / " + num(100 * ag3.dev) + "% / " +
           num(100 * ag32.dev) + "%");
    c.check(elapsed < 300.0, "runtime " + num(elapsed) + " s (budget 300 s)");
}

// ---------------------------------------------------------------------------
// 6. Three-photon asymptotics: exact g3 and g32 bracket the large-detuning
//    formulas within a factor of two at all three resonances.
void criterion6(CheckList& c) {
    PhotonStats at_d0 = solve_stats(reference_params(1.0, 1e-6), 5, 12);
    PhotonStats at_2d0 = solve_stats(reference_params(2.0, 1e-6), 5, 12);
    PhotonStats at_3d0 = solve_stats(reference_params(3.0, 1e-6), 5, 12);

    struct Row {
        const char* label;
        double exact, formula;
    };
    const Row rows[] = {
        {"g3(delta0) vs (gamma^2/8 delta0^2)^2", at_d0.g3,
         std::pow(kGamma * kGamma / (8.0 * kDelta0 * kDelta0), 2)},
        {"g32(delta0) vs (gamma/4 delta0)^2", at_d0.g32,
         std::pow(kGamma / (4.0 * kDelta0), 2)},
        {"g3(2 delta0) vs (2 delta0/gamma)^2", at_2d0.g3,
         std::pow(2.0 * kDelta0 / kGamma, 2)},
        {"g32(2 delta0) vs 1", at_2d0.g32, 1.0},
        {"g3(3 delta0) vs (8 delta0/gamma)^2", at_3d0.g3,
         std::pow(8.0 * kDelta0 / kGamma, 2)},
        {"g32(3 delta0) vs (4 delta0/gamma)^2", at_3d0.g32,
         std::pow(4.0 * kDelta0 / kGamma, 2)},
    };
    for (const Row& r : rows) {
        const double ratio = r.exact / r.formula;
        c.check(ratio >= 0.5 && ratio <= 2.0,
                std::string(r.label) + ": " + num(r.exact) + " vs " + num(r.formula) +
                    ", ratio " + num(ratio) + " (must lie in [0.5, 2])");
    }
}

// ---------------------------------------------------------------------------
// 7. Phonon-sideband peaks in g2(G). (a) At the single-photon resonance the
//    sqrt(m/2) family; (b) at zero detuning the sqrt(m/4) and sqrt(m/3)
//    families, with the sqrt(m/3) peaks growing when the bath warms up.
void criterion7(CheckList& c) {
    const auto t0 = std::chrono::steady_clock::now();

    // Convergence control below re-solves selected sweep rows one truncation
    // level finer and bounds the g2 drift. Same grid abscissa on both sides,
    // so the drift measures truncation alone, not the sharpness of the peak.
    auto row_near = [](const std::vector<SweepRow>& rows, double target) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (std::abs(rows[i].axis - target) < std::abs(rows[best].axis - target))
                best = i;
        return rows[best];
    };
    auto refined_g2 = [](ModelParams p, double g_over_wm, bool track_delta, Index n_cav,
                         Index n_mech) {
        p.g = g_over_wm * p.omega_m;
        if (track_delta) p.delta = delta0(p);
        return solve_stats(p, n_cav, n_mech).g2;
    };

    // (a) Delta pinned to delta0(G) while G/omega_m scans 0.5..1.1.
    const AxisSpec axis_res{SweepAxis::Coupling, 0.5, 1.1, 61, AxisUnits::OmegaM};
    auto rows_res = run_sweep(
        sweep_config(reference_params(0.0, 1e-6), axis_res, /*delta_in_d0*/ 1.0, 4, 20));
    auto peaks_res = locate_peaks(rows_res, "g2");
    for (double target : {std::sqrt(0.5), 1.0}) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& pk : peaks_res)
            nearest = std::min(nearest, std::abs(pk.axis - target));
        c.check(nearest <= 0.02, "resonant sweep: peak within 0.02 of G/omega_m = " +
                                     num(target) + " (off by " + num(nearest) + ")");
    }
    for (double target : {std::sqrt(0.5), 1.0}) {
        const SweepRow row = row_near(rows_res, target);
        const double fine =
            refined_g2(reference_params(0.0, 1e-6), row.axis, /*track*/ true, 5, 30);
        const double drift = std::abs(fine / row.stats.g2 - 1.0);
        c.check(drift <= 0.15, "control: (5,30) re-solve at G/omega_m = " + num(row.axis) +
                                   ": g2 " + num(fine) + " vs swept (4,20) " +
                                   num(row.stats.g2) + ", drift " + num(100 * drift) +
                                   "% (bound 15%)");
    }

    // (b) Delta = 0, both temperatures, same grid.
    const AxisSpec axis{SweepAxis::Coupling, 0.4, 0.95, 56, AxisUnits::OmegaM};
    auto solve_curve = [&](double temperature) {
        ModelParams p = reference_params(0.0, temperature);
        p.delta = 0.0;
        return run_sweep(sweep_config(p, axis, std::nullopt, 4, 32));
    };
    auto rows_warm = solve_curve(2e-3);
    auto rows_cold = solve_curve(1e-6);
    auto peaks_warm = locate_peaks(rows_warm, "g2");

    const auto predicted = predicted_g2_peaks(DetuningRegime::ZeroDetuning, 0.4, 0.95);
    int hits = 0;
    std::string found;
    for (const auto& want : predicted) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& pk : peaks_warm)
            nearest = std::min(nearest, std::abs(pk.axis - want.g_over_omega_m));
        if (nearest <= 0.02) {
            ++hits;
            found += (found.empty() ? "" : ", ") + num(want.g_over_omega_m);
        }
    }
    c.check(hits >= 4, "zero-detuning 2 mK sweep: " + std::to_string(hits) + "/5 predicted "
                           "peaks within 0.02 (found near " + found + ")");

    // Height of the curve inside a +-0.02 window around a target position.
    auto height_near = [](const std::vector<SweepRow>& rows, double target) {
        double h = 0.0;
        for (const auto& r : rows)
            if (std::abs(r.axis - target) <= 0.02) h = std::max(h, r.stats.g2);
        return h;
    };
    for (int m = 1; m <= 2; ++m) {
        const double target = std::sqrt(m / 3.0);
        const double warm = height_near(rows_warm, target);
        const double cold = height_near(rows_cold, target);
        c.check(warm > cold, "sqrt(" + std::to_string(m) + "/3) peak: g2 " + num(cold) +
                                 " at 1 uK -> " + num(warm) + " at 2 mK (must grow)");
    }

    // Control for the thermal curve: one refinement level up at the two
    // sqrt(m/3) peaks. (5,40) = 40k unknowns is the largest direct-LU solve
    // this machine affords; n_mech is the binding cutoff at 2 mK.
    for (int m = 1; m <= 2; ++m) {
        const SweepRow row = row_near(rows_warm, std::sqrt(m / 3.0));
        ModelParams p = reference_params(0.0, 2e-3);
        p.delta = 0.0;
        const double fine = refined_g2(p, row.axis, /*track*/ false, 5, 40);
        const double drift = std::abs(fine / row.stats.g2 - 1.0);
        c.check(drift <= 0.15, "control: (5,40) re-solve at G/omega_m = " + num(row.axis) +
                                   ": g2 " + num(fine) + " vs swept (4,32) " +
                                   num(row.stats.g2) + ", drift " + num(100 * drift) +
                                   "% (bound 15%)");
    }

    const double elapsed = seconds_since(t0);
    c.check(elapsed < 1800.0, "runtime " + num(elapsed) + " s (budget 1800 s)");
}

// ---------------------------------------------------------------------------
// 8. Temperature trends at the three resonances: blockade fills in, the
//    two-photon peak erodes, the three-photon peak grows.
void criterion8(CheckList& c) {
    struct TempPoint {
        double temperature;
        Index n_mech;  // enough levels for the thermal tail at that T
    };
    const TempPoint temps[] = {{1e-6, 12}, {2e-4, 16}, {2e-3, 40}};

    double g2_d0[3], g2_2d0[3], g2_3d0[3];
    for (int i = 0; i < 3; ++i) {
        g2_d0[i] = solve_stats(reference_params(1.0, temps[i].temperature), 5,
                               temps[i].n_mech).g2;
        g2_2d0[i] = solve_stats(reference_params(2.0, temps[i].temperature), 5,
                                temps[i].n_mech).g2;
        g2_3d0[i] = solve_stats(reference_params(3.0, temps[i].temperature), 5,
                                temps[i].n_mech).g2;
    }

    auto triple = [&](const double* v) {
        return num(v[0]) + " -> " + num(v[1]) + " -> " + num(v[2]) +
               " over T = 1 uK, 0.2 mK, 2 mK";
    };
    c.check(g2_d0[0] < g2_d0[1] && g2_d0[1] < g2_d0[2],
            "g2(delta0) monotone increasing: " + triple(g2_d0));
    c.check(g2_2d0[0] > g2_2d0[1] && g2_2d0[1] > g2_2d0[2],
            "g2(2 delta0) monotone decreasing: " + triple(g2_2d0));
    c.check(g2_3d0[0] < g2_3d0[1] && g2_3d0[1] < g2_3d0[2],
            "g2(3 delta0) monotone increasing: " + triple(g2_3d0));
}

// ---------------------------------------------------------------------------
// 9. Property roll-up: algebra identities, generator contracts, integrator
//    vs solver, statistics identities, and byte-stable CSV output.
void criterion9(CheckList& c) {
    // Truncated commutator: identity except the corner element 1 - d, with
    // only sqrt(n)^2 rounding (a couple of ulp) allowed per entry.
    {
        bool ok = true;
        for (Index d : {2, 3, 8, 16}) {
            DenseMatrix comm = (destroy(d) * create(d) - create(d) * destroy(d)).to_dense();
            for (Index i = 0; i < d && ok; ++i)
                for (Index j = 0; j < d && ok; ++j) {
                    const Complex want = (i != j) ? Complex(0.0)
                                        : (i == d - 1) ? Complex(1.0 - double(d))
                                                       : Complex(1.0);
                    ok = std::abs(comm(i, j) - want) < 1e-13;
                }
        }
        c.check(ok, "truncated [a, a^dag] identity-with-corner for d = 2, 3, 8, 16");
    }

    // Liouvillian preserves trace and hermiticity on 100 random states.
    {
        ModelParams p = reference_params(1.0, 2e-3);
        TruncationSpec trunc{.n_cav = 3, .n_mech = 4};
        Superoperator l = model_liouvillian(p, trunc);
        std::mt19937 gen(0xacce57u);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst_trace = 0.0, worst_herm = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            DenseMatrix a(12, 12);
            for (Index jj = 0; jj < 12; ++jj)
                for (Index ii = 0; ii < 12; ++ii) a(ii, jj) = Complex(u(gen), u(gen));
            DenseMatrix rho = a * a.adjoint();
            rho /= rho.trace();
            DenseMatrix deriv = unvec(l.apply(vec(rho)), 12);
            worst_trace = std::max(worst_trace, std::abs(deriv.trace()));
            worst_herm =
                std::max(worst_herm, (deriv - deriv.adjoint()).cwiseAbs().maxCoeff());
        }
        c.check(worst_trace <= 1e-10,
                "trace preservation on 100 random states: worst |d tr/dt| = " +
                    num(worst_trace) + " (tol 1e-10)");
        c.check(worst_herm <= 1e-10, "hermiticity preservation: worst defect " +
                                         num(worst_herm) + " (tol 1e-10)");
    }

    // Integrating to late times lands on the algebraic steady state.
    {
        ModelParams p = ModelParams::from_frequency_mhz(kOmegaM, 0.0, kEps, kGamma,
                                                        kGammaM, 0.0, 0.0);
        TruncationSpec trunc{.n_cav = 6, .n_mech = 2};
        Superoperator l = model_liouvillian(p, trunc);
        auto fixed_point = steadystate(l);
        DensityMatrix rho0 = DensityMatrix::fock_state(trunc.space(), {0, 0});
        DensityMatrix late = evolve(rho0, l, 100.0);  // ~63 cavity lifetimes
        Operator diff(late.space(), DenseMatrix(late.matrix() - fixed_point.rho.matrix()));
        const double dist = 0.5 * eig_hermitian(diff).eigenvalues.cwiseAbs().sum();
        c.check(dist <= 1e-6,
                "evolve vs steadystate: trace distance " + num(dist) + " (tol 1e-6)");
    }

    // PhotonStats internal identities on a strongly non-Gaussian state.
    {
        PhotonStats st = solve_stats(reference_params(2.0, 1e-6), 5, 8);
        const double c2_defect =
            std::abs(st.c2 - (st.g2 - 1.0) * st.mean_n * st.mean_n) /
            std::max(std::abs(st.c2), 1e-300);
        const double g32_defect = std::abs(st.g32 * st.g2 / st.g3 - 1.0);
        c.check(c2_defect <= 1e-10,
                "c2 = (g2 - 1) <n>^2: rel defect " + num(c2_defect) + " (tol 1e-10)");
        c.check(g32_defect <= 1e-10,
                "g32 g2 = g3: rel defect " + num(g32_defect) + " (tol 1e-10)");

        PhotonStats blockade = solve_stats(reference_params(1.0, 1e-6), 5, 8);
        bool steep = true;
        for (int n = 0; n <= 2; ++n)
            steep = steep && blockade.p_n.at(n + 1) < 0.1 * blockade.p_n.at(n);
        c.check(steep, "weak-drive hierarchy: P(n+1) < 0.1 P(n) for n <= 2");
    }

    // Identical configs give identical bytes, independent of threading.
    {
        ModelParams p = reference_params(1.0, 1e-6);
        const AxisSpec axis{SweepAxis::Coupling, 1.0, 2.5, 3, AxisUnits::MHz};
        ExperimentConfig cfg = sweep_config(p, axis, std::nullopt, 3, 6);
        const std::string once = csv_string(cfg, run_sweep(cfg));
        const std::string twice = csv_string(cfg, run_sweep(cfg));
        const std::string threaded = csv_string(cfg, run_sweep(cfg, 2));
        c.check(once == twice, "CSV byte-identical across reruns (" +
                                   std::to_string(once.size()) + " bytes)");
        c.check(once == threaded, "CSV byte-identical with 2 worker threads");
    }
}

struct Entry {
    int id;
    const char* title;
    void (*fn)(CheckList&);
};

const Entry kEntries[] = {
    {1, "coherent-state oracle", criterion1},
    {2, "spectrum oracle", criterion2},
    {3, "photon-number resonance and its broadening", criterion3},
    {4, "blockade/tunneling signs and bands", criterion4},
    {5, "weak-drive closed-form agreement", criterion5},
    {6, "three-photon asymptotics", criterion6},
    {7, "phonon-sideband peak families", criterion7},
    {8, "temperature trends", criterion8},
    {9, "property roll-up", criterion9},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 9) {
            std::fprintf(stderr, "usage: %s [1-9]\n", argv[0]);
            return 2;
        }
    }

    bool all_pass = true;
    for (const Entry& entry : kEntries) {
        if (only != 0 && entry.id != only) continue;
        CheckList list;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            entry.fn(list);
        } catch (const std::exception& e) {
            list.check(false, std::string("unhandled exception: ") + e.what());
        }
        std::printf("criterion %d: %s - %s (%.1f s)\n%s", entry.id,
                    list.pass ? "PASS" : "FAIL", entry.title, seconds_since(t0),
                    list.lines.str().c_str());
        std::fflush(stdout);
        all_pass = all_pass && list.pass;
    }
    return all_pass ? 0 : 1;
}
