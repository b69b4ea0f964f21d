#pragma once

#include <optional>
#include <string>
#include <vector>

#include "omsim/fock_algebra.hpp"

namespace omsim {

namespace constants {
// CODATA values, fixed here so thermal occupations are reproducible bit-for-bit.
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double k_boltzmann = 1.380649e-23;     // J / K
inline constexpr double two_pi = 6.283185307179586476925286766559;
}  // namespace constants

/// nu in MHz -> angular frequency in rad MHz (the unit used throughout).
inline double angular_from_mhz(double nu_mhz) { return constants::two_pi * nu_mhz; }
inline double mhz_from_angular(double omega) { return omega / constants::two_pi; }

/// Physical rates and frequencies of the driven optomechanical system.
/// All frequencies are angular (rad MHz, i.e. rad/us); temperature is in K.
struct ModelParams {
    double omega_m = 0.0;       // mechanical frequency
    double g = 0.0;             // optomechanical coupling G
    double eps_c = 0.0;         // drive strength
    double gamma = 0.0;         // cavity decay
    double gamma_m = 0.0;       // mechanical decay
    double delta = 0.0;         // detuning (cavity - drive)
    double temperature = 0.0;   // mechanical bath temperature, K
    std::optional<double> omega_0;  // absolute cavity frequency, lab-frame checks only

    /// Build from ordinary frequencies nu = omega/2pi in MHz (the convention
    /// used by configuration files); temperature stays in K.
    static ModelParams from_frequency_mhz(double omega_m_mhz, double g_mhz, double eps_c_mhz,
                                          double gamma_mhz, double gamma_m_mhz, double delta_mhz,
                                          double temperature_k,
                                          std::optional<double> omega_0_mhz = std::nullopt);

    void validate() const;
};

/// Fock-space cutoffs and the convergence policy used when solving.
struct TruncationSpec {
    Index n_cav = 2;
    Index n_mech = 2;
    bool auto_converge = false;
    double rel_tol = 1e-3;      // relative change between successive levels
    Index max_dim = 100000;     // hard cap on the joint dimension

    Index joint_dim() const { return n_cav * n_mech; }
    HilbertSpec space() const { return HilbertSpec({n_cav, n_mech}); }
    void validate() const;
};

/// Single-photon anharmonicity shift G^2 / omega_m.
double delta0(const ModelParams& params);

/// Bose-Einstein occupation of the mechanical bath; exactly 0 at T = 0.
double thermal_phonon_number(const ModelParams& params);

/// Joint ladder operators with the cavity as the first tensor factor.
struct JointOps {
    Operator a;   // cavity annihilation
    Operator b;   // mechanical annihilation
};
JointOps joint_ladder_ops(const TruncationSpec& trunc);

/// omega_0 a^dag a + omega_m b^dag b + G a^dag a (b^dag + b), hbar = 1.
/// Requires omega_0 to be present.
Operator hamiltonian_lab(const ModelParams& params, const TruncationSpec& trunc);

/// Frame rotating at the drive frequency:
/// delta a^dag a + omega_m b^dag b + G a^dag a (b^dag + b) + i eps_c (a^dag - a).
Operator hamiltonian_rotating(const ModelParams& params, const TruncationSpec& trunc);

/// E_{n,m} / hbar = n omega_0 - n^2 G^2/omega_m + m omega_m.
double spectrum_analytic(int n_photons, int m_phonons, const ModelParams& params);

/// U = exp[-(G/omega_m) a^dag a (b^dag - b)]; unitary within truncation.
Operator polaron_transform(const ModelParams& params, const TruncationSpec& trunc);

/// Detuning regimes with known phonon-sideband resonance families.
enum class DetuningRegime {
    SinglePhotonResonance,  // delta = delta0
    ZeroDetuning,           // delta = 0
};

struct SidebandPeak {
    double g_over_omega_m;
    int phonons;             // m of the bridging phonon sideband
    std::string transition;  // e.g. "|0,0> -> |2,m>"
};

/// Predicted g2 resonance positions within [g_min, g_max] (units of omega_m).
/// delta = delta0: G/omega_m = sqrt(m/2), m = 1,2,...      (|0,0> -> |2,m>)
/// delta = 0:      G/omega_m = sqrt(m/4), m = 1..3         (|0,0> -> |2,m>)
///            and  G/omega_m = sqrt(m/3), m = 1..2         (|1,0> -> |2,m>)
/// Coinciding values from different families stay as separate labeled entries.
std::vector<SidebandPeak> predicted_g2_peaks(DetuningRegime condition, double g_min,
                                             double g_max);

}  // namespace omsim
