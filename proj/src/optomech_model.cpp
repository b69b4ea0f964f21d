#include "omsim/optomech_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace omsim {

ModelParams ModelParams::from_frequency_mhz(double omega_m_mhz, double g_mhz, double eps_c_mhz,
                                            double gamma_mhz, double gamma_m_mhz, double delta_mhz,
                                            double temperature_k,
                                            std::optional<double> omega_0_mhz) {
    ModelParams p;
    p.omega_m = angular_from_mhz(omega_m_mhz);
    p.g = angular_from_mhz(g_mhz);
    p.eps_c = angular_from_mhz(eps_c_mhz);
    p.gamma = angular_from_mhz(gamma_mhz);
    p.gamma_m = angular_from_mhz(gamma_m_mhz);
    p.delta = angular_from_mhz(delta_mhz);
    p.temperature = temperature_k;
    if (omega_0_mhz) p.omega_0 = angular_from_mhz(*omega_0_mhz);
    p.validate();
    return p;
}

void ModelParams::validate() const {
    if (!(omega_m > 0.0)) throw std::invalid_argument("ModelParams: omega_m must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("ModelParams: gamma must be > 0");
    if (gamma_m < 0.0) throw std::invalid_argument("ModelParams: gamma_m must be >= 0");
    if (eps_c < 0.0) throw std::invalid_argument("ModelParams: eps_c must be >= 0");
    if (temperature < 0.0) throw std::invalid_argument("ModelParams: temperature must be >= 0");
}

void TruncationSpec::validate() const {
    if (n_cav < 2) throw std::invalid_argument("TruncationSpec: n_cav must be >= 2");
    if (n_mech < 2) throw std::invalid_argument("TruncationSpec: n_mech must be >= 2");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("TruncationSpec: rel_tol must be > 0");
}

double delta0(const ModelParams& params) {
    if (!(params.omega_m > 0.0)) throw std::invalid_argument("delta0: omega_m must be > 0");
    return params.g * params.g / params.omega_m;
}

double thermal_phonon_number(const ModelParams& params) {
    if (params.temperature < 0.0) {
        throw std::invalid_argument("thermal_phonon_number: temperature must be >= 0");
    }
    if (params.temperature == 0.0) return 0.0;
    // omega_m is rad/us; convert to rad/s for hbar*omega/kB*T
    const double x = constants::hbar * (params.omega_m * 1e6) /
                     (constants::k_boltzmann * params.temperature);
    return 1.0 / std::expm1(x);
}

JointOps joint_ladder_ops(const TruncationSpec& trunc) {
    trunc.validate();
    return JointOps{
        tensor(destroy(trunc.n_cav), identity(trunc.n_mech)),
        tensor(identity(trunc.n_cav), destroy(trunc.n_mech)),
    };
}

namespace {

// omega_cav a^dag a + omega_m b^dag b + G a^dag a (b^dag + b) [+ i eps (a^dag - a)]
Operator build_hamiltonian(double omega_cav, double omega_m, double g, double eps,
                           const TruncationSpec& trunc) {
    const Operator num_cav = tensor(number(trunc.n_cav), identity(trunc.n_mech));
    const Operator num_mech = tensor(identity(trunc.n_cav), number(trunc.n_mech));
    const Operator b = tensor(identity(trunc.n_cav), destroy(trunc.n_mech));
    const Operator x_mech = dagger(b) + b;

    Operator h = Complex(omega_cav, 0.0) * num_cav + Complex(omega_m, 0.0) * num_mech +
                 Complex(g, 0.0) * (num_cav * x_mech);
    if (eps != 0.0) {
        const Operator a = tensor(destroy(trunc.n_cav), identity(trunc.n_mech));
        h += Complex(0.0, eps) * (dagger(a) - a);
    }
    return h;
}

}  // namespace

Operator hamiltonian_lab(const ModelParams& params, const TruncationSpec& trunc) {
    params.validate();
    if (!params.omega_0) {
        throw std::invalid_argument("hamiltonian_lab: omega_0 is required");
    }
    return build_hamiltonian(*params.omega_0, params.omega_m, params.g, 0.0, trunc);
}

Operator hamiltonian_rotating(const ModelParams& params, const TruncationSpec& trunc) {
    params.validate();
    return build_hamiltonian(params.delta, params.omega_m, params.g, params.eps_c, trunc);
}

double spectrum_analytic(int n_photons, int m_phonons, const ModelParams& params) {
    if (!params.omega_0) {
        throw std::invalid_argument("spectrum_analytic: omega_0 is required");
    }
    const double n = static_cast<double>(n_photons);
    const double m = static_cast<double>(m_phonons);
    return n * (*params.omega_0) - n * n * delta0(params) + m * params.omega_m;
}

Operator polaron_transform(const ModelParams& params, const TruncationSpec& trunc) {
    params.validate();
    const double beta = params.g / params.omega_m;
    const Operator num_cav = tensor(number(trunc.n_cav), identity(trunc.n_mech));
    const Operator b = tensor(identity(trunc.n_cav), destroy(trunc.n_mech));
    const Operator arg = Complex(-beta, 0.0) * (num_cav * (dagger(b) - b));
    return expm(arg);
}

std::vector<SidebandPeak> predicted_g2_peaks(DetuningRegime condition, double g_min,
                                             double g_max) {
    if (!(g_min <= g_max)) {
        throw std::invalid_argument("predicted_g2_peaks: g_min must be <= g_max");
    }
    std::vector<SidebandPeak> peaks;
    auto add = [&](double value, int m, const char* transition) {
        if (value >= g_min && value <= g_max) {
            peaks.push_back(SidebandPeak{value, m, transition});
        }
    };
    switch (condition) {
        case DetuningRegime::SinglePhotonResonance:
            for (int m = 1; std::sqrt(0.5 * m) <= g_max; ++m) {
                add(std::sqrt(0.5 * m), m, "|0,0> -> |2,m>");
            }
            break;
        case DetuningRegime::ZeroDetuning:
            for (int m = 1; m <= 3; ++m) add(std::sqrt(0.25 * m), m, "|0,0> -> |2,m>");
            for (int m = 1; m <= 2; ++m) add(std::sqrt(m / 3.0), m, "|1,0> -> |2,m>");
            break;
        default:
            throw std::invalid_argument("predicted_g2_peaks: unknown detuning regime");
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const SidebandPeak& x, const SidebandPeak& y) {
        return x.g_over_omega_m < y.g_over_omega_m;
    });
    return peaks;
}

}  // namespace omsim
