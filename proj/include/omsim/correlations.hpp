#pragma once

#include <stdexcept>
#include <vector>

#include "omsim/fock_algebra.hpp"

namespace omsim {

/// Thrown when a normalized correlation is requested for a state with no
/// photons (mean_n = 0 makes g^(n) undefined; never silently NaN).
struct UndefinedCorrelationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Equal-time photon statistics of one state. The cavity is the first
/// tensor factor of the state's space throughout this module.
struct PhotonStats {
    double mean_n = 0.0;
    double g2 = 0.0;
    double g3 = 0.0;
    double g32 = 0.0;  // g3 / g2, computed from its own moment ratio
    double c2 = 0.0;   // <a^dag2 a^2> - <a^dag a>^2
    std::vector<double> p_n;  // photon-number distribution P(0..n_cav-1)
};

/// Tr(rho a^dag a) for the cavity factor.
double mean_photon_number(const DensityMatrix& rho);

/// Normalized correlation Tr(rho a^dag^n a^n) / Tr(rho a^dag a)^n, order >= 2.
double g_n(const DensityMatrix& rho, int order);

/// Differential correlation <a^dag2 a^2> - <a^dag a>^2.
double c2(const DensityMatrix& rho);

/// P(n) = sum_m rho_{n,m;n,m}: partial trace over everything but the cavity,
/// restricted to the photon-number diagonal.
std::vector<double> photon_distribution(const DensityMatrix& rho);

/// Weak-drive closed forms (phonon ground state assumed). These take plain
/// scalars so they can cross-check the solver independently. Any consistent
/// frequency unit works; only ratios enter.
double g2_weak_drive(double delta, double delta0, double gamma);
double g3_weak_drive(double delta, double delta0, double gamma);
double g32_weak_drive(double delta, double delta0, double gamma);

/// All photon statistics of one state. Throws UndefinedCorrelationError for
/// states with no photons.
PhotonStats stats(const DensityMatrix& rho);

}  // namespace omsim
