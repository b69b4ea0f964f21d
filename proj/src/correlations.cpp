#include "omsim/correlations.hpp"

#include <cmath>
#include <complex>

namespace omsim {

namespace {

Index cavity_dim(const DensityMatrix& rho) { return rho.space().factor_dims()[0]; }

Index rest_dim(const DensityMatrix& rho) {
    return rho.space().total_dim() / cavity_dim(rho);
}

// a^dag^k a^k embedded on the joint space, built by operator products so the
// moment route stays independent of the P(n) route.
Operator cavity_moment_operator(const DensityMatrix& rho, int order) {
    const Index nc = cavity_dim(rho);
    Operator a = destroy(nc);
    Operator power = identity(nc);
    for (int k = 0; k < order; ++k) power = power * a;
    Operator moment = dagger(power) * power;
    if (rho.space().num_factors() == 1) return moment;
    return tensor(moment, identity(rest_dim(rho)));
}

double real_expect(const DensityMatrix& rho, const Operator& op) {
    return expect(rho, op).real();
}

}  // namespace

double mean_photon_number(const DensityMatrix& rho) {
    return real_expect(rho, cavity_moment_operator(rho, 1));
}

double g_n(const DensityMatrix& rho, int order) {
    if (order < 2) throw std::invalid_argument("g_n: order must be >= 2");
    const double n1 = mean_photon_number(rho);
    if (n1 <= 0.0) {
        throw UndefinedCorrelationError("g_n: mean photon number is zero, correlation undefined");
    }
    const double mk = real_expect(rho, cavity_moment_operator(rho, order));
    return mk / std::pow(n1, order);
}

double c2(const DensityMatrix& rho) {
    const double n1 = mean_photon_number(rho);
    const double m2 = real_expect(rho, cavity_moment_operator(rho, 2));
    return m2 - n1 * n1;
}

std::vector<double> photon_distribution(const DensityMatrix& rho) {
    const Index nc = cavity_dim(rho);
    const Index nr = rest_dim(rho);
    const DenseMatrix& m = rho.matrix();
    std::vector<double> p(static_cast<std::size_t>(nc), 0.0);
    for (Index n = 0; n < nc; ++n) {
        double acc = 0.0;
        for (Index r = 0; r < nr; ++r) {
            acc += m(n * nr + r, n * nr + r).real();
        }
        p[static_cast<std::size_t>(n)] = acc;
    }
    return p;
}

namespace {

// |gamma + 2i(delta - k*delta0)|^2
double lorentz2(double delta, double delta0, double gamma, int k) {
    return std::norm(Complex(gamma, 2.0 * (delta - k * delta0)));
}

}  // namespace

double g2_weak_drive(double delta, double delta0, double gamma) {
    return lorentz2(delta, delta0, gamma, 1) / lorentz2(delta, delta0, gamma, 2);
}

double g3_weak_drive(double delta, double delta0, double gamma) {
    const double num = lorentz2(delta, delta0, gamma, 1);
    return num * num /
           (lorentz2(delta, delta0, gamma, 2) * lorentz2(delta, delta0, gamma, 3));
}

double g32_weak_drive(double delta, double delta0, double gamma) {
    return lorentz2(delta, delta0, gamma, 1) / lorentz2(delta, delta0, gamma, 3);
}

PhotonStats stats(const DensityMatrix& rho) {
    PhotonStats s;
    s.mean_n = mean_photon_number(rho);
    if (s.mean_n <= 0.0) {
        throw UndefinedCorrelationError("stats: mean photon number is zero");
    }
    const double m2 = real_expect(rho, cavity_moment_operator(rho, 2));
    const double m3 = real_expect(rho, cavity_moment_operator(rho, 3));
    s.g2 = m2 / (s.mean_n * s.mean_n);
    s.g3 = m3 / (s.mean_n * s.mean_n * s.mean_n);
    s.g32 = m3 / (s.mean_n * m2);  // definition g3/g2 via its own moment ratio
    s.c2 = m2 - s.mean_n * s.mean_n;
    s.p_n = photon_distribution(rho);
    return s;
}

}  // namespace omsim
