#include "omsim/lindblad_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>
#include <unsupported/Eigen/KroneckerProduct>

#include "omsim/correlations.hpp"

namespace omsim {

Superoperator::Superoperator(HilbertSpec space, SparseMatrix elements)
    : space_(std::move(space)), matrix_(std::move(elements)) {
    const Index d = space_.total_dim();
    if (matrix_.rows() != d * d || matrix_.cols() != d * d) {
        throw std::invalid_argument("Superoperator: matrix must be d^2 x d^2");
    }
    matrix_.makeCompressed();
}

double Superoperator::trace_preservation_defect() const {
    const Index d = dim();
    Vector col_sums = Vector::Zero(super_dim());
    for (Index j = 0; j < matrix_.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(matrix_, j); it; ++it) {
            const Index r = it.row();
            if (r % d == r / d) col_sums(j) += it.value();  // row is a diagonal slot k*d+k
        }
    }
    return col_sums.cwiseAbs().maxCoeff();
}

Vector vec(const DenseMatrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

DenseMatrix unvec(const Vector& v, Index d) {
    if (v.size() != d * d) throw std::invalid_argument("unvec: length is not d^2");
    return Eigen::Map<const DenseMatrix>(v.data(), d, d);
}

Superoperator liouvillian(const Operator& hamiltonian,
                          const std::vector<CollapseTerm>& collapse) {
    const HilbertSpec& space = hamiltonian.space();
    const Index d = space.total_dim();
    const SparseMatrix h = hamiltonian.to_sparse();
    SparseMatrix id(d, d);
    id.setIdentity();

    const Complex i_unit(0.0, 1.0);
    // vec(H rho) = (I kron H) vec(rho), vec(rho H) = (H^T kron I) vec(rho)
    SparseMatrix l = -i_unit * Eigen::kroneckerProduct(id, h) +
                     i_unit * Eigen::kroneckerProduct(SparseMatrix(h.transpose()), id);

    for (const CollapseTerm& term : collapse) {
        if (term.rate < 0.0) throw std::invalid_argument("liouvillian: negative collapse rate");
        if (!(term.op.space() == space)) {
            throw std::invalid_argument("liouvillian: collapse operator on a different space");
        }
        if (term.rate == 0.0) continue;
        const SparseMatrix c = term.op.to_sparse();
        const SparseMatrix cd = SparseMatrix(c.adjoint());
        const SparseMatrix cdc = SparseMatrix(cd * c);
        const Complex rate(term.rate, 0.0);
        l += rate * Eigen::kroneckerProduct(SparseMatrix(c.conjugate()), c);
        l -= (0.5 * rate) * Eigen::kroneckerProduct(id, cdc);
        l -= (0.5 * rate) * Eigen::kroneckerProduct(SparseMatrix(cdc.transpose()), id);
    }
    l.makeCompressed();
    return Superoperator(space, std::move(l));
}

namespace {

double inf_norm(const SparseMatrix& m) {
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(m.rows());
    for (Index j = 0; j < m.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
            row_sums(it.row()) += std::abs(it.value());
        }
    }
    return row_sums.size() > 0 ? row_sums.maxCoeff() : 0.0;
}

double frobenius_norm(const SparseMatrix& m) {
    double acc = 0.0;
    for (Index j = 0; j < m.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
            acc += std::norm(it.value());
        }
    }
    return std::sqrt(acc);
}

Index smallest_diagonal_row(const SparseMatrix& m) {
    Eigen::VectorXd diag_abs = Eigen::VectorXd::Zero(m.rows());
    for (Index j = 0; j < m.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
            if (it.row() == j) diag_abs(j) = std::abs(it.value());
        }
    }
    Index row = 0;
    diag_abs.minCoeff(&row);
    return row;
}

// L with row `trace_row` replaced by `scale` times the vectorized trace
// constraint. Scaling the constraint row to the magnitude of the rest of L
// keeps the replaced system well balanced for the iterative solver; the
// right-hand side carries the same factor so the solution is unchanged.
SparseMatrix with_trace_row(const SparseMatrix& l, Index d, Index trace_row, double scale) {
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(l.nonZeros() + d);
    for (Index j = 0; j < l.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(l, j); it; ++it) {
            if (it.row() != trace_row) trips.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (Index k = 0; k < d; ++k) {
        trips.emplace_back(trace_row, k * d + k, Complex(scale, 0.0));
    }
    SparseMatrix out(l.rows(), l.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    out.makeCompressed();
    return out;
}

double mean_diagonal_magnitude(const SparseMatrix& m) {
    double acc = 0.0;
    for (Index j = 0; j < m.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
            if (it.row() == j) acc += std::abs(it.value());
        }
    }
    return m.rows() > 0 ? acc / static_cast<double>(m.rows()) : 1.0;
}

TruncationSpec truncation_from_space(const HilbertSpec& space) {
    TruncationSpec t;
    const auto& dims = space.factor_dims();
    t.n_cav = dims.empty() ? 1 : dims[0];
    t.n_mech = 1;
    for (std::size_t k = 1; k < dims.size(); ++k) t.n_mech *= dims[k];
    return t;
}

}  // namespace

SteadyStateResult steadystate(const Superoperator& liouv, const SolverOptions& opts) {
    const Index d = liouv.dim();
    const Index n = liouv.super_dim();
    const SparseMatrix& l = liouv.matrix();

    const Index trace_row = smallest_diagonal_row(l);
    const double row_scale = std::max(1.0, mean_diagonal_magnitude(l));
    const SparseMatrix sys = with_trace_row(l, d, trace_row, row_scale);
    Vector rhs = Vector::Zero(n);
    rhs(trace_row) = Complex(row_scale, 0.0);

    auto solve_direct = [&](Vector& out) {
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> solver;
        solver.compute(sys);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("steadystate: sparse LU factorization failed");
        }
        out = solver.solve(rhs);
    };

    Vector x;
    std::string method;
    if (n <= opts.direct_threshold) {
        method = "sparse-lu";
        solve_direct(x);
    } else {
        method = "bicgstab-ilut";
        Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<Complex>> solver;
        solver.preconditioner().setDroptol(1e-6);
        solver.preconditioner().setFillfactor(20);
        solver.setTolerance(opts.krylov_tol);
        solver.setMaxIterations(opts.krylov_max_iterations);
        solver.compute(sys);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("steadystate: ILUT preconditioner setup failed");
        }
        x = solver.solve(rhs);
        const bool stagnated = solver.info() != Eigen::Success ||
                               (sys * x - rhs).norm() > 1e-8 * rhs.norm();
        if (stagnated) {
            // Krylov stalled on this Liouvillian; a direct factorization is
            // slower but dependable, so retry before reporting failure.
            method = "bicgstab-ilut->sparse-lu";
            solve_direct(x);
        }
    }

    DensityMatrix rho(Operator(liouv.space(), unvec(x, d)), 1e-6);
    const Vector lr = l * vec(rho.matrix());
    const double raw_residual = lr.norm();

    SteadyStateResult result{
        std::move(rho),
        raw_residual / std::max(1.0, frobenius_norm(l)),
        truncation_from_space(liouv.space()),
        raw_residual <= opts.residual_tol * std::max(1.0, inf_norm(l)),
        trace_row,
        method,
    };
    return result;
}

namespace {

// Dormand-Prince 5(4) coefficients
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

}  // namespace

DensityMatrix evolve(const DensityMatrix& rho0, const Superoperator& liouv, double t_final,
                     const StepPolicy& policy) {
    if (rho0.dim() != liouv.dim()) {
        throw std::invalid_argument("evolve: state and Liouvillian dimensions differ");
    }
    if (t_final < 0.0) throw std::invalid_argument("evolve: t_final must be >= 0");
    if (t_final == 0.0) return rho0;

    const SparseMatrix& l = liouv.matrix();
    Vector y = vec(rho0.matrix());
    Vector k1 = l * y;

    double t = 0.0;
    double h = policy.initial_dt;
    if (h <= 0.0) {
        const double y_scale = y.cwiseAbs().maxCoeff();
        const double f_scale = k1.cwiseAbs().maxCoeff();
        h = f_scale > 1e-300 ? 0.01 * std::max(y_scale, policy.abs_tol) / f_scale : t_final;
        h = std::min(h, t_final);
    }
    const double h_floor =
        std::max(policy.min_dt, t_final * std::numeric_limits<double>::epsilon() * 16.0);

    Vector k2, k3, k4, k5, k6, k7, y_new, y_err;
    while (t < t_final) {
        h = std::min(h, t_final - t);
        k2 = l * Vector(y + h * (kA21 * k1));
        k3 = l * Vector(y + h * (kA31 * k1 + kA32 * k2));
        k4 = l * Vector(y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
        k5 = l * Vector(y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
        k6 = l * Vector(y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
        y_new = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
        k7 = l * y_new;
        y_err = h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

        double err_ratio = 0.0;
        for (Index i = 0; i < y.size(); ++i) {
            const double scale =
                policy.abs_tol +
                policy.rel_tol * std::max(std::abs(y(i)), std::abs(y_new(i)));
            err_ratio = std::max(err_ratio, std::abs(y_err(i)) / scale);
        }

        if (err_ratio <= 1.0) {
            t += h;
            y.swap(y_new);
            k1.swap(k7);  // first-same-as-last
        }
        const double grow =
            err_ratio > 0.0 ? 0.9 * std::pow(err_ratio, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        if (h < h_floor && t < t_final) {
            throw std::runtime_error("evolve: step size underflow at t = " + std::to_string(t));
        }
    }
    return DensityMatrix(Operator(liouv.space(), unvec(y, liouv.dim())), 1e-6);
}

Superoperator model_liouvillian(const ModelParams& params, const TruncationSpec& trunc) {
    params.validate();
    trunc.validate();
    const Operator h = hamiltonian_rotating(params, trunc);
    const JointOps ops = joint_ladder_ops(trunc);
    const double nbar = thermal_phonon_number(params);
    std::vector<CollapseTerm> collapse;
    collapse.push_back({params.gamma, ops.a});
    collapse.push_back({params.gamma_m * (nbar + 1.0), ops.b});
    if (nbar > 0.0) collapse.push_back({params.gamma_m * nbar, dagger(ops.b)});
    return liouvillian(h, collapse);
}

namespace {

struct SentinelObservables {
    double mean_n = 0.0;
    double g2 = std::numeric_limits<double>::quiet_NaN();
    double g3 = std::numeric_limits<double>::quiet_NaN();
};

SentinelObservables sentinels_of(const DensityMatrix& rho) {
    SentinelObservables s;
    s.mean_n = mean_photon_number(rho);
    if (s.mean_n > 0.0) {
        s.g2 = g_n(rho, 2);
        s.g3 = g_n(rho, 3);
    }
    return s;
}

bool within_rel(double a, double b, double tol) {
    if (std::isnan(a) && std::isnan(b)) return true;  // undefined at both levels
    if (std::isnan(a) || std::isnan(b)) return false;
    // Both magnitudes at numerical-noise level count as settled; otherwise a
    // correlator that is exactly zero under a tight cutoff (a^3 annihilates
    // every kept state) could never match its refined value.
    const double mag = std::max(std::abs(a), std::abs(b));
    if (mag <= 1e-9) return true;
    return std::abs(a - b) <= tol * mag;
}

}  // namespace

SteadyStateResult solve_converged(const ModelParams& params, const TruncationSpec& trunc,
                                  const SolverOptions& opts) {
    params.validate();
    trunc.validate();
    if (!trunc.auto_converge) {
        SteadyStateResult r = steadystate(model_liouvillian(params, trunc), opts);
        r.truncation_used = trunc;
        return r;
    }

    TruncationSpec level = trunc;
    if (level.joint_dim() > level.max_dim) {
        throw std::invalid_argument("solve_converged: initial truncation exceeds max_dim");
    }
    SteadyStateResult result = steadystate(model_liouvillian(params, level), opts);
    result.truncation_used = level;
    SentinelObservables prev = sentinels_of(result.rho);

    while (true) {
        TruncationSpec next = level;
        next.n_cav = level.n_cav + 1;
        next.n_mech = static_cast<Index>(std::ceil(1.5 * static_cast<double>(level.n_mech)));
        if (next.joint_dim() > trunc.max_dim) {
            result.converged = false;  // cap reached before the sentinels settled
            return result;
        }
        SteadyStateResult refined = steadystate(model_liouvillian(params, next), opts);
        refined.truncation_used = next;
        const SentinelObservables cur = sentinels_of(refined.rho);

        const bool settled = within_rel(cur.mean_n, prev.mean_n, trunc.rel_tol) &&
                             within_rel(cur.g2, prev.g2, trunc.rel_tol) &&
                             within_rel(cur.g3, prev.g3, trunc.rel_tol);
        if (settled) return refined;
        level = next;
        prev = cur;
        result = std::move(refined);
    }
}

}  // namespace omsim
