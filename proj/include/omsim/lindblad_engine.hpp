#pragma once

#include <string>
#include <vector>

#include "omsim/fock_algebra.hpp"
#include "omsim/optomech_model.hpp"

namespace omsim {

/// Sparse linear map on column-vectorized density matrices (column-major
/// stacking, fixed project-wide: vec(A X B) = (B^T kron A) vec(X)).
class Superoperator {
public:
    Superoperator(HilbertSpec space, SparseMatrix elements);

    const HilbertSpec& space() const { return space_; }
    Index dim() const { return space_.total_dim(); }          // d
    Index super_dim() const { return matrix_.rows(); }        // d^2
    const SparseMatrix& matrix() const { return matrix_; }

    Vector apply(const Vector& vec_rho) const { return matrix_ * vec_rho; }

    /// max_j |sum_k L(k*d+k, j)|: the left action of the flattened identity.
    /// Zero (within 1e-10) for any trace-preserving generator.
    double trace_preservation_defect() const;

private:
    HilbertSpec space_;
    SparseMatrix matrix_;
};

/// One dissipator: rate * (c rho c^dag - 1/2 {c^dag c, rho}).
struct CollapseTerm {
    double rate = 0.0;
    Operator op;
};

/// Generator of d rho/dt = -i[H, rho] + sum of dissipators.
Superoperator liouvillian(const Operator& hamiltonian, const std::vector<CollapseTerm>& collapse);

Vector vec(const DenseMatrix& m);
DenseMatrix unvec(const Vector& v, Index d);

struct SolverOptions {
    /// Accept when ||L vec(rho)||_2 <= residual_tol * max(1, ||L||_inf).
    double residual_tol = 1e-10;
    /// Unknown-count (d^2) threshold above which the solver switches from
    /// sparse direct factorization to BiCGSTAB with incomplete-LU preconditioning.
    Index direct_threshold = 40000;
    double krylov_tol = 1e-13;
    /// Cap on BiCGSTAB iterations; on stagnation the solver falls back to a
    /// direct factorization rather than iterating further.
    int krylov_max_iterations = 1500;
};

struct SteadyStateResult {
    DensityMatrix rho;
    /// ||L vec(rho)||_2 / max(1, ||L||_F).
    double residual = 0.0;
    TruncationSpec truncation_used;
    bool converged = false;
    /// Row of L replaced by the trace constraint (smallest diagonal magnitude).
    Index trace_row = 0;
    std::string method;  // "sparse-lu" or "bicgstab-ilut"
};

/// Null vector of L with unit trace, via one row of L replaced by the
/// vectorized trace constraint. The state is symmetrized and normalized.
SteadyStateResult steadystate(const Superoperator& liouv, const SolverOptions& opts = {});

/// Step-size policy for the adaptive integrator.
struct StepPolicy {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double initial_dt = 0.0;  // 0 = choose automatically
    double min_dt = 0.0;      // 0 = underflow guard only
};

/// rho(t_final) by adaptive embedded Runge-Kutta (Dormand-Prince 5(4)).
DensityMatrix evolve(const DensityMatrix& rho0, const Superoperator& liouv, double t_final,
                     const StepPolicy& policy = {});

/// Builds the rotating-frame Liouvillian for the model at the given truncation:
/// collapse terms (gamma, a), (gamma_m (nbar+1), b), (gamma_m nbar, b^dag).
Superoperator model_liouvillian(const ModelParams& params, const TruncationSpec& trunc);

/// Solves while raising the truncation (n_cav += 1, n_mech *= 1.5) until the
/// sentinel observables mean_n, g2, g3 each move by less than trunc.rel_tol
/// between successive levels, or the joint dimension would exceed
/// trunc.max_dim (converged flag false in that case).
SteadyStateResult solve_converged(const ModelParams& params, const TruncationSpec& trunc,
                                  const SolverOptions& opts = {});

}  // namespace omsim
