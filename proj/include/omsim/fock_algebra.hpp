#pragma once

#include <complex>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace omsim {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Truncated Fock space, possibly a tensor product of several modes.
/// A factor of dimension d keeps the levels 0..d-1 of that mode; all
/// truncation artifacts live in the top level.
class HilbertSpec {
public:
    HilbertSpec() = default;
    explicit HilbertSpec(std::vector<Index> factor_dims);
    static HilbertSpec single(Index dim) { return HilbertSpec({dim}); }

    const std::vector<Index>& factor_dims() const { return dims_; }
    Index total_dim() const { return total_; }
    std::size_t num_factors() const { return dims_.size(); }

    /// Space of the tensor product: factor dims of `a` followed by those of `b`.
    static HilbertSpec concat(const HilbertSpec& a, const HilbertSpec& b);

    bool operator==(const HilbertSpec& other) const { return dims_ == other.dims_; }

private:
    std::vector<Index> dims_;
    Index total_ = 1;
};

/// Complex matrix on a truncated Hilbert space. Storage is dense or sparse;
/// the two representations are semantically equivalent and convert exactly.
class Operator {
public:
    Operator() = default;
    Operator(HilbertSpec space, DenseMatrix elements);
    Operator(HilbertSpec space, SparseMatrix elements);

    const HilbertSpec& space() const { return space_; }
    Index dim() const { return space_.total_dim(); }

    bool is_sparse() const { return storage_.index() == 1; }

    /// Element access regardless of storage.
    Complex coeff(Index row, Index col) const;

    /// Copies of the elements in the requested representation. Conversions
    /// keep every stored value bit-for-bit; only structural zeros are dropped.
    DenseMatrix to_dense() const;
    SparseMatrix to_sparse() const;

    /// Same operator with the storage switched.
    Operator as_dense() const { return Operator(space_, to_dense()); }
    Operator as_sparse() const { return Operator(space_, to_sparse()); }

    /// Direct references; throw if the storage kind does not match.
    const DenseMatrix& dense_ref() const;
    const SparseMatrix& sparse_ref() const;

    Complex trace() const;
    Index nonzeros() const;

    Operator& operator+=(const Operator& other);
    Operator& operator-=(const Operator& other);
    Operator& operator*=(Complex scalar);

private:
    HilbertSpec space_;
    std::variant<DenseMatrix, SparseMatrix> storage_;
};

Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(Complex scalar, const Operator& a);
Operator operator*(const Operator& a, Complex scalar);

/// Annihilation operator on a single mode: M[k-1,k] = sqrt(k).
Operator destroy(Index dim);
/// Creation operator, the conjugate transpose of destroy(dim).
Operator create(Index dim);
/// Number operator a^dag a as a sparse diagonal.
Operator number(Index dim);
Operator identity(Index dim);
Operator identity(const HilbertSpec& space);

/// Kronecker product; the result space concatenates the factor dims.
Operator tensor(const Operator& a, const Operator& b);

/// Conjugate transpose, keeping the storage kind.
Operator dagger(const Operator& a);

class DensityMatrix;

/// Tr(rho A). Spaces must have the same total dimension.
Complex expect(const DensityMatrix& rho, const Operator& a);

struct EighResult {
    Eigen::VectorXd eigenvalues;  // ascending
    DenseMatrix eigenvectors;     // columns, orthonormal
};

/// Hermitian eigendecomposition. Throws if max |A - A^dag| exceeds herm_tol.
EighResult eig_hermitian(const Operator& a, double herm_tol = 1e-10);

/// Matrix exponential (scaling-and-squaring with Pade approximant).
Operator expm(const Operator& a);

/// Hermitian, unit-trace operator representing a (possibly joint) state.
/// Construction symmetrizes and normalizes; it rejects inputs whose
/// hermiticity defect exceeds herm_tol or whose trace is not usable.
class DensityMatrix {
public:
    explicit DensityMatrix(const Operator& op, double herm_tol = 1e-10);

    const HilbertSpec& space() const { return space_; }
    Index dim() const { return space_.total_dim(); }
    const DenseMatrix& matrix() const { return rho_; }
    Operator as_operator() const { return Operator(space_, rho_); }

    /// Smallest eigenvalue; the state is physical when this is >= -1e-8.
    double min_eigenvalue() const;

    /// |psi><psi| from (unnormalized) amplitudes.
    static DensityMatrix pure(const HilbertSpec& space, const Vector& amplitudes);
    /// Fock state |levels[0], levels[1], ...><...| on a product space.
    static DensityMatrix fock_state(const HilbertSpec& space, const std::vector<Index>& levels);

private:
    HilbertSpec space_;
    DenseMatrix rho_;
};

}  // namespace omsim
