#include "omsim/fock_algebra.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace omsim {

namespace {

void require_square(const HilbertSpec& space, Index rows, Index cols, const char* what) {
    if (rows != cols || rows != space.total_dim()) {
        throw std::invalid_argument(std::string(what) +
                                    ": matrix shape does not match the space dimension");
    }
}

void require_same_space(const Operator& a, const Operator& b, const char* what) {
    if (!(a.space() == b.space())) {
        throw std::invalid_argument(std::string(what) + ": operands live on different spaces");
    }
}

}  // namespace

HilbertSpec::HilbertSpec(std::vector<Index> factor_dims) : dims_(std::move(factor_dims)) {
    if (dims_.empty()) {
        throw std::invalid_argument("HilbertSpec: at least one factor required");
    }
    total_ = 1;
    for (Index d : dims_) {
        if (d < 1) {
            throw std::invalid_argument("HilbertSpec: every factor dimension must be >= 1");
        }
        total_ *= d;
    }
}

HilbertSpec HilbertSpec::concat(const HilbertSpec& a, const HilbertSpec& b) {
    std::vector<Index> dims = a.dims_;
    dims.insert(dims.end(), b.dims_.begin(), b.dims_.end());
    return HilbertSpec(std::move(dims));
}

Operator::Operator(HilbertSpec space, DenseMatrix elements) : space_(std::move(space)) {
    require_square(space_, elements.rows(), elements.cols(), "Operator");
    storage_ = std::move(elements);
}

Operator::Operator(HilbertSpec space, SparseMatrix elements) : space_(std::move(space)) {
    require_square(space_, elements.rows(), elements.cols(), "Operator");
    elements.makeCompressed();
    storage_ = std::move(elements);
}

Complex Operator::coeff(Index row, Index col) const {
    if (is_sparse()) return std::get<SparseMatrix>(storage_).coeff(row, col);
    return std::get<DenseMatrix>(storage_)(row, col);
}

DenseMatrix Operator::to_dense() const {
    if (is_sparse()) return DenseMatrix(std::get<SparseMatrix>(storage_));
    return std::get<DenseMatrix>(storage_);
}

SparseMatrix Operator::to_sparse() const {
    if (is_sparse()) return std::get<SparseMatrix>(storage_);
    // keep every nonzero value exactly; drop only exact zeros
    const DenseMatrix& m = std::get<DenseMatrix>(storage_);
    std::vector<Eigen::Triplet<Complex>> trips;
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) {
            if (m(i, j) != Complex(0.0, 0.0)) trips.emplace_back(i, j, m(i, j));
        }
    }
    SparseMatrix s(m.rows(), m.cols());
    s.setFromTriplets(trips.begin(), trips.end());
    s.makeCompressed();
    return s;
}

const DenseMatrix& Operator::dense_ref() const {
    if (is_sparse()) throw std::logic_error("Operator::dense_ref: storage is sparse");
    return std::get<DenseMatrix>(storage_);
}

const SparseMatrix& Operator::sparse_ref() const {
    if (!is_sparse()) throw std::logic_error("Operator::sparse_ref: storage is dense");
    return std::get<SparseMatrix>(storage_);
}

Complex Operator::trace() const {
    if (is_sparse()) {
        const SparseMatrix& s = std::get<SparseMatrix>(storage_);
        Complex acc(0.0, 0.0);
        for (Index k = 0; k < s.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(s, k); it; ++it) {
                if (it.row() == it.col()) acc += it.value();
            }
        }
        return acc;
    }
    return std::get<DenseMatrix>(storage_).trace();
}

Index Operator::nonzeros() const {
    if (is_sparse()) return std::get<SparseMatrix>(storage_).nonZeros();
    return dim() * dim();
}

Operator& Operator::operator+=(const Operator& other) {
    *this = *this + other;
    return *this;
}

Operator& Operator::operator-=(const Operator& other) {
    *this = *this - other;
    return *this;
}

Operator& Operator::operator*=(Complex scalar) {
    if (is_sparse()) {
        std::get<SparseMatrix>(storage_) *= scalar;
    } else {
        std::get<DenseMatrix>(storage_) *= scalar;
    }
    return *this;
}

Operator operator+(const Operator& a, const Operator& b) {
    require_same_space(a, b, "operator+");
    if (a.is_sparse() && b.is_sparse()) {
        return Operator(a.space(), SparseMatrix(a.sparse_ref() + b.sparse_ref()));
    }
    return Operator(a.space(), DenseMatrix(a.to_dense() + b.to_dense()));
}

Operator operator-(const Operator& a, const Operator& b) {
    require_same_space(a, b, "operator-");
    if (a.is_sparse() && b.is_sparse()) {
        return Operator(a.space(), SparseMatrix(a.sparse_ref() - b.sparse_ref()));
    }
    return Operator(a.space(), DenseMatrix(a.to_dense() - b.to_dense()));
}

Operator operator*(const Operator& a, const Operator& b) {
    require_same_space(a, b, "operator*");
    if (a.is_sparse() && b.is_sparse()) {
        SparseMatrix prod = a.sparse_ref() * b.sparse_ref();
        prod.prune([](Index, Index, const Complex& v) { return v != Complex(0.0, 0.0); });
        return Operator(a.space(), std::move(prod));
    }
    return Operator(a.space(), DenseMatrix(a.to_dense() * b.to_dense()));
}

Operator operator*(Complex scalar, const Operator& a) {
    Operator out = a;
    out *= scalar;
    return out;
}

Operator operator*(const Operator& a, Complex scalar) { return scalar * a; }

Operator destroy(Index dim) {
    if (dim < 1) throw std::invalid_argument("destroy: dimension must be >= 1");
    SparseMatrix m(dim, dim);
    m.reserve(Eigen::VectorXi::Constant(dim, 1));
    for (Index k = 1; k < dim; ++k) {
        m.insert(k - 1, k) = Complex(std::sqrt(static_cast<double>(k)), 0.0);
    }
    m.makeCompressed();
    return Operator(HilbertSpec::single(dim), std::move(m));
}

Operator create(Index dim) { return dagger(destroy(dim)); }

Operator number(Index dim) {
    if (dim < 1) throw std::invalid_argument("number: dimension must be >= 1");
    SparseMatrix m(dim, dim);
    m.reserve(Eigen::VectorXi::Constant(dim, 1));
    for (Index k = 1; k < dim; ++k) {
        m.insert(k, k) = Complex(static_cast<double>(k), 0.0);
    }
    m.makeCompressed();
    return Operator(HilbertSpec::single(dim), std::move(m));
}

Operator identity(Index dim) { return identity(HilbertSpec::single(dim)); }

Operator identity(const HilbertSpec& space) {
    const Index d = space.total_dim();
    SparseMatrix m(d, d);
    m.setIdentity();
    return Operator(space, std::move(m));
}

Operator tensor(const Operator& a, const Operator& b) {
    HilbertSpec space = HilbertSpec::concat(a.space(), b.space());
    if (a.is_sparse() && b.is_sparse()) {
        SparseMatrix prod = Eigen::kroneckerProduct(a.sparse_ref(), b.sparse_ref());
        return Operator(std::move(space), std::move(prod));
    }
    DenseMatrix prod = Eigen::kroneckerProduct(a.to_dense(), b.to_dense());
    return Operator(std::move(space), std::move(prod));
}

Operator dagger(const Operator& a) {
    if (a.is_sparse()) {
        SparseMatrix adj = a.sparse_ref().adjoint();
        return Operator(a.space(), std::move(adj));
    }
    DenseMatrix adj = a.dense_ref().adjoint();
    return Operator(a.space(), std::move(adj));
}

Complex expect(const DensityMatrix& rho, const Operator& a) {
    if (rho.dim() != a.dim()) {
        throw std::invalid_argument("expect: state and operator dimensions differ");
    }
    const DenseMatrix& r = rho.matrix();
    if (a.is_sparse()) {
        // Tr(rho A) = sum_{ij} rho(i,j) A(j,i), iterating nonzeros of A
        const SparseMatrix& s = a.sparse_ref();
        Complex acc(0.0, 0.0);
        for (Index k = 0; k < s.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(s, k); it; ++it) {
                acc += r(it.col(), it.row()) * it.value();
            }
        }
        return acc;
    }
    return (r.transpose().array() * a.dense_ref().array()).sum();
}

EighResult eig_hermitian(const Operator& a, double herm_tol) {
    DenseMatrix m = a.to_dense();
    const double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (defect > herm_tol) {
        throw std::invalid_argument("eig_hermitian: operator is not Hermitian (defect " +
                                    std::to_string(defect) + ")");
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(m);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eig_hermitian: eigensolver failed to converge");
    }
    return EighResult{solver.eigenvalues(), solver.eigenvectors()};
}

Operator expm(const Operator& a) {
    DenseMatrix m = a.to_dense();
    return Operator(a.space(), DenseMatrix(m.exp()));
}

DensityMatrix::DensityMatrix(const Operator& op, double herm_tol) : space_(op.space()) {
    DenseMatrix m = op.to_dense();
    const double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (defect > herm_tol) {
        throw std::invalid_argument("DensityMatrix: hermiticity defect " +
                                    std::to_string(defect) + " exceeds tolerance");
    }
    rho_ = 0.5 * (m + m.adjoint());
    const double tr = rho_.trace().real();
    if (!(std::abs(tr) > 0.0) || !std::isfinite(tr)) {
        throw std::invalid_argument("DensityMatrix: trace is zero or not finite");
    }
    rho_ /= tr;
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(rho_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

DensityMatrix DensityMatrix::pure(const HilbertSpec& space, const Vector& amplitudes) {
    if (amplitudes.size() != space.total_dim()) {
        throw std::invalid_argument("DensityMatrix::pure: amplitude vector has wrong length");
    }
    const double norm2 = amplitudes.squaredNorm();
    if (norm2 <= 0.0) {
        throw std::invalid_argument("DensityMatrix::pure: zero state vector");
    }
    DenseMatrix rho = (amplitudes * amplitudes.adjoint()) / norm2;
    return DensityMatrix(Operator(space, std::move(rho)));
}

DensityMatrix DensityMatrix::fock_state(const HilbertSpec& space, const std::vector<Index>& levels) {
    if (levels.size() != space.num_factors()) {
        throw std::invalid_argument("DensityMatrix::fock_state: one level per factor required");
    }
    Index idx = 0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const Index d = space.factor_dims()[k];
        if (levels[k] < 0 || levels[k] >= d) {
            throw std::invalid_argument("DensityMatrix::fock_state: level outside truncation");
        }
        idx = idx * d + levels[k];
    }
    Vector psi = Vector::Zero(space.total_dim());
    psi(idx) = Complex(1.0, 0.0);
    return DensityMatrix::pure(space, psi);
}

}  // namespace omsim
