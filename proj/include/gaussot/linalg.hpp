#pragma once

#include "gaussot/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gaussot {

inline constexpr double kDefaultRidge = 1e-5;

/**
 * @brief Symmetric matrix. Construction symmetrizes the input as (A + Aᵀ)/2,
 * so entries(i, j) == entries(j, i) holds bit-exactly afterwards.
 */
class SymMatrix {
public:
    explicit SymMatrix(const Matrix& a);
    SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : SymMatrix(Matrix(rows)) {}

    static SymMatrix identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }
    static SymMatrix diagonal(std::span<const double> values) {
        return SymMatrix(Matrix::diagonal(values));
    }

    std::size_t dim() const noexcept { return m_.rows(); }
    double operator()(std::size_t r, std::size_t c) const noexcept { return m_(r, c); }
    const Matrix& matrix() const noexcept { return m_; }
    operator const Matrix&() const noexcept { return m_; }

    bool operator==(const SymMatrix&) const = default;

private:
    Matrix m_;
};

/// Eigenvalues sorted descending; eigenvectors are the columns of `vectors`.
struct EigenDecomposition {
    std::vector<double> values;
    Matrix vectors;

    Matrix reconstruct() const;
};

/// Square matrix with QᵀQ = I.
class OrthogonalMatrix {
public:
    std::size_t dim() const noexcept { return q_.rows(); }
    const Matrix& matrix() const noexcept { return q_; }
    operator const Matrix&() const noexcept { return q_; }

    static OrthogonalMatrix identity(std::size_t n) { return OrthogonalMatrix(Matrix::identity(n)); }

private:
    explicit OrthogonalMatrix(Matrix q) : q_(std::move(q)) {}
    friend OrthogonalMatrix random_orthogonal(std::size_t dim, std::uint64_t seed);

    Matrix q_;
};

/**
 * @brief Cyclic Jacobi eigendecomposition of a symmetric matrix.
 *
 * Sweeps rows in fixed order until the off-diagonal mass drops below
 * machine precision relative to ‖a‖_F, so results are bit-reproducible for
 * identical inputs. Eigenvectors are sign-normalized so that the entry of
 * largest magnitude is positive (first such entry on ties).
 *
 * Throws InvalidInput for non-finite entries.
 */
EigenDecomposition sym_eigen(const SymMatrix& a);

/// Absolute eigenvalue shift applied by spd_pow: ridge · mean(diag(a)), or
/// ridge itself when the mean diagonal is not positive (all-zero input).
double ridge_shift(const SymMatrix& a, double ridge);

/**
 * @brief V · diag((λᵢ + shift)^exponent) · Vᵀ for exponent ±1/2.
 *
 * The shift is ridge_shift(a, ridge). Shifted eigenvalues are clamped at zero
 * before the square root. For exponent -1/2 any shifted eigenvalue ≤ 0 throws
 * SingularMatrix. Other exponents throw InvalidInput.
 */
SymMatrix spd_pow(const SymMatrix& a, double exponent, double ridge);

/// Both spd_pow(a, 1/2, ridge) and spd_pow(a, -1/2, ridge) from one decomposition.
struct SpdRoots {
    SymMatrix sqrt;
    SymMatrix inv_sqrt;
};
SpdRoots spd_roots(const SymMatrix& a, double ridge);

/**
 * @brief Orthogonal factor U·Vᵀ of the SVD a = U·diag(σ)·Vᵀ of a square matrix.
 *
 * Computed by one-sided Jacobi (cyclic column sweeps), which keeps small
 * singular values accurate without forming aᵀa. Singular directions with
 * σᵢ ≤ n·ε·σ_max are dropped, so for rank-deficient input the result is the
 * partial isometry on the range of aᵀ.
 */
Matrix polar_factor(const Matrix& a);

/**
 * @brief Haar-distributed orthogonal matrix.
 *
 * Householder QR of a dim×dim standard-normal matrix drawn from Rng(seed) in
 * row-major order, with column j of Q multiplied by sign(R_jj) so that R has a
 * positive diagonal.
 */
OrthogonalMatrix random_orthogonal(std::size_t dim, std::uint64_t seed);

/// Lower-triangular L with a = L·Lᵀ. Throws SingularMatrix if a is not positive definite.
Matrix cholesky_lower(const SymMatrix& a);

/// Inverse of a lower-triangular matrix with nonzero diagonal.
Matrix invert_lower_triangular(const Matrix& l);

}  // namespace gaussot
