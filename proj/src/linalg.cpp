#include "gaussot/linalg.hpp"

#include "gaussot/error.hpp"
#include "gaussot/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gaussot {

namespace {

constexpr int kMaxSweeps = 100;

// One Jacobi rotation annihilating a(p, q); a is kept fully symmetric.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q, int sweep) {
    const std::size_t n = a.rows();
    const double apq = a(p, q);
    if (apq == 0.0) return;

    const double g = 100.0 * std::abs(apq);
    const double app = a(p, p);
    const double aqq = a(q, q);
    if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        return;
    }

    const double h = aqq - app;
    double t;
    if (std::abs(h) + g == std::abs(h)) {
        t = apq / h;
    } else {
        const double theta = 0.5 * h / apq;
        t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
    }
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;
    const double tau = s / (1.0 + c);

    a(p, p) = app - t * apq;
    a(q, q) = aqq + t * apq;
    a(p, q) = 0.0;
    a(q, p) = 0.0;

    for (std::size_t r = 0; r < n; ++r) {
        if (r == p || r == q) continue;
        const double arp = a(r, p);
        const double arq = a(r, q);
        const double new_rp = arp - s * (arq + arp * tau);
        const double new_rq = arq + s * (arp - arq * tau);
        a(r, p) = new_rp;
        a(p, r) = new_rp;
        a(r, q) = new_rq;
        a(q, r) = new_rq;
    }
    for (std::size_t r = 0; r < n; ++r) {
        const double vrp = v(r, p);
        const double vrq = v(r, q);
        v(r, p) = vrp - s * (vrq + vrp * tau);
        v(r, q) = vrq + s * (vrp - vrq * tau);
    }
}

double off_diagonal_sq(const Matrix& a) {
    double off = 0.0;
    for (std::size_t p = 0; p < a.rows(); ++p) {
        for (std::size_t q = p + 1; q < a.cols(); ++q) off += a(p, q) * a(p, q);
    }
    return off;
}

Matrix assemble(const EigenDecomposition& eig, const std::vector<double>& mapped) {
    const std::size_t n = eig.values.size();
    // V · diag(mapped) · Vᵀ
    Matrix scaled = eig.vectors;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) scaled(r, c) *= mapped[c];
    }
    return scaled * eig.vectors.transposed();
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& a) : m_(symmetrized(a)) {
    if (m_.rows() == 0) {
        fail(ErrorCode::InvalidInput, "symmetric matrix must have dimension >= 1");
    }
}

Matrix EigenDecomposition::reconstruct() const { return assemble(*this, values); }

EigenDecomposition sym_eigen(const SymMatrix& input) {
    if (!all_finite(input.matrix())) {
        fail(ErrorCode::InvalidInput, "sym_eigen: matrix has non-finite entries");
    }
    const std::size_t n = input.dim();
    Matrix a = input.matrix();
    Matrix v = Matrix::identity(n);

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (off_diagonal_sq(a) == 0.0) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q, sweep);
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.values[k] = a(src, src);
        std::size_t pivot = 0;
        for (std::size_t r = 1; r < n; ++r) {
            if (std::abs(v(r, src)) > std::abs(v(pivot, src))) pivot = r;
        }
        const double sign = v(pivot, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = sign * v(r, src);
    }
    return out;
}

double ridge_shift(const SymMatrix& a, double ridge) {
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
        fail(ErrorCode::InvalidInput, "ridge must be a finite non-negative number");
    }
    const double mean_diag = trace(a.matrix()) / static_cast<double>(a.dim());
    return mean_diag > 0.0 ? ridge * mean_diag : ridge;
}

SymMatrix spd_pow(const SymMatrix& a, double exponent, double ridge) {
    if (exponent == 0.5) {
        const double shift = ridge_shift(a, ridge);
        const EigenDecomposition eig = sym_eigen(a);
        std::vector<double> root(a.dim());
        for (std::size_t i = 0; i < root.size(); ++i) {
            root[i] = std::sqrt(std::max(eig.values[i] + shift, 0.0));
        }
        return SymMatrix(assemble(eig, root));
    }
    if (exponent == -0.5) return spd_roots(a, ridge).inv_sqrt;
    fail(ErrorCode::InvalidInput, "spd_pow: exponent must be 1/2 or -1/2");
}

SpdRoots spd_roots(const SymMatrix& a, double ridge) {
    const double shift = ridge_shift(a, ridge);
    const EigenDecomposition eig = sym_eigen(a);
    const std::size_t n = a.dim();

    std::vector<double> root(n);
    std::vector<double> inv_root(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lambda = eig.values[i] + shift;
        if (!(lambda > 0.0)) {
            fail(ErrorCode::SingularMatrix,
                 "inverse square root: shifted eigenvalue " + std::to_string(lambda) +
                     " is not positive (increase ridge)");
        }
        root[i] = std::sqrt(lambda);
        inv_root[i] = 1.0 / root[i];
    }
    return SpdRoots{SymMatrix(assemble(eig, root)), SymMatrix(assemble(eig, inv_root))};
}

Matrix polar_factor(const Matrix& a) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n) {
        fail(ErrorCode::ShapeError, "polar_factor: expected a nonempty square matrix");
    }
    if (!all_finite(a)) fail(ErrorCode::InvalidInput, "polar_factor: non-finite entry");

    // Rows of b are the columns of a·V; rows of vt are the columns of V.
    Matrix b = a.transposed();
    Matrix vt = Matrix::identity(n);
    const double eps = std::numeric_limits<double>::epsilon();
    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                auto bi = b.row(i);
                auto bj = b.row(j);
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    alpha += bi[k] * bi[k];
                    beta += bj[k] * bj[k];
                    gamma += bi[k] * bj[k];
                }
                if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (Matrix* m : {&b, &vt}) {
                    auto ri = m->row(i);
                    auto rj = m->row(j);
                    for (std::size_t k = 0; k < n; ++k) {
                        const double x = ri[k];
                        const double y = rj[k];
                        ri[k] = cs * x - sn * y;
                        rj[k] = sn * x + cs * y;
                    }
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n);
    double sigma_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s2 = 0.0;
        for (double v : b.row(i)) s2 += v * v;
        sigma[i] = std::sqrt(s2);
        sigma_max = std::max(sigma_max, sigma[i]);
    }
    const double cutoff = static_cast<double>(n) * eps * sigma_max;
    Matrix q(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(sigma[i] > cutoff)) continue;
        const auto bi = b.row(i);
        const auto vi = vt.row(i);
        for (std::size_t r = 0; r < n; ++r) {
            const double u = bi[r] / sigma[i];
            for (std::size_t c = 0; c < n; ++c) q(r, c) += u * vi[c];
        }
    }
    return q;
}

OrthogonalMatrix random_orthogonal(std::size_t dim, std::uint64_t seed) {
    if (dim == 0) {
        fail(ErrorCode::InvalidInput, "random_orthogonal: dim must be >= 1");
    }
    Rng rng(seed);
    Matrix a(dim, dim);
    for (double& x : a.values()) x = rng.normal();

    if (dim == 1) {
        // Pinned to [1]: a one-channel rotation family collapses onto plain WCT.
        return OrthogonalMatrix(Matrix::identity(1));
    }

    std::vector<std::vector<double>> reflectors(dim);
    std::vector<double> r_diag(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) {
        const std::size_t m = dim - k;
        std::vector<double> x(m);
        for (std::size_t i = 0; i < m; ++i) x[i] = a(k + i, k);
        const double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
        if (norm == 0.0) continue;
        const double alpha = x[0] > 0.0 ? -norm : norm;
        x[0] -= alpha;
        const double vnorm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
        for (double& xi : x) xi /= vnorm;
        r_diag[k] = alpha;
        for (std::size_t c = k; c < dim; ++c) {
            double dot = 0.0;
            for (std::size_t i = 0; i < m; ++i) dot += x[i] * a(k + i, c);
            for (std::size_t i = 0; i < m; ++i) a(k + i, c) -= 2.0 * dot * x[i];
        }
        reflectors[k] = std::move(x);
    }

    // Q = H_0 H_1 ... H_{n-1}, accumulated right to left on the identity.
    Matrix q = Matrix::identity(dim);
    for (std::size_t kk = dim; kk-- > 0;) {
        const auto& v = reflectors[kk];
        if (v.empty()) continue;
        const std::size_t m = v.size();
        for (std::size_t c = 0; c < dim; ++c) {
            double dot = 0.0;
            for (std::size_t i = 0; i < m; ++i) dot += v[i] * q(kk + i, c);
            for (std::size_t i = 0; i < m; ++i) q(kk + i, c) -= 2.0 * dot * v[i];
        }
    }
    for (std::size_t c = 0; c < dim; ++c) {
        if (r_diag[c] < 0.0) {
            for (std::size_t r = 0; r < dim; ++r) q(r, c) = -q(r, c);
        }
    }
    return OrthogonalMatrix(std::move(q));
}

Matrix cholesky_lower(const SymMatrix& a) {
    const std::size_t n = a.dim();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) {
            fail(ErrorCode::SingularMatrix,
                 "cholesky: matrix is not positive definite at pivot " + std::to_string(j));
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

Matrix invert_lower_triangular(const Matrix& l) {
    const std::size_t n = l.rows();
    Matrix inv(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        // forward substitution for L x = e_col
        for (std::size_t i = col; i < n; ++i) {
            double s = i == col ? 1.0 : 0.0;
            for (std::size_t k = col; k < i; ++k) s -= l(i, k) * inv(k, col);
            if (l(i, i) == 0.0) {
                fail(ErrorCode::SingularMatrix, "triangular inverse: zero diagonal");
            }
            inv(i, col) = s / l(i, i);
        }
    }
    return inv;
}

}  // namespace gaussot
