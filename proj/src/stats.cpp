#include "gaussot/stats.hpp"

#include "gaussot/error.hpp"
#include "gaussot/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gaussot {

namespace {

constexpr double kPsdTolerance = 1e-10;

std::string shape_string(const FeatureMap& f) {
    return std::to_string(f.channels()) + "x" + std::to_string(f.positions());
}

}  // namespace

FeatureMap::FeatureMap(Matrix data) : data_(std::move(data)) {
    if (data_.rows() == 0 || data_.cols() == 0) {
        fail(ErrorCode::ShapeError, "feature map must have at least one channel and one position");
    }
    if (!all_finite(data_)) {
        fail(ErrorCode::InvalidInput, "feature map contains non-finite values");
    }
}

GaussianStats estimate_stats(const FeatureMap& f) {
    const std::size_t c = f.channels();
    const std::size_t n = f.positions();
    const double inv_n = 1.0 / static_cast<double>(n);
    const Matrix& x = f.data();

    std::vector<double> mean(c, 0.0);
    for (std::size_t i = 0; i < c; ++i) {
        double s = 0.0;
        for (double v : x.row(i)) s += v;
        mean[i] = s * inv_n;
    }

    Matrix centered = x;
    for (std::size_t i = 0; i < c; ++i) {
        for (double& v : centered.row(i)) v -= mean[i];
    }
    Matrix cov(c, c);
    for (std::size_t i = 0; i < c; ++i) {
        auto ri = centered.row(i);
        for (std::size_t j = i; j < c; ++j) {
            auto rj = centered.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += ri[k] * rj[k];
            cov(i, j) = s * inv_n;
            cov(j, i) = s * inv_n;
        }
    }
    return GaussianStats{std::move(mean), SymMatrix(cov), n};
}

double content_loss(const FeatureMap& original, const FeatureMap& transformed) {
    if (original.channels() != transformed.channels() ||
        original.positions() != transformed.positions()) {
        fail(ErrorCode::ShapeError, "content loss: shapes differ (" + shape_string(original) +
                                        " vs " + shape_string(transformed) + ")");
    }
    const auto a = original.data().values();
    const auto b = transformed.data().values();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = b[i] - a[i];
        s += d * d;
    }
    return s / static_cast<double>(original.positions());
}

SymMatrix gram_matrix(const FeatureMap& f) {
    const std::size_t c = f.channels();
    const std::size_t n = f.positions();
    const double scale = 1.0 / (static_cast<double>(c) * static_cast<double>(n));
    Matrix g(c, c);
    for (std::size_t i = 0; i < c; ++i) {
        auto ri = f.data().row(i);
        for (std::size_t j = i; j < c; ++j) {
            auto rj = f.data().row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += ri[k] * rj[k];
            g(i, j) = s * scale;
            g(j, i) = s * scale;
        }
    }
    return SymMatrix(g);
}

double style_loss(const FeatureMap& f1, const FeatureMap& f2) {
    if (f1.channels() != f2.channels()) {
        fail(ErrorCode::ShapeError, "style loss: channel counts differ (" +
                                        std::to_string(f1.channels()) + " vs " +
                                        std::to_string(f2.channels()) + ")");
    }
    const double d = frobenius_norm(gram_matrix(f1).matrix() - gram_matrix(f2).matrix());
    return d * d;
}

double expected_content_cost(const Matrix& t, std::span<const double> mu_c,
                             std::span<const double> mu_s, const GaussianStats& c) {
    const std::size_t dim = c.dim();
    if (t.rows() != dim || t.cols() != dim || mu_c.size() != dim || mu_s.size() != dim) {
        fail(ErrorCode::ShapeError, "expected content cost: dimensions disagree");
    }
    const Matrix t_sigma = t * c.cov.matrix();
    const double implied = trace(t_sigma * t.transposed());
    double shift = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = mu_s[i] - mu_c[i];
        shift += d * d;
    }
    const double cost = trace(c.cov.matrix()) + implied - 2.0 * trace(t_sigma) + shift;
    // Rounding can push an exact zero slightly negative.
    return std::max(cost, 0.0);
}

FeatureMap sample_gaussian(const GaussianStats& stats, std::size_t count, std::uint64_t seed) {
    const std::size_t c = stats.dim();
    if (c == 0 || count == 0 || stats.cov.dim() != c) {
        fail(ErrorCode::ShapeError, "sample_gaussian: empty or inconsistent statistics");
    }
    const EigenDecomposition eig = sym_eigen(stats.cov);
    const double floor = -kPsdTolerance * std::max(1.0, eig.values.front());
    if (eig.values.back() < floor) {
        fail(ErrorCode::InvalidInput, "sample_gaussian: covariance is not positive semidefinite "
                                      "(min eigenvalue " + std::to_string(eig.values.back()) + ")");
    }
    const Matrix root = spd_pow(stats.cov, 0.5, 0.0).matrix();

    Rng rng(seed);
    Matrix z(c, count);
    for (std::size_t col = 0; col < count; ++col) {
        for (std::size_t r = 0; r < c; ++r) z(r, col) = rng.normal();
    }
    Matrix out = root * z;
    for (std::size_t r = 0; r < c; ++r) {
        for (double& v : out.row(r)) v += stats.mean[r];
    }
    return FeatureMap(std::move(out));
}

}  // namespace gaussot
