#include "gaussot/transforms.hpp"

#include "gaussot/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gaussot {

namespace {

constexpr double kAdainVarianceFloor = 1e-12;

void require_same_dim(const GaussianStats& c, const GaussianStats& s) {
    if (c.dim() != s.dim() || c.cov.dim() != c.dim() || s.cov.dim() != s.dim()) {
        fail(ErrorCode::ShapeError, "content and style statistics have different dimensions (" +
                                        std::to_string(c.dim()) + " vs " +
                                        std::to_string(s.dim()) + ")");
    }
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::vector<double> AffineTransform::operator()(std::span<const double> u) const {
    std::vector<double> centered(u.begin(), u.end());
    for (std::size_t i = 0; i < centered.size(); ++i) centered[i] -= mu_c[i];
    std::vector<double> out = matrix * std::span<const double>(centered);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += mu_s[i];
    return out;
}

std::string_view to_string(WhiteningMethod method) {
    switch (method) {
        case WhiteningMethod::ZCA: return "zca";
        case WhiteningMethod::PCA: return "pca";
        case WhiteningMethod::Cholesky: return "cholesky";
    }
    return "unknown";
}

std::string transform_name(const TransformKind& k) {
    return std::visit(overloaded{
                          [](const kind::Ost&) { return std::string("ost"); },
                          [](const kind::Wct&) { return std::string("wct"); },
                          [](const kind::AdaIn&) { return std::string("adain"); },
                          [](const kind::RotatedWct&) { return std::string("rotated-wct"); },
                          [](const kind::WhitenOnly& w) {
                              return "whiten-" + std::string(to_string(w.method));
                          },
                      },
                      k);
}

RegionMask::RegionMask(std::vector<std::int64_t> labels) : labels_(std::move(labels)) {
    label_set_.insert(labels_.begin(), labels_.end());
}

std::vector<std::size_t> RegionMask::positions_of(std::int64_t label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) out.push_back(i);
    }
    return out;
}

AffineTransform ost_map(const GaussianStats& c, const GaussianStats& s, double ridge) {
    require_same_dim(c, s);
    const SpdRoots content = spd_roots(c.cov, ridge);
    const Matrix style_sqrt = spd_pow(s.cov, 0.5, ridge).matrix();
    // Σc^{-1/2} (Σc^{1/2} Σs Σc^{1/2})^{1/2} Σc^{-1/2} equals Σs^{1/2} Q Σc^{-1/2} with Q
    // the polar factor of Σs^{1/2} Σc^{1/2}; this avoids squaring the condition number.
    const Matrix q = polar_factor(style_sqrt * content.sqrt.matrix());
    Matrix t = symmetrized(style_sqrt * q * content.inv_sqrt.matrix());
    return AffineTransform{std::move(t), c.mean, s.mean};
}

AffineTransform wct_map(const GaussianStats& c, const GaussianStats& s, double ridge) {
    require_same_dim(c, s);
    const SymMatrix content_inv = spd_pow(c.cov, -0.5, ridge);
    const SymMatrix style_sqrt = spd_pow(s.cov, 0.5, ridge);
    return AffineTransform{style_sqrt.matrix() * content_inv.matrix(), c.mean, s.mean};
}

AffineTransform adain_map(const GaussianStats& c, const GaussianStats& s) {
    require_same_dim(c, s);
    const std::size_t n = c.dim();
    Matrix t(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double var_c = std::max(c.cov(i, i), kAdainVarianceFloor);
        const double var_s = std::max(s.cov(i, i), 0.0);
        t(i, i) = std::sqrt(var_s / var_c);
    }
    return AffineTransform{std::move(t), c.mean, s.mean};
}

AffineTransform rotated_wct_map(const GaussianStats& c, const GaussianStats& s,
                                const OrthogonalMatrix& q, double ridge) {
    return RotationFamily(c, s, ridge).map(q);
}

RotationFamily::RotationFamily(const GaussianStats& c, const GaussianStats& s, double ridge)
    : mu_c_(c.mean), mu_s_(s.mean) {
    require_same_dim(c, s);
    style_sqrt_ = spd_pow(s.cov, 0.5, ridge).matrix();
    content_inv_sqrt_ = spd_pow(c.cov, -0.5, ridge).matrix();
}

AffineTransform RotationFamily::map(const OrthogonalMatrix& q) const {
    if (q.dim() != dim()) {
        fail(ErrorCode::ShapeError, "rotation dimension " + std::to_string(q.dim()) +
                                        " does not match statistics dimension " +
                                        std::to_string(dim()));
    }
    return AffineTransform{style_sqrt_ * q.matrix() * content_inv_sqrt_, mu_c_, mu_s_};
}

AffineTransform whiten_map(const GaussianStats& c, WhiteningMethod method, double ridge) {
    const std::size_t n = c.dim();
    std::vector<double> zero(n, 0.0);
    switch (method) {
        case WhiteningMethod::ZCA:
            return AffineTransform{spd_pow(c.cov, -0.5, ridge).matrix(), c.mean, zero};
        case WhiteningMethod::PCA: {
            const double shift = ridge_shift(c.cov, ridge);
            const EigenDecomposition eig = sym_eigen(c.cov);
            Matrix t = eig.vectors.transposed();
            for (std::size_t r = 0; r < n; ++r) {
                const double lambda = eig.values[r] + shift;
                if (!(lambda > 0.0)) {
                    fail(ErrorCode::SingularMatrix, "PCA whitening: covariance is singular");
                }
                const double scale = 1.0 / std::sqrt(lambda);
                for (double& v : t.row(r)) v *= scale;
            }
            return AffineTransform{std::move(t), c.mean, zero};
        }
        case WhiteningMethod::Cholesky: {
            const double shift = ridge_shift(c.cov, ridge);
            Matrix shifted = c.cov.matrix();
            for (std::size_t i = 0; i < n; ++i) shifted(i, i) += shift;
            const Matrix l = cholesky_lower(SymMatrix(shifted));
            return AffineTransform{invert_lower_triangular(l), c.mean, zero};
        }
    }
    fail(ErrorCode::InvalidInput, "unknown whitening method");
}

AffineTransform make_transform(const TransformKind& k, const GaussianStats& c,
                               const GaussianStats& s, double ridge) {
    return std::visit(
        overloaded{
            [&](const kind::Ost&) { return ost_map(c, s, ridge); },
            [&](const kind::Wct&) { return wct_map(c, s, ridge); },
            [&](const kind::AdaIn&) { return adain_map(c, s); },
            [&](const kind::RotatedWct& r) {
                return rotated_wct_map(c, s, random_orthogonal(c.dim(), r.seed), ridge);
            },
            [&](const kind::WhitenOnly& w) { return whiten_map(c, w.method, ridge); },
        },
        k);
}

double covariance_residual(const Matrix& t, const SymMatrix& cov_c, const SymMatrix& cov_s) {
    const Matrix implied = t * cov_c.matrix() * t.transposed();
    const double diff = frobenius_norm(implied - cov_s.matrix());
    const double scale = frobenius_norm(cov_s.matrix());
    return scale > 0.0 ? diff / scale : diff;
}

double expected_content_cost(const AffineTransform& t, const GaussianStats& c,
                             const GaussianStats& s) {
    require_same_dim(c, s);
    return expected_content_cost(t.matrix, t.mu_c, t.mu_s, c);
}

FeatureMap apply_transform(const FeatureMap& f, const AffineTransform& t, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        fail(ErrorCode::InvalidInput, "alpha must lie in [0, 1], got " + std::to_string(alpha));
    }
    const std::size_t c = f.channels();
    if (t.dim() != c || t.matrix.rows() != c || t.matrix.cols() != c || t.mu_s.size() != c) {
        fail(ErrorCode::ShapeError, "transform dimension " + std::to_string(t.dim()) +
                                        " does not match feature channels " + std::to_string(c));
    }
    if (alpha == 0.0) return f;

    Matrix centered = f.data();
    for (std::size_t r = 0; r < c; ++r) {
        for (double& v : centered.row(r)) v -= t.mu_c[r];
    }
    Matrix out = t.matrix * centered;
    for (std::size_t r = 0; r < c; ++r) {
        for (double& v : out.row(r)) v += t.mu_s[r];
    }
    if (alpha != 1.0) {
        const auto src = f.data().values();
        auto dst = out.values();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = alpha * dst[i] + (1.0 - alpha) * src[i];
        }
    }
    return FeatureMap(std::move(out));
}

FeatureMap semantic_transform(const FeatureMap& fc, const FeatureMap& fs, const RegionMask& mask_c,
                              const RegionMask& mask_s, const TransformKind& k, double alpha,
                              double ridge) {
    if (mask_c.size() != fc.positions() || mask_s.size() != fs.positions()) {
        fail(ErrorCode::ShapeError, "mask length does not match feature positions");
    }
    if (fc.channels() != fs.channels()) {
        fail(ErrorCode::ShapeError, "content and style channel counts differ");
    }
    for (std::int64_t label : mask_c.label_set()) {
        if (!mask_s.label_set().contains(label)) {
            fail(ErrorCode::MissingStyleRegion,
                 "content label " + std::to_string(label) + " has no region in the style mask");
        }
    }

    Matrix out = fc.data();
    for (std::int64_t label : mask_c.label_set()) {
        const auto cols_c = mask_c.positions_of(label);
        const auto cols_s = mask_s.positions_of(label);
        if (cols_c.size() < 2 || cols_s.size() < 2) continue;

        const FeatureMap region_c(select_columns(fc.data(), cols_c));
        const FeatureMap region_s(select_columns(fs.data(), cols_s));
        const AffineTransform t =
            make_transform(k, estimate_stats(region_c), estimate_stats(region_s), ridge);
        const FeatureMap moved = apply_transform(region_c, t, alpha);
        for (std::size_t r = 0; r < out.rows(); ++r) {
            auto src = moved.data().row(r);
            for (std::size_t j = 0; j < cols_c.size(); ++j) out(r, cols_c[j]) = src[j];
        }
    }
    return FeatureMap(std::move(out));
}

}  // namespace gaussot
