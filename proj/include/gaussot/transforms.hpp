#pragma once

#include "gaussot/linalg.hpp"
#include "gaussot/matrix.hpp"
#include "gaussot/stats.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gaussot {

/// t(u) = T·(u − μc) + μs
struct AffineTransform {
    Matrix matrix;
    std::vector<double> mu_c;
    std::vector<double> mu_s;

    std::size_t dim() const noexcept { return mu_c.size(); }
    std::vector<double> operator()(std::span<const double> u) const;
};

enum class WhiteningMethod { ZCA, PCA, Cholesky };

std::string_view to_string(WhiteningMethod method);

namespace kind {
struct Ost {};
struct Wct {};
struct AdaIn {};
struct RotatedWct {
    std::uint64_t seed = 0;
};
struct WhitenOnly {
    WhiteningMethod method = WhiteningMethod::ZCA;
};
}  // namespace kind

using TransformKind =
    std::variant<kind::Ost, kind::Wct, kind::AdaIn, kind::RotatedWct, kind::WhitenOnly>;

/// Short lowercase name: ost, wct, adain, rotated-wct, whiten-zca, ...
std::string transform_name(const TransformKind& k);

/**
 * @brief Per-position integer labels for semantic transfer.
 */
class RegionMask {
public:
    explicit RegionMask(std::vector<std::int64_t> labels);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::int64_t>& labels() const noexcept { return labels_; }
    const std::set<std::int64_t>& label_set() const noexcept { return label_set_; }

    std::vector<std::size_t> positions_of(std::int64_t label) const;

private:
    std::vector<std::int64_t> labels_;
    std::set<std::int64_t> label_set_;
};

/**
 * @brief Optimal transport map between N(μc, Σc) and N(μs, Σs):
 *
 *   T = Σc^{-1/2} (Σc^{1/2} Σs Σc^{1/2})^{1/2} Σc^{-1/2}
 *
 * Evaluated as Σs^{1/2} Q Σc^{-1/2} with Q = polar_factor(Σs^{1/2} Σc^{1/2}),
 * the member of the rotated-WCT family that minimizes the expected content
 * cost. Both covariances are ridge-regularized through spd_pow, as in wct_map.
 * T is symmetrized after assembly. Throws SingularMatrix when Σc cannot be
 * inverted.
 */
AffineTransform ost_map(const GaussianStats& c, const GaussianStats& s,
                        double ridge = kDefaultRidge);

/// T = Σs^{1/2} Σc^{-1/2}
AffineTransform wct_map(const GaussianStats& c, const GaussianStats& s,
                        double ridge = kDefaultRidge);

/// Diagonal T with T_ii = sqrt(Σs_ii / max(Σc_ii, 1e-12)).
AffineTransform adain_map(const GaussianStats& c, const GaussianStats& s);

/// T = Σs^{1/2} Q Σc^{-1/2}
AffineTransform rotated_wct_map(const GaussianStats& c, const GaussianStats& s,
                                const OrthogonalMatrix& q, double ridge = kDefaultRidge);

/**
 * @brief Precomputed Σs^{1/2} and Σc^{-1/2} for sweeping many rotations over
 * one statistics pair without repeating the decompositions.
 */
class RotationFamily {
public:
    RotationFamily(const GaussianStats& c, const GaussianStats& s, double ridge = kDefaultRidge);

    AffineTransform map(const OrthogonalMatrix& q) const;
    std::size_t dim() const noexcept { return mu_c_.size(); }

private:
    Matrix style_sqrt_;
    Matrix content_inv_sqrt_;
    std::vector<double> mu_c_;
    std::vector<double> mu_s_;
};

/**
 * @brief Whitening map with T·Σc·Tᵀ = I (for the ridge-shifted Σc).
 *
 * ZCA: Σc^{-1/2}. PCA: diag(λ)^{-1/2}·Vᵀ. Cholesky: L⁻¹ with Σc = L·Lᵀ.
 * The recentering mean μs is zero.
 */
AffineTransform whiten_map(const GaussianStats& c, WhiteningMethod method,
                           double ridge = kDefaultRidge);

/// Builds the transform of the requested family from fitted statistics.
AffineTransform make_transform(const TransformKind& k, const GaussianStats& c,
                               const GaussianStats& s, double ridge = kDefaultRidge);

/// ‖T·Σc·Tᵀ − Σs‖_F / ‖Σs‖_F (absolute norm when Σs = 0).
double covariance_residual(const Matrix& t, const SymMatrix& cov_c, const SymMatrix& cov_s);

/// expected_content_cost for the transform's own centering and recentering means.
double expected_content_cost(const AffineTransform& t, const GaussianStats& c,
                             const GaussianStats& s);

/**
 * @brief Per column u: α·(T(u − μc) + μs) + (1 − α)·u.
 *
 * α = 0 returns the input unchanged. Throws ShapeError on a channel mismatch
 * and InvalidInput for α outside [0, 1].
 */
FeatureMap apply_transform(const FeatureMap& f, const AffineTransform& t, double alpha = 1.0);

/**
 * @brief Region-wise transfer.
 *
 * For every content label L the transform `k` is fitted on the label-L
 * columns of both maps and applied to the label-L content columns. Labels
 * whose region has fewer than two positions in either map pass through
 * unchanged. A content label absent from the style mask throws
 * MissingStyleRegion.
 */
FeatureMap semantic_transform(const FeatureMap& fc, const FeatureMap& fs, const RegionMask& mask_c,
                              const RegionMask& mask_s, const TransformKind& k, double alpha = 1.0,
                              double ridge = kDefaultRidge);

}  // namespace gaussot
