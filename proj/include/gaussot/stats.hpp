#pragma once

#include "gaussot/linalg.hpp"
#include "gaussot/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gaussot {

/**
 * @brief C×N activations: one row per channel, one column per spatial position.
 *
 * Construction rejects empty shapes (ShapeError) and non-finite entries
 * (InvalidInput).
 */
class FeatureMap {
public:
    explicit FeatureMap(Matrix data);

    std::size_t channels() const noexcept { return data_.rows(); }
    std::size_t positions() const noexcept { return data_.cols(); }
    const Matrix& data() const noexcept { return data_; }

    bool operator==(const FeatureMap&) const = default;

private:
    Matrix data_;
};

/// Mean and covariance of a FeatureMap viewed as samples of a multivariate Gaussian.
struct GaussianStats {
    std::vector<double> mean;
    SymMatrix cov;
    std::size_t sample_count = 0;

    std::size_t dim() const noexcept { return mean.size(); }
};

struct LayerStyleLoss {
    std::string layer;
    double value = 0.0;
};

struct LossReport {
    double content_loss = 0.0;
    std::vector<LayerStyleLoss> style_losses;
};

/// Row means and the population covariance (divisor N) of the columns.
GaussianStats estimate_stats(const FeatureMap& f);

/// ‖transformed − original‖_F² / N.
double content_loss(const FeatureMap& original, const FeatureMap& transformed);

/// data·dataᵀ / (C·N), without mean subtraction.
SymMatrix gram_matrix(const FeatureMap& f);

/// ‖gram(f1) − gram(f2)‖_F²; position counts may differ.
double style_loss(const FeatureMap& f1, const FeatureMap& f2);

/**
 * @brief E‖t(u) − u‖² for u ~ N(μc, Σc) and t(u) = T(u − μc) + μs.
 *
 * Evaluated in closed form as tr(Σc) + tr(T·Σc·Tᵀ) − 2·tr(T·Σc) + ‖μs − μc‖².
 * Holds for any T; for T satisfying T·Σc·Tᵀ = Σs the middle term is tr(Σs).
 */
double expected_content_cost(const Matrix& t, std::span<const double> mu_c,
                             std::span<const double> mu_s, const GaussianStats& c);

/**
 * @brief `count` draws μ + Σ^{1/2}·z, z ~ N(0, I) from Rng(seed).
 *
 * z is filled column by column. Throws InvalidInput if Σ has an eigenvalue
 * below −1e-10·max(1, λ_max).
 */
FeatureMap sample_gaussian(const GaussianStats& stats, std::size_t count, std::uint64_t seed);

}  // namespace gaussot
