#pragma once

// Shared helpers for the unit and acceptance suites: seeded SPD generators,
// scratch directories and naive reference computations.

#include "gaussot/imageio.hpp"
#include "gaussot/linalg.hpp"
#include "gaussot/random.hpp"
#include "gaussot/stats.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

namespace gaussot::testing {

/// SPD matrix Q·diag(λ)·Qᵀ with condition number exactly `condition`
/// (λ_max = scale, λ_min = scale / condition, interior log-uniform).
inline SymMatrix random_spd(std::size_t dim, double condition, std::uint64_t seed,
                            double scale = 1.0) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<double> lambda(dim);
    const double log_cond = std::log(condition);
    for (std::size_t i = 0; i < dim; ++i) {
        double u = rng.uniform();
        if (i == 0) u = 0.0;
        if (i == 1) u = 1.0;
        lambda[i] = scale * std::exp(-u * log_cond);
    }
    if (dim == 1) lambda[0] = scale;
    const Matrix q = random_orthogonal(dim, seed).matrix();
    Matrix scaled = q;
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) scaled(r, c) *= lambda[c];
    }
    return SymMatrix(scaled * q.transposed());
}

inline std::vector<double> random_vector(std::size_t dim, std::uint64_t seed, double spread = 1.0) {
    Rng rng(seed);
    std::vector<double> v(dim);
    for (double& x : v) x = spread * rng.normal();
    return v;
}

inline GaussianStats make_stats(std::vector<double> mean, SymMatrix cov) {
    return GaussianStats{std::move(mean), std::move(cov), 0};
}

inline FeatureMap random_features(std::size_t channels, std::size_t positions,
                                  std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(channels, positions);
    for (double& v : m.values()) v = rng.normal();
    return FeatureMap(std::move(m));
}

// Monte-Carlo estimate of E‖T(u − μc) + μs − u‖² with u drawn through a
// Cholesky factor, independent of sample_gaussian's symmetric square root.
inline double monte_carlo_cost(const Matrix& t, const std::vector<double>& mu_c,
                               const std::vector<double>& mu_s, const SymMatrix& cov_c,
                               std::size_t samples, std::uint64_t seed) {
    const std::size_t n = mu_c.size();
    const Matrix l = cholesky_lower(cov_c);
    Rng rng(seed);
    std::vector<double> z(n), u(n);
    long double total = 0.0L;
    for (std::size_t k = 0; k < samples; ++k) {
        for (double& zi : z) zi = rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            double acc = mu_c[i];
            for (std::size_t j = 0; j <= i; ++j) acc += l(i, j) * z[j];
            u[i] = acc;
        }
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double tu = mu_s[i];
            for (std::size_t j = 0; j < n; ++j) tu += t(i, j) * (u[j] - mu_c[j]);
            const double d = tu - u[i];
            sq += d * d;
        }
        total += sq;
    }
    return static_cast<double>(total / static_cast<long double>(samples));
}

/// Naive triple loop, no shared code with Matrix::operator*.
inline Matrix naive_product(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            long double acc = 0.0L;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += static_cast<long double>(a(i, k)) * b(k, j);
            out(i, j) = static_cast<double>(acc);
        }
    }
    return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    }
    return m;
}

inline double orthogonality_error(const Matrix& q) {
    return max_abs_diff(naive_product(q.transposed(), q), Matrix::identity(q.rows()));
}

/// Image whose pixels are mean + mix·u with u uniform in [-1, 1]³. Callers pick
/// mean and mix so that every pixel stays inside [0, 1].
inline Image noise_image(std::size_t width, std::size_t height, const double (&mean)[3],
                         const double (&mix)[3][3], std::uint64_t seed) {
    Rng rng(seed);
    Image img(width, height);
    for (std::size_t p = 0; p < width * height; ++p) {
        const double u[3] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        for (std::size_t c = 0; c < 3; ++c) {
            img.pixels[p * 3 + c] = mean[c] + mix[c][0] * u[0] + mix[c][1] * u[1] + mix[c][2] * u[2];
        }
    }
    return img;
}

inline Image red_noise(std::size_t width, std::size_t height, std::uint64_t seed) {
    return noise_image(width, height, {0.65, 0.3, 0.25},
                       {{0.12, 0.02, 0.0}, {0.03, 0.06, 0.01}, {0.0, 0.02, 0.05}}, seed);
}

inline Image blue_noise(std::size_t width, std::size_t height, std::uint64_t seed) {
    return noise_image(width, height, {0.3, 0.4, 0.6},
                       {{0.05, 0.0, 0.03}, {0.02, 0.07, -0.02}, {0.04, -0.03, 0.1}}, seed);
}

class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("gaussot_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace gaussot::testing
