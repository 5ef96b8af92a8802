#include "gaussot/error.hpp"
#include "gaussot/transforms.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace gaussot;
using gaussot::testing::make_stats;
using gaussot::testing::max_abs_diff;
using gaussot::testing::naive_product;
using gaussot::testing::random_features;
using gaussot::testing::random_spd;
using gaussot::testing::random_vector;

namespace {

GaussianStats diag_stats(double a, double b, std::vector<double> mean = {0.0, 0.0}) {
    return make_stats(std::move(mean), SymMatrix{{a, 0.0}, {0.0, b}});
}

// Non-commuting pair used throughout.
const GaussianStats kContent = make_stats({0.0, 0.0}, SymMatrix{{2.0, 1.0}, {1.0, 2.0}});
const GaussianStats kStyle = make_stats({1.0, -1.0}, SymMatrix{{3.0, 0.0}, {0.0, 1.0}});

double min_eigenvalue(const Matrix& m) { return sym_eigen(SymMatrix(m)).values.back(); }

}  // namespace

TEST_CASE("ost_map examples") {
    SUBCASE("equal statistics give the identity") {
        const auto g = make_stats({1.0, 2.0, 3.0}, random_spd(3, 20.0, 5));
        const auto t = ost_map(g, g, 0.0);
        CHECK(max_abs_diff(t.matrix, Matrix::identity(3)) <= 1e-9);
    }
    SUBCASE("identity content covariance gives the style square root") {
        const auto s = make_stats({0.0, 0.0, 0.0}, random_spd(3, 50.0, 9));
        const auto c = make_stats({0.0, 0.0, 0.0}, SymMatrix::identity(3));
        const auto t = ost_map(c, s, 0.0);
        CHECK(max_abs_diff(t.matrix, spd_pow(s.cov, 0.5, 0.0).matrix()) <= 1e-12);
    }
    SUBCASE("commuting diagonal pair") {
        const auto t = ost_map(diag_stats(4, 1), diag_stats(1, 9), 0.0);
        CHECK(max_abs_diff(t.matrix, Matrix{{0.5, 0.0}, {0.0, 3.0}}) <= 1e-14);
    }
    SUBCASE("non-commuting pair") {
        const auto t = ost_map(kContent, kStyle, 0.0);
        CHECK(covariance_residual(t.matrix, kContent.cov, kStyle.cov) <= 1e-9);
        CHECK(t.matrix == t.matrix.transposed());
        CHECK(min_eigenvalue(t.matrix) >= -1e-10);
        CHECK(t.mu_c == kContent.mean);
        CHECK(t.mu_s == kStyle.mean);
        const double ost_cost = expected_content_cost(t, kContent, kStyle);
        const RotationFamily family(kContent, kStyle, 0.0);
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            const auto r = family.map(random_orthogonal(2, seed));
            CHECK(expected_content_cost(r, kContent, kStyle) >= ost_cost - 1e-9 * trace(kContent.cov));
        }
    }
    SUBCASE("singular content without ridge") {
        const auto c = diag_stats(1.0, 0.0);
        try {
            ost_map(c, kStyle, 0.0);
            FAIL("expected SingularMatrix");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SingularMatrix);
        }
        CHECK_NOTHROW(ost_map(c, kStyle));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(ost_map(kContent, make_stats({0.0}, SymMatrix{{1.0}}), 0.0), Error);
    }
}

TEST_CASE("ost closed form agrees with the cross-covariance form") {
    // Independent route through the cross-covariance: (T⁻¹)ᵀ = Σc^{1/2} M^{-1/2} Σc^{1/2}
    // with M = Σc^{1/2} Σs Σc^{1/2}, so T times its transpose must be the identity.
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto c = make_stats(random_vector(4, seed), random_spd(4, 100.0, seed + 1));
        const auto s = make_stats(random_vector(4, seed + 2), random_spd(4, 100.0, seed + 3));
        const Matrix root_c = spd_pow(c.cov, 0.5, 0.0).matrix();
        const SymMatrix m(naive_product(naive_product(root_c, s.cov.matrix()), root_c));
        const Matrix inv_t_transposed =
            naive_product(naive_product(root_c, spd_pow(m, -0.5, 0.0).matrix()), root_c);
        const auto t = ost_map(c, s, 0.0);
        CHECK(max_abs_diff(naive_product(t.matrix, inv_t_transposed.transposed()),
                           Matrix::identity(4)) <= 1e-9);
    }
}

TEST_CASE("wct_map examples") {
    const auto g = make_stats({0.0, 0.0}, SymMatrix{{2.0, 0.5}, {0.5, 1.0}});
    CHECK(max_abs_diff(wct_map(g, g, 0.0).matrix, Matrix::identity(2)) <= 1e-12);
    CHECK(max_abs_diff(wct_map(diag_stats(4, 1), diag_stats(1, 9), 0.0).matrix,
                       Matrix{{0.5, 0.0}, {0.0, 3.0}}) <= 1e-14);
    const auto t = wct_map(kContent, kStyle, 0.0);
    CHECK(covariance_residual(t.matrix, kContent.cov, kStyle.cov) <= 1e-9);
    CHECK(max_abs_diff(t.matrix, t.matrix.transposed()) > 1e-3);
}

TEST_CASE("adain_map") {
    CHECK(max_abs_diff(adain_map(kContent, kContent).matrix, Matrix::identity(2)) == 0.0);
    CHECK(adain_map(diag_stats(4, 1), diag_stats(1, 9)).matrix == Matrix{{0.5, 0.0}, {0.0, 3.0}});

    // correlated content, uncorrelated style with identical variances
    const auto c = make_stats({0.0, 0.0}, SymMatrix{{1.0, 0.9}, {0.9, 1.0}});
    const auto s = make_stats({0.0, 0.0}, SymMatrix::identity(2));
    const auto t = adain_map(c, s);
    const Matrix implied = t.matrix * c.cov.matrix() * t.matrix.transposed();
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(implied(i, i) - s.cov(i, i)) <= 1e-10);
    CHECK(covariance_residual(t.matrix, c.cov, s.cov) > 0.1);

    // zero-variance content channel is floored, not an error
    const auto flat = diag_stats(0.0, 1.0);
    const auto tf = adain_map(flat, diag_stats(1.0, 1.0));
    CHECK(std::isfinite(tf.matrix(0, 0)));
}

TEST_CASE("adain matches diagonals on sampled pairs") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t dim = 2 + seed % 7;
        const auto c = make_stats(random_vector(dim, seed), random_spd(dim, 1e3, seed + 10));
        const auto s = make_stats(random_vector(dim, seed + 1), random_spd(dim, 1e3, seed + 20));
        const auto t = adain_map(c, s);
        const Matrix implied = t.matrix * c.cov.matrix() * t.matrix.transposed();
        for (std::size_t i = 0; i < dim; ++i) {
            CHECK(std::abs(implied(i, i) - s.cov(i, i)) <= 1e-10);
        }
    }
}

TEST_CASE("rotated_wct_map") {
    const auto wct = wct_map(kContent, kStyle, 0.0);
    const auto rotated = rotated_wct_map(kContent, kStyle, OrthogonalMatrix::identity(2), 0.0);
    CHECK(max_abs_diff(wct.matrix, rotated.matrix) <= 1e-15);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = rotated_wct_map(kContent, kStyle, random_orthogonal(2, seed), 0.0);
        CHECK(covariance_residual(r.matrix, kContent.cov, kStyle.cov) <= 1e-9);
    }
    CHECK_THROWS_AS(rotated_wct_map(kContent, kStyle, random_orthogonal(3, 1), 0.0), Error);
}

TEST_CASE("covariance matching over sampled SPD pairs") {
    for (std::size_t dim : {2u, 8u, 32u, 64u}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const double cond = std::pow(10.0, 1.0 + static_cast<double>(seed) * 2.5);
            const auto c = make_stats(random_vector(dim, seed), random_spd(dim, cond, seed + dim));
            const auto s = make_stats(random_vector(dim, seed + 5), random_spd(dim, cond, seed + 3 * dim));
            CAPTURE(dim);
            CAPTURE(cond);
            CHECK(covariance_residual(ost_map(c, s, 0.0).matrix, c.cov, s.cov) <= 1e-6);
            CHECK(covariance_residual(wct_map(c, s, 0.0).matrix, c.cov, s.cov) <= 1e-6);
            CHECK(covariance_residual(
                      rotated_wct_map(c, s, random_orthogonal(dim, seed), 0.0).matrix, c.cov,
                      s.cov) <= 1e-6);
        }
    }
}

TEST_CASE("OST beats WCT and rotated maps; ties WCT on commuting pairs") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t dim = 2 + seed % 4;
        const auto c = make_stats(random_vector(dim, seed), random_spd(dim, 100.0, seed + 40));
        const auto s = make_stats(random_vector(dim, seed + 1), random_spd(dim, 100.0, seed + 50));
        const double ost = expected_content_cost(ost_map(c, s, 0.0), c, s);
        const double wct = expected_content_cost(wct_map(c, s, 0.0), c, s);
        CHECK(ost <= wct + 1e-9 * trace(c.cov));
    }
    const auto c = diag_stats(4.0, 0.25);
    const auto s = diag_stats(0.5, 7.0, {1.0, 1.0});
    const double ost = expected_content_cost(ost_map(c, s, 0.0), c, s);
    const double wct = expected_content_cost(wct_map(c, s, 0.0), c, s);
    CHECK(std::abs(ost - wct) <= 1e-9 * ost);
}

TEST_CASE("whiten_map") {
    const auto id = make_stats({1.0, 2.0}, SymMatrix::identity(2));
    for (auto m : {WhiteningMethod::ZCA, WhiteningMethod::PCA, WhiteningMethod::Cholesky}) {
        const auto w = whiten_map(id, m, 0.0);
        CHECK(covariance_residual(w.matrix, id.cov, SymMatrix::identity(2)) <= 1e-14);
        CHECK(w.mu_s == std::vector<double>{0.0, 0.0});
    }
    CHECK(whiten_map(id, WhiteningMethod::ZCA, 0.0).matrix == Matrix::identity(2));

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t dim = 2 + seed % 10;
        const auto c = make_stats(random_vector(dim, seed), random_spd(dim, 1e4, seed + 60));
        for (auto m : {WhiteningMethod::ZCA, WhiteningMethod::PCA, WhiteningMethod::Cholesky}) {
            const auto w = whiten_map(c, m, 0.0);
            const Matrix implied = naive_product(naive_product(w.matrix, c.cov.matrix()),
                                                 w.matrix.transposed());
            CHECK(frobenius_norm(implied - Matrix::identity(dim)) <= 1e-8);
        }
    }
}

TEST_CASE("ZCA has the smallest expected displacement among whitening methods") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t dim = 2 + seed % 9;
        const auto c = make_stats(random_vector(dim, seed), random_spd(dim, 1e3, seed + 70));
        const auto white = make_stats(std::vector<double>(dim, 0.0), SymMatrix::identity(dim));
        const double zca =
            expected_content_cost(whiten_map(c, WhiteningMethod::ZCA, 0.0), c, white);
        const double pca =
            expected_content_cost(whiten_map(c, WhiteningMethod::PCA, 0.0), c, white);
        const double chol =
            expected_content_cost(whiten_map(c, WhiteningMethod::Cholesky, 0.0), c, white);
        CHECK(zca <= pca);
        CHECK(zca <= chol);
    }
}

TEST_CASE("apply_transform") {
    const FeatureMap f = random_features(3, 40, 12);
    const auto g = estimate_stats(f);
    const auto s = make_stats(random_vector(3, 1), random_spd(3, 10.0, 2));
    const auto t = ost_map(g, s);

    SUBCASE("alpha 0 returns the input") { CHECK(apply_transform(f, t, 0.0) == f); }
    SUBCASE("identity transform") {
        const AffineTransform id{Matrix::identity(3), g.mean, g.mean};
        CHECK(max_abs_diff(apply_transform(f, id, 1.0).data(), f.data()) <= 1e-14);
    }
    SUBCASE("statistics round trip") {
        const FeatureMap style_features = sample_gaussian(s, 2000, 5);
        const auto fitted = estimate_stats(style_features);
        const auto content = estimate_stats(f);
        const auto moved = estimate_stats(apply_transform(f, ost_map(content, fitted, 0.0), 1.0));
        CHECK(max_abs_diff(moved.cov.matrix(), fitted.cov.matrix()) <= 1e-9);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(moved.mean[i] - fitted.mean[i]) <= 1e-9);
    }
    SUBCASE("blend linearity") {
        const FeatureMap full = apply_transform(f, t, 1.0);
        for (double alpha : {0.1, 0.25, 0.5, 0.9}) {
            const FeatureMap blended = apply_transform(f, t, alpha);
            const Matrix expected = alpha * full.data() + (1.0 - alpha) * f.data();
            CHECK(max_abs_diff(blended.data(), expected) <= 1e-12);
        }
    }
    SUBCASE("mean matching") {
        const auto moved = estimate_stats(apply_transform(f, t, 1.0));
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(moved.mean[i] - s.mean[i]) <= 1e-9);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(apply_transform(f, t, 1.5), Error);
        CHECK_THROWS_AS(apply_transform(f, t, -0.1), Error);
        CHECK_THROWS_AS(apply_transform(random_features(2, 5, 1), t, 1.0), Error);
    }
}

TEST_CASE("make_transform dispatches every kind") {
    const auto c = make_stats(random_vector(3, 1), random_spd(3, 10.0, 3));
    const auto s = make_stats(random_vector(3, 2), random_spd(3, 10.0, 4));
    CHECK(make_transform(kind::Ost{}, c, s).matrix == ost_map(c, s).matrix);
    CHECK(make_transform(kind::Wct{}, c, s).matrix == wct_map(c, s).matrix);
    CHECK(make_transform(kind::AdaIn{}, c, s).matrix == adain_map(c, s).matrix);
    CHECK(make_transform(kind::RotatedWct{7}, c, s).matrix ==
          rotated_wct_map(c, s, random_orthogonal(3, 7)).matrix);
    CHECK(make_transform(kind::WhitenOnly{WhiteningMethod::PCA}, c, s).matrix ==
          whiten_map(c, WhiteningMethod::PCA).matrix);
    CHECK(transform_name(kind::WhitenOnly{WhiteningMethod::Cholesky}) == "whiten-cholesky");
    CHECK(transform_name(kind::RotatedWct{}) == "rotated-wct");
}

TEST_CASE("semantic_transform") {
    SUBCASE("single label equals the global transform") {
        const FeatureMap fc = random_features(4, 30, 1);
        const FeatureMap fs = random_features(4, 50, 2);
        const RegionMask mc(std::vector<std::int64_t>(30, 3));
        const RegionMask ms(std::vector<std::int64_t>(50, 3));
        for (const TransformKind& k : std::vector<TransformKind>{kind::Ost{}, kind::Wct{}, kind::AdaIn{}}) {
            const auto global = apply_transform(
                fc, make_transform(k, estimate_stats(fc), estimate_stats(fs)), 0.7);
            CHECK(semantic_transform(fc, fs, mc, ms, k, 0.7) == global);
        }
    }
    SUBCASE("two regions receive their own style means") {
        // content: region 0 constant (0, 0), region 1 constant (10, 10)
        Matrix c(2, 6);
        std::vector<std::int64_t> lc{0, 1, 0, 1, 0, 1};
        for (std::size_t n = 0; n < 6; ++n) {
            c(0, n) = lc[n] == 0 ? 0.0 : 10.0;
            c(1, n) = lc[n] == 0 ? 0.0 : 10.0;
        }
        // style: region 0 around (5, 5), region 1 around (-3, 2)
        Matrix s{{4.0, 6.0, 5.0, -4.0, -2.0, -3.0}, {5.0, 5.0, 5.0, 1.0, 3.0, 2.0}};
        std::vector<std::int64_t> ls{0, 0, 0, 1, 1, 1};
        const FeatureMap out = semantic_transform(FeatureMap(c), FeatureMap(s), RegionMask(lc),
                                                  RegionMask(ls), kind::Ost{}, 1.0);
        for (std::size_t n = 0; n < 6; ++n) {
            const double ex = lc[n] == 0 ? 5.0 : -3.0;
            const double ey = lc[n] == 0 ? 5.0 : 2.0;
            CHECK(out.data()(0, n) == doctest::Approx(ex).epsilon(1e-12));
            CHECK(out.data()(1, n) == doctest::Approx(ey).epsilon(1e-12));
        }
    }
    SUBCASE("one-pixel region passes through") {
        const FeatureMap fc = random_features(3, 10, 4);
        const FeatureMap fs = random_features(3, 10, 5);
        std::vector<std::int64_t> lc(10, 0);
        lc[7] = 1;
        std::vector<std::int64_t> ls(10, 0);
        ls[0] = 1;
        ls[1] = 1;
        const FeatureMap out =
            semantic_transform(fc, fs, RegionMask(lc), RegionMask(ls), kind::Ost{}, 1.0);
        for (std::size_t r = 0; r < 3; ++r) CHECK(out.data()(r, 7) == fc.data()(r, 7));
        CHECK(out.data()(0, 0) != fc.data()(0, 0));
    }
    SUBCASE("missing style region") {
        const FeatureMap fc = random_features(3, 4, 4);
        const FeatureMap fs = random_features(3, 4, 5);
        try {
            semantic_transform(fc, fs, RegionMask({0, 0, 2, 2}), RegionMask({0, 0, 1, 1}),
                               kind::Ost{}, 1.0);
            FAIL("expected MissingStyleRegion");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MissingStyleRegion);
            CHECK(std::string(e.what()).find('2') != std::string::npos);
        }
    }
    SUBCASE("mask length mismatch") {
        const FeatureMap fc = random_features(3, 4, 4);
        CHECK_THROWS_AS(semantic_transform(fc, fc, RegionMask({0, 0, 0}), RegionMask({0, 0, 0, 0}),
                                           kind::Ost{}, 1.0),
                        Error);
    }
}
