#include <catch_amalgamated.hpp>

#include <random>

#include "fdcp/covkernel.hpp"
#include "fdcp/error.hpp"
#include "fdcp/simulation.hpp"
#include "oracles.hpp"

using namespace fdcp;
using Catch::Approx;

namespace {

CurveSet levels(std::initializer_list<double> values, std::size_t m = 5) {
    Matrix x(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(m));
    Eigen::Index i = 0;
    for (double v : values) {
        x.row(i++).setConstant(v);
    }
    return CurveSet(x, make_grid(m));
}

CurveSet random_curves(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::normal_distribution<double> normal;
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            x(i, j) = normal(rng) + 0.3 * static_cast<double>(j);
        }
    }
    return CurveSet(x, make_grid(m));
}

double min_weighted_eigenvalue(const KernelEstimate& k) {
    const Vector root = k.grid->weights().array().sqrt();
    const Matrix b = root.asDiagonal() * k.values * root.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(b);
    return solver.eigenvalues()(0) / std::max(1e-300, solver.eigenvalues().maxCoeff());
}

}  // namespace

TEST_CASE("segment means on level curves", "[covkernel]") {
    const CurveSet x = levels({1, 3, 5, 7});
    const SegmentMeans means = segment_means(x, 2);
    CHECK((means.head_mean.array() - 2.0).abs().maxCoeff() < 1e-14);
    CHECK((means.tail_mean.array() - 6.0).abs().maxCoeff() < 1e-14);

    const SegmentMeans last = segment_means(x, 3);
    CHECK((last.tail_mean - x.values().row(3).transpose()).cwiseAbs().maxCoeff() == 0.0);

    const CurveSet flat = levels({2, 2, 2});
    CHECK((segment_means(flat, 1).head_mean.array() - 2.0).abs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(segment_means(x, 0), Error);
    CHECK_THROWS_AS(segment_means(x, 4), Error);

    std::mt19937_64 rng(1);
    const CurveSet r = random_curves(rng, 9, 7);
    const Vector grand = r.values().colwise().mean();
    for (std::size_t k = 1; k < 9; ++k) {
        const SegmentMeans s = segment_means(r, k);
        const Vector combined = (static_cast<double>(k) * s.head_mean + static_cast<double>(9 - k) * s.tail_mean) / 9.0;
        CHECK((combined - grand).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("pooled and split kernels on level curves", "[covkernel]") {
    const CurveSet x = levels({1, 3, 5, 7});
    CHECK((pooled_kernel(x).values.array() - 5.0).abs().maxCoeff() < 1e-12);
    CHECK((split_kernel(x, 2).values.array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(split_kernel(x, 2).split_k == 2u);
    CHECK(pooled_kernel(x).pooled());

    const CurveSet same = levels({4, 4, 4, 4});
    CHECK(pooled_kernel(same).values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(split_kernel(same, 2).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("boundary splits fall back to the pooled kernel", "[covkernel]") {
    const CurveSet two = levels({1, 2});
    CHECK(split_kernel(two, 1).values == pooled_kernel(two).values);
    std::mt19937_64 rng(2);
    const CurveSet r = random_curves(rng, 6, 4);
    CHECK((split_kernel(r, 1).values - pooled_kernel(r).values).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((split_kernel(r, 5).values - pooled_kernel(r).values).cwiseAbs().maxCoeff() < 1e-14);

    SplitOptions literal;
    literal.pooled_at_boundary = false;
    // A one-curve segment has zero deviation, so only the other segment counts.
    const Matrix expected = oracle::centred_kernel(
        r.values(), {r.values().row(0).transpose(), oracle::row_mean(r.values(), 1, 5), oracle::row_mean(r.values(), 1, 5),
                     oracle::row_mean(r.values(), 1, 5), oracle::row_mean(r.values(), 1, 5),
                     oracle::row_mean(r.values(), 1, 5)});
    CHECK((split_kernel(r, 1, literal).values - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kernel errors", "[covkernel]") {
    const CurveSet x = levels({1, 3, 5, 7});
    CHECK_THROWS_AS(split_kernel(x, 0), Error);
    CHECK_THROWS_AS(split_kernel(x, 4), Error);
    try {
        bias_correction_factor(2);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateCorrection);
    }
}

TEST_CASE("bias correction scales by the inverse of 1 - 2/N", "[covkernel]") {
    CHECK(bias_correction_factor(100) == Approx(1.0 / 0.98));
    CHECK(bias_correction_factor(1000000) == Approx(1.0).margin(1e-5));
    const CurveSet x = levels({1, 3, 5, 7});
    const KernelEstimate corrected = bias_correct(split_kernel(x, 2));
    CHECK(corrected.bias_corrected);
    CHECK((corrected.values.array() - 2.0).abs().maxCoeff() < 1e-12);
    const KernelEstimate zero = bias_correct(split_kernel(levels({2, 2, 2, 2}), 2));
    CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernels match the loop oracle and the sweep matches direct splits", "[covkernel]") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 5 + rep;
        const CurveSet x = random_curves(rng, n, 6);
        CHECK((pooled_kernel(x).values - oracle::pooled(x.values())).cwiseAbs().maxCoeff() < 1e-10);
        const auto sweep = kernel_sweep(x);
        REQUIRE(sweep.size() == n - 1);
        for (std::size_t k = 1; k < n; ++k) {
            const Matrix direct = split_kernel(x, k).values;
            CHECK((direct - oracle::split(x.values(), static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((sweep[k - 1].values - direct).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("sweep sub-ranges reproduce the full sweep exactly", "[covkernel]") {
    std::mt19937_64 rng(8);
    const CurveSet x = random_curves(rng, 12, 5);
    const auto full = kernel_sweep(x);
    std::vector<KernelEstimate> part;
    for_each_split_kernel(x, [&](const KernelEstimate& k) { part.push_back(k); }, {}, 4, 8);
    REQUIRE(part.size() == 5);
    for (std::size_t i = 0; i < part.size(); ++i) {
        CHECK(part[i].split_k == 4 + i);
        CHECK(part[i].values == full[3 + i].values);
    }
}

TEST_CASE("kernels are symmetric, PSD and dominated by the pooled kernel", "[covkernel]") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 5; ++rep) {
        const CurveSet x = random_curves(rng, 15, 8);
        const KernelEstimate pooled = pooled_kernel(x);
        for (const auto& k : kernel_sweep(x)) {
            CHECK((k.values - k.values.transpose()).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(min_weighted_eigenvalue(k) >= -1e-8);
            KernelEstimate gap = pooled;
            gap.values -= k.values;
            const Vector root = x.grid().weights().array().sqrt();
            const Matrix b = root.asDiagonal() * gap.values * root.asDiagonal();
            CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(b).eigenvalues()(0) >= -1e-10);
        }
    }
}

TEST_CASE("kernels ignore a common shift and scale quadratically", "[covkernel]") {
    std::mt19937_64 rng(10);
    const CurveSet x = random_curves(rng, 10, 6);
    Vector g(6);
    g << 1, -2, 3, 0.5, 4, -1;
    const CurveSet shifted(x.values().rowwise() + g.transpose(), x.grid_ptr());
    const CurveSet scaled(3.0 * x.values(), x.grid_ptr());
    CHECK((pooled_kernel(shifted).values - pooled_kernel(x).values).cwiseAbs().maxCoeff() < 1e-10);
    for (std::size_t k = 1; k < 10; ++k) {
        CHECK((split_kernel(shifted, k).values - split_kernel(x, k).values).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((split_kernel(scaled, k).values - 9.0 * split_kernel(x, k).values).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("bias attenuation factor", "[covkernel]") {
    CHECK(f_theta(0.5, 0.5) == 0.0);
    CHECK(f_theta(0.3, 0.3) == 0.0);
    CHECK(f_theta(1.0, 0.2) == Approx(1.0));
    CHECK(f_theta(1.0, 0.7) == Approx(1.0));
    CHECK(f_theta(0.25, 0.5) == Approx(2.0 / 3.0));
    for (double u = 0.01; u <= 1.0; u += 0.01) {
        const double f = f_theta(u, 0.4);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0 + 1e-15);
    }
    CHECK_THROWS_AS(f_theta(0.0, 0.5), Error);
    CHECK_THROWS_AS(f_theta(1.1, 0.5), Error);
    CHECK_THROWS_AS(f_theta(0.5, 1.0), Error);
    CHECK_THROWS_AS(DriftSpec(Vector::Ones(3), 0.0), Error);
}

TEST_CASE("target kernel adds the attenuated drift term", "[covkernel]") {
    const auto grid = make_grid(21);
    const KernelEstimate c = analytic_kernel(grid, [](double s, double t) { return std::min(s, t); });
    const DriftSpec drift(grid->points(), 0.5);
    CHECK(target_kernel(c, drift, 0.5).values == c.values);
    const Matrix full = c.values + 0.25 * grid->points() * grid->points().transpose();
    CHECK((target_kernel(c, drift, 1.0).values - full).cwiseAbs().maxCoeff() < 1e-14);
    const DriftSpec none(Vector::Zero(21), 0.3);
    for (double u : {0.1, 0.3, 0.8, 1.0}) {
        CHECK(target_kernel(c, none, u).values == c.values);
    }
    CHECK_THROWS_AS(target_kernel(c, DriftSpec(Vector::Zero(5), 0.3), 0.5), Error);
}

TEST_CASE("pooled kernel of Brownian motions approaches min(s,t)", "[covkernel]") {
    const auto grid = make_grid(21);
    const KernelEstimate truth = analytic_kernel(grid, [](double s, double t) { return std::min(s, t); });
    double previous = 1e9;
    for (std::size_t n : {100u, 1600u, 25600u}) {
        Rng rng = stream_rng(4, n);
        Matrix x(static_cast<Eigen::Index>(n), 21);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x.row(i) = simulate_bm(*grid, rng).transpose();
        }
        const double error = (pooled_kernel(CurveSet(x, grid)).values - truth.values).cwiseAbs().maxCoeff();
        CHECK(error < previous);
        previous = error;
    }
    CHECK(previous < 0.03);
}

TEST_CASE("integrated squared difference uses product quadrature", "[covkernel]") {
    const auto grid = make_grid(51);
    const KernelEstimate a = analytic_kernel(grid, [](double s, double t) { return s * t; });
    const KernelEstimate zero = analytic_kernel(grid, [](double, double) { return 0.0; });
    // ∫∫ s²t² = 1/9
    CHECK(integrated_squared_difference(a, zero) == Approx(1.0 / 9.0).epsilon(1e-3));
    CHECK(integrated_squared_difference(a, a) == 0.0);
}
