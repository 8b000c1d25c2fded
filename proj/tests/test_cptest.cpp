#include <catch_amalgamated.hpp>

#include <random>

#include "fdcp/cptest.hpp"
#include "fdcp/error.hpp"
#include "fdcp/rank_one.hpp"
#include "fdcp/simulation.hpp"
#include "oracles.hpp"

using namespace fdcp;
using Catch::Approx;

namespace {

CurveSet bm_sample(std::uint64_t seed, std::size_t n, std::size_t m, std::size_t k_star = 0, double size = 1.0) {
    const auto grid = make_grid(m);
    Rng rng = stream_rng(seed, 0);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x.row(i) = simulate_bm(*grid, rng).transpose();
        if (k_star > 0 && static_cast<std::size_t>(i) >= k_star) {
            x.row(i) += size * grid->points().transpose();
        }
    }
    return CurveSet(x, grid);
}

CriticalValueTable fixed_table() {
    CriticalValueTable table;
    table.set(1, 0.05, 0.4614);
    table.set(2, 0.05, 0.75);
    table.set(3, 0.05, 1.0);
    return table;
}

double max_relative(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double scale = 0.0;
    for (double v : b) {
        scale = std::max(scale, std::abs(v));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("scores are quadrature inner products", "[cptest]") {
    const auto grid = make_grid(11);
    EigenSystem system;
    system.grid = grid;
    system.eigenvalues = Vector::Ones(1);
    system.eigenfunctions = Matrix::Ones(11, 1);
    Matrix x(3, 11);
    x.row(0).setConstant(2.0);
    x.row(1).setConstant(-1.0);
    x.row(2) = grid->points().transpose();
    const Matrix eta = scores(CurveSet(x, grid), system);
    CHECK(eta(0, 0) == Approx(2.0));
    CHECK(eta(1, 0) == Approx(-1.0));
    CHECK(eta(2, 0) == Approx(0.5));
    CHECK_THROWS_AS(scores(CurveSet(x.leftCols(5), make_grid(5)), system), Error);
}

TEST_CASE("CUSUM process vanishes at k = N", "[cptest]") {
    const CurveSet x = bm_sample(1, 30, 41);
    for (auto mode : {StatisticMode::H, StatisticMode::S}) {
        for (auto engine : {Engine::Secular, Engine::Direct}) {
            ProcessOptions options;
            options.engine = engine;
            const CusumProcess r = r_process(x, 3, mode, options);
            REQUIRE(r.n() == 30);
            CHECK(std::abs(r.values.back()) < 1e-12);
            for (double v : r.values) {
                CHECK(v >= 0.0);
            }
        }
    }
}

TEST_CASE("input validation", "[cptest]") {
    const auto grid = make_grid(9);
    const CurveSet same(Matrix::Ones(10, 9), grid);
    for (auto engine : {Engine::Secular, Engine::Direct}) {
        ProcessOptions options;
        options.engine = engine;
        for (auto mode : {StatisticMode::H, StatisticMode::S}) {
            try {
                r_process(same, 2, mode, options);
                FAIL("expected an error");
            } catch (const Error& e) {
                CHECK(e.kind() == ErrorKind::DegenerateData);
            }
        }
    }
    try {
        r_process(CurveSet(Matrix::Random(2, 9), grid), 1, StatisticMode::H);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientSample);
    }
    CHECK_THROWS_AS(r_process(CurveSet(Matrix::Random(5, 9), grid), 0, StatisticMode::H), Error);
    CHECK(parse_mode("H") == StatisticMode::H);
    CHECK(parse_mode("S") == StatisticMode::S);
    CHECK_THROWS_AS(parse_mode("T"), Error);
}

TEST_CASE("engines agree with the definition", "[cptest]") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const std::size_t n = 8 + 7 * seed;
        const std::size_t m = seed % 2 == 0 ? 31 : 9;  // both N > M and N < M
        const CurveSet x = bm_sample(seed, n, m, n / 2, 0.5);
        const Vector w = oracle::trapezoid_weights(m);
        for (std::size_t d : {1u, 3u}) {
            const auto h = oracle::r_process(x.values(), w, d, true, true);
            const auto s = oracle::r_process(x.values(), w, d, false, false);
            ProcessOptions direct;
            direct.engine = Engine::Direct;
            CHECK(max_relative(r_process(x, d, StatisticMode::H).values, h) < 1e-8);
            CHECK(max_relative(r_process(x, d, StatisticMode::H, direct).values, h) < 1e-8);
            CHECK(max_relative(r_process(x, d, StatisticMode::S).values, s) < 1e-8);
            CHECK(max_relative(r_process(x, d, StatisticMode::S, direct).values, s) < 1e-8);

            ProcessOptions raw;
            raw.bias_correction = false;
            const auto h_raw = oracle::r_process(x.values(), w, d, true, false);
            CHECK(max_relative(r_process(x, d, StatisticMode::H, raw).values, h_raw) < 1e-8);
        }
    }
}

TEST_CASE("direct engine is independent of the thread count", "[cptest]") {
    const CurveSet x = bm_sample(3, 40, 21, 20);
    ProcessOptions one;
    one.engine = Engine::Direct;
    ProcessOptions four = one;
    four.threads = 4;
    CHECK(r_process(x, 3, StatisticMode::H, one).values == r_process(x, 3, StatisticMode::H, four).values);
}

TEST_CASE("rank-one downdate matches a dense eigensolver", "[cptest]") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 20; ++rep) {
        const int r = 2 + rep % 7;
        std::vector<double> lambda(static_cast<std::size_t>(r));
        std::vector<double> z(static_cast<std::size_t>(r));
        for (int j = 0; j < r; ++j) {
            lambda[static_cast<std::size_t>(j)] = std::exp(-0.7 * j) + 0.01 * std::abs(normal(rng));
            z[static_cast<std::size_t>(j)] = normal(rng);
        }
        std::sort(lambda.rbegin(), lambda.rend());
        if (rep % 5 == 0) {
            z[1] = 0.0;  // decoupled component
        }
        const double rho = 0.05 + 0.01 * rep;
        Eigen::Map<const Vector> lv(lambda.data(), r);
        Eigen::Map<const Vector> zv(z.data(), r);
        const Matrix dense = Matrix(lv.asDiagonal()) - rho * zv * zv.transpose();
        const Eigen::SelfAdjointEigenSolver<Matrix> solver(dense);
        const std::size_t count = static_cast<std::size_t>(std::min(r, 3));
        const auto modes = rank_one_downdate(lambda, z, rho, count);
        REQUIRE(modes.size() == count);
        for (std::size_t l = 0; l < count; ++l) {
            const Eigen::Index idx = r - 1 - static_cast<Eigen::Index>(l);
            const double proj = zv.dot(solver.eigenvectors().col(idx));
            CHECK(modes[l].eigenvalue == Approx(solver.eigenvalues()(idx)).epsilon(1e-10).margin(1e-13));
            CHECK(modes[l].projection_sq == Approx(proj * proj).epsilon(1e-8).margin(1e-12));
        }
    }
}

TEST_CASE("argmax takes the first maximiser", "[cptest]") {
    CusumProcess p;
    p.values = {1.0, 3.0, 3.0, 2.0};
    CHECK(argmax_split(p) == 2);
    CHECK(estimate_change_point(p) == 0.5);
    CHECK(h_statistic(p) == Approx(2.25));
    CHECK_THROWS_AS(h_statistic(CusumProcess{}), Error);
}

TEST_CASE("decision rule is strict", "[cptest]") {
    CriticalValueTable table = fixed_table();
    CHECK_FALSE(decide(1.0, 3, 0.05, table).reject);
    CHECK(decide(std::nextafter(1.0, 2.0), 3, 0.05, table).reject);
    CHECK_FALSE(decide(0.5, 3, 0.05, table).p_value.has_value());
    table.set_sample(3, {0.1, 0.5, 1.2, 2.0});
    const TestResult r = decide(1.2, 3, 0.05, table);
    REQUIRE(r.p_value.has_value());
    CHECK(*r.p_value == Approx(3.0 / 5.0));
    try {
        decide(1.0, 4, 0.05, table);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TableMiss);
    }
}

TEST_CASE("test statistics ignore shifts and scaling of the data", "[cptest]") {
    const CurveSet x = bm_sample(5, 50, 21, 25);
    Vector g = Vector::LinSpaced(21, -3.0, 5.0);
    const CurveSet moved((2.5 * x.values()).rowwise() + g.transpose(), x.grid_ptr());
    for (auto mode : {StatisticMode::H, StatisticMode::S}) {
        CHECK(max_relative(r_process(moved, 3, mode).values, r_process(x, 3, mode).values) < 1e-8);
    }
}

TEST_CASE("reversing time mirrors the process", "[cptest]") {
    const CurveSet x = bm_sample(6, 40, 21, 12);
    const CurveSet reversed(x.values().colwise().reverse(), x.grid_ptr());
    for (auto mode : {StatisticMode::H, StatisticMode::S}) {
        const auto a = r_process(x, 2, mode).values;
        const auto b = r_process(reversed, 2, mode).values;
        for (std::size_t k = 1; k < 40; ++k) {
            CHECK(b[k - 1] == Approx(a[40 - k - 1]).epsilon(1e-8));
        }
    }
}

TEST_CASE("a strong change is detected and located", "[cptest]") {
    const CurveSet x = bm_sample(7, 100, 51, 50, 3.0);
    const CriticalValueTable table = fixed_table();
    for (auto mode : {StatisticMode::H, StatisticMode::S}) {
        const TestResult r = run_test(x, 3, 0.05, mode, table);
        CHECK(r.reject);
        CHECK(r.n == 100);
        CHECK(r.mode == mode);
        CHECK(std::abs(static_cast<int>(r.change_index) - 50) <= 2);
        CHECK(r.theta_hat == Approx(static_cast<double>(r.change_index) / 100.0));
    }
    CHECK_THROWS_AS(run_test(x, 4, 0.05, StatisticMode::H, table), Error);
}

TEST_CASE("binary segmentation recovers two changes", "[cptest]") {
    const auto grid = make_grid(51);
    Rng rng = stream_rng(8, 0);
    Matrix x(120, 51);
    for (Eigen::Index i = 0; i < 120; ++i) {
        x.row(i) = simulate_bm(*grid, rng).transpose();
        if (i >= 40) {
            x.row(i).array() += 3.0;
        }
        if (i >= 80) {
            x.row(i) += 3.0 * grid->points().transpose();
        }
    }
    const CurveSet curves(x, grid);
    for (auto mode : {StatisticMode::H, StatisticMode::S}) {
        const SegmentationTree tree = binary_segmentation(curves, DRule::fixed_d(3), 0.05, 10, mode, fixed_table());
        REQUIRE(tree.change_points.size() >= 2);
        CHECK(std::abs(static_cast<int>(tree.change_points.front()) - 40) <= 2);
        CHECK(std::abs(static_cast<int>(tree.change_points.back()) - 80) <= 2);
        REQUIRE_FALSE(tree.nodes.empty());
        CHECK(tree.nodes[0].first == 0);
        CHECK(tree.nodes[0].end == 120);
        CHECK(tree.nodes[0].split.has_value());
        for (std::size_t leaf : tree.leaves()) {
            const SegmentNode& node = tree.nodes[leaf];
            CHECK(!node.split.has_value());
            CHECK((node.annotation == "too-short" || (node.result && !node.result->reject)));
            REQUIRE(node.parent.has_value());
            CHECK(tree.nodes[*node.parent].depth + 1 == node.depth);
        }
    }
}

TEST_CASE("segmentation edge cases", "[cptest]") {
    const CurveSet x = bm_sample(9, 20, 11);
    const SegmentationTree short_root = binary_segmentation(x, DRule::fixed_d(1), 0.05, 30, StatisticMode::H, fixed_table());
    REQUIRE(short_root.nodes.size() == 1);
    CHECK(short_root.nodes[0].annotation == "too-short");
    CHECK(short_root.change_points.empty());
    CHECK_THROWS_AS(binary_segmentation(x, DRule::fixed_d(1), 0.05, 4, StatisticMode::H, fixed_table()), Error);
    const CurveSet flat(Matrix::Ones(20, 11), x.grid_ptr());
    CHECK_THROWS_AS(binary_segmentation(flat, DRule::fixed_d(1), 0.05, 10, StatisticMode::H, fixed_table()), Error);
    CHECK(DRule::explained(0.85).resolve(bm_sample(10, 200, 101)) >= 1);
    CHECK(DRule::fixed_d(2).resolve(x) == 2);
}

TEST_CASE("statistics grow linearly in N under a fixed change", "[cptest]") {
    std::vector<double> ratios;
    for (std::size_t n : {100u, 400u}) {
        SimConfig config;
        config.n = n;
        config.k_star = n / 2;
        config.preprocessing = Preprocessing::Direct;
        config.working_m = 51;
        config.seed = 12;
        const CurveSet sample = SampleGenerator(config).draw(0);
        for (auto mode : {StatisticMode::H, StatisticMode::S}) {
            ratios.push_back(h_statistic(r_process(sample, 3, mode)) / static_cast<double>(n));
        }
    }
    // H/N and S/N settle at a positive constant rather than shrinking.
    CHECK(ratios[2] > 0.5 * ratios[0]);
    CHECK(ratios[3] > 0.5 * ratios[1]);
    CHECK(ratios[2] > 0.01);
}
