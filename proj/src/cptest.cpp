#include "fdcp/cptest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "fdcp/error.hpp"
#include "fdcp/parallel.hpp"
#include "fdcp/rank_one.hpp"

namespace fdcp {

const char* to_string(StatisticMode mode) noexcept { return mode == StatisticMode::H ? "H" : "S"; }

StatisticMode parse_mode(const std::string& text) {
    if (text == "H" || text == "h") {
        return StatisticMode::H;
    }
    if (text == "S" || text == "s") {
        return StatisticMode::S;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown statistic mode '" + text + "' (expected H or S)");
}

namespace {

bool at_boundary(std::size_t k, std::size_t n) { return k == 1 || k + 1 == n; }

std::string reduced_warning(std::size_t k, std::size_t used, std::size_t d) {
    return "split " + std::to_string(k) + ": " + std::to_string(d - used) +
           " eigenmode(s) below the floor dropped, d reduced to " + std::to_string(used);
}

void check_process_input(const CurveSet& curves, std::size_t d) {
    if (curves.count() < 3) {
        throw Error(ErrorKind::InsufficientSample, "the CUSUM process needs at least three curves");
    }
    if (d < 1) {
        throw Error(ErrorKind::InvalidArgument, "d must be at least 1");
    }
}

// Pooled kernel spectrum in the quadrature metric together with the
// coordinates of every centred curve along each retained eigenfunction.
struct PooledBasis {
    std::vector<double> eigenvalues;  // descending, numerically nonzero
    Matrix projections;               // N x r
    double trace = 0.0;
};

PooledBasis pooled_basis(const CurveSet& curves) {
    const auto n = static_cast<Eigen::Index>(curves.count());
    const auto m = static_cast<Eigen::Index>(curves.grid_size());
    const Vector& w = curves.grid().weights();
    const Matrix centered = curves.values().rowwise() - curves.values().colwise().mean();
    const double inv_n = 1.0 / static_cast<double>(n);

    PooledBasis out;
    out.trace = (centered.array().square().rowwise() * w.transpose().array()).sum() * inv_n;
    if (!(out.trace > 0.0)) {
        throw Error(ErrorKind::DegenerateData, "all curves are identical");
    }

    Vector values;
    Matrix coordinates;
    if (n <= m) {
        // Dual problem: the Gram matrix of the centred curves shares the
        // nonzero spectrum, and the curve coordinates are sqrt(N λ) a_j.
        Matrix gram = centered * w.asDiagonal() * centered.transpose() * inv_n;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (gram + gram.transpose()));
        values = solver.eigenvalues().reverse();
        coordinates = solver.eigenvectors().rowwise().reverse();
        for (Eigen::Index j = 0; j < values.size(); ++j) {
            coordinates.col(j) *= std::sqrt(std::max(values(j), 0.0) * static_cast<double>(n));
        }
    } else {
        const Vector root = w.cwiseSqrt();
        const Matrix scaled = centered * root.asDiagonal();
        Matrix weighted = scaled.transpose() * scaled * inv_n;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (weighted + weighted.transpose()));
        values = solver.eigenvalues().reverse();
        coordinates = scaled * solver.eigenvectors().rowwise().reverse();
    }
    const double keep_above = 1e-3 * kEigenFloorRatio * out.trace;
    Eigen::Index r = 0;
    while (r < values.size() && values(r) > keep_above) {
        ++r;
    }
    out.eigenvalues.assign(values.data(), values.data() + r);
    out.projections = coordinates.leftCols(r);
    return out;
}

CusumProcess secular_process(const CurveSet& curves, std::size_t d, StatisticMode mode,
                             const ProcessOptions& options) {
    const std::size_t n = curves.count();
    const double nd = static_cast<double>(n);
    const PooledBasis basis = pooled_basis(curves);
    const std::size_t r = basis.eigenvalues.size();
    const bool per_split = mode == StatisticMode::H;
    const double scale = per_split && options.bias_correction ? bias_correction_factor(n) : 1.0;

    CusumProcess out;
    out.d = d;
    out.mode = mode;
    out.values.assign(n, 0.0);
    out.modes_used.assign(n, 0);

    const Vector total = basis.projections.colwise().sum().transpose();
    Vector head = Vector::Zero(static_cast<Eigen::Index>(r));
    Vector delta(static_cast<Eigen::Index>(r));
    std::vector<DowndateMode> modes;

    for (std::size_t k = 1; k < n; ++k) {
        head += basis.projections.row(static_cast<Eigen::Index>(k - 1)).transpose();
        const double kd = static_cast<double>(k);
        // Difference of the segment means; the CUSUM vector is N rho delta.
        delta = head / kd - (total - head) / (nd - kd);
        const double rho = kd * (nd - kd) / (nd * nd);

        double trace = basis.trace;
        const bool pooled_here = !per_split || (options.split.pooled_at_boundary && at_boundary(k, n));
        modes.clear();
        if (pooled_here) {
            for (std::size_t j = 0; j < r && j < d; ++j) {
                const double z = delta(static_cast<Eigen::Index>(j));
                modes.push_back({basis.eigenvalues[j], z * z});
            }
        } else {
            modes = rank_one_downdate(basis.eigenvalues, std::span<const double>(delta.data(), r), rho, d);
            trace -= rho * delta.squaredNorm();
        }
        const double floor = kEigenFloorRatio * trace * scale;

        double value = 0.0;
        std::size_t used = 0;
        for (const auto& mode_l : modes) {
            const double eigenvalue = mode_l.eigenvalue * scale;
            if (!(eigenvalue > floor)) {
                continue;
            }
            value += mode_l.projection_sq / eigenvalue;
            ++used;
        }
        if (used == 0) {
            throw Error(ErrorKind::DegenerateData,
                        "no eigenmode above the floor at split " + std::to_string(k));
        }
        out.values[k - 1] = nd * rho * rho * value;
        out.modes_used[k - 1] = used;
        if (used < d) {
            out.warnings.push_back(reduced_warning(k, used, d));
        }
    }
    out.modes_used[n - 1] = out.modes_used[n - 2];
    return out;
}

// R_N(k/N) from an explicit eigensystem: scores of the raw curves, partial
// sums against k/N times the total, normalised by the eigenvalues above the
// floor.
double cusum_value(const CurveSet& curves, const EigenSystem& system, std::size_t k, double eigen_scale,
                   std::size_t& used) {
    const Matrix eta = scores(curves, system);
    const double nd = static_cast<double>(curves.count());
    const double u = static_cast<double>(k) / nd;
    const Vector head = eta.topRows(static_cast<Eigen::Index>(k)).colwise().sum().transpose();
    const Vector total = eta.colwise().sum().transpose();
    const double floor = system.floor * eigen_scale;
    double value = 0.0;
    used = 0;
    for (Eigen::Index l = 0; l < system.eigenvalues.size(); ++l) {
        const double eigenvalue = system.eigenvalues(l) * eigen_scale;
        if (!(eigenvalue > floor)) {
            continue;
        }
        const double cusum = head(l) - u * total(l);
        value += cusum * cusum / eigenvalue;
        ++used;
    }
    return value / nd;
}

EigenSystem decompose_or_degenerate(const KernelEstimate& kernel, std::size_t d) {
    try {
        return eigendecompose(kernel, std::min<std::size_t>(d, static_cast<std::size_t>(kernel.values.rows())));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::DegenerateKernel) {
            throw Error(ErrorKind::DegenerateData, e.what());
        }
        throw;
    }
}

CusumProcess direct_process(const CurveSet& curves, std::size_t d, StatisticMode mode,
                            const ProcessOptions& options) {
    const std::size_t n = curves.count();
    CusumProcess out;
    out.d = d;
    out.mode = mode;
    out.values.assign(n, 0.0);
    out.modes_used.assign(n, 0);

    if (mode == StatisticMode::S) {
        const EigenSystem pooled = decompose_or_degenerate(pooled_kernel(curves), d);
        for (std::size_t k = 1; k < n; ++k) {
            out.values[k - 1] = cusum_value(curves, pooled, k, 1.0, out.modes_used[k - 1]);
        }
    } else {
        const double scale = options.bias_correction ? bias_correction_factor(n) : 1.0;
        parallel_blocks(n - 1, options.threads, [&](std::size_t first, std::size_t last) {
            if (first == last) {
                return;
            }
            std::size_t k = first + 1;
            for_each_split_kernel(
                curves,
                [&](const KernelEstimate& kernel) {
                    const EigenSystem system = decompose_or_degenerate(kernel, d);
                    out.values[k - 1] = cusum_value(curves, system, k, scale, out.modes_used[k - 1]);
                    ++k;
                },
                options.split, first + 1, last);
        });
    }
    for (std::size_t k = 1; k < n; ++k) {
        if (out.modes_used[k - 1] < d) {
            out.warnings.push_back(reduced_warning(k, out.modes_used[k - 1], d));
        }
    }
    out.modes_used[n - 1] = out.modes_used[n - 2];
    return out;
}

}  // namespace

Matrix scores(const CurveSet& curves, const EigenSystem& system) {
    if (system.grid == nullptr || !curves.grid().same_as(*system.grid)) {
        throw Error(ErrorKind::InvalidArgument, "curves and eigenfunctions live on different grids");
    }
    return curves.values() * curves.grid().weights().asDiagonal() * system.eigenfunctions;
}

CusumProcess r_process(const CurveSet& curves, std::size_t d, StatisticMode mode, const ProcessOptions& options) {
    check_process_input(curves, d);
    if (options.engine == Engine::Direct) {
        return direct_process(curves, d, mode, options);
    }
    return secular_process(curves, d, mode, options);
}

double h_statistic(const CusumProcess& process) {
    if (process.values.empty()) {
        throw Error(ErrorKind::InvalidArgument, "empty CUSUM process");
    }
    double sum = 0.0;
    for (double v : process.values) {
        sum += v;
    }
    return sum / static_cast<double>(process.values.size());
}

std::size_t argmax_split(const CusumProcess& process) {
    if (process.values.empty()) {
        throw Error(ErrorKind::InvalidArgument, "empty CUSUM process");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < process.values.size(); ++i) {
        if (process.values[i] > process.values[best]) {
            best = i;
        }
    }
    return best + 1;
}

double estimate_change_point(const CusumProcess& process) {
    return static_cast<double>(argmax_split(process)) / static_cast<double>(process.values.size());
}

TestResult decide(double statistic, std::size_t d, double alpha, const CriticalValueTable& table) {
    TestResult out;
    out.statistic = statistic;
    out.d = d;
    out.alpha = alpha;
    out.critical_value = table.at(d, alpha);
    out.reject = statistic > out.critical_value;
    if (table.sample(d) != nullptr) {
        out.p_value = p_value(statistic, table, d);
    }
    return out;
}

TestOutcome run_test_detailed(const CurveSet& curves, std::size_t d, double alpha, StatisticMode mode,
                              const CriticalValueTable& table, const ProcessOptions& options) {
    // Fail on a missing table entry before the expensive part.
    (void)table.at(d, alpha);
    TestOutcome out;
    out.process = r_process(curves, d, mode, options);
    out.result = decide(h_statistic(out.process), d, alpha, table);
    out.result.mode = mode;
    out.result.n = curves.count();
    out.result.change_index = argmax_split(out.process);
    out.result.theta_hat = estimate_change_point(out.process);
    return out;
}

TestResult run_test(const CurveSet& curves, std::size_t d, double alpha, StatisticMode mode,
                    const CriticalValueTable& table, const ProcessOptions& options) {
    return run_test_detailed(curves, d, alpha, mode, table, options).result;
}

std::size_t DRule::resolve(const CurveSet& segment) const {
    if (fixed) {
        return *fixed;
    }
    return select_d(kernel_spectrum(pooled_kernel(segment)), fraction);
}

std::vector<std::size_t> SegmentationTree::leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].leaf()) {
            out.push_back(i);
        }
    }
    return out;
}

SegmentationTree binary_segmentation(const CurveSet& curves, const DRule& d_rule, double alpha,
                                     std::size_t min_segment, StatisticMode mode,
                                     const CriticalValueTable& table, const ProcessOptions& options) {
    if (min_segment < 5) {
        throw Error(ErrorKind::InvalidArgument, "minimum segment length must be at least 5");
    }
    SegmentationTree tree;
    std::function<void(std::size_t, std::size_t, std::optional<std::size_t>, std::size_t)> visit =
        [&](std::size_t first, std::size_t end, std::optional<std::size_t> parent, std::size_t depth) {
            const std::size_t index = tree.nodes.size();
            SegmentNode node;
            node.first = first;
            node.end = end;
            node.parent = parent;
            node.depth = depth;
            tree.nodes.push_back(node);
            if (parent) {
                tree.nodes[*parent].children.push_back(index);
            }
            if (end - first < min_segment) {
                tree.nodes[index].annotation = "too-short";
                return;
            }
            const CurveSet segment = curves.slice(first, end - first);
            TestResult result;
            try {
                result = run_test(segment, d_rule.resolve(segment), alpha, mode, table, options);
            } catch (const Error& e) {
                const bool degenerate =
                    e.kind() == ErrorKind::DegenerateData || e.kind() == ErrorKind::DegenerateKernel;
                if (!degenerate || !parent) {
                    throw;
                }
                tree.nodes[index].annotation = "degenerate";
                return;
            }
            tree.nodes[index].result = result;
            if (!result.reject) {
                return;
            }
            const std::size_t split = first + result.change_index;
            tree.nodes[index].split = split;
            tree.change_points.push_back(split);
            visit(first, split, index, depth + 1);
            visit(split, end, index, depth + 1);
        };
    visit(0, curves.count(), std::nullopt, 0);
    std::sort(tree.change_points.begin(), tree.change_points.end());
    return tree;
}

}  // namespace fdcp
