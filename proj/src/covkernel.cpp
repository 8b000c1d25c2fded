#include "fdcp/covkernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fdcp/error.hpp"

namespace fdcp {

namespace {

void check_split(const CurveSet& curves, std::size_t k) {
    if (k < 1 || k + 1 > curves.count()) {
        throw Error(ErrorKind::InvalidSplit, "split index " + std::to_string(k) + " outside 1.." +
                                                 std::to_string(curves.count() > 0 ? curves.count() - 1 : 0));
    }
}

void check_sample(const CurveSet& curves) {
    if (curves.count() < 2) {
        throw Error(ErrorKind::InsufficientSample, "at least two curves are required");
    }
}

Matrix symmetrize(Matrix m) {
    Matrix sym = 0.5 * (m + m.transpose());
    return sym;
}

bool at_boundary(std::size_t k, std::size_t n) { return k == 1 || k + 1 == n; }

}  // namespace

SegmentMeans segment_means(const CurveSet& curves, std::size_t k) {
    check_split(curves, k);
    const auto rows = static_cast<Eigen::Index>(k);
    const auto n = static_cast<Eigen::Index>(curves.count());
    SegmentMeans out;
    out.k = k;
    out.grid = curves.grid_ptr();
    out.head_mean = curves.values().topRows(rows).colwise().mean().transpose();
    out.tail_mean = curves.values().bottomRows(n - rows).colwise().mean().transpose();
    return out;
}

KernelEstimate pooled_kernel(const CurveSet& curves) {
    check_sample(curves);
    const Matrix centered = curves.values().rowwise() - curves.values().colwise().mean();
    KernelEstimate out;
    out.values = symmetrize(centered.transpose() * centered / static_cast<double>(curves.count()));
    out.n = curves.count();
    out.grid = curves.grid_ptr();
    return out;
}

KernelEstimate split_kernel(const CurveSet& curves, std::size_t k, const SplitOptions& options) {
    check_split(curves, k);
    const std::size_t n = curves.count();
    if (options.pooled_at_boundary && at_boundary(k, n)) {
        return pooled_kernel(curves);
    }
    const auto rows = static_cast<Eigen::Index>(k);
    const auto total = static_cast<Eigen::Index>(n);
    const auto& x = curves.values();
    Matrix centered(total, x.cols());
    centered.topRows(rows) = x.topRows(rows).rowwise() - x.topRows(rows).colwise().mean();
    centered.bottomRows(total - rows) =
        x.bottomRows(total - rows).rowwise() - x.bottomRows(total - rows).colwise().mean();

    KernelEstimate out;
    out.values = symmetrize(centered.transpose() * centered / static_cast<double>(n));
    out.split_k = k;
    out.n = n;
    out.grid = curves.grid_ptr();
    return out;
}

double bias_correction_factor(std::size_t n) {
    if (n <= 2) {
        throw Error(ErrorKind::DegenerateCorrection, "bias correction needs n >= 3");
    }
    return 1.0 / (1.0 - 2.0 / static_cast<double>(n));
}

KernelEstimate bias_correct(const KernelEstimate& kernel) {
    KernelEstimate out = kernel;
    out.values *= bias_correction_factor(kernel.n);
    out.bias_corrected = true;
    return out;
}

void for_each_split_kernel(const CurveSet& curves, const std::function<void(const KernelEstimate&)>& visit,
                           const SplitOptions& options, std::size_t k_first, std::size_t k_last) {
    check_sample(curves);
    const std::size_t n = curves.count();
    if (k_last == 0) {
        k_last = n - 1;
    }
    check_split(curves, k_first);
    check_split(curves, k_last);
    // Centring at the grand mean first keeps the cross-product subtraction
    // well conditioned; the kernels are shift invariant.
    const Matrix x = curves.values().rowwise() - curves.values().colwise().mean();
    const double inv_n = 1.0 / static_cast<double>(n);

    Matrix cross = x.transpose() * x;
    cross = symmetrize(std::move(cross));
    const Vector total_sum = x.colwise().sum().transpose();

    std::optional<KernelEstimate> pooled;
    if (options.pooled_at_boundary && (at_boundary(k_first, n) || at_boundary(k_last, n))) {
        pooled = pooled_kernel(curves);
    }

    Vector head_sum = Vector::Zero(x.cols());
    KernelEstimate estimate;
    estimate.n = n;
    estimate.grid = curves.grid_ptr();
    for (std::size_t k = 1; k <= k_last; ++k) {
        head_sum += x.row(static_cast<Eigen::Index>(k - 1)).transpose();
        if (k < k_first) {
            continue;
        }
        if (pooled && at_boundary(k, n)) {
            KernelEstimate boundary = *pooled;
            visit(boundary);
            continue;
        }
        const double head_count = static_cast<double>(k);
        const double tail_count = static_cast<double>(n - k);
        const Vector head_mean = head_sum / head_count;
        const Vector tail_mean = (total_sum - head_sum) / tail_count;
        estimate.values = cross;
        estimate.values.selfadjointView<Eigen::Lower>().rankUpdate(head_mean, -head_count);
        estimate.values.selfadjointView<Eigen::Lower>().rankUpdate(tail_mean, -tail_count);
        estimate.values.triangularView<Eigen::StrictlyUpper>() =
            estimate.values.triangularView<Eigen::StrictlyLower>().transpose();
        estimate.values *= inv_n;
        estimate.split_k = k;
        visit(estimate);
    }
}

std::vector<KernelEstimate> kernel_sweep(const CurveSet& curves, const SplitOptions& options) {
    std::vector<KernelEstimate> out;
    out.reserve(curves.count() > 0 ? curves.count() - 1 : 0);
    for_each_split_kernel(curves, [&](const KernelEstimate& kernel) { out.push_back(kernel); }, options);
    return out;
}

DriftSpec::DriftSpec(Vector d, double t) : delta(std::move(d)), theta(t) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "change fraction must lie strictly inside (0,1)");
    }
}

double f_theta(double u, double theta) {
    if (!(u > 0.0 && u <= 1.0) || !(theta > 0.0 && theta < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "f_theta needs 0 < u <= 1 and 0 < theta < 1");
    }
    const double hi = std::max(u, theta);
    const double lo = std::min(u, theta);
    return (hi - lo) / (hi * (1.0 - lo));
}

KernelEstimate target_kernel(const KernelEstimate& base, const DriftSpec& drift, double u) {
    if (drift.delta.size() != base.values.rows()) {
        throw Error(ErrorKind::InvalidArgument, "drift and kernel grids differ");
    }
    KernelEstimate out = base;
    const double scale = drift.theta * (1.0 - drift.theta) * f_theta(u, drift.theta);
    out.values += scale * drift.delta * drift.delta.transpose();
    return out;
}

KernelEstimate analytic_kernel(const GridPtr& grid, const std::function<double(double, double)>& c) {
    const auto m = static_cast<Eigen::Index>(grid->size());
    KernelEstimate out;
    out.values.resize(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            out.values(i, j) = c(grid->points()(i), grid->points()(j));
        }
    }
    out.grid = grid;
    return out;
}

double integrated_squared_difference(const KernelEstimate& a, const KernelEstimate& b) {
    if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols() ||
        !a.grid_ref().same_as(b.grid_ref())) {
        throw Error(ErrorKind::InvalidArgument, "kernels live on different grids");
    }
    const Vector& w = a.grid_ref().weights();
    const Matrix diff = a.values - b.values;
    return w.transpose() * diff.cwiseAbs2() * w;
}

}  // namespace fdcp
