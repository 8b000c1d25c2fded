#pragma once

// Covariance kernel estimators on a quadrature grid: the pooled estimator
// that centres every curve at the grand mean, and the split estimator that
// centres the curves before and after a candidate split at their own
// segment means.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "fdcp/fdobj.hpp"

namespace fdcp {

struct SegmentMeans {
    Vector head_mean;  // mean of curves 1..k
    Vector tail_mean;  // mean of curves k+1..N
    std::size_t k = 0;
    GridPtr grid;
};

SegmentMeans segment_means(const CurveSet& curves, std::size_t k);

/// Dense M x M kernel table on grid x grid.
struct KernelEstimate {
    Matrix values;
    std::optional<std::size_t> split_k;  // empty for the pooled estimator
    bool bias_corrected = false;
    std::size_t n = 0;
    GridPtr grid;

    bool pooled() const noexcept { return !split_k.has_value(); }
    const QuadratureGrid& grid_ref() const noexcept { return *grid; }
};

struct SplitOptions {
    /// Splits k = 1 and k = N-1 fall back to the pooled estimator.
    bool pooled_at_boundary = true;
};

KernelEstimate pooled_kernel(const CurveSet& curves);
KernelEstimate split_kernel(const CurveSet& curves, std::size_t k, const SplitOptions& options = {});

/// Rescale by (1 - 2/n)^-1, which removes the null-hypothesis bias of the
/// split estimator.
KernelEstimate bias_correct(const KernelEstimate& kernel);

double bias_correction_factor(std::size_t n);

/// Visits split_kernel(curves, k) for k = 1..N-1 in order. Each step costs
/// O(M^2): the kernel is rebuilt from the total cross-product and running
/// head/tail sums, ĉ = (1/N)[Σ X_i X_i' - k m_h m_h' - (N-k) m_t m_t'].
/// A sub-range [k_first, k_last] (k_last = 0 means N-1) yields bit-identical
/// kernels to the full sweep, so blocks of splits can go to separate workers.
void for_each_split_kernel(const CurveSet& curves,
                           const std::function<void(const KernelEstimate&)>& visit,
                           const SplitOptions& options = {}, std::size_t k_first = 1,
                           std::size_t k_last = 0);

std::vector<KernelEstimate> kernel_sweep(const CurveSet& curves, const SplitOptions& options = {});

struct DriftSpec {
    Vector delta;  // mean before the change minus mean after it
    double theta = 0.5;

    DriftSpec(Vector delta, double theta);
};

/// Asymptotic bias attenuation of the split estimator at split fraction u
/// when the true change sits at theta: zero at u = theta, one at u = 1.
double f_theta(double u, double theta);

/// Probability limit of the split estimator at fraction u:
/// c + theta(1-theta) f_theta(u) delta delta'.
KernelEstimate target_kernel(const KernelEstimate& base, const DriftSpec& drift, double u);

/// Kernel of a known covariance function sampled on a grid.
KernelEstimate analytic_kernel(const GridPtr& grid, const std::function<double(double, double)>& c);

/// ∫∫ (a - b)^2 by product quadrature.
double integrated_squared_difference(const KernelEstimate& a, const KernelEstimate& b);

}  // namespace fdcp
