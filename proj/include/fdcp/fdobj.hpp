#pragma once

// Functional-data numerics: quadrature grids on [0,1], curve tables and
// least-squares B-spline smoothing of raw grid observations.

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fdcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class QuadratureRule { Trapezoid, Midpoint };

/// Ordered abscissae in [0,1] with positive weights summing to one, so
/// that an integral over [0,1] becomes a weighted sum.
class QuadratureGrid {
public:
    QuadratureGrid(Vector points, Vector weights);

    std::size_t size() const noexcept { return static_cast<std::size_t>(m_points.size()); }
    const Vector& points() const noexcept { return m_points; }
    const Vector& weights() const noexcept { return m_weights; }

    bool same_as(const QuadratureGrid& other) const noexcept;

private:
    Vector m_points;
    Vector m_weights;
};

using GridPtr = std::shared_ptr<const QuadratureGrid>;

GridPtr make_grid(std::size_t m, QuadratureRule rule = QuadratureRule::Trapezoid);

/// Trapezoid weights for arbitrary increasing abscissae rescaled to [0,1].
GridPtr make_grid_from_points(const std::vector<double>& points);

double inner_product(const Eigen::Ref<const Vector>& f, const Eigen::Ref<const Vector>& g,
                     const QuadratureGrid& grid);

inline double l2_norm(const Eigen::Ref<const Vector>& f, const QuadratureGrid& grid) {
    return std::sqrt(inner_product(f, f, grid));
}

/// N x M observations on a shared set of sampling abscissae.
struct RawCurves {
    Matrix values;                // one curve per row
    std::vector<double> abscissae;

    RawCurves(Matrix values, std::vector<double> abscissae);

    std::size_t count() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t samples() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

struct CurveProvenance {
    bool smoothed = false;
    std::size_t basis_size = 0;
};

/// Curves evaluated on a quadrature grid: the sample the test runs on.
class CurveSet {
public:
    CurveSet(Matrix values, GridPtr grid, CurveProvenance meta = {});

    std::size_t count() const noexcept { return static_cast<std::size_t>(m_values.rows()); }
    std::size_t grid_size() const noexcept { return static_cast<std::size_t>(m_values.cols()); }
    const Matrix& values() const noexcept { return m_values; }
    const QuadratureGrid& grid() const noexcept { return *m_grid; }
    const GridPtr& grid_ptr() const noexcept { return m_grid; }
    const CurveProvenance& meta() const noexcept { return m_meta; }

    /// Contiguous sub-sample [first, first + length).
    CurveSet slice(std::size_t first, std::size_t length) const;

private:
    Matrix m_values;
    GridPtr m_grid;
    CurveProvenance m_meta;
};

/// Treat raw observations as curves on a trapezoid grid over their own
/// (rescaled) abscissae, without smoothing.
CurveSet as_curve_set(const RawCurves& raw);

/// Clamped B-spline basis on [0,1] with uniformly spaced interior knots.
class BSplineBasis {
public:
    explicit BSplineBasis(std::size_t size, int degree = 3);

    int degree() const noexcept { return m_degree; }
    std::size_t size() const noexcept { return m_size; }
    const Vector& knots() const noexcept { return m_knots; }

    /// Dense design matrix: rows are the abscissae, columns the basis functions.
    Matrix design(const Eigen::Ref<const Vector>& x) const;

private:
    int m_degree;
    std::size_t m_size;
    Vector m_knots;
};

/// Basis size used when the caller asks for smoothing: never more than
/// raw samples - 2.
std::size_t default_basis_size(std::size_t raw_samples, std::optional<std::size_t> requested);

/// Linear map from raw samples to the least-squares spline fit evaluated on
/// an output grid. Building it factors the design once; applying it is one
/// matrix product per batch of curves.
class SplineSmoother {
public:
    SplineSmoother(const std::vector<double>& abscissae, const BSplineBasis& basis, GridPtr out_grid);

    CurveSet apply(const RawCurves& raw) const;
    /// Rows of `raw` are curves sampled at the abscissae given at construction.
    CurveSet apply(const Matrix& raw) const;

    std::size_t basis_size() const noexcept { return m_basis_size; }
    const GridPtr& out_grid() const noexcept { return m_out_grid; }

private:
    Matrix m_operator;  // out_grid.size() x raw samples
    std::vector<double> m_abscissae;
    GridPtr m_out_grid;
    std::size_t m_basis_size;
};

CurveSet smooth_to_basis(const RawCurves& raw, const BSplineBasis& basis, GridPtr out_grid);

/// Piecewise-linear interpolation of sampled curves onto another grid.
class LinearResampler {
public:
    LinearResampler(const std::vector<double>& abscissae, GridPtr out_grid);

    CurveSet apply(const Matrix& raw) const;

private:
    std::vector<std::pair<Eigen::Index, double>> m_nodes;  // left sample, weight of the right one
    std::size_t m_samples;
    GridPtr m_out_grid;
};

CurveSet resample_linear(const RawCurves& raw, GridPtr out_grid);

}  // namespace fdcp
