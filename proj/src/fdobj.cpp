#include "fdcp/fdobj.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/Splines>

#include "fdcp/error.hpp"

namespace fdcp {

namespace {

void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) {
        throw Error(kind, message);
    }
}

}  // namespace

QuadratureGrid::QuadratureGrid(Vector points, Vector weights)
    : m_points(std::move(points)), m_weights(std::move(weights)) {
    require(m_points.size() >= 1 && m_points.size() == m_weights.size(), ErrorKind::InvalidArgument,
            "grid points and weights must be nonempty and of equal length");
    require(m_points(0) >= 0.0 && m_points(m_points.size() - 1) <= 1.0, ErrorKind::InvalidArgument,
            "grid points must lie in [0,1]");
    for (Eigen::Index m = 1; m < m_points.size(); ++m) {
        require(m_points(m) > m_points(m - 1), ErrorKind::InvalidArgument,
                "grid points must be strictly increasing");
    }
    require((m_weights.array() > 0.0).all(), ErrorKind::InvalidArgument, "grid weights must be positive");
    require(std::abs(m_weights.sum() - 1.0) <= 1e-12, ErrorKind::InvalidArgument,
            "grid weights must sum to one");
}

bool QuadratureGrid::same_as(const QuadratureGrid& other) const noexcept {
    if (this == &other) {
        return true;
    }
    return m_points.size() == other.m_points.size() && m_points == other.m_points &&
           m_weights == other.m_weights;
}

GridPtr make_grid(std::size_t m, QuadratureRule rule) {
    require(m >= 2, ErrorKind::InvalidArgument, "a grid needs at least two points");
    const auto size = static_cast<Eigen::Index>(m);
    Vector points(size);
    Vector weights(size);
    if (rule == QuadratureRule::Trapezoid) {
        const double h = 1.0 / static_cast<double>(m - 1);
        for (Eigen::Index i = 0; i < size; ++i) {
            points(i) = static_cast<double>(i) * h;
            weights(i) = h;
        }
        points(size - 1) = 1.0;
        weights(0) = weights(size - 1) = 0.5 * h;
    } else {
        const double h = 1.0 / static_cast<double>(m);
        for (Eigen::Index i = 0; i < size; ++i) {
            points(i) = (static_cast<double>(i) + 0.5) * h;
            weights(i) = h;
        }
    }
    weights /= weights.sum();
    return std::make_shared<const QuadratureGrid>(std::move(points), std::move(weights));
}

GridPtr make_grid_from_points(const std::vector<double>& points) {
    require(points.size() >= 2, ErrorKind::InvalidArgument, "a grid needs at least two points");
    const double lo = points.front();
    const double hi = points.back();
    require(hi > lo, ErrorKind::InvalidArgument, "grid abscissae must be increasing");
    const auto size = static_cast<Eigen::Index>(points.size());
    Vector x(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        x(i) = (points[static_cast<std::size_t>(i)] - lo) / (hi - lo);
    }
    x(0) = 0.0;
    x(size - 1) = 1.0;
    Vector w = Vector::Zero(size);
    for (Eigen::Index i = 0; i + 1 < size; ++i) {
        const double h = x(i + 1) - x(i);
        require(h > 0.0, ErrorKind::InvalidArgument, "grid abscissae must be strictly increasing");
        w(i) += 0.5 * h;
        w(i + 1) += 0.5 * h;
    }
    w /= w.sum();
    return std::make_shared<const QuadratureGrid>(std::move(x), std::move(w));
}

double inner_product(const Eigen::Ref<const Vector>& f, const Eigen::Ref<const Vector>& g,
                     const QuadratureGrid& grid) {
    const auto m = static_cast<Eigen::Index>(grid.size());
    require(f.size() == m && g.size() == m, ErrorKind::InvalidArgument,
            "inner product operands must match the grid length");
    return (grid.weights().array() * f.array() * g.array()).sum();
}

RawCurves::RawCurves(Matrix v, std::vector<double> x) : values(std::move(v)), abscissae(std::move(x)) {
    require(values.rows() >= 2, ErrorKind::InsufficientSample, "at least two curves are required");
    require(static_cast<std::size_t>(values.cols()) == abscissae.size() && !abscissae.empty(),
            ErrorKind::InvalidArgument, "every curve needs one value per abscissa");
    require(values.allFinite(), ErrorKind::InvalidArgument, "raw curve values must be finite");
    for (std::size_t m = 1; m < abscissae.size(); ++m) {
        require(abscissae[m] >= abscissae[m - 1], ErrorKind::InvalidArgument,
                "abscissae must be nondecreasing");
    }
}

CurveSet::CurveSet(Matrix values, GridPtr grid, CurveProvenance meta)
    : m_values(std::move(values)), m_grid(std::move(grid)), m_meta(meta) {
    require(m_grid != nullptr, ErrorKind::InvalidArgument, "curve set needs a grid");
    require(static_cast<std::size_t>(m_values.cols()) == m_grid->size(), ErrorKind::InvalidArgument,
            "curve length does not match the grid");
    require(m_values.allFinite(), ErrorKind::InvalidArgument, "curve values must be finite");
}

CurveSet CurveSet::slice(std::size_t first, std::size_t length) const {
    require(first + length <= count(), ErrorKind::InvalidArgument, "slice exceeds the sample");
    return CurveSet(m_values.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(length)),
                    m_grid, m_meta);
}

CurveSet as_curve_set(const RawCurves& raw) {
    return CurveSet(raw.values, make_grid_from_points(raw.abscissae));
}

BSplineBasis::BSplineBasis(std::size_t size, int degree) : m_degree(degree), m_size(size) {
    require(degree >= 0, ErrorKind::InvalidArgument, "spline degree must be nonnegative");
    require(size >= static_cast<std::size_t>(degree) + 1, ErrorKind::InvalidArgument,
            "basis size must be at least degree + 1");
    const auto p = static_cast<Eigen::Index>(degree);
    const auto n = static_cast<Eigen::Index>(size);
    const Eigen::Index interior = n - p - 1;
    m_knots.resize(n + p + 1);
    for (Eigen::Index i = 0; i <= p; ++i) {
        m_knots(i) = 0.0;
        m_knots(n + i) = 1.0;
    }
    for (Eigen::Index j = 1; j <= interior; ++j) {
        m_knots(p + j) = static_cast<double>(j) / static_cast<double>(interior + 1);
    }
}

Matrix BSplineBasis::design(const Eigen::Ref<const Vector>& x) const {
    using Spline = Eigen::Spline<double, 1>;
    const auto p = static_cast<Eigen::Index>(m_degree);
    Matrix out = Matrix::Zero(x.size(), static_cast<Eigen::Index>(m_size));
    const Spline::KnotVectorType knots = m_knots.transpose();
    for (Eigen::Index r = 0; r < x.size(); ++r) {
        const double u = std::clamp(x(r), 0.0, 1.0);
        const Eigen::Index span = Spline::Span(u, p, knots);
        const auto values = Spline::BasisFunctions(u, p, knots);
        for (Eigen::Index j = 0; j <= p; ++j) {
            out(r, span - p + j) = values(j);
        }
    }
    return out;
}

std::size_t default_basis_size(std::size_t raw_samples, std::optional<std::size_t> requested) {
    require(raw_samples >= 6, ErrorKind::InvalidArgument, "too few raw samples for spline smoothing");
    const std::size_t cap = raw_samples - 2;
    return requested ? std::min(cap, *requested) : cap;
}

SplineSmoother::SplineSmoother(const std::vector<double>& abscissae, const BSplineBasis& basis,
                               GridPtr out_grid)
    : m_abscissae(abscissae), m_out_grid(std::move(out_grid)), m_basis_size(basis.size()) {
    require(m_out_grid != nullptr, ErrorKind::InvalidArgument, "smoothing needs an output grid");
    std::vector<double> distinct(abscissae);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    require(distinct.size() >= basis.size(), ErrorKind::IllPosedFit,
            "fewer distinct abscissae than basis functions");
    require(abscissae.front() >= 0.0 && abscissae.back() <= 1.0, ErrorKind::InvalidArgument,
            "raw abscissae must lie in [0,1]");

    const Vector x = Eigen::Map<const Vector>(abscissae.data(), static_cast<Eigen::Index>(abscissae.size()));
    const Matrix design = basis.design(x);
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    require(qr.rank() == design.cols(), ErrorKind::IllPosedFit, "rank-deficient spline design");
    const Matrix pseudo_inverse = qr.solve(Matrix::Identity(design.rows(), design.rows()));
    m_operator = basis.design(m_out_grid->points()) * pseudo_inverse;
}

CurveSet SplineSmoother::apply(const Matrix& raw) const {
    require(static_cast<std::size_t>(raw.cols()) == m_abscissae.size(), ErrorKind::InvalidArgument,
            "raw curves do not match the smoother's abscissae");
    return CurveSet(raw * m_operator.transpose(), m_out_grid, CurveProvenance{true, m_basis_size});
}

CurveSet SplineSmoother::apply(const RawCurves& raw) const {
    require(raw.abscissae == m_abscissae, ErrorKind::InvalidArgument,
            "raw curves do not match the smoother's abscissae");
    return apply(raw.values);
}

CurveSet smooth_to_basis(const RawCurves& raw, const BSplineBasis& basis, GridPtr out_grid) {
    return SplineSmoother(raw.abscissae, basis, std::move(out_grid)).apply(raw);
}

LinearResampler::LinearResampler(const std::vector<double>& abscissae, GridPtr out_grid)
    : m_samples(abscissae.size()), m_out_grid(std::move(out_grid)) {
    require(m_out_grid != nullptr, ErrorKind::InvalidArgument, "resampling needs an output grid");
    require(abscissae.size() >= 2, ErrorKind::InvalidArgument, "resampling needs at least two samples");
    require(std::is_sorted(abscissae.begin(), abscissae.end()), ErrorKind::InvalidArgument,
            "abscissae must be nondecreasing");
    const auto last = static_cast<Eigen::Index>(abscissae.size()) - 1;
    const Vector& t = m_out_grid->points();
    for (Eigen::Index m = 0; m < t.size(); ++m) {
        const auto right = std::upper_bound(abscissae.begin(), abscissae.end(), t(m)) - abscissae.begin();
        const Eigen::Index left = std::clamp<Eigen::Index>(right - 1, 0, last - 1);
        const double x0 = abscissae[static_cast<std::size_t>(left)];
        const double x1 = abscissae[static_cast<std::size_t>(left + 1)];
        const double weight = x1 > x0 ? (t(m) - x0) / (x1 - x0) : 0.0;
        m_nodes.emplace_back(left, std::clamp(weight, 0.0, 1.0));
    }
}

CurveSet LinearResampler::apply(const Matrix& raw) const {
    require(static_cast<std::size_t>(raw.cols()) == m_samples, ErrorKind::InvalidArgument,
            "raw curves do not match the resampler's abscissae");
    Matrix out(raw.rows(), static_cast<Eigen::Index>(m_nodes.size()));
    for (std::size_t m = 0; m < m_nodes.size(); ++m) {
        const auto [left, weight] = m_nodes[m];
        out.col(static_cast<Eigen::Index>(m)) = (1.0 - weight) * raw.col(left) + weight * raw.col(left + 1);
    }
    return CurveSet(std::move(out), m_out_grid);
}

CurveSet resample_linear(const RawCurves& raw, GridPtr out_grid) {
    return LinearResampler(raw.abscissae, std::move(out_grid)).apply(raw.values);
}

}  // namespace fdcp
