#include "fdcp/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "fdcp/error.hpp"

namespace fdcp {

namespace {

struct WeightedDecomposition {
    Vector values;   // descending
    Matrix vectors;  // columns, function values on the grid
    double trace = 0.0;
};

WeightedDecomposition decompose(const KernelEstimate& kernel) {
    const Vector& w = kernel.grid_ref().weights();
    if (kernel.values.rows() != w.size() || kernel.values.cols() != w.size()) {
        throw Error(ErrorKind::InvalidArgument, "kernel does not match its grid");
    }
    const Vector root = w.cwiseSqrt();
    const Matrix weighted = root.asDiagonal() * kernel.values * root.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(weighted);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::DegenerateKernel, "eigensolver failed to converge");
    }
    WeightedDecomposition out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    out.vectors = root.cwiseInverse().asDiagonal() * out.vectors;
    out.trace = w.dot(kernel.values.diagonal());
    return out;
}

double first_nonzero(const Eigen::Ref<const Vector>& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) != 0.0) {
            return v(i);
        }
    }
    return 0.0;
}

}  // namespace

EigenSystem eigendecompose(const KernelEstimate& kernel, std::size_t d) {
    const auto m = static_cast<std::size_t>(kernel.values.rows());
    if (d < 1 || d > m) {
        throw Error(ErrorKind::InvalidArgument, "need 1 <= d <= grid size");
    }
    WeightedDecomposition full = decompose(kernel);
    const double floor = kEigenFloorRatio * full.trace;
    if (!(full.trace > 0.0) || full.values(0) <= floor) {
        throw Error(ErrorKind::DegenerateKernel, "all eigenvalues fall below the floor (constant data?)");
    }
    const Vector clipped = full.values.cwiseMax(0.0);
    EigenSystem out;
    const auto dim = static_cast<Eigen::Index>(d);
    out.eigenvalues = clipped.head(dim);
    out.eigenfunctions = full.vectors.leftCols(dim);
    const double positive = clipped.sum();
    out.explained_fraction = positive > 0.0 ? out.eigenvalues.sum() / positive : 0.0;
    out.split_k = kernel.split_k;
    out.trace = full.trace;
    out.floor = floor;
    out.grid = kernel.grid;
    // The quadrature renormalisation guards against round-off in W^{-1/2}.
    for (Eigen::Index l = 0; l < dim; ++l) {
        const double norm = l2_norm(out.eigenfunctions.col(l), *out.grid);
        out.eigenfunctions.col(l) /= norm;
    }
    return align_sign(std::move(out));
}

Vector kernel_spectrum(const KernelEstimate& kernel) { return decompose(kernel).values.cwiseMax(0.0); }

EigenSystem align_sign(EigenSystem system, const EigenSystem* reference) {
    const QuadratureGrid& grid = *system.grid;
    for (Eigen::Index l = 0; l < system.eigenfunctions.cols(); ++l) {
        auto v = system.eigenfunctions.col(l);
        double orientation = 0.0;
        if (reference != nullptr && l < reference->eigenfunctions.cols()) {
            orientation = inner_product(v, reference->eigenfunctions.col(l), grid);
        } else {
            orientation = grid.weights().dot(v);
            if (orientation == 0.0) {
                orientation = first_nonzero(v);
            }
        }
        if (orientation < 0.0) {
            v = -v;
        }
    }
    return system;
}

std::size_t select_d(const Eigen::Ref<const Vector>& eigenvalues, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "explained fraction must lie in (0,1)");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        total += std::max(eigenvalues(i), 0.0);
    }
    if (!(total > 0.0)) {
        throw Error(ErrorKind::DegenerateKernel, "no positive eigenvalues");
    }
    double cumulative = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        cumulative += std::max(eigenvalues(i), 0.0);
        if (cumulative >= fraction * total) {
            return static_cast<std::size_t>(i) + 1;
        }
    }
    return static_cast<std::size_t>(eigenvalues.size());
}

}  // namespace fdcp
