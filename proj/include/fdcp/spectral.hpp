#pragma once

#include <cstddef>
#include <optional>

#include "fdcp/covkernel.hpp"

namespace fdcp {

/// Relative eigenvalue floor: modes below floor_ratio * trace count as zero.
inline constexpr double kEigenFloorRatio = 1e-10;

/// Leading eigenpairs of a kernel integral operator. Eigenfunctions are the
/// columns of `eigenfunctions`, each with unit L2 norm under the grid
/// quadrature.
struct EigenSystem {
    Vector eigenvalues;     // nonincreasing, clipped at zero
    Matrix eigenfunctions;  // M x d
    std::optional<std::size_t> split_k;
    double explained_fraction = 0.0;
    double trace = 0.0;
    double floor = 0.0;
    GridPtr grid;

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

/// Solves ∫ c(t,s) v(s) ds = λ v(t) through the symmetric matrix
/// W^{1/2} C W^{1/2}, W the diagonal of quadrature weights.
EigenSystem eigendecompose(const KernelEstimate& kernel, std::size_t d);

/// All eigenvalues of the weighted operator, nonincreasing and clipped at zero.
Vector kernel_spectrum(const KernelEstimate& kernel);

/// Without a reference each eigenfunction is flipped so that its integral is
/// nonnegative (ties broken by the first nonzero grid value); with a
/// reference, so that its inner product with the matching reference
/// eigenfunction is nonnegative.
EigenSystem align_sign(EigenSystem system, const EigenSystem* reference = nullptr);

/// Smallest d whose leading eigenvalues explain at least `fraction` of the
/// positive spectrum.
std::size_t select_d(const Eigen::Ref<const Vector>& eigenvalues, double fraction);

}  // namespace fdcp
