#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fdcp {

/// One eigenpair of a rank-one downdated diagonal matrix, reported through
/// its eigenvalue and the squared projection of the update vector onto the
/// unit eigenvector.
struct DowndateMode {
    double eigenvalue = 0.0;
    double projection_sq = 0.0;
};

/// Leading `count` eigenpairs of diag(lambda) - rho z z', lambda
/// nonincreasing, rho > 0. Components that decouple (tiny z_j or repeated
/// lambda_j) are deflated; the rest go through the secular equation
/// 1 = rho Σ z_j² / (lambda_j - mu). Output is sorted by eigenvalue, largest
/// first.
std::vector<DowndateMode> rank_one_downdate(std::span<const double> lambda, std::span<const double> z,
                                            double rho, std::size_t count);

}  // namespace fdcp
