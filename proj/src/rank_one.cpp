#include "fdcp/rank_one.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "fdcp/error.hpp"

extern "C" void dlaed4_(const int* n, const int* i, const double* d, const double* z, double* delta,
                        const double* rho, double* dlam, int* info);

namespace fdcp {

namespace {

struct Component {
    double lambda;
    double z;
};

// Small problems go through a dense solve: LAPACK's secular solver returns
// eigenvector entries instead of pole distances when n <= 2.
std::vector<DowndateMode> dense_modes(const std::vector<Component>& active, double rho, std::size_t count) {
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd z(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        m(j, j) = active[static_cast<std::size_t>(j)].lambda;
        z(j) = active[static_cast<std::size_t>(j)].z;
    }
    m.noalias() -= rho * z * z.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    std::vector<DowndateMode> out;
    for (Eigen::Index j = k - 1; j >= 0 && out.size() < count; --j) {
        const double projection = z.dot(solver.eigenvectors().col(j));
        out.push_back({solver.eigenvalues()(j), projection * projection});
    }
    return out;
}

}  // namespace

std::vector<DowndateMode> rank_one_downdate(std::span<const double> lambda, std::span<const double> z,
                                            double rho, std::size_t count) {
    if (lambda.size() != z.size()) {
        throw Error(ErrorKind::InvalidArgument, "eigenvalue and update vectors differ in length");
    }
    if (!(rho >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "downdate weight must be nonnegative");
    }
    std::vector<DowndateMode> deflated;
    std::vector<Component> active;
    if (lambda.empty() || count == 0) {
        return {};
    }

    double z_norm_sq = 0.0;
    for (double v : z) {
        z_norm_sq += v * v;
    }
    const double weight = rho * z_norm_sq;
    const double eps = std::numeric_limits<double>::epsilon();
    const double tol = 8.0 * eps * std::max(std::abs(lambda.front()), weight);

    if (!(weight > 0.0)) {
        for (std::size_t j = 0; j < lambda.size() && j < count; ++j) {
            deflated.push_back({lambda[j], z[j] * z[j]});
        }
        return deflated;
    }

    const double z_norm = std::sqrt(z_norm_sq);
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        if (weight * std::abs(z[j]) / z_norm <= tol) {
            deflated.push_back({lambda[j], z[j] * z[j]});
            continue;
        }
        if (!active.empty() && active.back().lambda - lambda[j] <= tol) {
            // A rotation in the repeated eigenspace moves all of z onto one
            // vector; the other keeps the eigenvalue and is orthogonal to z.
            active.back().z = std::hypot(active.back().z, z[j]);
            deflated.push_back({lambda[j], 0.0});
            continue;
        }
        active.push_back({lambda[j], z[j]});
    }

    std::vector<DowndateMode> secular;
    if (!active.empty()) {
        const std::size_t wanted = std::min(count, active.size());
        if (active.size() <= 2) {
            secular = dense_modes(active, rho, wanted);
        } else {
            const int n = static_cast<int>(active.size());
            double active_norm_sq = 0.0;
            for (const auto& c : active) {
                active_norm_sq += c.z * c.z;
            }
            const double active_norm = std::sqrt(active_norm_sq);
            const double rho_scaled = rho * active_norm_sq;
            // Negating turns the downdate into LAPACK's update convention with
            // increasing poles -lambda_j.
            std::vector<double> poles(active.size());
            std::vector<double> unit(active.size());
            for (std::size_t j = 0; j < active.size(); ++j) {
                poles[j] = -active[j].lambda;
                unit[j] = active[j].z / active_norm;
            }
            std::vector<double> delta(active.size());
            secular.reserve(wanted);
            for (std::size_t i = 0; i < wanted; ++i) {
                const int index = static_cast<int>(i) + 1;
                double root = 0.0;
                int info = 0;
                dlaed4_(&n, &index, poles.data(), unit.data(), delta.data(), &rho_scaled, &root, &info);
                if (info != 0) {
                    throw Error(ErrorKind::DegenerateKernel, "secular equation solver failed to converge");
                }
                // delta_j = -lambda_j - root = -(lambda_j - mu)
                double slope = 0.0;
                for (std::size_t j = 0; j < active.size(); ++j) {
                    const double ratio = active[j].z / delta[j];
                    slope += ratio * ratio;
                }
                secular.push_back({-root, 1.0 / (rho * rho * slope)});
            }
        }
    }

    std::vector<DowndateMode> merged;
    merged.reserve(std::min(count, secular.size() + deflated.size()));
    std::size_t a = 0;
    std::size_t b = 0;
    while (merged.size() < count && (a < secular.size() || b < deflated.size())) {
        if (b >= deflated.size() || (a < secular.size() && secular[a].eigenvalue >= deflated[b].eigenvalue)) {
            merged.push_back(secular[a++]);
        } else {
            merged.push_back(deflated[b++]);
        }
    }
    return merged;
}

}  // namespace fdcp
