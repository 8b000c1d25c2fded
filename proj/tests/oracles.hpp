#pragma once

// Reference computations written straight from the definitions, sharing no
// code with the library beyond the data containers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Vector trapezoid_weights(std::size_t m) {
    Vector w = Vector::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m - 1));
    w(0) *= 0.5;
    w(static_cast<Eigen::Index>(m) - 1) *= 0.5;
    return w;
}

/// (1/N) Σ (X_i - centre_i)(t)(X_i - centre_i)(s) by explicit loops.
inline Matrix centred_kernel(const Matrix& x, const std::vector<Vector>& centres) {
    const Eigen::Index n = x.rows();
    const Eigen::Index m = x.cols();
    Matrix k = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) {
                const auto& c = centres[static_cast<std::size_t>(i)];
                k(a, b) += (x(i, a) - c(a)) * (x(i, b) - c(b));
            }
        }
    }
    return k / static_cast<double>(n);
}

inline Vector row_mean(const Matrix& x, Eigen::Index first, Eigen::Index count) {
    Vector mean = Vector::Zero(x.cols());
    for (Eigen::Index i = first; i < first + count; ++i) {
        mean += x.row(i).transpose();
    }
    return mean / static_cast<double>(count);
}

inline Matrix pooled(const Matrix& x) {
    const Vector mean = row_mean(x, 0, x.rows());
    return centred_kernel(x, std::vector<Vector>(static_cast<std::size_t>(x.rows()), mean));
}

/// Split estimator with the pooled fallback at k = 1 and k = N - 1.
inline Matrix split(const Matrix& x, Eigen::Index k) {
    const Eigen::Index n = x.rows();
    if (k == 1 || k == n - 1) {
        return pooled(x);
    }
    const Vector head = row_mean(x, 0, k);
    const Vector tail = row_mean(x, k, n - k);
    std::vector<Vector> centres;
    for (Eigen::Index i = 0; i < n; ++i) {
        centres.push_back(i < k ? head : tail);
    }
    return centred_kernel(x, centres);
}

/// R_N(k/N), k = 1..N, from the definition: eigenpairs of W^{1/2} C W^{1/2}
/// through an SVD (the matrix is PSD), noncentral scores, CUSUM.
inline std::vector<double> r_process(const Matrix& x, const Vector& w, std::size_t d, bool per_split,
                                     bool bias_correction) {
    const Eigen::Index n = x.rows();
    const Vector root = w.array().sqrt();
    std::vector<double> out;
    Matrix kernel = pooled(x);
    for (Eigen::Index k = 1; k <= n; ++k) {
        if (per_split && k < n) {
            kernel = split(x, k);
            if (bias_correction) {
                kernel /= (1.0 - 2.0 / static_cast<double>(n));
            }
        } else if (per_split && k == n) {
            out.push_back(0.0);
            continue;
        }
        const Matrix b = root.asDiagonal() * kernel * root.asDiagonal();
        Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullU);
        const double trace = b.trace();
        double r = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            const double lambda = svd.singularValues()(static_cast<Eigen::Index>(l));
            if (!(lambda > 1e-10 * trace)) {
                continue;
            }
            const Vector v = (svd.matrixU().col(static_cast<Eigen::Index>(l)).array() / root.array()).matrix();
            const Vector eta = x * (w.asDiagonal() * v);
            const double u = static_cast<double>(k) / static_cast<double>(n);
            const double cusum = eta.head(k).sum() - u * eta.sum();
            r += cusum * cusum / lambda;
        }
        out.push_back(r / static_cast<double>(n));
    }
    return out;
}

/// Upper tail P(∫ Σ_{l≤d} B_l² > x) for independent Brownian bridges, by
/// Imhof's inversion of the characteristic function of Σ_j λ_j χ²_d with
/// λ_j = 1/(jπ)². Terms beyond `terms` are folded in through their mean.
class BridgeIntegralLaw {
public:
    explicit BridgeIntegralLaw(std::size_t d, std::size_t terms = 400, double upper = 4000.0, double step = 0.02)
        : m_d(static_cast<double>(d)), m_step(step) {
        const double pi2 = std::numbers::pi * std::numbers::pi;
        std::vector<double> lambda(terms);
        double kept = 0.0;
        for (std::size_t j = 0; j < terms; ++j) {
            lambda[j] = 1.0 / (pi2 * static_cast<double>((j + 1) * (j + 1)));
            kept += lambda[j];
        }
        m_tail_mean = m_d * (1.0 / 6.0 - kept);
        const auto count = static_cast<std::size_t>(upper / step);
        m_theta.resize(count + 1);
        m_scale.resize(count + 1);
        for (std::size_t i = 0; i <= count; ++i) {
            const double u = static_cast<double>(i) * step;
            double theta = 0.0;
            double log_rho = 0.0;
            for (double l : lambda) {
                theta += std::atan(l * u);
                log_rho += std::log1p(l * l * u * u);
            }
            m_theta[i] = 0.5 * m_d * theta;
            m_scale[i] = std::exp(-0.25 * m_d * log_rho);
            m_slope0 = 0.5 * m_d * kept;
        }
    }

    double upper_tail(double x) const {
        const double shifted = x - m_tail_mean;
        // Composite Simpson on sin(θ(u) - xu/2) / (u ρ(u)); the u → 0 limit is θ'(0) - x/2.
        auto f = [&](std::size_t i) {
            const double u = static_cast<double>(i) * m_step;
            if (i == 0) {
                return m_slope0 - 0.5 * shifted;
            }
            return std::sin(m_theta[i] - 0.5 * shifted * u) * m_scale[i] / u;
        };
        const std::size_t last = m_theta.size() - 1 - ((m_theta.size() - 1) % 2);
        double sum = f(0) + f(last);
        for (std::size_t i = 1; i < last; ++i) {
            sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i);
        }
        return 0.5 + sum * m_step / 3.0 / std::numbers::pi;
    }

    double quantile(double p) const {
        double lo = 0.0;
        double hi = 10.0 * m_d;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (1.0 - upper_tail(mid) < p) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }

private:
    double m_d;
    double m_step;
    double m_tail_mean = 0.0;
    double m_slope0 = 0.0;
    std::vector<double> m_theta;
    std::vector<double> m_scale;
};

/// Two-sample Kolmogorov–Smirnov distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) {
            ++i;
        }
        while (j < b.size() && b[j] <= x) {
            ++j;
        }
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        best = std::max(best, std::abs(fa - fb));
    }
    return best;
}

inline double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace oracle
