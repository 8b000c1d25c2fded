#pragma once

// Gaussian-process sample generation, drift injection and the Monte Carlo
// power study comparing the split-kernel (H) and pooled-kernel (S) tests.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdcp/cptest.hpp"
#include "fdcp/random.hpp"

namespace fdcp {

/// Standard Brownian motion at the grid points, built from independent
/// Gaussian increments (W = 0 at t = 0).
Vector simulate_bm(const QuadratureGrid& grid, Rng& rng);

/// Standard Brownian bridge B(t) = W(t) - t W(1); zero at both endpoints.
Vector simulate_bb(const QuadratureGrid& grid, Rng& rng);

/// Named mean shifts: t, sin, quad (0.8 t (1 - t)), t2, sqrt, exp, cos.
std::function<double(double)> drift_function(const std::string& name);
const std::vector<std::string>& drift_names();

/// Adds drift(t) to every curve with 1-based index > k_star.
CurveSet apply_drift(const CurveSet& curves, const std::string& drift, std::size_t k_star);

enum class ProcessKind { BrownianMotion, BrownianBridge };

const char* to_string(ProcessKind kind) noexcept;
ProcessKind parse_process(const std::string& text);

enum class Preprocessing {
    /// Generate on `grid_m` points, linear interpolation onto the working grid.
    Resample,
    /// Generate on `grid_m` points, least-squares B-spline fit, evaluate on
    /// the working grid.
    Smooth,
    /// Generate directly on the working grid.
    Direct,
};

struct SimConfig {
    ProcessKind process = ProcessKind::BrownianMotion;
    std::size_t n = 100;
    std::size_t k_star = 0;  // 0 = no change
    std::string drift = "t";
    std::size_t d = 3;
    double alpha = 0.05;
    std::size_t reps = 1000;
    std::size_t grid_m = 1000;     // generation grid
    std::size_t working_m = 201;   // grid the statistic runs on
    Preprocessing preprocessing = Preprocessing::Resample;
    std::size_t basis = 750;  // Smooth only; capped at grid_m - 2
    std::uint64_t seed = 20240101;
    std::size_t threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

/// Draws replication `rep` of a configuration: the curves the tests see.
/// Depends only on (config, rep).
class SampleGenerator {
public:
    explicit SampleGenerator(const SimConfig& config);

    CurveSet draw(std::size_t rep) const;

private:
    SimConfig m_config;
    GridPtr m_generation_grid;
    GridPtr m_working_grid;
    std::optional<SplineSmoother> m_smoother;
    std::optional<LinearResampler> m_resampler;
    std::function<double(double)> m_drift;
};

struct PowerRow {
    ProcessKind process = ProcessKind::BrownianMotion;
    std::size_t n = 0;
    std::size_t k_star = 0;
    std::string drift;
    StatisticMode mode = StatisticMode::H;
    std::size_t d = 0;
    double alpha = 0.0;
    std::size_t reps = 0;
    std::size_t rejections = 0;
    double power = 0.0;
    double std_error = 0.0;
};

/// Each replication generates one sample and runs every requested mode on
/// it, so the modes are compared on paired data.
std::vector<PowerRow> power_study(const SimConfig& config, const std::vector<StatisticMode>& modes,
                                  const CriticalValueTable& table, const ProcessOptions& options = {});

void write_power_csv(std::ostream& out, const std::vector<PowerRow>& rows, bool header = true);

}  // namespace fdcp
