#pragma once

// Self-normalised CUSUM test for a change in the mean function of a
// chronologically ordered sample of curves, change-point estimation and
// binary segmentation.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fdcp/covkernel.hpp"
#include "fdcp/critical_values.hpp"
#include "fdcp/spectral.hpp"

namespace fdcp {

/// H: every split k uses the eigensystem of its own bias-corrected split
/// kernel. S: one eigensystem of the pooled kernel for every k.
enum class StatisticMode { H, S };

const char* to_string(StatisticMode mode) noexcept;
StatisticMode parse_mode(const std::string& text);

enum class Engine {
    /// Pooled decomposition once, then each split kernel as a rank-one
    /// downdate of it solved through the secular equation. O(N r d) per sample
    /// after the pooled decomposition.
    Secular,
    /// Literal path: kernel sweep, weighted M x M eigendecomposition and
    /// scores at every split.
    Direct,
};

struct ProcessOptions {
    Engine engine = Engine::Secular;
    bool bias_correction = true;  // H mode only
    SplitOptions split;
    std::size_t threads = 1;  // direct engine: workers over blocks of splits
};

/// R_N(k/N) for k = 1..N; values[k - 1] holds the k-th entry.
struct CusumProcess {
    std::vector<double> values;
    std::size_t d = 0;
    StatisticMode mode = StatisticMode::H;
    std::vector<std::size_t> modes_used;  // eigenmodes above the floor at each k
    std::vector<std::string> warnings;

    std::size_t n() const noexcept { return values.size(); }
};

/// Noncentral scores ⟨X_i, v_l⟩, an N x d table.
Matrix scores(const CurveSet& curves, const EigenSystem& system);

CusumProcess r_process(const CurveSet& curves, std::size_t d, StatisticMode mode,
                       const ProcessOptions& options = {});

/// Mean of R_N(k/N) over k = 1..N.
double h_statistic(const CusumProcess& process);

/// Smallest k attaining the maximum of R_N(k/N).
std::size_t argmax_split(const CusumProcess& process);

/// Smallest fraction k/N attaining the maximum of R_N.
double estimate_change_point(const CusumProcess& process);

struct TestResult {
    double statistic = 0.0;
    StatisticMode mode = StatisticMode::H;
    std::size_t d = 0;
    double critical_value = 0.0;
    double alpha = 0.05;
    std::optional<double> p_value;  // absent when the table keeps no limit sample
    bool reject = false;
    double theta_hat = 0.0;          // reported on accept too, as a diagnostic
    std::size_t change_index = 0;    // [N theta_hat]: curves before the change
    std::size_t n = 0;

    bool operator==(const TestResult&) const = default;
};

/// Reject iff statistic > K_d(alpha).
TestResult decide(double statistic, std::size_t d, double alpha, const CriticalValueTable& table);

struct TestOutcome {
    TestResult result;
    CusumProcess process;
};

TestOutcome run_test_detailed(const CurveSet& curves, std::size_t d, double alpha, StatisticMode mode,
                              const CriticalValueTable& table, const ProcessOptions& options = {});

TestResult run_test(const CurveSet& curves, std::size_t d, double alpha, StatisticMode mode,
                    const CriticalValueTable& table, const ProcessOptions& options = {});

/// Dimension rule for segmentation: a fixed d, or the smallest d explaining a
/// fraction of the segment's pooled spectrum.
struct DRule {
    std::optional<std::size_t> fixed;
    double fraction = 0.85;

    static DRule fixed_d(std::size_t d) { return DRule{d, 0.0}; }
    static DRule explained(double fraction) { return DRule{std::nullopt, fraction}; }

    std::size_t resolve(const CurveSet& segment) const;
};

struct SegmentNode {
    std::size_t first = 0;  // half-open [first, end) in absolute indices
    std::size_t end = 0;
    std::optional<TestResult> result;
    std::string annotation;  // "too-short" or "degenerate" for untested leaves
    std::optional<std::size_t> split;  // absolute index of the first post-change curve
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
    std::size_t depth = 0;

    std::size_t length() const noexcept { return end - first; }
    bool leaf() const noexcept { return children.empty(); }
};

struct SegmentationTree {
    std::vector<SegmentNode> nodes;  // depth-first order, root first
    std::vector<std::size_t> change_points;  // sorted absolute split indices

    std::vector<std::size_t> leaves() const;
};

/// Test, split at the estimated change, recurse on both halves until the
/// test accepts or a part is shorter than `min_segment`.
SegmentationTree binary_segmentation(const CurveSet& curves, const DRule& d_rule, double alpha,
                                     std::size_t min_segment, StatisticMode mode,
                                     const CriticalValueTable& table, const ProcessOptions& options = {});

}  // namespace fdcp
