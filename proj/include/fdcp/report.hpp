#pragma once

// Run report: what was tested, per-segment results in the layout of a
// segmentation table (segment, statistic, p-value, change point), and the
// tidy plot-data rows written next to it.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdcp/cptest.hpp"

namespace fdcp {

inline constexpr int kReportSchemaVersion = 1;

struct InputSummary {
    std::string source;
    std::size_t n = 0;
    std::size_t raw_samples = 0;
    std::size_t grid_size = 0;
    std::string preprocessing = "raw";  // raw | resampled | smoothed
    std::size_t basis_size = 0;
    bool rescaled = false;
    double abscissa_min = 0.0;
    double abscissa_max = 1.0;
    bool labels = false;

    bool operator==(const InputSummary&) const = default;
};

struct SegmentRow {
    std::size_t first = 0;  // half-open [first, end)
    std::size_t end = 0;
    std::size_t depth = 0;
    std::optional<std::size_t> parent;
    std::string label_first;
    std::string label_last;
    std::optional<TestResult> result;
    std::string annotation;
    std::optional<std::size_t> change_point;  // absolute index of the first post-change curve
    std::string change_label;                 // label of the last pre-change curve

    bool operator==(const SegmentRow&) const = default;
};

struct ModeReport {
    StatisticMode mode = StatisticMode::H;
    std::vector<SegmentRow> segments;
    std::vector<std::size_t> change_points;
    std::vector<std::string> change_labels;

    bool operator==(const ModeReport&) const = default;
};

struct RunReport {
    int schema_version = kReportSchemaVersion;
    InputSummary input;
    double alpha = 0.05;
    std::optional<std::size_t> d;
    std::optional<double> explained_fraction;
    bool segmented = false;
    std::size_t min_segment = 0;
    std::vector<ModeReport> modes;
    TableProvenance table;
    double seconds = 0.0;

    /// 0 when every mode accepts, 1 when any mode rejects or finds a change.
    int exit_code() const;

    bool operator==(const RunReport&) const = default;
};

/// Versioned JSON; readers ignore fields they do not know.
std::string report_to_json(const RunReport& report, int indent = 2);
RunReport report_from_json(const std::string& text);

/// Human-readable summary, one line per tested segment.
void write_summary(std::ostream& out, const RunReport& report);

struct PlotRow {
    std::string series;  // r_process | mean_before | mean_after | eigenfunction_<l>
    StatisticMode mode = StatisticMode::H;
    std::size_t first = 0;
    std::size_t end = 0;
    std::size_t index = 0;
    double x = 0.0;
    double value = 0.0;
};

void write_plot_csv(std::ostream& out, const std::vector<PlotRow>& rows);

}  // namespace fdcp
