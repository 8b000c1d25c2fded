#pragma once

// End-to-end run on an ingested dataset: preprocessing, critical values,
// single test or binary segmentation per mode, report and plot data.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdcp/ingest.hpp"
#include "fdcp/report.hpp"

namespace fdcp {

struct RunConfig {
    std::optional<std::size_t> d;     // fixed dimension; otherwise explained_fraction
    double explained_fraction = 0.85;
    double alpha = 0.05;
    std::vector<StatisticMode> modes{StatisticMode::H};
    std::optional<std::size_t> grid;  // working grid size; default keeps the raw abscissae
    std::optional<std::size_t> basis; // B-spline smoothing when set
    bool segment = false;
    std::size_t min_segment = 10;
    // Critical values: a supplied table wins; otherwise simulate unless disabled.
    std::optional<CriticalValueTable> table;
    bool simulate = true;
    std::size_t reps = 10000;
    std::size_t bridge_grid = 1000;
    std::uint64_t seed = 1;
    std::string cache_dir;
    std::size_t threads = 1;
    std::string source;
};

struct PreparedInput {
    CurveSet curves;
    InputSummary summary;
};

PreparedInput prepare_input(const Dataset& data, const RunConfig& config);

/// Dimensions the table must cover for this run.
std::size_t required_table_dimension(const CurveSet& curves, const RunConfig& config);

CriticalValueTable resolve_table(const CurveSet& curves, const RunConfig& config);

struct AnalysisResult {
    RunReport report;
    std::vector<PlotRow> plot;
};

AnalysisResult run_analysis(const Dataset& data, const RunConfig& config);

}  // namespace fdcp
