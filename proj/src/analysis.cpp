#include "fdcp/analysis.hpp"

#include <algorithm>
#include <chrono>

#include "fdcp/error.hpp"

namespace fdcp {

namespace {

std::vector<double> table_alphas(double alpha) {
    std::vector<double> alphas{0.10, 0.05, 0.01};
    if (std::none_of(alphas.begin(), alphas.end(), [&](double a) { return std::abs(a - alpha) < 1e-12; })) {
        alphas.push_back(alpha);
    }
    return alphas;
}

std::string label_at(const Dataset& data, std::size_t index) {
    return index < data.labels.size() ? data.labels[index] : std::string();
}

void add_plot_rows(std::vector<PlotRow>& plot, const CurveSet& segment, std::size_t first, std::size_t d,
                   StatisticMode mode, const ProcessOptions& options) {
    const CusumProcess process = r_process(segment, d, mode, options);
    const std::size_t n = segment.count();
    const std::size_t end = first + n;
    for (std::size_t k = 1; k <= n; ++k) {
        plot.push_back({"r_process", mode, first, end, k, static_cast<double>(k) / static_cast<double>(n),
                        process.values[k - 1]});
    }
    const std::size_t k_hat = std::clamp<std::size_t>(argmax_split(process), 1, n - 1);
    const SegmentMeans means = segment_means(segment, k_hat);
    const Vector& t = segment.grid().points();
    for (Eigen::Index m = 0; m < t.size(); ++m) {
        const auto index = static_cast<std::size_t>(m);
        plot.push_back({"mean_before", mode, first, end, index, t(m), means.head_mean(m)});
        plot.push_back({"mean_after", mode, first, end, index, t(m), means.tail_mean(m)});
    }
    KernelEstimate kernel = mode == StatisticMode::S ? pooled_kernel(segment)
                                                     : split_kernel(segment, k_hat, options.split);
    if (mode == StatisticMode::H && options.bias_correction) {
        kernel = bias_correct(kernel);
    }
    const EigenSystem system = eigendecompose(kernel, std::min(d, segment.grid_size()));
    for (std::size_t l = 0; l < system.dimension(); ++l) {
        const std::string name = "eigenfunction_" + std::to_string(l + 1);
        for (Eigen::Index m = 0; m < t.size(); ++m) {
            plot.push_back({name, mode, first, end, static_cast<std::size_t>(m), t(m),
                            system.eigenfunctions(m, static_cast<Eigen::Index>(l))});
        }
    }
}

}  // namespace

PreparedInput prepare_input(const Dataset& data, const RunConfig& config) {
    const RawCurves& raw = data.curves;
    InputSummary summary;
    summary.source = config.source;
    summary.n = raw.count();
    summary.raw_samples = raw.samples();
    summary.rescaled = data.rescaled;
    summary.abscissa_min = data.abscissa_min;
    summary.abscissa_max = data.abscissa_max;
    summary.labels = !data.labels.empty();

    if (config.basis) {
        const std::size_t size = default_basis_size(raw.samples(), config.basis);
        const GridPtr grid = make_grid(config.grid.value_or(raw.samples()));
        CurveSet curves = smooth_to_basis(raw, BSplineBasis(size), grid);
        summary.preprocessing = "smoothed";
        summary.basis_size = size;
        summary.grid_size = curves.grid_size();
        return {std::move(curves), summary};
    }
    if (config.grid && *config.grid != raw.samples()) {
        CurveSet curves = resample_linear(raw, make_grid(*config.grid));
        summary.preprocessing = "resampled";
        summary.grid_size = curves.grid_size();
        return {std::move(curves), summary};
    }
    CurveSet curves = as_curve_set(raw);
    summary.grid_size = curves.grid_size();
    return {std::move(curves), summary};
}

std::size_t required_table_dimension(const CurveSet& curves, const RunConfig& config) {
    if (config.d) {
        return *config.d;
    }
    const std::size_t root = DRule::explained(config.explained_fraction).resolve(curves);
    if (!config.segment) {
        return root;
    }
    // Sub-segments may need a few more modes than the full sample.
    return std::min(curves.grid_size(), std::max<std::size_t>(10, 2 * root));
}

CriticalValueTable resolve_table(const CurveSet& curves, const RunConfig& config) {
    if (config.table) {
        return *config.table;
    }
    const std::size_t d_max = required_table_dimension(curves, config);
    if (!config.simulate) {
        throw Error(ErrorKind::TableMiss, "no critical-value table available; generate one with `fdcp tables --d-max " +
                                              std::to_string(d_max) + "` and pass it with --table");
    }
    return cached_limit_quantiles(config.cache_dir, d_max, table_alphas(config.alpha), config.reps,
                                  config.bridge_grid, config.seed, config.threads);
}

AnalysisResult run_analysis(const Dataset& data, const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    if (config.modes.empty()) {
        throw Error(ErrorKind::InvalidArgument, "at least one statistic mode is required");
    }
    const PreparedInput input = prepare_input(data, config);
    const CurveSet& curves = input.curves;
    const CriticalValueTable table = resolve_table(curves, config);

    ProcessOptions options;
    options.threads = config.threads;

    AnalysisResult out;
    RunReport& report = out.report;
    report.input = input.summary;
    report.alpha = config.alpha;
    report.d = config.d;
    if (!config.d) {
        report.explained_fraction = config.explained_fraction;
    }
    report.segmented = config.segment;
    report.min_segment = config.segment ? config.min_segment : 0;
    report.table = table.provenance;

    const DRule rule = config.d ? DRule::fixed_d(*config.d) : DRule::explained(config.explained_fraction);
    for (StatisticMode mode : config.modes) {
        ModeReport mode_report;
        mode_report.mode = mode;
        if (config.segment) {
            const SegmentationTree tree =
                binary_segmentation(curves, rule, config.alpha, config.min_segment, mode, table, options);
            for (const auto& node : tree.nodes) {
                SegmentRow row;
                row.first = node.first;
                row.end = node.end;
                row.depth = node.depth;
                row.parent = node.parent;
                row.label_first = label_at(data, node.first);
                row.label_last = label_at(data, node.end - 1);
                row.result = node.result;
                row.annotation = node.annotation;
                row.change_point = node.split;
                if (node.split) {
                    row.change_label = label_at(data, *node.split - 1);
                }
                if (node.result) {
                    add_plot_rows(out.plot, curves.slice(node.first, node.length()), node.first, node.result->d,
                                  mode, options);
                }
                mode_report.segments.push_back(std::move(row));
            }
            mode_report.change_points = tree.change_points;
        } else {
            const std::size_t d = rule.resolve(curves);
            const TestOutcome outcome = run_test_detailed(curves, d, config.alpha, mode, table, options);
            SegmentRow row;
            row.first = 0;
            row.end = curves.count();
            row.label_first = label_at(data, 0);
            row.label_last = label_at(data, curves.count() - 1);
            row.result = outcome.result;
            if (outcome.result.reject) {
                row.change_point = outcome.result.change_index;
                row.change_label = label_at(data, outcome.result.change_index - 1);
                mode_report.change_points.push_back(outcome.result.change_index);
            }
            add_plot_rows(out.plot, curves, 0, d, mode, options);
            mode_report.segments.push_back(std::move(row));
        }
        if (!data.labels.empty()) {
            for (std::size_t cp : mode_report.change_points) {
                mode_report.change_labels.push_back(label_at(data, cp - 1));
            }
        }
        report.modes.push_back(std::move(mode_report));
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace fdcp
