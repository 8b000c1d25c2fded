#include "fdcp/report.hpp"

#include <cstdio>
#include <ostream>

#include "json.hpp"

#include "fdcp/error.hpp"

namespace fdcp {

using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& value) {
    return value ? json(*value) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<T>();
}

json result_json(const TestResult& r) {
    return json{{"statistic", r.statistic},   {"mode", to_string(r.mode)},
                {"d", r.d},                   {"critical_value", r.critical_value},
                {"alpha", r.alpha},           {"p_value", optional_json(r.p_value)},
                {"reject", r.reject},         {"theta_hat", r.theta_hat},
                {"change_index", r.change_index}, {"n", r.n}};
}

TestResult result_from(const json& j) {
    TestResult r;
    r.statistic = j.at("statistic").get<double>();
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.d = j.at("d").get<std::size_t>();
    r.critical_value = j.at("critical_value").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.p_value = optional_from<double>(j, "p_value");
    r.reject = j.at("reject").get<bool>();
    r.theta_hat = j.at("theta_hat").get<double>();
    r.change_index = j.at("change_index").get<std::size_t>();
    r.n = j.at("n").get<std::size_t>();
    return r;
}

json segment_json(const SegmentRow& s) {
    return json{{"first", s.first},
                {"end", s.end},
                {"depth", s.depth},
                {"parent", optional_json(s.parent)},
                {"label_first", s.label_first},
                {"label_last", s.label_last},
                {"result", s.result ? result_json(*s.result) : json(nullptr)},
                {"annotation", s.annotation},
                {"change_point", optional_json(s.change_point)},
                {"change_label", s.change_label}};
}

SegmentRow segment_from(const json& j) {
    SegmentRow s;
    s.first = j.at("first").get<std::size_t>();
    s.end = j.at("end").get<std::size_t>();
    s.depth = j.at("depth").get<std::size_t>();
    s.parent = optional_from<std::size_t>(j, "parent");
    s.label_first = j.value("label_first", "");
    s.label_last = j.value("label_last", "");
    if (j.contains("result") && !j.at("result").is_null()) {
        s.result = result_from(j.at("result"));
    }
    s.annotation = j.value("annotation", "");
    s.change_point = optional_from<std::size_t>(j, "change_point");
    s.change_label = j.value("change_label", "");
    return s;
}

const char* source_name(TableProvenance::Source source) {
    return source == TableProvenance::Source::Simulated ? "simulated" : "user-supplied";
}

}  // namespace

int RunReport::exit_code() const {
    for (const auto& mode : modes) {
        if (!mode.change_points.empty()) {
            return 1;
        }
        for (const auto& segment : mode.segments) {
            if (segment.result && segment.result->reject) {
                return 1;
            }
        }
    }
    return 0;
}

std::string report_to_json(const RunReport& report, int indent) {
    json modes = json::array();
    for (const auto& mode : report.modes) {
        json segments = json::array();
        for (const auto& segment : mode.segments) {
            segments.push_back(segment_json(segment));
        }
        modes.push_back(json{{"mode", to_string(mode.mode)},
                             {"segments", segments},
                             {"change_points", mode.change_points},
                             {"change_labels", mode.change_labels}});
    }
    const InputSummary& in = report.input;
    const json j{
        {"schema_version", report.schema_version},
        {"input",
         {{"source", in.source},
          {"n", in.n},
          {"raw_samples", in.raw_samples},
          {"grid_size", in.grid_size},
          {"preprocessing", in.preprocessing},
          {"basis_size", in.basis_size},
          {"rescaled", in.rescaled},
          {"abscissa_min", in.abscissa_min},
          {"abscissa_max", in.abscissa_max},
          {"labels", in.labels}}},
        {"alpha", report.alpha},
        {"d", optional_json(report.d)},
        {"explained_fraction", optional_json(report.explained_fraction)},
        {"segmented", report.segmented},
        {"min_segment", report.min_segment},
        {"modes", modes},
        {"table",
         {{"source", source_name(report.table.source)},
          {"reps", report.table.reps},
          {"bridge_grid", report.table.bridge_grid},
          {"seed", report.table.seed}}},
        {"seconds", report.seconds},
        {"exit_code", report.exit_code()},
    };
    return j.dump(indent);
}

RunReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("report is not valid JSON: ") + e.what());
    }
    try {
        RunReport report;
        report.schema_version = j.at("schema_version").get<int>();
        if (report.schema_version > kReportSchemaVersion) {
            throw Error(ErrorKind::ParseError, "report schema version " + std::to_string(report.schema_version) +
                                                   " is newer than this reader");
        }
        const json& in = j.at("input");
        report.input.source = in.value("source", "");
        report.input.n = in.at("n").get<std::size_t>();
        report.input.raw_samples = in.at("raw_samples").get<std::size_t>();
        report.input.grid_size = in.at("grid_size").get<std::size_t>();
        report.input.preprocessing = in.value("preprocessing", "raw");
        report.input.basis_size = in.value("basis_size", std::size_t{0});
        report.input.rescaled = in.value("rescaled", false);
        report.input.abscissa_min = in.value("abscissa_min", 0.0);
        report.input.abscissa_max = in.value("abscissa_max", 1.0);
        report.input.labels = in.value("labels", false);
        report.alpha = j.at("alpha").get<double>();
        report.d = optional_from<std::size_t>(j, "d");
        report.explained_fraction = optional_from<double>(j, "explained_fraction");
        report.segmented = j.value("segmented", false);
        report.min_segment = j.value("min_segment", std::size_t{0});
        for (const auto& m : j.at("modes")) {
            ModeReport mode;
            mode.mode = parse_mode(m.at("mode").get<std::string>());
            for (const auto& s : m.at("segments")) {
                mode.segments.push_back(segment_from(s));
            }
            mode.change_points = m.value("change_points", std::vector<std::size_t>{});
            mode.change_labels = m.value("change_labels", std::vector<std::string>{});
            report.modes.push_back(std::move(mode));
        }
        const json& table = j.at("table");
        report.table.source = table.value("source", "simulated") == "simulated"
                                  ? TableProvenance::Source::Simulated
                                  : TableProvenance::Source::UserSupplied;
        report.table.reps = table.value("reps", std::size_t{0});
        report.table.bridge_grid = table.value("bridge_grid", std::size_t{0});
        report.table.seed = table.value("seed", std::uint64_t{0});
        report.seconds = j.value("seconds", 0.0);
        return report;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("malformed report: ") + e.what());
    }
}

void write_summary(std::ostream& out, const RunReport& report) {
    const bool labelled = report.input.labels;
    char line[256];
    for (const auto& mode : report.modes) {
        out << "mode " << to_string(mode.mode) << '\n';
        std::snprintf(line, sizeof line, "  %-24s %12s %10s %10s  %s\n", "segment", "statistic", "critical",
                      "p-value", "change point");
        out << line;
        for (const auto& segment : mode.segments) {
            std::string range = labelled ? segment.label_first + "-" + segment.label_last
                                         : std::to_string(segment.first + 1) + "-" + std::to_string(segment.end);
            range = std::string(2 * segment.depth, ' ') + range;
            if (!segment.result) {
                std::snprintf(line, sizeof line, "  %-24s %12s %10s %10s  (%s)\n", range.c_str(), "-", "-", "-",
                              segment.annotation.c_str());
                out << line;
                continue;
            }
            const TestResult& r = *segment.result;
            char p[32] = "-";
            if (r.p_value) {
                std::snprintf(p, sizeof p, "%.4g", *r.p_value);
            }
            std::string change = "-";
            if (segment.change_point) {
                change = labelled ? segment.change_label : std::to_string(*segment.change_point);
            }
            std::snprintf(line, sizeof line, "  %-24s %12.4f %10.4f %10s  %s\n", range.c_str(), r.statistic,
                          r.critical_value, p, change.c_str());
            out << line;
        }
    }
}

void write_plot_csv(std::ostream& out, const std::vector<PlotRow>& rows) {
    out << "series,mode,first,end,index,x,value\n";
    char buffer[96];
    for (const auto& row : rows) {
        std::snprintf(buffer, sizeof buffer, "%.10g,%.12g", row.x, row.value);
        out << row.series << ',' << to_string(row.mode) << ',' << row.first << ',' << row.end << ','
            << row.index << ',' << buffer << '\n';
    }
}

}  // namespace fdcp
