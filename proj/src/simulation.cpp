#include "fdcp/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "fdcp/error.hpp"
#include "fdcp/parallel.hpp"

namespace fdcp {

namespace {

Vector brownian_path(const Vector& points, Rng& rng) {
    std::normal_distribution<double> normal;
    Vector out(points.size());
    double previous_t = 0.0;
    double value = 0.0;
    for (Eigen::Index m = 0; m < points.size(); ++m) {
        const double dt = points(m) - previous_t;
        if (dt > 0.0) {
            value += std::sqrt(dt) * normal(rng);
        }
        out(m) = value;
        previous_t = points(m);
    }
    return out;
}

}  // namespace

Vector simulate_bm(const QuadratureGrid& grid, Rng& rng) { return brownian_path(grid.points(), rng); }

Vector simulate_bb(const QuadratureGrid& grid, Rng& rng) {
    const Vector& t = grid.points();
    Vector path = brownian_path(t, rng);
    // Extend the walk to t = 1 when the grid stops short of it.
    double end = path(path.size() - 1);
    const double remaining = 1.0 - t(t.size() - 1);
    if (remaining > 0.0) {
        std::normal_distribution<double> normal;
        end += std::sqrt(remaining) * normal(rng);
    }
    Vector bridge = path - t * end;
    if (t(0) == 0.0) {
        bridge(0) = 0.0;
    }
    if (t(t.size() - 1) == 1.0) {
        bridge(t.size() - 1) = 0.0;
    }
    return bridge;
}

const std::vector<std::string>& drift_names() {
    static const std::vector<std::string> names{"t", "sin", "quad", "t2", "sqrt", "exp", "cos"};
    return names;
}

std::function<double(double)> drift_function(const std::string& name) {
    if (name == "t") {
        return [](double t) { return t; };
    }
    if (name == "sin") {
        return [](double t) { return std::sin(t); };
    }
    if (name == "quad") {
        return [](double t) { return 0.8 * t * (1.0 - t); };
    }
    if (name == "t2") {
        return [](double t) { return t * t; };
    }
    if (name == "sqrt") {
        return [](double t) { return std::sqrt(t); };
    }
    if (name == "exp") {
        return [](double t) { return std::exp(t); };
    }
    if (name == "cos") {
        return [](double t) { return std::cos(t); };
    }
    std::string menu;
    for (const auto& known : drift_names()) {
        menu += (menu.empty() ? "" : ", ") + known;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown drift '" + name + "' (available: " + menu + ")");
}

CurveSet apply_drift(const CurveSet& curves, const std::string& drift, std::size_t k_star) {
    const auto shift = drift_function(drift);
    if (k_star > curves.count()) {
        throw Error(ErrorKind::InvalidArgument, "change index exceeds the sample size");
    }
    Matrix values = curves.values();
    const Vector& t = curves.grid().points();
    Vector profile(t.size());
    for (Eigen::Index m = 0; m < t.size(); ++m) {
        profile(m) = shift(t(m));
    }
    const auto first = static_cast<Eigen::Index>(k_star);
    values.bottomRows(values.rows() - first).rowwise() += profile.transpose();
    return CurveSet(std::move(values), curves.grid_ptr(), curves.meta());
}

const char* to_string(ProcessKind kind) noexcept {
    return kind == ProcessKind::BrownianMotion ? "BM" : "BB";
}

ProcessKind parse_process(const std::string& text) {
    if (text == "BM" || text == "bm" || text == "brownian_motion") {
        return ProcessKind::BrownianMotion;
    }
    if (text == "BB" || text == "bb" || text == "brownian_bridge") {
        return ProcessKind::BrownianBridge;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown process '" + text + "' (expected BM or BB)");
}

void SimConfig::validate() const {
    if (reps < 1) {
        throw Error(ErrorKind::InvalidArgument, "reps must be at least 1");
    }
    if (n < 3) {
        throw Error(ErrorKind::InvalidArgument, "sample size must be at least 3");
    }
    if (k_star >= n) {
        throw Error(ErrorKind::InvalidArgument, "change index must satisfy 0 <= k* < N");
    }
    if (d < 1) {
        throw Error(ErrorKind::InvalidArgument, "d must be at least 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0,1)");
    }
    if (grid_m < 2 || working_m < 2) {
        throw Error(ErrorKind::InvalidArgument, "grids need at least two points");
    }
    drift_function(drift);
}

SampleGenerator::SampleGenerator(const SimConfig& config)
    : m_config(config), m_working_grid(make_grid(config.working_m)), m_drift(drift_function(config.drift)) {
    m_config.validate();
    if (config.preprocessing == Preprocessing::Direct) {
        m_generation_grid = m_working_grid;
        return;
    }
    m_generation_grid = make_grid(config.grid_m);
    const Vector& x = m_generation_grid->points();
    if (config.preprocessing == Preprocessing::Smooth) {
        const std::vector<double> abscissae(x.data(), x.data() + x.size());
        const BSplineBasis basis(default_basis_size(config.grid_m, config.basis));
        m_smoother.emplace(abscissae, basis, m_working_grid);
        return;
    }
    m_resampler.emplace(std::vector<double>(x.data(), x.data() + x.size()), m_working_grid);
}

CurveSet SampleGenerator::draw(std::size_t rep) const {
    Rng rng = stream_rng(m_config.seed, rep);
    const QuadratureGrid& grid = *m_generation_grid;
    const auto n = static_cast<Eigen::Index>(m_config.n);
    Matrix values(n, static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        values.row(i) = (m_config.process == ProcessKind::BrownianMotion ? simulate_bm(grid, rng)
                                                                         : simulate_bb(grid, rng))
                            .transpose();
    }
    if (m_config.k_star > 0) {
        const Vector& t = grid.points();
        Vector profile(t.size());
        for (Eigen::Index m = 0; m < t.size(); ++m) {
            profile(m) = m_drift(t(m));
        }
        const auto first = static_cast<Eigen::Index>(m_config.k_star);
        values.bottomRows(n - first).rowwise() += profile.transpose();
    }
    if (m_smoother) {
        return m_smoother->apply(values);
    }
    if (m_resampler) {
        return m_resampler->apply(values);
    }
    return CurveSet(std::move(values), m_working_grid);
}

std::vector<PowerRow> power_study(const SimConfig& config, const std::vector<StatisticMode>& modes,
                                  const CriticalValueTable& table, const ProcessOptions& options) {
    config.validate();
    for (std::size_t m = 0; m < modes.size(); ++m) {
        (void)table.at(config.d, config.alpha);
    }
    const SampleGenerator generator(config);
    std::vector<std::vector<unsigned char>> rejected(modes.size(), std::vector<unsigned char>(config.reps, 0));
    ProcessOptions inner = options;
    inner.threads = 1;
    parallel_for(config.reps, config.threads, [&](std::size_t rep) {
        const CurveSet sample = generator.draw(rep);
        for (std::size_t m = 0; m < modes.size(); ++m) {
            const TestResult result = run_test(sample, config.d, config.alpha, modes[m], table, inner);
            rejected[m][rep] = result.reject ? 1 : 0;
        }
    });

    std::vector<PowerRow> rows;
    for (std::size_t m = 0; m < modes.size(); ++m) {
        PowerRow row;
        row.process = config.process;
        row.n = config.n;
        row.k_star = config.k_star;
        row.drift = config.drift;
        row.mode = modes[m];
        row.d = config.d;
        row.alpha = config.alpha;
        row.reps = config.reps;
        for (unsigned char flag : rejected[m]) {
            row.rejections += flag;
        }
        row.power = static_cast<double>(row.rejections) / static_cast<double>(row.reps);
        row.std_error = std::sqrt(row.power * (1.0 - row.power) / static_cast<double>(row.reps));
        rows.push_back(row);
    }
    return rows;
}

void write_power_csv(std::ostream& out, const std::vector<PowerRow>& rows, bool header) {
    if (header) {
        out << "process,n,k_star,drift,mode,d,alpha,reps,rejections,power,std_error\n";
    }
    char buffer[64];
    for (const auto& row : rows) {
        out << to_string(row.process) << ',' << row.n << ',' << row.k_star << ',' << row.drift << ','
            << to_string(row.mode) << ',' << row.d << ',';
        std::snprintf(buffer, sizeof buffer, "%.6g", row.alpha);
        out << buffer << ',' << row.reps << ',' << row.rejections << ',';
        std::snprintf(buffer, sizeof buffer, "%.6f,%.6f", row.power, row.std_error);
        out << buffer << '\n';
    }
}

}  // namespace fdcp
