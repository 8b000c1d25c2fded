#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "fdcp/analysis.hpp"
#include "fdcp/error.hpp"
#include "fdcp/simulation.hpp"

namespace fdcp::cli {

namespace {

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::InvalidArgument, "'" + item + "' is not a number");
        }
    }
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    for (double value : parse_doubles(text)) {
        if (value < 0 || value != static_cast<double>(static_cast<std::size_t>(value))) {
            throw Error(ErrorKind::InvalidArgument, "expected nonnegative integers, got '" + text + "'");
        }
        out.push_back(static_cast<std::size_t>(value));
    }
    return out;
}

std::vector<StatisticMode> parse_modes(const std::string& text) {
    if (text == "both") {
        return {StatisticMode::H, StatisticMode::S};
    }
    std::vector<StatisticMode> modes;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        modes.push_back(parse_mode(item));
    }
    return modes;
}

template <typename Write>
void write_output(const std::string& path, std::ostream& out, Write write) {
    if (path.empty() || path == "-") {
        write(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    }
    write(file);
}

CriticalValueTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::ParseError, "cannot open table " + path);
    }
    return CriticalValueTable::read_csv(in);
}

struct TestFlags {
    std::string input;
    bool labels = false;
    std::string header = "auto";
    std::size_t d = 0;
    double fraction = 0.0;
    double alpha = 0.05;
    std::string mode = "H";
    std::size_t grid = 0;
    std::size_t basis = 0;
    std::size_t reps = 10000;
    std::uint64_t seed = 1;
    std::size_t bridge_grid = 1000;
    bool segment = false;
    std::size_t min_segment = 10;
    std::string json;
    std::string plotdata;
    std::string table;
    bool no_simulate = false;
    std::size_t threads = 1;
    bool quiet = false;
};

int cmd_test(const TestFlags& flags, const CLI::App& sub, std::ostream& out) {
    IngestOptions ingest;
    ingest.labels = flags.labels;
    if (flags.header == "none") {
        ingest.header = HeaderMode::None;
    } else if (flags.header == "abscissae") {
        ingest.header = HeaderMode::Abscissae;
    }
    const Dataset data = ingest_csv_file(flags.input, ingest);

    RunConfig config;
    if (sub.count("--d") > 0) {
        config.d = flags.d;
    } else if (sub.count("--explained-fraction") > 0) {
        config.explained_fraction = flags.fraction;
    }
    config.alpha = flags.alpha;
    config.modes = parse_modes(flags.mode);
    if (sub.count("--grid") > 0) {
        config.grid = flags.grid;
    }
    if (sub.count("--basis") > 0) {
        config.basis = flags.basis;
    }
    config.segment = flags.segment;
    config.min_segment = flags.min_segment;
    config.reps = flags.reps;
    config.seed = flags.seed;
    config.bridge_grid = flags.bridge_grid;
    config.simulate = !flags.no_simulate;
    config.threads = flags.threads;
    config.cache_dir = table_cache_dir_from_env();
    config.source = flags.input;
    if (!flags.table.empty()) {
        config.table = read_table(flags.table);
    }

    const AnalysisResult result = run_analysis(data, config);
    if (!flags.quiet) {
        write_summary(out, result.report);
    }
    if (!flags.json.empty()) {
        write_output(flags.json, out, [&](std::ostream& o) { o << report_to_json(result.report) << '\n'; });
    }
    if (!flags.plotdata.empty()) {
        write_output(flags.plotdata, out, [&](std::ostream& o) { write_plot_csv(o, result.plot); });
    }
    return result.report.exit_code();
}

struct TablesFlags {
    std::size_t d_max = 5;
    std::string alphas = "0.10,0.05,0.01";
    std::size_t reps = 100000;
    std::uint64_t seed = 1;
    std::size_t bridge_grid = 1000;
    std::string out;
    std::size_t threads = 0;
};

int cmd_tables(const TablesFlags& flags, std::ostream& out) {
    const CriticalValueTable table =
        cached_limit_quantiles(table_cache_dir_from_env(), flags.d_max, parse_doubles(flags.alphas), flags.reps,
                               flags.bridge_grid, flags.seed, flags.threads);
    write_output(flags.out, out, [&](std::ostream& o) { table.write_csv(o); });
    return 0;
}

struct PowerFlags {
    std::string preset;
    std::string process = "BM";
    std::size_t n = 100;
    std::string k_star = "50";
    std::string drift = "t";
    std::size_t d = 3;
    double alpha = 0.05;
    std::size_t reps = 1000;
    std::uint64_t seed = 20240101;
    std::string modes = "H,S";
    std::size_t grid_m = 1000;
    std::size_t working_m = 201;
    std::string preprocessing = "resample";
    std::size_t basis = 750;
    std::size_t threads = 0;
    std::string table;
    std::size_t table_reps = 100000;
    std::uint64_t table_seed = 1;
    std::string out;
};

int cmd_power(const PowerFlags& flags, std::ostream& out, std::ostream& err) {
    SimConfig base;
    base.n = flags.n;
    base.d = flags.d;
    base.alpha = flags.alpha;
    base.reps = flags.reps;
    base.seed = flags.seed;
    base.grid_m = flags.grid_m;
    base.working_m = flags.working_m;
    base.basis = flags.basis;
    base.threads = flags.threads;
    if (flags.preprocessing == "resample") {
        base.preprocessing = Preprocessing::Resample;
    } else if (flags.preprocessing == "smooth") {
        base.preprocessing = Preprocessing::Smooth;
    } else if (flags.preprocessing == "direct") {
        base.preprocessing = Preprocessing::Direct;
    } else {
        throw Error(ErrorKind::InvalidArgument, "preprocessing must be resample, smooth or direct");
    }

    std::vector<SimConfig> configs;
    if (flags.preset == "reference") {
        base.n = 100;
        base.d = 3;
        const std::vector<std::pair<ProcessKind, std::string>> scenarios{
            {ProcessKind::BrownianMotion, "t"}, {ProcessKind::BrownianMotion, "sin"},
            {ProcessKind::BrownianBridge, "quad"}};
        for (const auto& [process, drift] : scenarios) {
            for (std::size_t k : {0, 15, 20, 25, 35, 50, 65, 75, 80, 85}) {
                SimConfig config = base;
                config.process = process;
                config.drift = drift;
                config.k_star = k;
                configs.push_back(config);
            }
        }
    } else if (!flags.preset.empty()) {
        throw Error(ErrorKind::InvalidArgument, "unknown preset '" + flags.preset + "' (available: reference)");
    } else {
        for (std::size_t k : parse_sizes(flags.k_star)) {
            SimConfig config = base;
            config.process = parse_process(flags.process);
            config.drift = flags.drift;
            config.k_star = k;
            configs.push_back(config);
        }
    }
    for (const auto& config : configs) {
        config.validate();
    }
    const std::vector<StatisticMode> modes = parse_modes(flags.modes);

    const CriticalValueTable table =
        flags.table.empty()
            ? cached_limit_quantiles(table_cache_dir_from_env(), base.d, {0.10, 0.05, 0.01, base.alpha},
                                     flags.table_reps, 1000, flags.table_seed, flags.threads)
            : read_table(flags.table);

    std::vector<PowerRow> rows;
    for (const auto& config : configs) {
        const auto part = power_study(config, modes, table);
        rows.insert(rows.end(), part.begin(), part.end());
        err << "k*=" << config.k_star << ' ' << to_string(config.process) << '+' << config.drift << " done\n";
    }
    write_output(flags.out, out, [&](std::ostream& o) { write_power_csv(o, rows); });
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Change-point tests for the mean function of a sequence of curves"};
    app.name("fdcp");
    app.require_subcommand(1);

    TestFlags test;
    CLI::App* test_cmd = app.add_subcommand("test", "Test a CSV of curves (one per row) for a change in mean");
    test_cmd->add_option("--input,-i", test.input, "CSV file, one curve per row")->required();
    test_cmd->add_flag("--labels", test.labels, "First column holds row labels such as years");
    test_cmd->add_option("--header", test.header, "First row handling")
        ->check(CLI::IsMember({"auto", "none", "abscissae"}));
    auto* d_opt = test_cmd->add_option("--d", test.d, "Number of eigenfunctions")->check(CLI::PositiveNumber);
    test_cmd->add_option("--explained-fraction", test.fraction, "Pick d explaining this share of variance")
        ->check(CLI::Range(0.0, 1.0))
        ->excludes(d_opt);
    test_cmd->add_option("--alpha", test.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    test_cmd->add_option("--mode", test.mode, "H, S or both");
    test_cmd->add_option("--grid", test.grid, "Working grid size")->check(CLI::Range(2, 1000000));
    test_cmd->add_option("--basis", test.basis, "Smooth with this many cubic B-splines first");
    test_cmd->add_option("--reps", test.reps, "Limit draws for critical values and p-values");
    test_cmd->add_option("--seed", test.seed, "Seed for the limit simulation");
    test_cmd->add_option("--bridge-grid", test.bridge_grid, "Grid for simulated Brownian bridges");
    test_cmd->add_flag("--segment", test.segment, "Binary segmentation for multiple changes");
    test_cmd->add_option("--min-segment", test.min_segment, "Shortest segment that is tested");
    test_cmd->add_option("--json", test.json, "Write the JSON report here ('-' for stdout)");
    test_cmd->add_option("--plotdata", test.plotdata, "Write plot data CSV here");
    test_cmd->add_option("--table", test.table, "Critical value table CSV (from `fdcp tables`)");
    test_cmd->add_flag("--no-simulate", test.no_simulate, "Fail instead of simulating critical values");
    test_cmd->add_option("--threads", test.threads, "Worker threads (0 = all cores)");
    test_cmd->add_flag("--quiet,-q", test.quiet, "No summary on stdout");

    TablesFlags tables;
    CLI::App* tables_cmd = app.add_subcommand("tables", "Simulate critical values of the null limit");
    tables_cmd->add_option("--d-max", tables.d_max, "Largest dimension")->check(CLI::PositiveNumber);
    tables_cmd->add_option("--alphas", tables.alphas, "Comma-separated levels");
    tables_cmd->add_option("--reps", tables.reps, "Monte Carlo draws")->check(CLI::PositiveNumber);
    tables_cmd->add_option("--seed", tables.seed, "Seed");
    tables_cmd->add_option("--bridge-grid", tables.bridge_grid, "Bridge grid points");
    tables_cmd->add_option("--out,-o", tables.out, "Output CSV (default stdout)");
    tables_cmd->add_option("--threads", tables.threads, "Worker threads (0 = all cores)");

    PowerFlags power;
    CLI::App* power_cmd = app.add_subcommand("power", "Monte Carlo power of the H and S tests");
    power_cmd->add_option("--preset", power.preset, "reference: N=100, d=3, three scenarios, ten change locations");
    power_cmd->add_option("--process", power.process, "BM or BB");
    power_cmd->add_option("--n", power.n, "Sample size");
    power_cmd->add_option("--k-star", power.k_star, "Change locations, comma-separated (0 = none)");
    power_cmd->add_option("--drift", power.drift, "t, sin, quad, t2, sqrt, exp or cos");
    power_cmd->add_option("--d", power.d, "Number of eigenfunctions");
    power_cmd->add_option("--alpha", power.alpha, "Significance level");
    power_cmd->add_option("--reps", power.reps, "Replications per configuration");
    power_cmd->add_option("--seed", power.seed, "Seed");
    power_cmd->add_option("--modes", power.modes, "H,S or a subset");
    power_cmd->add_option("--grid-m", power.grid_m, "Generation grid size");
    power_cmd->add_option("--working-m", power.working_m, "Working grid size");
    power_cmd->add_option("--preprocessing", power.preprocessing, "resample, smooth or direct");
    power_cmd->add_option("--basis", power.basis, "B-spline basis size for --preprocessing smooth");
    power_cmd->add_option("--threads", power.threads, "Worker threads (0 = all cores)");
    power_cmd->add_option("--table", power.table, "Critical value table CSV");
    power_cmd->add_option("--table-reps", power.table_reps, "Limit draws when simulating critical values");
    power_cmd->add_option("--table-seed", power.table_seed, "Seed for the critical values");
    power_cmd->add_option("--out,-o", power.out, "Output CSV (default stdout)");

    std::vector<std::string> storage{"fdcp"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& arg : storage) {
        argv.push_back(arg.data());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (test_cmd->parsed()) {
            return cmd_test(test, *test_cmd, out);
        }
        if (tables_cmd->parsed()) {
            return cmd_tables(tables, out);
        }
        return cmd_power(power, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return 2;
}

}  // namespace fdcp::cli
