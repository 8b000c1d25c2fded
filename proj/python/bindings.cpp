#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdcp/analysis.hpp"
#include "fdcp/error.hpp"
#include "fdcp/simulation.hpp"

namespace py = pybind11;
using namespace fdcp;

namespace {

CurveSet make_curves(const Matrix& values, const std::optional<std::vector<double>>& points) {
    if (points) {
        return CurveSet(values, make_grid_from_points(*points));
    }
    return CurveSet(values, make_grid(static_cast<std::size_t>(values.cols())));
}

py::dict result_dict(const TestResult& r) {
    py::dict out;
    out["statistic"] = r.statistic;
    out["mode"] = to_string(r.mode);
    out["d"] = r.d;
    out["critical_value"] = r.critical_value;
    out["alpha"] = r.alpha;
    out["p_value"] = r.p_value ? py::object(py::float_(*r.p_value)) : py::object(py::none());
    out["reject"] = r.reject;
    out["theta_hat"] = r.theta_hat;
    out["change_index"] = r.change_index;
    out["n"] = r.n;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Change-point tests for the mean of functional data";

    static py::exception<Error> error(m, "FdcpError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    py::enum_<StatisticMode>(m, "Mode").value("H", StatisticMode::H).value("S", StatisticMode::S);
    py::enum_<Engine>(m, "Engine").value("Secular", Engine::Secular).value("Direct", Engine::Direct);

    py::class_<CriticalValueTable>(m, "CriticalValueTable")
        .def(py::init<>())
        .def("set", &CriticalValueTable::set, py::arg("d"), py::arg("alpha"), py::arg("value"))
        .def("at", &CriticalValueTable::at, py::arg("d"), py::arg("alpha"))
        .def("contains", &CriticalValueTable::contains, py::arg("d"), py::arg("alpha"))
        .def("dimensions", &CriticalValueTable::dimensions)
        .def("to_csv",
             [](const CriticalValueTable& t) {
                 std::ostringstream out;
                 t.write_csv(out);
                 return out.str();
             })
        .def_static("from_csv", [](const std::string& text) {
            std::istringstream in(text);
            return CriticalValueTable::read_csv(in);
        });

    m.def("limit_quantiles", &limit_quantiles, py::arg("d_max"), py::arg("alphas"), py::arg("reps"),
          py::arg("bridge_grid") = 1000, py::arg("seed") = 1, py::arg("threads") = 1,
          "Critical values K_d(alpha) of the null limit by Monte Carlo.");
    m.def("simulate_limit_draws", &simulate_limit_draws, py::arg("d_max"), py::arg("reps"),
          py::arg("bridge_grid") = 1000, py::arg("seed") = 1, py::arg("threads") = 1);
    m.def("p_value", &p_value, py::arg("statistic"), py::arg("table"), py::arg("d"));

    m.def(
        "pooled_kernel",
        [](const Matrix& values, std::optional<std::vector<double>> points) {
            return pooled_kernel(make_curves(values, points)).values;
        },
        py::arg("values"), py::arg("points") = py::none());
    m.def(
        "split_kernel",
        [](const Matrix& values, std::size_t k, std::optional<std::vector<double>> points) {
            return split_kernel(make_curves(values, points), k).values;
        },
        py::arg("values"), py::arg("k"), py::arg("points") = py::none());
    m.def(
        "eigen",
        [](const Matrix& kernel, std::size_t d, std::optional<std::vector<double>> points) {
            const GridPtr grid = points ? make_grid_from_points(*points)
                                        : make_grid(static_cast<std::size_t>(kernel.rows()));
            KernelEstimate estimate{kernel, std::nullopt, false, 0, grid};
            const EigenSystem system = eigendecompose(estimate, d);
            return py::make_tuple(system.eigenvalues, system.eigenfunctions);
        },
        py::arg("kernel"), py::arg("d"), py::arg("points") = py::none(),
        "Leading eigenvalues and L2-normalised eigenfunctions of a kernel on a trapezoid grid.");
    m.def("select_d", [](const Vector& eigenvalues, double fraction) { return select_d(eigenvalues, fraction); },
          py::arg("eigenvalues"), py::arg("fraction"));

    m.def(
        "r_process",
        [](const Matrix& values, std::size_t d, StatisticMode mode, Engine engine, bool bias_correction,
           std::optional<std::vector<double>> points) {
            ProcessOptions options;
            options.engine = engine;
            options.bias_correction = bias_correction;
            return r_process(make_curves(values, points), d, mode, options).values;
        },
        py::arg("values"), py::arg("d"), py::arg("mode") = StatisticMode::H, py::arg("engine") = Engine::Secular,
        py::arg("bias_correction") = true, py::arg("points") = py::none(),
        "R_N(k/N) for k = 1..N.");
    m.def(
        "run_test",
        [](const Matrix& values, std::size_t d, double alpha, StatisticMode mode, const CriticalValueTable& table,
           std::optional<std::vector<double>> points) {
            return result_dict(run_test(make_curves(values, points), d, alpha, mode, table));
        },
        py::arg("values"), py::arg("d"), py::arg("alpha"), py::arg("mode"), py::arg("table"),
        py::arg("points") = py::none());
    m.def(
        "binary_segmentation",
        [](const Matrix& values, std::size_t d, double alpha, std::size_t min_segment, StatisticMode mode,
           const CriticalValueTable& table, std::optional<std::vector<double>> points) {
            const SegmentationTree tree = binary_segmentation(make_curves(values, points), DRule::fixed_d(d), alpha,
                                                              min_segment, mode, table);
            py::list nodes;
            for (const auto& node : tree.nodes) {
                py::dict item;
                item["first"] = node.first;
                item["end"] = node.end;
                item["depth"] = node.depth;
                item["annotation"] = node.annotation;
                item["split"] = node.split ? py::object(py::int_(*node.split)) : py::object(py::none());
                item["result"] = node.result ? py::object(result_dict(*node.result)) : py::object(py::none());
                nodes.append(item);
            }
            return py::make_tuple(tree.change_points, nodes);
        },
        py::arg("values"), py::arg("d"), py::arg("alpha"), py::arg("min_segment"), py::arg("mode"), py::arg("table"),
        py::arg("points") = py::none(), "Returns (change_points, nodes).");

    m.def(
        "simulate_sample",
        [](const std::string& process, std::size_t n, std::size_t k_star, const std::string& drift, std::size_t m,
           std::uint64_t seed, std::size_t rep) {
            SimConfig config;
            config.process = parse_process(process);
            config.n = n;
            config.k_star = k_star;
            config.drift = drift;
            config.working_m = m;
            config.preprocessing = Preprocessing::Direct;
            config.seed = seed;
            return SampleGenerator(config).draw(rep).values();
        },
        py::arg("process") = "BM", py::arg("n") = 100, py::arg("k_star") = 0, py::arg("drift") = "t",
        py::arg("m") = 201, py::arg("seed") = 1, py::arg("rep") = 0,
        "N curves of BM or BB on an m-point grid, drift added after curve k_star.");
    m.def(
        "power_study",
        [](const std::string& process, std::size_t n, std::size_t k_star, const std::string& drift, std::size_t d,
           double alpha, std::size_t reps, std::uint64_t seed, const CriticalValueTable& table,
           std::size_t threads) {
            SimConfig config;
            config.process = parse_process(process);
            config.n = n;
            config.k_star = k_star;
            config.drift = drift;
            config.d = d;
            config.alpha = alpha;
            config.reps = reps;
            config.seed = seed;
            config.threads = threads;
            py::dict out;
            for (const auto& row : power_study(config, {StatisticMode::H, StatisticMode::S}, table)) {
                out[to_string(row.mode)] = py::make_tuple(row.power, row.std_error);
            }
            return out;
        },
        py::arg("process"), py::arg("n"), py::arg("k_star"), py::arg("drift"), py::arg("d"), py::arg("alpha"),
        py::arg("reps"), py::arg("seed"), py::arg("table"), py::arg("threads") = 1,
        "Rejection rates of H and S on paired samples: {'H': (power, se), 'S': (power, se)}.");
}
