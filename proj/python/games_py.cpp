// Python bindings: synthetic data, clustering, the LP/MILP solver, the
// planning model and the pipeline driver.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "games/errors.hpp"
#include "games/gtep.hpp"
#include "games/lp.hpp"
#include "games/pipeline.hpp"
#include "games/repdays.hpp"
#include "games/synth.hpp"

namespace py = pybind11;
using namespace games;

namespace {

SparseLp dense_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const std::vector<std::string>& sense,
                  const Eigen::VectorXd& b, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                  const std::vector<bool>& integer) {
  const auto n = c.size();
  if (a.cols() != n || a.rows() != b.size() || static_cast<Eigen::Index>(sense.size()) != b.size() ||
      lo.size() != n || hi.size() != n || (!integer.empty() && static_cast<Eigen::Index>(integer.size()) != n)) {
    throw InputError("inconsistent LP dimensions");
  }
  SparseLp lp;
  for (Eigen::Index j = 0; j < n; ++j) {
    lp.add_column("x" + std::to_string(j), c(j), lo(j), hi(j), !integer.empty() && integer[j]);
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    RowSense s;
    if (sense[i] == "<=") {
      s = RowSense::LessEqual;
    } else if (sense[i] == ">=") {
      s = RowSense::GreaterEqual;
    } else if (sense[i] == "=") {
      s = RowSense::Equal;
    } else {
      throw InputError("row sense must be one of <=, >=, =");
    }
    const int r = lp.add_row("r" + std::to_string(i), s, b(i));
    for (Eigen::Index j = 0; j < n; ++j)
      if (a(i, j) != 0.0) lp.add_entry(r, static_cast<int>(j), a(i, j));
  }
  return lp;
}

py::dict result_dict(const SolveResult& r) {
  py::dict d;
  d["status"] = to_string(r.status);
  d["objective"] = r.objective;
  d["bound"] = r.bound;
  d["x"] = r.x;
  d["duals"] = r.duals;
  d["iterations"] = r.iterations;
  d["nodes"] = r.nodes;
  return d;
}

}  // namespace

PYBIND11_MODULE(games_py, m) {
  m.doc() = "Representative-day selection and joint power/gas capacity expansion";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("gap", &SolverOptions::gap)
      .def_readwrite("node_limit", &SolverOptions::node_limit)
      .def_readwrite("time_limit_s", &SolverOptions::time_limit_s)
      .def_readwrite("feasibility_tol", &SolverOptions::feasibility_tol)
      .def_readwrite("optimality_tol", &SolverOptions::optimality_tol);

  m.def(
      "solve",
      [](const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const std::vector<std::string>& sense,
         const Eigen::VectorXd& b, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
         const std::vector<bool>& integer, const SolverOptions& opts) {
        const SparseLp lp = dense_lp(c, a, sense, b, lo, hi, integer);
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = integer.empty() ? solve_lp(lp, opts) : solve_milp(lp, opts);
        }
        return result_dict(r);
      },
      py::arg("c"), py::arg("A"), py::arg("sense"), py::arg("b"), py::arg("lower"), py::arg("upper"),
      py::arg("integer") = std::vector<bool>{}, py::arg("options") = SolverOptions{},
      "Minimize c'x subject to A x (sense) b and bounds; a nonempty integer mask solves the MILP.");

  py::class_<RepresentativeDaySet>(m, "DaySet")
      .def_readonly("medoids", &RepresentativeDaySet::medoids)
      .def_readonly("assignment", &RepresentativeDaySet::assignment)
      .def_readonly("weights", &RepresentativeDaySet::weights)
      .def_readonly("objective", &RepresentativeDaySet::objective)
      .def_readonly("source", &RepresentativeDaySet::source);

  m.def(
      "kmedoids",
      [](const std::vector<Eigen::MatrixXd>& points, std::size_t k, std::uint64_t seed) {
        return kmedoids(points, k, seed);
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0);

  py::class_<MultiResolutionDataset>(m, "Dataset")
      .def_property_readonly("day_count", &MultiResolutionDataset::day_count)
      .def("electricity", [](const MultiResolutionDataset& d, std::size_t i) { return d.days.at(i).electricity; })
      .def("wind", [](const MultiResolutionDataset& d, std::size_t i) { return d.days.at(i).wind_cf; })
      .def("solar", [](const MultiResolutionDataset& d, std::size_t i) { return d.days.at(i).solar_cf; })
      .def("gas", [](const MultiResolutionDataset& d, std::size_t i) { return d.days.at(i).gas; })
      .def("save", [](const MultiResolutionDataset& d, const std::filesystem::path& dir) { save_dataset(d, dir); });

  py::class_<GtepInstance>(m, "Instance")
      .def_readwrite("rps_share", &GtepInstance::rps_share)
      .def_property(
          "eta", [](const GtepInstance& in) { return in.coupling.eta; },
          [](GtepInstance& in, double eta) { in.coupling.eta = eta; })
      .def("save", [](const GtepInstance& in, const std::filesystem::path& p) { save_instance(in, p); });

  m.def(
      "generate_synthetic",
      [](std::size_t days, std::size_t power_nodes, std::size_t gas_nodes, std::uint64_t seed) {
        SynthParams p;
        p.days = days;
        p.power_nodes = power_nodes;
        p.gas_nodes = gas_nodes;
        auto s = generate_synthetic(p, seed);
        return py::make_tuple(std::move(s.dataset), std::move(s.instance));
      },
      py::arg("days") = 30, py::arg("power_nodes") = 6, py::arg("gas_nodes") = 3, py::arg("seed") = 0,
      "Returns (dataset, instance).");

  m.def(
      "kmedoids_raw",
      [](const MultiResolutionDataset& d, std::size_t k, std::uint64_t seed) { return kmedoids_raw(d, k, seed); },
      py::arg("dataset"), py::arg("k"), py::arg("seed") = 0);

  m.def(
      "plan_and_evaluate",
      [](const GtepInstance& in, const MultiResolutionDataset& d, const RepresentativeDaySet& set,
         const SolverOptions& opts) {
        GtepSolution plan, full;
        double violation = 0.0;
        {
          py::gil_scoped_release release;
          plan = solve_planning(in, set, d, opts);
          full = evaluate_full_horizon(in, plan, d, opts);
          violation = check_feasibility(in, full, d).max_violation();
        }
        py::dict out;
        out["planning_objective"] = plan.objective;
        out["full_objective"] = full.objective;
        out["emission_total"] = full.cost.emission_total;
        out["max_violation"] = violation;
        out["new_units"] = full.investment.new_units;
        return out;
      },
      py::arg("instance"), py::arg("dataset"), py::arg("day_set"), py::arg("options") = SolverOptions{});

  m.def("percentage_change", &percentage_change, py::arg("games_value"), py::arg("raw_value"));

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config, const std::string& stop_after,
         const std::optional<std::filesystem::path>& out) {
        ExperimentConfig c = load_config(config, "pipeline");
        if (out) c.output_dir = *out;
        py::gil_scoped_release release;
        return run_pipeline(c, stop_after).files;
      },
      py::arg("config"), py::arg("stop_after") = "report", py::arg("out") = py::none(),
      "Runs the pipeline and returns the written files.");

  m.attr("__version__") = version_string();
}
