#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "starcco/harness.hpp"

namespace py = pybind11;
using namespace starcco;

namespace {

py::dict row_dict(const ResultRow& r) {
    py::dict d;
    d["axis"] = r.axis;
    d["axis_value"] = r.axis_value;
    d["strategy"] = r.strategy;
    d["seed"] = r.seed;
    d["final_coverage"] = r.final_coverage;
    d["final_capacity"] = r.final_capacity;
    d["curve_path"] = r.curve_path;
    d["archive_path"] = r.archive_path;
    d["status"] = r.status;
    return d;
}

py::dict step_dict(const StepResult& s) {
    py::dict d;
    d["observation"] = s.observation;
    d["reward"] = std::vector<double>{s.reward[0], s.reward[1]};
    d["tally"] = std::vector<double>{s.tally[0], s.tally[1]};
    d["done"] = s.done;
    return d;
}

} // namespace

PYBIND11_MODULE(_starcco, m) {
    m.doc() = "STAR-RIS coverage/capacity simulator";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<PlanError>(m, "PlanError", PyExc_ValueError);

    m.def("scenario_preset", [](const std::string& name) { return to_json(scenario_preset(name)).dump(); });

    py::class_<StarRisEnv>(m, "Env")
        .def(py::init([](const std::string& scenario_json, std::uint64_t seed) {
                 return StarRisEnv(scenario_from_json(nlohmann::json::parse(scenario_json)), seed);
             }),
             py::arg("scenario_json"), py::arg("seed") = 0)
        .def_property_readonly("observation_size", &StarRisEnv::observation_size)
        .def_property_readonly("action_blocks", &StarRisEnv::action_blocks)
        .def_property_readonly("n_points", [](const StarRisEnv& e) { return e.grid().n_points; })
        .def_property_readonly("objectives", [](const StarRisEnv& e) {
            const auto o = e.objectives();
            return std::vector<double>{o[0], o[1]};
        })
        .def_property_readonly("tx_power", [](const StarRisEnv& e) { return e.state().tx_power; })
        .def("reset", &StarRisEnv::reset, py::arg("episode") = 0)
        .def("step", [](StarRisEnv& e, const std::vector<int>& a) { return step_dict(e.step(a)); })
        .def("hold_action", &StarRisEnv::hold_action);

    m.def(
        "verify",
        [](double nu_perturbation) {
            VerifyOptions o;
            o.nu_perturbation = nu_perturbation;
            py::list out;
            for (const auto& r : verify_suite(o)) {
                py::dict d;
                d["name"] = r.name;
                d["passed"] = r.passed;
                d["seconds"] = r.seconds;
                d["detail"] = r.detail;
                out.append(d);
            }
            return out;
        },
        py::arg("nu_perturbation") = 0.0);

    m.def(
        "run_plan",
        [](const std::string& plan_json, const std::string& out_dir, std::size_t threads, bool resume) {
            const ExperimentPlan plan = plan_from_json(nlohmann::json::parse(plan_json));
            RunOptions o;
            o.out_dir = out_dir;
            o.threads = threads;
            o.resume = resume;
            ResultTable t;
            {
                py::gil_scoped_release release;
                t = run_plan(plan, o);
            }
            py::list rows;
            for (const auto& r : t.rows) rows.append(row_dict(r));
            return rows;
        },
        py::arg("plan_json"), py::arg("out_dir"), py::arg("threads") = 0, py::arg("resume") = true);

    m.def("pareto_front", [](const std::vector<std::pair<double, double>>& pts) {
        std::vector<Objective2> p;
        for (const auto& [a, b] : pts) p.push_back({a, b});
        std::vector<std::pair<double, double>> out;
        for (const auto& q : pareto_front(p)) out.emplace_back(q[0], q[1]);
        return out;
    });
}
