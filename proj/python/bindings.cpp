#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "advisor/bridge.hpp"
#include "advisor/domains.hpp"
#include "advisor/error.hpp"
#include "advisor/harness.hpp"
#include "advisor/io.hpp"
#include "advisor/suggesters.hpp"

namespace py = pybind11;
using namespace advisor;

namespace {

SuggesterSpec make_spec(std::vector<double> types, double t_p, std::vector<double> prior) {
  SuggesterSpec s{std::move(types), t_p, std::move(prior)};
  if (s.prior.empty()) s.prior.assign(s.types.size(), 1.0 / static_cast<double>(s.types.size()));
  return s;
}

ExperimentConfig parse_config(const std::string& text) { return config_from_json(Json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_advisor, m) {
  m.doc() = "Bindings for the advisor planning and simulation library";

  py::register_exception<Error>(m, "AdvisorError");

  m.def("suggestion_distribution",
        [](std::vector<double> q, double lambda) { return suggestion_distribution(q, lambda); },
        py::arg("q"), py::arg("lam"));
  m.def("type_transition_matrix",
        [](std::vector<double> types, double t_p) {
          return type_transition_matrix(make_spec(std::move(types), t_p, {}));
        },
        py::arg("types"), py::arg("t_p"));
  m.def("mixing_steps",
        [](std::vector<double> types, double t_p, double tv_target) {
          return mixing_steps(make_spec(std::move(types), t_p, {}), tv_target);
        },
        py::arg("types"), py::arg("t_p"), py::arg("tv_target") = 0.1);
  m.def("check_accuracy", &check_accuracy, py::arg("distance"), py::arg("d0"));

  m.def("domain_model_json",
        [](const std::string& domain_section) {
          Json cfg = {{"domain", Json::parse(domain_section)}};
          return model_to_json(config_from_json(cfg).domain.build().model).dump();
        },
        py::arg("domain"));
  m.def("validate_model_json",
        [](const std::string& text) {
          std::vector<std::string> out;
          for (const auto& v : validate_model(model_from_json(Json::parse(text)))) {
            out.push_back(v.table + ": " + v.message);
          }
          return out;
        },
        py::arg("model"));
  m.def("solve_json",
        [](const std::string& model, double precision, double time, std::uint64_t seed) {
          const MomdpModel mm = model_from_json(Json::parse(model));
          SolveParams p;
          p.target_precision = precision;
          p.time_budget = time;
          p.rng_seed = seed;
          py::gil_scoped_release release;
          return policy_to_json(solve(mm, p)).dump();
        },
        py::arg("model"), py::arg("precision") = 0.01, py::arg("time") = 300.0, py::arg("seed") = 0);
  m.def("run_experiment_json",
        [](const std::string& config) {
          const ExperimentConfig cfg = parse_config(config);
          std::vector<TrialRecord> records;
          {
            py::gil_scoped_release release;
            records = run_experiment(cfg);
          }
          return records_to_jsonl(records);
        },
        py::arg("config"));
  m.def("summarize_jsonl",
        [](const std::string& jsonl) { return summary_to_csv(summarize(records_from_jsonl(jsonl))); },
        py::arg("records"));
  m.def("normalize_config",
        [](const std::string& config) { return config_to_json(parse_config(config)).dump(); },
        py::arg("config"));
  m.def("wire_roundtrip", [](const std::string& frame) { return encode(decode(frame)); },
        py::arg("frame"));
}
