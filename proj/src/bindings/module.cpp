#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gridsiem/disjoint_paths.hpp"
#include "gridsiem/errors.hpp"
#include "gridsiem/events.hpp"
#include "gridsiem/ipnet.hpp"
#include "gridsiem/runner.hpp"
#include "gridsiem/scenario.hpp"

namespace py = pybind11;
using namespace gridsiem;

namespace {

py::dict event_dict(const NormalizedEvent& e) {
  py::dict attrs;
  for (const auto& [k, v] : e.attrs) {
    std::visit([&](const auto& x) { attrs[py::str(k)] = x; }, v);
  }
  py::dict d;
  d["event_id"] = e.event_id;
  d["ts_us"] = e.ts_us;
  d["source_id"] = e.source_id;
  d["source_kind"] = std::string(to_string(e.source_kind));
  d["event_type"] = e.event_type;
  d["severity"] = std::string(to_string(e.severity));
  d["attrs"] = attrs;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the gridsiem simulator";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigInvalid>(m, "ConfigInvalid", base.ptr());
  py::register_exception<LogCorrupt>(m, "LogCorrupt", base.ptr());
  py::register_exception<InsufficientDisjointness>(m, "InsufficientDisjointness", base.ptr());

  m.def(
      "run",
      [](const std::string& scenario_path, std::optional<std::uint64_t> seed, std::optional<double> duration_s,
         bool no_reaction, std::optional<std::filesystem::path> log_path) {
        RunOptions o;
        o.seed = seed;
        if (duration_s) o.duration_us = seconds_to_us(*duration_s);
        o.no_reaction = no_reaction;
        o.log_path = log_path;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(load_scenario(scenario_path), o);
        }
        py::list events;
        for (const auto& e : r.log) events.append(to_log_line(e));
        py::dict out;
        out["report"] = render_machine(r.report);
        out["log"] = events;
        out["digest"] = r.final_digest;
        return out;
      },
      py::arg("scenario"), py::arg("seed") = py::none(), py::arg("duration_s") = py::none(),
      py::arg("no_reaction") = false, py::arg("log_path") = py::none(),
      "Run a scenario file. Returns the machine report text, log lines and final digest.");

  m.def(
      "replay",
      [](const std::filesystem::path& log_path, const std::string& rules_path) {
        return render_machine(replay_file(log_path, load_rules(rules_path)));
      },
      py::arg("log_path"), py::arg("rules"), "Re-run detection over a stored log; returns the machine report.");

  m.def(
      "render_human", [](const std::string& machine) { return render_human(parse_machine_report(machine)); },
      py::arg("machine_report"));

  m.def(
      "parse_log_line", [](const std::string& line) { return event_dict(parse_log_line(line, 1)); },
      py::arg("line"));

  m.def(
      "disjoint_paths",
      [](const std::vector<std::pair<std::string, std::string>>& edges, const std::string& src,
         const std::string& dst, int k) {
        Topology topo;
        std::set<std::string> nodes;
        for (const auto& [a, b] : edges) nodes.insert(a), nodes.insert(b);
        topo.nodes.assign(nodes.begin(), nodes.end());
        topo.edges = edges;
        return compute_disjoint_paths(topo, src, dst, k);
      },
      py::arg("edges"), py::arg("src"), py::arg("dst"), py::arg("k"),
      "Shortest k interior-disjoint paths as router lists.");

  m.def("fixture_edges", [] { return ipnet_fixture_config().links; });
}
