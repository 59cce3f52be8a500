#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "flatlog/error.hpp"
#include "flatlog/io.hpp"
#include "flatlog/parser.hpp"
#include "flatlog/runtime.hpp"
#include "flatlog/split.hpp"
#include "flatlog/stratify.hpp"

namespace py = pybind11;
using namespace flatlog;

namespace {

ScheduleMode parse_schedule(const std::string& s) {
  if (s == "seq" || s == "sequential") return ScheduleMode::Sequential;
  if (s == "stream" || s == "phase-aligned") return ScheduleMode::PhaseAligned;
  throw py::value_error("schedule must be 'seq' or 'stream', got '" + s + "'");
}

EngineOptions make_options(std::size_t workers, std::optional<std::size_t> threads, const std::string& schedule,
                           std::optional<std::size_t> head_threshold, bool instrument) {
  if (workers == 0) throw py::value_error("workers must be positive");
  EngineOptions o;
  o.workers = workers;
  o.threads = threads.value_or(workers);
  o.schedule = parse_schedule(schedule);
  o.flush.fixed = head_threshold;
  o.instrument = instrument;
  o.check_invariants = instrument;
  o.apply_environment();
  return o;
}

py::dict summary_dict(const RunSummary& s) {
  py::list strata;
  for (const auto& st : s.strata) {
    py::dict d;
    d["stratum"] = st.stratum;
    d["relations"] = st.relations;
    d["recursive"] = st.recursive;
    d["iterations"] = st.iterations;
    strata.append(d);
  }
  py::dict out;
  out["strata"] = strata;
  out["cardinalities"] = s.cardinalities;
  out["seconds"] = s.seconds;
  return out;
}

// Rule texts after .split rewriting, facts excluded.
std::vector<std::string> rewritten_rules(const std::string& source) {
  Program p = apply_splits(parse(source));
  std::vector<std::string> out;
  for (const auto& r : p.rules) {
    if (!r.is_fact()) out.push_back(r.to_string());
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Recursive Datalog over sorted columnar relations";

  auto base = py::register_exception<Error>(m, "FlatlogError", PyExc_RuntimeError);
  py::register_exception<ProgramError>(m, "ProgramError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<InternalError>(m, "InternalError", base.ptr());

  m.def("rewrite", &rewritten_rules, py::arg("source"), "Rules of a program after .split rewriting.");
  m.def(
      "strata",
      [](const std::string& source) {
        Program p = apply_splits(parse(source));
        py::list out;
        for (const auto& s : stratify(p)) {
          py::dict d;
          d["relations"] = s.relations;
          d["recursive"] = s.recursive;
          std::vector<std::string> rules;
          for (std::size_t r : s.rules) rules.push_back(p.rules[r].to_string());
          d["rules"] = rules;
          out.append(d);
        }
        return out;
      },
      py::arg("source"), "Evaluation strata of a program, dependencies first.");

  py::class_<Engine>(m, "Engine")
      .def(py::init([](const std::string& source, std::size_t workers, std::optional<std::size_t> threads,
                       const std::string& schedule, std::optional<std::size_t> head_threshold, bool instrument) {
             return Engine::from_source(source, make_options(workers, threads, schedule, head_threshold, instrument));
           }),
           py::arg("source"), py::kw_only(), py::arg("workers") = 1, py::arg("threads") = py::none(),
           py::arg("schedule") = "seq", py::arg("head_threshold") = py::none(), py::arg("instrument") = false)
      .def("add_fact", &Engine::add_fact, py::arg("relation"), py::arg("row"))
      .def("add_facts", &Engine::add_facts, py::arg("relation"), py::arg("rows"))
      .def(
          "load",
          [](Engine& e, const std::filesystem::path& dir, bool strict, bool binary) {
            LoadOptions o;
            o.strict = strict;
            o.prefer_binary = binary;
            o.warn = [](const std::string& msg) { PyErr_WarnEx(PyExc_UserWarning, msg.c_str(), 1); };
            return load_inputs(e, dir, o);
          },
          py::arg("directory"), py::kw_only(), py::arg("strict") = false, py::arg("binary") = false,
          "Reads <Name>.tsv (or .snap) for every .input relation; returns the tuple count.")
      .def(
          "run",
          [](Engine& e) {
            RunSummary s;
            {
              py::gil_scoped_release release;
              s = e.run();
            }
            return summary_dict(s);
          },
          "Evaluates the program to fixpoint. An engine runs once.")
      .def("rows", &Engine::rows, py::arg("relation"), "Tuples of a relation as sorted lists of strings.")
      .def(
          "write_outputs",
          [](const Engine& e, const std::filesystem::path& dir, bool binary) { return write_outputs(e, dir, binary); },
          py::arg("directory"), py::kw_only(), py::arg("binary") = false)
      .def_property_readonly("relations",
                             [](const Engine& e) {
                               std::vector<std::string> out;
                               for (const auto& d : e.program().relations) out.push_back(d.name);
                               return out;
                             })
      .def_property_readonly("outputs", [](const Engine& e) {
        std::vector<std::string> out;
        for (const auto& d : e.program().relations) {
          if (d.output) out.push_back(d.name);
        }
        return out;
      });
}
