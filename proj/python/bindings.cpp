#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bvm/config.hpp"
#include "bvm/numeration.hpp"
#include "bvm/process.hpp"
#include "bvm/spectrum.hpp"
#include "bvm/vershik.hpp"

namespace py = pybind11;
using namespace bvm;

namespace {

BigInt to_bigint(const py::int_& n) {
    return BigInt(static_cast<std::string>(py::str(py::handle(n))));
}

py::int_ from_bigint(const BigInt& n) {
    PyObject* obj = PyLong_FromString(n.str().c_str(), nullptr, 10);
    if (!obj) throw py::error_already_set();
    return py::reinterpret_steal<py::int_>(obj);
}

IntMatrix matrix_from(const std::vector<std::vector<std::int64_t>>& rows) {
    return IntMatrix::from_rows(rows);
}

ProbSchedule schedule_from(const std::string& kind, const std::string& value,
                           const std::vector<std::string>& values, const std::string& tail) {
    if (kind == "constant") return ProbSchedule::constant(parse_rational(value));
    if (kind == "geometric") return ProbSchedule::geometric(parse_rational(value));
    if (kind == "one_minus_geometric")
        return ProbSchedule::one_minus_geometric(parse_rational(value));
    if (kind == "list") {
        std::vector<Rational> vs;
        for (const std::string& v : values) vs.push_back(parse_rational(v));
        return ProbSchedule::list(std::move(vs), tail == "cycle" ? ProbSchedule::Tail::Cycle
                                                                 : ProbSchedule::Tail::RepeatLast);
    }
    throw std::invalid_argument("unknown schedule kind: " + kind);
}

DigitString digits_from(const BratteliDiagram& d,
                        const std::vector<std::pair<std::int64_t, std::int64_t>>& bare) {
    auto annotated = annotate_digits(d, bare);
    if (!annotated) throw std::invalid_argument("invalid digit string for this diagram");
    return *annotated;
}

}  // namespace

PYBIND11_MODULE(_bvm, m) {
    m.doc() = "Bratteli-Vershik stochastic adding machines";

    py::class_<BratteliDiagram, std::shared_ptr<BratteliDiagram>>(m, "Diagram")
        .def_static(
            "stationary",
            [](const std::vector<std::vector<std::int64_t>>& incidence,
               std::optional<std::vector<std::vector<std::int64_t>>> ordering, int probe_depth) {
                std::optional<OrderingMatrix> q;
                if (ordering) q = matrix_from(*ordering);
                return std::const_pointer_cast<BratteliDiagram>(
                    BratteliDiagram::stationary(matrix_from(incidence), q, probe_depth));
            },
            py::arg("incidence"), py::arg("ordering") = std::nullopt, py::arg("probe_depth") = 16)
        .def_static(
            "from_levels",
            [](const std::vector<std::vector<std::vector<std::int64_t>>>& incidence,
               std::optional<int> minimal_tail_vertex, int probe_depth) {
                std::vector<IncidenceMatrix> ms;
                for (const auto& rows : incidence) ms.push_back(matrix_from(rows));
                return std::const_pointer_cast<BratteliDiagram>(BratteliDiagram::from_levels(
                    std::move(ms), {}, minimal_tail_vertex, probe_depth));
            },
            py::arg("incidence"), py::arg("minimal_tail_vertex") = std::nullopt,
            py::arg("probe_depth") = 16)
        .def("hypothesis_a", &BratteliDiagram::hypothesis_a)
        .def("is_stationary", [](const BratteliDiagram& d) { return d.stationary(); })
        .def("canonical", &BratteliDiagram::canonical)
        .def("level_size", &BratteliDiagram::level_size)
        .def("simple",
             [](const BratteliDiagram& d, int horizon) { return d.check_simplicity(horizon).simple; },
             py::arg("horizon") = 16)
        .def("path_counts",
             [](const BratteliDiagram& d, int level) {
                 py::list out;
                 for (const BigInt& c : d.path_counts(level)) out.append(from_bigint(c));
                 return out;
             })
        .def("fg",
             [](const BratteliDiagram& d, std::size_t depth) {
                 const FgSequences fg = fg_sequences(d, depth);
                 py::list f, g;
                 for (std::size_t i = 0; i <= fg.depth(); ++i) {
                     f.append(from_bigint(fg.f(i)));
                     g.append(from_bigint(fg.g(i)));
                 }
                 return py::make_tuple(f, g);
             });

    py::class_<ProbSchedule>(m, "Schedule")
        .def_static("make", &schedule_from, py::arg("kind"), py::arg("value") = "",
                    py::arg("values") = std::vector<std::string>{},
                    py::arg("tail") = "repeat_last")
        .def("p", [](const ProbSchedule& s, std::size_t j) { return s.p_double(j); })
        .def("p_exact",
             [](const ProbSchedule& s, std::size_t j) { return rational_to_string(s.p(j)); })
        .def("describe", &ProbSchedule::describe);

    m.def("encode",
          [](const py::int_& n, std::shared_ptr<BratteliDiagram> d) {
              return encode(to_bigint(n), d).bare();
          });
    m.def("decode", [](const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                       std::shared_ptr<BratteliDiagram> d) {
        return from_bigint(decode(digits_from(*d, pairs), *d));
    });
    m.def("validate_digits",
          [](const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
             std::shared_ptr<BratteliDiagram> d) { return validate_digits(*d, pairs); });
    m.def("path_of",
          [](const py::int_& n, std::shared_ptr<BratteliDiagram> d) {
              const PathState x = path_at_index(d, to_bigint(n));
              std::vector<std::tuple<int, int, int>> edges;
              for (int k = 1; k <= x.prefix_length(); ++k) {
                  const Edge e = x.edge(k);
                  edges.emplace_back(e.source, e.order_index, e.range);
              }
              return edges;
          },
          "Path of the n-th state as (source, order_index, range) per level");
    m.def("successor_of", [](const py::int_& n, std::shared_ptr<BratteliDiagram> d) {
        return from_bigint(path_index(successor(path_at_index(d, to_bigint(n)))));
    });
    m.def("iterate_from_zero", [](std::uint64_t n, std::shared_ptr<BratteliDiagram> d) {
        return from_bigint(path_index(iterate(PathState::minimal(d), n)));
    });

    m.def("operator_row",
          [](const py::int_& n, std::shared_ptr<BratteliDiagram> d, const ProbSchedule& ps,
             bool exact) {
              py::dict out;
              if (exact) {
                  for (const auto& [col, p] : operator_row_exact(to_bigint(n), d, ps).entries)
                      out[from_bigint(col)] = rational_to_string(p);
              } else {
                  for (const auto& [col, p] : operator_row(to_bigint(n), d, ps).entries)
                      out[from_bigint(col)] = p;
              }
              return out;
          },
          py::arg("n"), py::arg("diagram"), py::arg("schedule"), py::arg("exact") = false);
    m.def("operator_csv",
          [](std::shared_ptr<BratteliDiagram> d, const ProbSchedule& ps, std::size_t size,
             bool exact) {
              std::ostringstream os;
              write_operator_csv(os, build_operator(d, ps, size,
                                                    exact ? ArithmeticMode::Rational
                                                          : ArithmeticMode::Float));
              return os.str();
          },
          py::arg("diagram"), py::arg("schedule"), py::arg("size"), py::arg("exact") = false);

    m.def("simulate",
          [](std::shared_ptr<BratteliDiagram> d, const ProbSchedule& ps, const py::int_& start,
             std::uint64_t steps, std::uint64_t seed) {
              const SimulationSummary s =
                  simulate(d, ps, path_at_index(d, to_bigint(start)), steps, seed);
              py::dict visits;
              for (const auto& [state, count] : s.visits) visits[from_bigint(state)] = count;
              py::dict out;
              out["seed"] = s.seed;
              out["steps"] = s.steps;
              out["start"] = from_bigint(s.start);
              out["final"] = from_bigint(s.final_state);
              out["visits"] = visits;
              out["return_times"] = s.returns_to_minimal;
              return out;
          },
          py::arg("diagram"), py::arg("schedule"), py::arg("start"), py::arg("steps"),
          py::arg("seed"));

    m.def("classify", [](std::shared_ptr<BratteliDiagram> d, const ProbSchedule& ps) {
        const RecurrenceVerdict v = classify_recurrence(*d, ps);
        return py::make_tuple(to_string(v.kind), v.justification);
    });
    m.def("return_time_bound",
          [](std::int64_t b, const ProbSchedule& ps, int depth) {
              const ReturnTimeBound r = return_time_bound(b, ps, depth);
              py::dict out;
              out["value"] = r.value;
              out["partial"] = r.partial;
              out["tail"] = r.tail;
              out["divergent"] = r.divergent;
              return out;
          },
          py::arg("b"), py::arg("schedule"), py::arg("depth") = 20);

    auto result_dict = [](const MembershipResult& r) {
        py::dict out;
        out["escaped"] = r.escaped;
        out["escape_index"] = r.escape_index;
        out["u_escape_index"] = r.u_escape_index;
        out["w_escape_index"] = r.w_escape_index;
        out["log_growth"] = r.log_growth;
        out["stabilized"] = r.stabilized;
        out["radius"] = r.radius;
        out["budget"] = r.budget;
        return out;
    };

    m.def("probe",
          [result_dict](std::complex<double> lambda, std::shared_ptr<BratteliDiagram> d,
                        const ProbSchedule& ps, const std::string& set, int budget,
                        double radius) {
              SpectralParams params = SpectralParams::from_diagram(*d, ps);
              params.budget = budget;
              params.radius = radius;
              switch (parse_set_kind(set)) {
                  case SetKind::F: return result_dict(f_membership(lambda, params));
                  case SetKind::E: return result_dict(e_membership(lambda, params));
                  case SetKind::PT: return result_dict(pt_membership(lambda, params));
              }
              throw std::logic_error("unreachable");
          },
          py::arg("lam"), py::arg("diagram"), py::arg("schedule"), py::arg("set") = "F",
          py::arg("budget") = 64, py::arg("radius") = 0.0);

    m.def("render_pgm",
          [](std::shared_ptr<BratteliDiagram> d, const ProbSchedule& ps, const std::string& set,
             double re_min, double re_max, double im_min, double im_max, int width, int height,
             int budget, double radius) {
              SpectralParams params = SpectralParams::from_diagram(*d, ps);
              params.budget = budget;
              params.radius = radius;
              GridSpec grid{re_min, re_max, im_min, im_max, width, height, parse_set_kind(set)};
              std::ostringstream os(std::ios::binary);
              write_pgm(os, render_set(grid, params));
              return py::bytes(os.str());
          },
          py::arg("diagram"), py::arg("schedule"), py::arg("set") = "F", py::arg("re_min") = -2.0,
          py::arg("re_max") = 2.0, py::arg("im_min") = -2.0, py::arg("im_max") = 2.0,
          py::arg("width") = 256, py::arg("height") = 256, py::arg("budget") = 64,
          py::arg("radius") = 0.0);

    m.def("eigen_residual",
          [](std::complex<double> lambda, std::shared_ptr<BratteliDiagram> d,
             const ProbSchedule& ps, std::size_t rows) {
              return eigen_residual(lambda, d, ps, rows);
          });

    m.def("critical_escape",
          [](std::shared_ptr<BratteliDiagram> d, const ProbSchedule& ps, int budget) {
              SpectralParams params = SpectralParams::from_diagram(*d, ps);
              params.budget = budget;
              const CriticalEscape c = critical_escape_test(params);
              py::dict out;
              out["applicable"] = c.applicable;
              out["escaped"] = c.escaped;
              out["escape_index"] = c.escape_index;
              out["reason"] = c.reason;
              return out;
          },
          py::arg("diagram"), py::arg("schedule"), py::arg("budget") = 64);

    m.attr("__version__") = "1.0.0";
}
