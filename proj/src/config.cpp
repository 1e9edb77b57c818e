#include "bvm/config.hpp"

#include <fstream>
#include <sstream>

namespace bvm {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& problems) {
    std::ostringstream os;
    os << "config: " << problems.size() << " problem(s)";
    for (const std::string& p : problems) os << "\n  - " << p;
    return os.str();
}

Rational rational_field(const json& j, const std::string& key, std::vector<std::string>& problems) {
    try {
        if (j.is_string()) return parse_rational(j.get<std::string>());
        if (j.is_number_integer()) return Rational(BigInt(j.get<long long>()));
        if (j.is_number_float()) {
            // exact value of the double, not a re-rounded decimal
            return Rational(j.get<double>());
        }
        problems.push_back(key + ": expected a number or a numeric string");
    } catch (const std::exception& e) {
        problems.push_back(key + ": " + e.what());
    }
    return Rational(1, 2);
}

IntMatrix matrix_field(const json& j, const std::string& key,
                       std::vector<std::string>& problems) {
    if (!j.is_array() || j.empty()) {
        problems.push_back(key + ": expected a nonempty list of rows");
        return {};
    }
    std::vector<std::vector<std::int64_t>> rows;
    for (const json& row : j) {
        if (!row.is_array()) {
            problems.push_back(key + ": rows must be integer lists");
            return {};
        }
        std::vector<std::int64_t> r;
        for (const json& v : row) {
            if (!v.is_number_integer()) {
                problems.push_back(key + ": entries must be integers");
                return {};
            }
            r.push_back(v.get<std::int64_t>());
        }
        rows.push_back(std::move(r));
    }
    try {
        return IntMatrix::from_rows(rows);
    } catch (const std::exception& e) {
        problems.push_back(key + ": " + e.what());
        return {};
    }
}

std::shared_ptr<const BratteliDiagram> parse_diagram(const json& j,
                                                     std::vector<std::string>& problems) {
    if (!j.is_object()) {
        problems.push_back("diagram: expected an object");
        return nullptr;
    }
    for (const auto& [key, _] : j.items()) {
        if (key != "stationary" && key != "incidence" && key != "ordering" && key != "levels" &&
            key != "minimal_tail_vertex" && key != "probe_depth")
            problems.push_back("diagram." + key + ": unknown key");
    }

    if (!j.contains("incidence")) {
        problems.push_back("diagram.incidence: required");
        return nullptr;
    }
    const json& inc = j.at("incidence");
    if (!inc.is_array() || inc.empty()) {
        problems.push_back("diagram.incidence: expected a list of matrices");
        return nullptr;
    }

    std::vector<IncidenceMatrix> incidence;
    for (std::size_t i = 0; i < inc.size(); ++i)
        incidence.push_back(
            matrix_field(inc[i], "diagram.incidence[" + std::to_string(i) + "]", problems));

    std::vector<OrderingMatrix> ordering;
    if (j.contains("ordering") && !j.at("ordering").is_null()) {
        const json& ord = j.at("ordering");
        if (!ord.is_array() || ord.size() != inc.size()) {
            problems.push_back("diagram.ordering: must list one matrix per incidence matrix");
            return nullptr;
        }
        for (std::size_t i = 0; i < ord.size(); ++i)
            ordering.push_back(
                matrix_field(ord[i], "diagram.ordering[" + std::to_string(i) + "]", problems));
    }

    const bool stationary = j.value("stationary", inc.size() == 1);
    if (stationary && inc.size() != 1) {
        problems.push_back("diagram.stationary: true requires exactly one incidence matrix");
        return nullptr;
    }

    std::optional<int> tail_vertex;
    if (j.contains("minimal_tail_vertex")) {
        if (!j.at("minimal_tail_vertex").is_number_integer()) {
            problems.push_back("diagram.minimal_tail_vertex: expected an integer");
            return nullptr;
        }
        tail_vertex = j.at("minimal_tail_vertex").get<int>();
    }
    const int probe_depth = j.value("probe_depth", 16);
    if (probe_depth < 1) {
        problems.push_back("diagram.probe_depth: must be >= 1");
        return nullptr;
    }
    if (!problems.empty()) return nullptr;

    try {
        std::shared_ptr<const BratteliDiagram> d;
        if (stationary) {
            std::optional<OrderingMatrix> q;
            if (!ordering.empty()) q = ordering.front();
            d = BratteliDiagram::stationary(incidence.front(), q, probe_depth);
        } else {
            d = BratteliDiagram::from_levels(incidence, ordering, tail_vertex, probe_depth);
        }
        if (j.contains("levels")) {
            const json& lv = j.at("levels");
            if (lv.is_number_integer()) {
                if (d->level_size(0) != lv.get<int>())
                    problems.push_back("diagram.levels: does not match the incidence matrices");
            } else {
                problems.push_back("diagram.levels: expected an integer vertex count");
            }
        }
        return problems.empty() ? d : nullptr;
    } catch (const std::exception& e) {
        problems.push_back(std::string("diagram: ") + e.what());
        return nullptr;
    }
}

ProbSchedule parse_schedule(const json& j, std::vector<std::string>& problems) {
    const ProbSchedule fallback = ProbSchedule::constant(Rational(1, 2));
    if (!j.is_object()) {
        problems.push_back("schedule: expected an object");
        return fallback;
    }
    const std::string kind = j.value("kind", std::string{});
    try {
        if (kind == "constant") {
            if (!j.contains("p")) {
                problems.push_back("schedule.p: required for kind=constant");
                return fallback;
            }
            return ProbSchedule::constant(rational_field(j.at("p"), "schedule.p", problems));
        }
        if (kind == "list") {
            if (!j.contains("values") || !j.at("values").is_array() || j.at("values").empty()) {
                problems.push_back("schedule.values: required nonempty list for kind=list");
                return fallback;
            }
            std::vector<Rational> values;
            for (std::size_t i = 0; i < j.at("values").size(); ++i)
                values.push_back(rational_field(j.at("values")[i],
                                                "schedule.values[" + std::to_string(i) + "]",
                                                problems));
            const std::string tail = j.value("tail", std::string("repeat_last"));
            if (tail != "repeat_last" && tail != "cycle") {
                problems.push_back("schedule.tail: must be repeat_last or cycle");
                return fallback;
            }
            if (!problems.empty()) return fallback;
            return ProbSchedule::list(std::move(values), tail == "cycle"
                                                             ? ProbSchedule::Tail::Cycle
                                                             : ProbSchedule::Tail::RepeatLast);
        }
        if (kind == "geometric" || kind == "one_minus_geometric") {
            if (!j.contains("q")) {
                problems.push_back("schedule.q: required for kind=" + kind);
                return fallback;
            }
            const Rational q = rational_field(j.at("q"), "schedule.q", problems);
            if (!problems.empty()) return fallback;
            return kind == "geometric" ? ProbSchedule::geometric(q)
                                       : ProbSchedule::one_minus_geometric(q);
        }
        problems.push_back("schedule.kind: must be constant, list, geometric or "
                           "one_minus_geometric");
    } catch (const std::exception& e) {
        problems.push_back(std::string("schedule: ") + e.what());
    }
    return fallback;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("document: ") + e.what()});
    }
    if (!doc.is_object()) throw ConfigError({"document: expected a JSON object"});

    std::vector<std::string> problems;
    for (const auto& [key, _] : doc.items()) {
        if (key != "diagram" && key != "schedule" && key != "mode" && key != "task")
            problems.push_back(key + ": unknown key");
    }

    RunConfig cfg;
    if (doc.contains("diagram"))
        cfg.diagram = parse_diagram(doc.at("diagram"), problems);
    else
        problems.push_back("diagram: required");

    if (doc.contains("schedule"))
        cfg.schedule = parse_schedule(doc.at("schedule"), problems);
    else
        problems.push_back("schedule: required");

    const std::string mode = doc.value("mode", std::string("float"));
    if (mode == "rational")
        cfg.mode = ArithmeticMode::Rational;
    else if (mode == "float")
        cfg.mode = ArithmeticMode::Float;
    else
        problems.push_back("mode: must be rational or float");

    cfg.task = doc.value("task", json::object());
    if (!cfg.task.is_object()) problems.push_back("task: expected an object");

    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"file: cannot open " + path});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

}  // namespace bvm
