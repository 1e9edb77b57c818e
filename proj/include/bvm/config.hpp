#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "bvm/diagram.hpp"
#include "bvm/process.hpp"
#include "bvm/schedule.hpp"

namespace bvm {

/// Field-level validation failures, every message naming the offending key.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct RunConfig {
    std::shared_ptr<const BratteliDiagram> diagram;
    ProbSchedule schedule = ProbSchedule::constant(Rational(1, 2));
    ArithmeticMode mode = ArithmeticMode::Float;
    nlohmann::json task;  // per-subcommand defaults (grid, budget, out, ...)
};

/// Parses and validates a JSON config document:
///   {
///     "diagram": {"stationary": true, "incidence": [[[2,1],[3,1]]],
///                 "ordering": [...], "levels": 2, "minimal_tail_vertex": 1,
///                 "probe_depth": 16},
///     "schedule": {"kind": "constant", "p": "0.5"},
///     "mode": "float",
///     "task": {...}
///   }
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace bvm
