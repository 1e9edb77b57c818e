// Command-line front end: one config file + one subcommand per invocation.

#include <complex>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "bvm/config.hpp"
#include "bvm/numeration.hpp"
#include "bvm/process.hpp"
#include "bvm/spectrum.hpp"
#include "bvm/vershik.hpp"

namespace {

using namespace bvm;

std::string path_to_string(const PathState& x) {
    std::ostringstream os;
    os << '(';
    for (int k = 1; k <= x.prefix_length(); ++k) {
        const Edge e = x.edge(k);
        if (k > 1) os << ',';
        os << '(' << e.source << ',' << e.order_index << ',' << e.range << ')';
    }
    os << ')';
    return os.str();
}

// serialized form: (level, source, orderIndex, range) quadruples
std::string path_to_quadruples(const PathState& x) {
    std::ostringstream os;
    os << '[';
    for (int k = 1; k <= x.prefix_length(); ++k) {
        const Edge e = x.edge(k);
        if (k > 1) os << ',';
        os << '[' << e.level << ',' << e.source << ',' << e.order_index << ',' << e.range << ']';
    }
    os << ']';
    return os.str();
}

struct Options {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    std::uint64_t steps = 1000;
    std::uint64_t size = 16;
    std::uint64_t rows = 64;
    int budget = 0;
    double radius = 0.0;
    std::string grid;
    std::string set = "";
    std::string start = "0";
    bool seed_set = false, steps_set = false, size_set = false, rows_set = false;
    bool budget_set = false, radius_set = false, grid_set = false, set_set = false;
    bool out_set = false;
};

template <class T>
T task_or(const RunConfig& cfg, const std::string& key, T fallback) {
    if (cfg.task.contains(key)) return cfg.task.at(key).get<T>();
    return fallback;
}

SpectralParams spectral_params(const RunConfig& cfg, const Options& opt) {
    SpectralParams params = SpectralParams::from_diagram(*cfg.diagram, cfg.schedule);
    params.budget = opt.budget_set ? opt.budget : task_or<int>(cfg, "budget", 64);
    params.radius = opt.radius_set ? opt.radius : task_or<double>(cfg, "radius", 0.0);
    if (params.radius == 0.0) {
        const EscapeRadius r = escape_radius(params);
        params.radius = r.value;
        params.radius_is_analytic = r.analytic;
    }
    params.validate();
    return params;
}

GridSpec grid_spec(const RunConfig& cfg, const Options& opt) {
    const std::string text = opt.grid_set
                                 ? opt.grid
                                 : task_or<std::string>(cfg, "grid", "-2,2x-2,2:512x512");
    GridSpec g = parse_grid(text);
    const std::string set = opt.set_set ? opt.set : task_or<std::string>(cfg, "set", "F");
    g.kind = parse_set_kind(set);
    return g;
}

std::ostream& open_out(const RunConfig& cfg, const Options& opt, std::ofstream& file,
                       bool binary = false) {
    std::string path = opt.out_set ? opt.out : task_or<std::string>(cfg, "out", "");
    if (path.empty()) return std::cout;
    file.open(path, binary ? std::ios::binary : std::ios::out);
    if (!file) throw std::runtime_error("cannot open output file " + path);
    return file;
}

int run(int argc, char** argv) {
    CLI::App app{"Bratteli-Vershik stochastic adding machines: numeration, transition "
                 "operators, recurrence and spectral escape-time sets"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--config", opt.config_path, "JSON config file")->required();

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", opt.out)->each([&](const std::string&) { opt.out_set = true; });
        cmd->add_option("--seed", opt.seed)->each([&](const std::string&) { opt.seed_set = true; });
        cmd->add_option("--steps", opt.steps)->each([&](const std::string&) { opt.steps_set = true; });
        cmd->add_option("--size", opt.size)->each([&](const std::string&) { opt.size_set = true; });
        cmd->add_option("--rows", opt.rows)->each([&](const std::string&) { opt.rows_set = true; });
        cmd->add_option("--budget", opt.budget)->each([&](const std::string&) { opt.budget_set = true; });
        cmd->add_option("--radius", opt.radius)->each([&](const std::string&) { opt.radius_set = true; });
        cmd->add_option("--grid", opt.grid)->each([&](const std::string&) { opt.grid_set = true; });
        cmd->add_option("--set", opt.set)->each([&](const std::string&) { opt.set_set = true; });
    };

    CLI::App* validate = app.add_subcommand("validate", "check the diagram configuration");
    add_common(validate);

    std::string number_arg;
    CLI::App* encode_cmd = app.add_subcommand("encode", "integer -> digit string");
    encode_cmd->add_option("N", number_arg)->required();
    add_common(encode_cmd);

    std::string digits_arg;
    CLI::App* decode_cmd = app.add_subcommand("decode", "digit string -> integer");
    decode_cmd->add_option("digits", digits_arg)->required();
    add_common(decode_cmd);

    CLI::App* succ_cmd = app.add_subcommand("successor", "print the successor path and digits");
    succ_cmd->add_option("N", number_arg)->required();
    add_common(succ_cmd);

    CLI::App* row_cmd = app.add_subcommand("row", "one transition-operator row");
    row_cmd->add_option("N", number_arg)->required();
    add_common(row_cmd);

    CLI::App* operator_cmd = app.add_subcommand("operator", "export operator triplets as CSV");
    add_common(operator_cmd);

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "run the chain and report");
    simulate_cmd->add_option("--start", opt.start);
    add_common(simulate_cmd);

    CLI::App* classify_cmd = app.add_subcommand("classify", "recurrence classification");
    add_common(classify_cmd);

    CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "spectral set computations");
    spectrum_cmd->require_subcommand(1);
    std::string lambda_arg;
    CLI::App* probe_cmd = spectrum_cmd->add_subcommand("probe", "membership of one lambda");
    probe_cmd->add_option("lambda", lambda_arg)->required();
    add_common(probe_cmd);
    CLI::App* render_cmd = spectrum_cmd->add_subcommand("render", "escape-time raster");
    add_common(render_cmd);

    CLI::App* residual_cmd = app.add_subcommand("residual", "eigen identity residual");
    residual_cmd->add_option("lambda", lambda_arg)->required();
    add_common(residual_cmd);

    CLI11_PARSE(app, argc, argv);

    const RunConfig cfg = parse_config_file(opt.config_path);
    const auto& d = cfg.diagram;

    if (validate->parsed()) {
        const SimplicityReport rep = d->check_simplicity();
        std::cout << "levels: " << d->level_size(0) << '\n';
        std::cout << "stationary: " << (d->stationary() ? "true" : "false") << '\n';
        std::cout << "canonical_ordering: " << (d->canonical() ? "true" : "false") << '\n';
        std::cout << "hypothesis_a: " << (d->hypothesis_a() ? "true" : "false") << '\n';
        std::cout << "simple_within_horizon: " << (rep.simple ? "true" : "false");
        if (rep.simple)
            std::cout << " (witness " << rep.from_level << " -> " << rep.to_level << ")";
        else
            std::cout << " (fails at level " << rep.failing_level << ")";
        std::cout << '\n';
        std::cout << "minimal_tail_vertex: " << d->minimal_path_vertex(1000) << '\n';
        std::cout << "schedule: " << cfg.schedule.describe() << '\n';
        return 0;
    }

    if (encode_cmd->parsed()) {
        const DigitString ds = encode(parse_bigint(number_arg), d);
        std::cout << ds.to_string() << '\n';
        return 0;
    }

    if (decode_cmd->parsed()) {
        const auto bare = parse_digit_pairs(digits_arg);
        const auto annotated = annotate_digits(*d, bare);
        if (!annotated) {
            std::cerr << "invalid digit string for this diagram\n";
            return 1;
        }
        std::cout << decode(*annotated, *d) << '\n';
        return 0;
    }

    if (succ_cmd->parsed()) {
        const BigInt n = parse_bigint(number_arg);
        const PathState x = path_at_index(d, n);
        const PathState y = successor(x);
        std::cout << "state: " << n << " path " << path_to_string(x) << " digits "
                  << path_digits(x).to_string() << '\n';
        std::cout << "successor: " << path_index(y) << " path " << path_to_string(y) << " digits "
                  << path_digits(y).to_string() << '\n';
        std::cout << "edges: " << path_to_quadruples(y) << '\n';
        return 0;
    }

    if (row_cmd->parsed()) {
        const BigInt n = parse_bigint(number_arg);
        std::cout << '{';
        if (cfg.mode == ArithmeticMode::Rational) {
            const SparseRow<Rational> row = operator_row_exact(n, d, cfg.schedule);
            for (std::size_t i = 0; i < row.entries.size(); ++i)
                std::cout << (i ? ", " : "") << row.entries[i].first << ": "
                          << rational_to_string(row.entries[i].second);
        } else {
            const SparseRow<double> row = operator_row(n, d, cfg.schedule);
            char buf[64];
            for (std::size_t i = 0; i < row.entries.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", row.entries[i].second);
                std::cout << (i ? ", " : "") << row.entries[i].first << ": " << buf;
            }
        }
        std::cout << "}\n";
        return 0;
    }

    if (operator_cmd->parsed()) {
        const std::size_t size = opt.size_set ? opt.size : task_or<std::uint64_t>(cfg, "size", 16);
        const OperatorTriplets op = build_operator(d, cfg.schedule, size, cfg.mode);
        std::ofstream file;
        write_operator_csv(open_out(cfg, opt, file), op);
        return 0;
    }

    if (simulate_cmd->parsed()) {
        const std::uint64_t steps =
            opt.steps_set ? opt.steps : task_or<std::uint64_t>(cfg, "steps", 1000);
        const std::uint64_t seed = opt.seed_set ? opt.seed : task_or<std::uint64_t>(cfg, "seed", 0);
        const PathState start = path_at_index(d, parse_bigint(opt.start));
        const SimulationSummary summary = simulate(d, cfg.schedule, start, steps, seed);
        std::ofstream file;
        write_simulation_report(open_out(cfg, opt, file), summary);
        return 0;
    }

    if (classify_cmd->parsed()) {
        const RecurrenceVerdict v = classify_recurrence(*d, cfg.schedule);
        std::cout << "verdict: " << to_string(v.kind) << '\n';
        std::cout << "justification: " << v.justification << '\n';
        return 0;
    }

    if (probe_cmd->parsed()) {
        const SpectralParams params = spectral_params(cfg, opt);
        const Complex lambda = parse_complex(lambda_arg);
        const std::string set = opt.set_set ? opt.set : task_or<std::string>(cfg, "set", "F");
        const SetKind kind = parse_set_kind(set);
        MembershipResult res;
        switch (kind) {
            case SetKind::F: res = f_membership(lambda, params); break;
            case SetKind::E: res = e_membership(lambda, params); break;
            case SetKind::PT: res = pt_membership(lambda, params); break;
        }
        std::cout << "lambda: " << lambda.real() << (lambda.imag() < 0 ? "" : "+")
                  << lambda.imag() << "i\n";
        std::cout << "set: " << to_string(kind) << '\n';
        std::cout << "verdict: " << (res.escaped ? "escaped" : "bounded_within_budget") << '\n';
        std::cout << "escape_index: " << res.escape_index << '\n';
        std::cout << "u_escape_index: " << res.u_escape_index << '\n';
        std::cout << "w_escape_index: " << res.w_escape_index << '\n';
        std::cout << "log_growth: " << res.log_growth << '\n';
        if (kind == SetKind::PT)
            std::cout << "stabilized: " << (res.stabilized ? "true" : "false") << '\n';
        std::cout << "radius: " << res.radius
                  << (params.radius_is_analytic ? " (analytic)" : " (heuristic)") << '\n';
        std::cout << "budget: " << res.budget << '\n';
        if (params.det() > 0)
            std::cout << "note: det M > 0; joint (u,w) tracking reported, equivalence of the "
                         "two escape tests is an open question\n";
        return 0;
    }

    if (render_cmd->parsed()) {
        const SpectralParams params = spectral_params(cfg, opt);
        const GridSpec grid = grid_spec(cfg, opt);
        const Raster raster = render_set(grid, params);
        std::ofstream file;
        std::string path = opt.out_set ? opt.out : task_or<std::string>(cfg, "out", "");
        std::ostream& os = open_out(cfg, opt, file, /*binary=*/true);
        if (path.size() >= 4 && path.substr(path.size() - 4) == ".ppm")
            write_ppm(os, raster);
        else
            write_pgm(os, raster);
        std::uint64_t bounded = 0;
        for (std::uint32_t c : raster.cells) bounded += c == 0 ? 1 : 0;
        std::cerr << "set " << to_string(grid.kind) << ": " << bounded << "/"
                  << raster.cells.size() << " pixels bounded, radius " << params.radius
                  << (params.radius_is_analytic ? " (analytic)" : " (heuristic)") << ", budget "
                  << params.budget << '\n';
        return 0;
    }

    if (residual_cmd->parsed()) {
        const std::size_t rows = opt.rows_set ? opt.rows : task_or<std::uint64_t>(cfg, "rows", 64);
        const double r = eigen_residual(parse_complex(lambda_arg), d, cfg.schedule, rows);
        std::cout << r << '\n';
        return 0;
    }

    std::cerr << "no subcommand\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
