// Acceptance suite: one pass/fail line per criterion, exit code = failures.
// Usage: bvm_acceptance [path-to-bvm-cli] [scratch-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bvm/config.hpp"
#include "bvm/numeration.hpp"
#include "bvm/process.hpp"
#include "bvm/rng.hpp"
#include "bvm/spectrum.hpp"
#include "bvm/vershik.hpp"

using namespace bvm;
using Clock = std::chrono::steady_clock;

namespace {

struct Gate {
    int failures = 0;

    void report(int idx, const std::string& name, bool ok, const std::string& detail) {
        std::printf("[%s] %2d. %-38s %s\n", ok ? "PASS" : "FAIL", idx, name.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::shared_ptr<const BratteliDiagram> diagram(std::int64_t a, std::int64_t b, std::int64_t c,
                                               std::int64_t d) {
    return BratteliDiagram::stationary(IntMatrix::from_rows({{a, b}, {c, d}}));
}

// 1. decode(encode(N)) == N for N < 1e5 on both worked matrices, < 10 s.
void criterion_roundtrip(Gate& gate) {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (auto d : {diagram(1, 3, 1, 4), diagram(2, 1, 3, 1)}) {
        const FgSequences fg = fg_sequences(*d, 40);
        for (std::uint64_t n = 0; n < 100000 && ok; ++n) {
            const BigInt big(n);
            if (decode(encode(big, d), fg) != big) {
                ok = false;
                detail = "mismatch at N=" + std::to_string(n);
            }
        }
    }
    const double secs = seconds_since(t0);
    if (ok && secs >= 10.0) {
        ok = false;
        detail = "too slow";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "2x100000 values, %.2fs", secs);
    gate.report(1, "numeration round trip", ok, ok ? buf : detail);
}

// 2. encode(N) == path_digits(iterate(x0, N)) for N < 1e4 on both matrices.
void criterion_representation_oracle(Gate& gate) {
    bool ok = true;
    std::string detail;
    for (auto d : {diagram(1, 3, 1, 4), diagram(2, 1, 3, 1)}) {
        PathState x = PathState::minimal(d);
        for (std::uint64_t n = 0; n < 10000 && ok; ++n) {
            if (encode(BigInt(n), d) != path_digits(x)) {
                ok = false;
                detail = "mismatch at N=" + std::to_string(n);
            }
            x = successor(x);
        }
    }
    gate.report(2, "representation oracle", ok, ok ? "2x10000 states" : detail);
}

// 3. The worked numeration values.
void criterion_paper_values(Gate& gate) {
    auto d = diagram(1, 3, 1, 4);
    const FgSequences fg = fg_sequences(*d, 3);
    bool ok = fg.f(0) == 1 && fg.f(1) == 4 && fg.f(2) == 19 && fg.f(3) == 91 && fg.g(0) == 1 &&
              fg.g(1) == 5 && fg.g(2) == 24 && fg.g(3) == 115;
    const auto x = annotate_digits(*d, {{1, 2}, {1, 3}, {1, 1}});
    const auto y = annotate_digits(*d, {{1, 1}, {0, 0}, {1, 2}});
    ok = ok && x && decode(*x, fg) == 65;
    ok = ok && y && decode(*y, fg) == 69;
    gate.report(3, "worked digit values", ok, "65 / 69 / F,G rows");
}

// 4. Exact operator rows match the path-level law for N < 2000.
void criterion_operator_oracle(Gate& gate) {
    auto d = diagram(2, 1, 3, 1);
    const ProbSchedule ps = ProbSchedule::list(
        {Rational(3, 10), Rational(1, 2), Rational(7, 10)}, ProbSchedule::Tail::Cycle);
    bool ok = true;
    std::string detail;
    PathState x = PathState::minimal(d);
    for (std::uint64_t n = 0; n < 2000 && ok; ++n) {
        const SparseRow<Rational> row = operator_row_exact(BigInt(n), d, ps);
        std::map<BigInt, Rational> expect;
        const PathDistribution dist = transition_distribution(x, ps);
        for (std::size_t i = 0; i < dist.targets.size(); ++i)
            expect[path_index(dist.targets[i])] += dist.probs[i];
        const std::map<BigInt, Rational> got(row.entries.begin(), row.entries.end());
        Rational sum = 0;
        for (const auto& [col, p] : row.entries) sum += p;
        if (got != expect || sum != 1) {
            ok = false;
            detail = "row " + std::to_string(n);
        }
        x = successor(x);
    }
    gate.report(4, "operator row oracle (exact)", ok, ok ? "2000 rows, sums exactly 1" : detail);
}

// 5. Eigen identity at sampled bounded lambdas, K = F_5 rows, <= 1e-9, < 30 s.
void criterion_eigen_identity(Gate& gate) {
    const auto t0 = Clock::now();
    auto d = diagram(1, 3, 1, 4);
    const ProbSchedule half = ProbSchedule::constant(Rational(1, 2));
    SpectralParams params = SpectralParams::from_diagram(*d, half);
    params.budget = 64;
    params.radius = escape_radius(params).value;

    // The bounded region at this (M, p) is a repelling-fixed-point speck:
    // center the grid so the trivial eigenvalue is an exact pixel, then
    // sample the bounded pixels that show up (cycling if fewer than 20),
    // preferring certified small digit growth.
    const GridSpec grid{0.5, 1.5, -0.5, 0.5, 101, 101, SetKind::PT};
    const Raster raster = render_set(grid, params);
    std::vector<std::pair<double, Complex>> bounded;
    for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x) {
            if (raster.at(x, y) != 0) continue;
            const MembershipResult pt = pt_membership(grid.pixel(x, y), params);
            if (!pt.escaped) bounded.emplace_back(pt.log_growth, grid.pixel(x, y));
        }
    std::sort(bounded.begin(), bounded.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        if (a.second.real() != b.second.real()) return a.second.real() < b.second.real();
        return a.second.imag() < b.second.imag();
    });

    bool ok = !bounded.empty();
    std::string detail = ok ? "" : "no bounded pixels found";
    const std::size_t rows = 2089;  // F_5
    double worst = 0.0;
    const std::size_t want = 20;
    for (std::size_t i = 0; i < want && ok; ++i) {
        const Complex lambda = bounded[i % bounded.size()].second;
        const double r = eigen_residual(lambda, d, half, rows);
        worst = std::max(worst, r);
        if (r > 1e-9) {
            ok = false;
            std::ostringstream os;
            os << "residual " << r << " at " << lambda;
            detail = os.str();
        }
    }
    const double secs = seconds_since(t0);
    if (ok && secs >= 30.0) {
        ok = false;
        detail = "too slow";
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu distinct pixels, 20 samples, worst %.2e, %.1fs",
                  bounded.size(), worst, secs);
    gate.report(5, "eigen identity over F_5 rows", ok, ok ? buf : detail);
}

// 6. The 2x2 all-ones render is pixel-identical to the direct quadratic route.
void criterion_kt_equivalence(Gate& gate) {
    bool ok = true;
    std::string detail;
    for (Rational p : {Rational(1, 2), Rational(4, 5)}) {
        SpectralParams params =
            SpectralParams::from_diagram(*diagram(1, 1, 1, 1), ProbSchedule::constant(p));
        params.budget = 64;
        params.radius = escape_radius(params).value;
        const GridSpec grid{-2, 2, -2, 2, 256, 256, SetKind::F};
        const Raster fibered = render_set(grid, params);
        const Raster direct = render_kt(grid, 2, params);
        if (fibered.cells != direct.cells) {
            ok = false;
            detail = "pixel mismatch at p=" + rational_to_string(p);
        }
    }
    gate.report(6, "quadratic-map equivalence", ok, ok ? "256x256, p=1/2 and 4/5" : detail);
}

// 7. a+b == c+d: exact component equality; bounded verdicts stay inside the
// closed unit disk of |u|.
void criterion_equal_row_sums(Gate& gate) {
    bool ok = true;
    std::string detail;
    std::size_t bounded_checked = 0;
    for (const auto& shape : {std::array<std::int64_t, 4>{1, 1, 1, 1},
                              std::array<std::int64_t, 4>{2, 1, 3, 0}}) {
        SpectralParams params = SpectralParams::from_diagram(
            *BratteliDiagram::stationary(
                IntMatrix::from_rows({{shape[0], shape[1]}, {shape[2], shape[3]}})),
            ProbSchedule::constant(Rational(1, 2)));
        params.budget = 64;
        params.radius = 4.0;

        SplitMix64 rng(20250809);
        for (int i = 0; i < 10000 && ok; ++i) {
            const Complex lambda(4 * rng.uniform() - 2, 4 * rng.uniform() - 2);
            Complex u = seed_value(lambda, 0.5), w = u;
            for (int n = 1; n <= params.budget; ++n) {
                auto [nu, nw] = uw_step(u, w, n, params);
                u = nu;
                w = nw;
                if (u != w && (std::isfinite(std::abs(u)) || std::isfinite(std::abs(w)))) {
                    ok = false;
                    detail = "u != w";
                    break;
                }
                if (!std::isfinite(std::abs(u))) break;
            }
            const MembershipResult f = f_membership(lambda, params);
            if (!f.escaped) {
                ++bounded_checked;
                if (!(f.max_abs_u <= 1.0)) {
                    ok = false;
                    detail = "bounded verdict with |u| > 1";
                }
            }
        }

        // deterministic on-segment samples exercise the bounded certificate
        for (int k = 0; k <= 100 && ok; ++k) {
            const Complex lambda(k / 100.0, 0.0);
            const MembershipResult f = f_membership(lambda, params);
            if (shape[0] == 1 && !f.escaped) {
                ++bounded_checked;
                if (!(f.max_abs_u <= 1.0)) {
                    ok = false;
                    detail = "segment sample with |u| > 1";
                }
            }
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "2x10000 random + segment, %zu bounded certified",
                  bounded_checked);
    gate.report(7, "equal row sums certificate", ok && bounded_checked > 0,
                ok ? buf : detail);
}

// 8. Monte Carlo transience: never-return frequency vs prod p_j.
void criterion_transience(Gate& gate) {
    auto d = diagram(2, 1, 3, 1);
    const ProbSchedule ps = ProbSchedule::one_minus_geometric(Rational(1, 3));
    const std::uint64_t replicas = 10000, steps = 1000;
    const std::uint64_t never = count_never_returned(d, ps, steps, replicas, 20250809);

    double product = 1.0;
    for (int j = 1; j <= 30; ++j) product *= 1.0 - std::pow(1.0 / 3.0, j);
    const double freq = static_cast<double>(never) / static_cast<double>(replicas);
    const double sigma = std::sqrt(product * (1.0 - product) / static_cast<double>(replicas));
    const bool ok = std::abs(freq - product) <= 3.0 * sigma;
    char buf[96];
    std::snprintf(buf, sizeof buf, "freq %.4f vs prod %.4f (3 sigma %.4f)", freq, product,
                  3.0 * sigma);
    gate.report(8, "transience Monte Carlo", ok, buf);
}

// 9. Positive recurrence: empirical mean return time under the series bound.
void criterion_return_bound(Gate& gate) {
    auto d = diagram(1, 1, 1, 0);
    const ProbSchedule ps = ProbSchedule::geometric(Rational(1, 4));
    const ReturnTimeBound bound = return_time_bound(1, ps, 20);
    const auto times = completed_return_times(d, ps, 1 << 20, 1000, 20250809);

    double mean = 0;
    for (std::uint64_t t : times) mean += static_cast<double>(t);
    mean /= static_cast<double>(times.size());
    double var = 0;
    for (std::uint64_t t : times) var += (t - mean) * (t - mean);
    var /= static_cast<double>(times.size() - 1);
    const double stderr3 = 3.0 * std::sqrt(var / static_cast<double>(times.size()));

    const bool ok = !bound.divergent && mean <= bound.value + stderr3;
    char buf[96];
    std::snprintf(buf, sizeof buf, "mean %.3f <= bound %.3f + %.3f", mean, bound.value, stderr3);
    gate.report(9, "positive recurrence bound", ok, buf);
}

// 10. Raising the budget never flips escaped pixels back to bounded.
void criterion_nesting(Gate& gate) {
    SpectralParams params =
        SpectralParams::from_diagram(*diagram(2, 1, 3, 1), ProbSchedule::constant(Rational(3, 5)));
    const EscapeRadius radius = escape_radius(params);
    params.radius = radius.value;
    const GridSpec grid{-2, 2, -2, 2, 128, 128, SetKind::F};

    bool ok = radius.analytic;
    std::string detail = ok ? "" : "expected the analytic radius branch";
    Raster prev;
    for (int budget : {16, 32, 64}) {
        params.budget = budget;
        Raster cur = render_set(grid, params);
        if (ok && !prev.cells.empty()) {
            for (std::size_t i = 0; i < cur.cells.size(); ++i)
                if (prev.cells[i] != 0 && cur.cells[i] == 0) {
                    ok = false;
                    detail = "escaped pixel flipped to bounded";
                    break;
                }
        }
        prev = std::move(cur);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "128x128, budgets 16/32/64, R=%.3f (analytic)", radius.value);
    gate.report(10, "nesting monotonicity", ok, ok ? buf : detail);
}

// 11. Critical-value escape for p = 0.4 and 0.45, under a second.
void criterion_critical(Gate& gate) {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (Rational p : {Rational(2, 5), Rational(9, 20)}) {
        SpectralParams params =
            SpectralParams::from_diagram(*diagram(2, 1, 3, 1), ProbSchedule::constant(p));
        const CriticalEscape c = critical_escape_test(params);
        if (!c.applicable || !c.escaped) {
            ok = false;
            detail = "no escape at p=" + rational_to_string(p);
        }
    }
    const double secs = seconds_since(t0);
    if (ok && secs >= 1.0) {
        ok = false;
        detail = "too slow";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "p=0.4 and 0.45, %.3fs", secs);
    gate.report(11, "critical-value disconnection", ok, ok ? buf : detail);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// 12. CLI determinism: identical bytes for repeated simulate and render runs.
void criterion_determinism(Gate& gate, const std::string& cli, const std::string& scratch) {
    if (cli.empty()) {
        gate.report(12, "CLI byte determinism", false, "CLI path not provided");
        return;
    }
    const std::string cfg = scratch + "/accept.json";
    {
        std::ofstream out(cfg);
        out << R"({
            "diagram": {"stationary": true, "incidence": [[[2,1],[3,1]]]},
            "schedule": {"kind": "constant", "p": "0.5"},
            "mode": "float",
            "task": {}
        })";
    }
    auto run = [&](const std::string& args) {
        const std::string cmd = cli + " --config " + cfg + " " + args + " 2>/dev/null";
        return std::system(cmd.c_str());
    };

    bool ok = true;
    std::string detail;
    if (run("simulate --steps 500 --seed 42 --out " + scratch + "/sim1.txt") != 0 ||
        run("simulate --steps 500 --seed 42 --out " + scratch + "/sim2.txt") != 0) {
        ok = false;
        detail = "simulate invocation failed";
    } else if (slurp(scratch + "/sim1.txt") != slurp(scratch + "/sim2.txt") ||
               slurp(scratch + "/sim1.txt").empty()) {
        ok = false;
        detail = "simulate reports differ";
    }

    if (ok) {
        if (run("spectrum render --grid -2,2x-2,2:64x64 --budget 32 --out " + scratch +
                "/r1.pgm") != 0 ||
            run("spectrum render --grid -2,2x-2,2:64x64 --budget 32 --out " + scratch +
                "/r2.pgm") != 0) {
            ok = false;
            detail = "render invocation failed";
        } else if (slurp(scratch + "/r1.pgm") != slurp(scratch + "/r2.pgm") ||
                   slurp(scratch + "/r1.pgm").substr(0, 3) != "P5\n") {
            ok = false;
            detail = "rasters differ or are not PGM";
        }
    }
    gate.report(12, "CLI byte determinism", ok, ok ? "simulate + render twice" : detail);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const std::string scratch = argc > 2 ? argv[2] : ".";

    Gate gate;
    criterion_roundtrip(gate);
    criterion_representation_oracle(gate);
    criterion_paper_values(gate);
    criterion_operator_oracle(gate);
    criterion_eigen_identity(gate);
    criterion_kt_equivalence(gate);
    criterion_equal_row_sums(gate);
    criterion_transience(gate);
    criterion_return_bound(gate);
    criterion_nesting(gate);
    criterion_critical(gate);
    criterion_determinism(gate, cli, scratch);

    if (gate.failures) std::printf("%d criterion(s) failed\n", gate.failures);
    return gate.failures;
}
