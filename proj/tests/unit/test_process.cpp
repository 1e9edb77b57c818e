#include "doctest.h"

#include <cmath>
#include <map>
#include <sstream>

#include "bvm/numeration.hpp"
#include "bvm/process.hpp"

using namespace bvm;

namespace {

std::shared_ptr<const BratteliDiagram> m2131() {
    return BratteliDiagram::stationary(IntMatrix::from_rows({{2, 1}, {3, 1}}));
}

std::shared_ptr<const BratteliDiagram> fib() {
    return BratteliDiagram::stationary(IntMatrix::from_rows({{1, 1}, {1, 0}}));
}

ProbSchedule p357() {
    return ProbSchedule::list({Rational(3, 10), Rational(1, 2), Rational(7, 10)},
                              ProbSchedule::Tail::Cycle);
}

Rational sum_of(const PathDistribution& d) {
    Rational s = 0;
    for (const Rational& p : d.probs) s += p;
    return s;
}

}  // namespace

TEST_CASE("transition law at the minimal path") {
    auto d = m2131();
    const ProbSchedule ps = ProbSchedule::constant(Rational(3, 10));
    const PathDistribution dist = transition_distribution(PathState::minimal(d), ps);
    REQUIRE(dist.targets.size() == 2);
    CHECK(dist.targets[0].is_minimal());
    CHECK(dist.targets[1] == successor(PathState::minimal(d)));
    CHECK(dist.probs[0] == Rational(7, 10));
    CHECK(dist.probs[1] == Rational(3, 10));
    CHECK(sum_of(dist) == 1);
}

TEST_CASE("transition law on the worked path") {
    auto d = m2131();
    const PathState x = PathState(
        d, {Edge{1, 2, 3, 2}, Edge{2, 2, 2, 1}, Edge{3, 1, 1, 2}, Edge{4, 2, 2, 1}});
    const ProbSchedule ps = p357();
    const PathDistribution dist = transition_distribution(x, ps);
    REQUIRE(dist.targets.size() == 4);  // stay, y1, y2, advance
    const Rational p1(3, 10), p2(1, 2), p3(7, 10);
    CHECK(dist.probs[0] == 1 - p1);
    CHECK(dist.probs[1] == p1 * (1 - p2));
    CHECK(dist.probs[2] == p1 * p2 * (1 - p3));
    CHECK(dist.probs[3] == p1 * p2 * p3);
    CHECK(dist.targets[1] == reset_target(x, 1));
    CHECK(dist.targets[3] == successor(x));
    CHECK(sum_of(dist) == 1);
}

TEST_CASE("transition law indexes probabilities by level, not carry count") {
    // Fibonacci worked path: carries at levels 1 and 3, depth 4
    auto d = fib();
    const PathState x = PathState(d, {Edge{1, 2, 1, 1}, Edge{2, 1, 0, 2}, Edge{3, 2, 1, 1}});
    const ProbSchedule ps = p357();
    const Rational p1(3, 10), p3(7, 10), p4(3, 10);  // the cycle restarts at 4
    const PathDistribution dist = transition_distribution(x, ps);
    REQUIRE(dist.targets.size() == 4);
    CHECK(dist.probs[0] == 1 - p1);
    CHECK(dist.probs[1] == p1 * (1 - p3));
    CHECK(dist.probs[2] == p1 * p3 * (1 - p4));
    CHECK(dist.probs[3] == p1 * p3 * p4);
    CHECK(sum_of(dist) == 1);
}

TEST_CASE("operator rows from digits") {
    auto d = m2131();
    const ProbSchedule ps = p357();

    const SparseRow<Rational> r0 = operator_row_exact(0, d, ps);
    REQUIRE(r0.entries.size() == 2);
    CHECK(r0.entries[0].first == 0);
    CHECK(r0.entries[0].second == Rational(7, 10));
    CHECK(r0.entries[1].first == 1);
    CHECK(r0.entries[1].second == Rational(3, 10));

    const SparseRow<Rational> r85 = operator_row_exact(85, d, ps);
    std::map<BigInt, Rational> entries(r85.entries.begin(), r85.entries.end());
    const Rational p1(3, 10), p2(1, 2), p3(7, 10);
    REQUIRE(entries.size() == 4);
    CHECK(entries[85] == 1 - p1);
    CHECK(entries[82] == p1 * (1 - p2));
    CHECK(entries[76] == p1 * p2 * (1 - p3));
    CHECK(entries[86] == p1 * p2 * p3);

    // N = F_n with a > 1 is a fresh column: two entries only
    const SparseRow<Rational> rf = operator_row_exact(33, d, ps);  // F_3 = 33
    REQUIRE(rf.entries.size() == 2);
    CHECK(rf.entries[0].first == 33);
    CHECK(rf.entries[1].first == 34);
}

TEST_CASE("operator rows match the path-level law exactly") {
    auto d = m2131();
    const ProbSchedule ps = p357();
    PathState x = PathState::minimal(d);
    for (int n = 0; n < 300; ++n) {
        const SparseRow<Rational> row = operator_row_exact(BigInt(n), d, ps);
        const PathDistribution dist = transition_distribution(x, ps);
        std::map<BigInt, Rational> expect;
        for (std::size_t i = 0; i < dist.targets.size(); ++i)
            expect[path_index(dist.targets[i])] += dist.probs[i];
        const std::map<BigInt, Rational> got(row.entries.begin(), row.entries.end());
        CHECK(got == expect);
        Rational sum = 0;
        for (const auto& [col, p] : row.entries) sum += p;
        CHECK(sum == 1);
        x = successor(x);
    }
}

TEST_CASE("operator rows fall back to paths without Hypothesis A") {
    auto d = fib();
    const ProbSchedule ps = ProbSchedule::constant(Rational(2, 5));
    // state 2 = ((1,0,2),(2,1,1)): the first edge is forced, so the stay
    // probability is 1 - p_2, not 1 - p_1
    const SparseRow<Rational> row = operator_row_exact(2, d, ps);
    std::map<BigInt, Rational> entries(row.entries.begin(), row.entries.end());
    const Rational p(2, 5);
    REQUIRE(entries.size() == 3);
    CHECK(entries[2] == 1 - p);
    CHECK(entries[0] == p * (1 - p));
    CHECK(entries[3] == p * p);
}

TEST_CASE("build_operator assembles row-stochastic triplets") {
    auto d = m2131();
    const OperatorTriplets op = build_operator(d, p357(), 16, ArithmeticMode::Rational);
    std::map<std::uint64_t, Rational> sums;
    for (const auto& [r, c, p] : op.exact) {
        CHECK(p > 0);
        CHECK(p <= 1);
        sums[r] += p;
    }
    REQUIRE(sums.size() == 16);
    for (const auto& [r, s] : sums) CHECK(s == 1);

    std::ostringstream csv;
    write_operator_csv(csv, op);
    CHECK(csv.str().substr(0, 13) == "row,col,prob\n");
    CHECK(csv.str().find("0,0,7/10") != std::string::npos);

    const OperatorTriplets fop = build_operator(d, p357(), 64, ArithmeticMode::Float);
    std::map<std::uint64_t, double> fsums;
    for (const auto& [r, c, p] : fop.values) fsums[r] += p;
    for (const auto& [r, s] : fsums) CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("simulation is seed-deterministic and respects p = 1") {
    auto d = m2131();
    const PathState x0 = PathState::minimal(d);

    const SimulationSummary zero = simulate(d, ProbSchedule::constant(1), x0, 0, 11);
    CHECK(zero.final_state == 0);
    CHECK(zero.visits.size() == 1);

    // p = 1: every carry succeeds, the chain is the deterministic successor
    const SimulationSummary det = simulate(d, ProbSchedule::constant(1), x0, 50, 3);
    CHECK(det.final_state == 50);
    CHECK(det.visits.size() == 51);
    for (const auto& [state, count] : det.visits) CHECK(count == 1);

    const ProbSchedule half = ProbSchedule::constant(Rational(1, 2));
    const SimulationSummary a = simulate(d, half, x0, 2000, 42);
    const SimulationSummary b = simulate(d, half, x0, 2000, 42);
    std::ostringstream ra, rb;
    write_simulation_report(ra, a);
    write_simulation_report(rb, b);
    CHECK(ra.str() == rb.str());
    const SimulationSummary c = simulate(d, half, x0, 2000, 43);
    CHECK(a.final_state != c.final_state);  // different seed, different run
}

TEST_CASE("one-step frequencies from the minimal path match the law") {
    auto d = m2131();
    const ProbSchedule half = ProbSchedule::constant(Rational(1, 2));
    const std::uint64_t draws = 20000;
    std::uint64_t stays = 0;
    for (std::uint64_t r = 0; r < draws; ++r) {
        Walker w(d, half, 99, r, /*track_label=*/false);
        stays += w.step() == Walker::Move::Stay ? 1 : 0;
    }
    const double freq = static_cast<double>(stays) / static_cast<double>(draws);
    const double sigma = std::sqrt(0.25 / static_cast<double>(draws));
    CHECK(std::abs(freq - 0.5) <= 3 * sigma);
}

TEST_CASE("walker label stays in sync with the path index") {
    auto d = m2131();
    Walker w(d, ProbSchedule::constant(Rational(1, 2)), 7);
    w.set_state(PathState::minimal(d));
    for (int t = 0; t < 3000; ++t) {
        w.step();
        CHECK(w.label() == path_index(w.state()));
    }
}

TEST_CASE("recurrence classification uses the right propositions") {
    auto d = m2131();
    auto f = fib();

    const RecurrenceVerdict t =
        classify_recurrence(*d, ProbSchedule::one_minus_geometric(Rational(1, 3)));
    CHECK(t.kind == Recurrence::Transient);

    const RecurrenceVerdict n = classify_recurrence(*d, ProbSchedule::constant(Rational(1, 2)));
    CHECK(n.kind == Recurrence::NullRecurrent);
    CHECK(n.justification.find("constant") != std::string::npos);

    const RecurrenceVerdict n2 =
        classify_recurrence(*d, ProbSchedule::geometric(Rational(99, 100)));
    CHECK(n2.kind == Recurrence::NullRecurrent);
    CHECK(n2.justification.find("Hypothesis A") != std::string::npos);

    const RecurrenceVerdict pr = classify_recurrence(*f, ProbSchedule::geometric(Rational(1, 4)));
    CHECK(pr.kind == Recurrence::PositiveRecurrent);

    // p = 1 everywhere: irreducibility unproven
    const RecurrenceVerdict u = classify_recurrence(*d, ProbSchedule::constant(1));
    CHECK(u.kind == Recurrence::Unknown);

    // Fibonacci with a slowly decaying schedule: none of the propositions bite
    const RecurrenceVerdict u2 =
        classify_recurrence(*f, ProbSchedule::geometric(Rational(9, 10)));
    CHECK(u2.kind == Recurrence::Unknown);
}

TEST_CASE("return time bound series") {
    // C = 2,3,4,6,8,12,... for b = 1
    const ProbSchedule ps = ProbSchedule::geometric(Rational(1, 4));
    const ReturnTimeBound bound = return_time_bound(1, ps, 20);
    CHECK_FALSE(bound.divergent);

    // oracle: the truncated series computed independently
    std::vector<double> c{0, 2, 3, 4};
    for (int j = 4; j <= 20; ++j) c.push_back(2 * c[static_cast<std::size_t>(j) - 2]);
    double expect = c[1];
    double prev = 1.0;
    for (int j = 1; j <= 20; ++j) {
        const double pj = std::pow(0.25, j);
        expect += c[static_cast<std::size_t>(j)] * std::max(prev, pj);
        prev = pj;
    }
    CHECK(bound.partial == doctest::Approx(expect).epsilon(1e-12));
    CHECK(bound.tail < 1e-3);
    CHECK(bound.value == doctest::Approx(5.14).epsilon(0.01));

    // C = 3,5,9,10,18,20 for b = 2
    const ReturnTimeBound b2 = return_time_bound(2, ProbSchedule::geometric(Rational(1, 8)), 20);
    CHECK_FALSE(b2.divergent);
    std::vector<double> c2{0, 3, 5, 9};
    for (int j = 4; j <= 6; ++j) c2.push_back(2 * c2[static_cast<std::size_t>(j) - 2]);
    CHECK(c2[4] == 10);
    CHECK(c2[5] == 18);
    CHECK(c2[6] == 20);

    // constant p: the doubling C_j wins, the series diverges
    const ReturnTimeBound div = return_time_bound(1, ProbSchedule::constant(Rational(1, 2)), 20);
    CHECK(div.divergent);
    CHECK(std::isinf(div.value));
}

TEST_CASE("first return times complete for the positive recurrent machine") {
    auto f = fib();
    const ProbSchedule ps = ProbSchedule::geometric(Rational(1, 4));
    const auto times = completed_return_times(f, ps, 1 << 20, 200, 5);
    REQUIRE(times.size() == 200);
    double mean = 0;
    for (std::uint64_t t : times) mean += static_cast<double>(t);
    mean /= 200.0;
    CHECK(mean < return_time_bound(1, ps, 20).value);
}
